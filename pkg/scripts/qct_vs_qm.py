#!/usr/bin/env python3
"""Side-by-side trajectory-ensemble and partial-wave deflection maps.

Synthesizes a direct-mechanism classical ensemble (diagonal theta-J band)
and a linear-phase partial-wave block deflecting into the same angles, then
writes both joint maps in long CSV format for plotting.
"""

import argparse
from pathlib import Path

import numpy as np

from qdeflect import (
    ClassicalBranch,
    ClassicalModel,
    KernelConfig,
    default_grid,
    qct_df_gaussian,
    qmdf_map,
    smooth_map,
    synth_smatrix,
    synth_trajectories,
)
from qdeflect.synth import linear_phase_model


def write_map(path: Path, dmap) -> None:
    with path.open("w") as fh:
        fh.write("theta_deg,J,value\n")
        for i, t in enumerate(dmap.grid.degrees):
            for jdx, J in enumerate(dmap.j_values):
                fh.write(f"{t:.6f},{J},{dmap.values[i, jdx]:.8e}\n")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=50000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--outdir", type=Path, default=Path("."))
    args = ap.parse_args()

    j_max = 60
    grid = default_grid()

    model = ClassicalModel(
        j_max=float(j_max),
        branches=(ClassicalBranch(1.0, (np.pi, -np.pi)),),  # theta = pi (1 - J/J_max)
        noise_width=0.08,
        sigma_r=1.0,
    )
    ensemble = synth_trajectories(model, args.count, args.seed)
    classical = qct_df_gaussian(ensemble, KernelConfig(1.5, 0.05), grid)

    # matching quantum block: arg S slope -pi(1 - ...) is J-dependent; a
    # mid-band linear stand-in keeps the comparison readable
    block = synth_smatrix(linear_phase_model(-np.pi / 2, j_max / 2, j_max / 4), 1.0, j_max)
    quantum = smooth_map(qmdf_map(block, grid), 1.5, np.radians(1.0))

    args.outdir.mkdir(parents=True, exist_ok=True)
    write_map(args.outdir / "classical_map.csv", classical)
    write_map(args.outdir / "quantum_map.csv", quantum)
    print(f"wrote {args.outdir / 'classical_map.csv'} and {args.outdir / 'quantum_map.csv'}")


if __name__ == "__main__":
    main()
