"""Single-valued deflection curve from the phase of the modified S-matrix.

Pipeline: multiply S^J by exp(i pi J) (= (-1)^J for integer J), unwrap the
argument into a continuous branch, differentiate in J by finite
differences.  The unwrap picks, at each step, the branch candidate with
the smallest jump; an exact half-turn jump is ambiguous and raised as an
error rather than silently resolved.  A one-sided mode is also available
that reads the continuity condition as Delta < pi strictly, selecting the
largest admissible jump (so half-turn steps resolve to -pi).

Pure functions; safe to call concurrently per helicity pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .smatrix import SMatrixBlock, SMatrixValidationError

MAGNITUDE_FLOOR = 1e-300
TIE_TOL = 1e-12

UNWRAP_MODES = ("two-sided", "one-sided")


class PhaseUnwrapError(RuntimeError):
    """Continuous phase branch cannot be determined (tie or vanishing amplitude)."""


@dataclass(frozen=True, eq=False)
class PhaseSequence:
    """Continuous arg of a modified S-matrix element along J, plus magnitudes."""

    omega_p: int
    omega: int
    j_values: np.ndarray
    args: np.ndarray
    magnitudes: np.ndarray


@dataclass(frozen=True, eq=False)
class CqdfCurve:
    """Deflection values d[arg S~]/dJ per J; may lie outside [0, pi]."""

    omega_p: int
    omega: int
    j_values: np.ndarray
    theta_tilde: np.ndarray
    magnitudes: np.ndarray


def modified_smatrix(
    block: SMatrixBlock, omega_p: int, omega: int
) -> tuple[np.ndarray, np.ndarray]:
    """S~(J) = exp(i pi J) S^J at one helicity pair, over contiguous J.

    Returns (J values, modified amplitudes).  Raises if the pair has no
    entries or the J coverage has gaps (unwrapping needs contiguity).
    """
    js, amps = block.j_column(omega, omega_p)
    if js.size == 0:
        raise SMatrixValidationError(
            f"no entries at (Omega'={omega_p}, Omega={omega})"
        )
    missing = sorted(set(range(int(js[0]), int(js[-1]) + 1)) - set(js.tolist()))
    if missing:
        raise SMatrixValidationError(
            f"J coverage at (Omega'={omega_p}, Omega={omega}) has gaps; "
            f"missing J: {missing}"
        )
    signs = np.where(js % 2 == 1, -1.0, 1.0)
    return js, signs * amps


def unwrap_arg(
    values: Sequence[complex] | np.ndarray,
    j_values: np.ndarray | None = None,
    omega_p: int = 0,
    omega: int = 0,
    mode: str = "two-sided",
) -> PhaseSequence:
    """Continuous argument of a complex sequence along consecutive J.

    The first element gets its principal value.  Each later element gets
    the branch with the minimal jump from its predecessor ("two-sided");
    a jump of exactly +-pi (within 1e-12) is reported as a tie error.  In
    "one-sided" mode jumps live in [-pi, pi) and half turns resolve to
    -pi instead of erroring.
    """
    if mode not in UNWRAP_MODES:
        raise ValueError(f"unwrap mode must be one of {UNWRAP_MODES}")
    vals = np.asarray(values, dtype=complex)
    if vals.size == 0:
        raise ValueError("cannot unwrap an empty sequence")
    if j_values is None:
        j_values = np.arange(vals.size)
    j_values = np.asarray(j_values, dtype=int)
    mags = np.abs(vals)
    for j, m in zip(j_values, mags):
        if m < MAGNITUDE_FLOOR:
            raise PhaseUnwrapError(
                f"amplitude magnitude {m:g} at J={j} is below {MAGNITUDE_FLOOR:g}; "
                "phase undefined"
            )
    args = np.empty(vals.size)
    args[0] = math.atan2(vals[0].imag, vals[0].real)
    for n in range(1, vals.size):
        raw = math.atan2(vals[n].imag, vals[n].real) - args[n - 1]
        if mode == "two-sided":
            step = math.remainder(raw, math.tau)  # minimal-|delta| representative
            if math.pi - abs(step) <= TIE_TOL:
                raise PhaseUnwrapError(
                    f"half-turn phase jump at J={j_values[n]} "
                    "(|delta| = pi): branch ambiguous under the minimal-jump rule"
                )
        else:
            step = (raw + math.pi) % math.tau - math.pi  # in [-pi, pi)
        args[n] = args[n - 1] + step
    return PhaseSequence(omega_p, omega, j_values, args, mags)


def cqdf(
    block: SMatrixBlock, omega_p: int, omega: int, mode: str = "two-sided"
) -> CqdfCurve:
    """d[arg S~]/dJ: central differences inside, one-sided at the two ends."""
    js, stilde = modified_smatrix(block, omega_p, omega)
    if js.size < 2:
        raise ValueError("deflection derivative needs at least two J values")
    seq = unwrap_arg(stilde, js, omega_p, omega, mode)
    theta_tilde = np.gradient(seq.args)
    return CqdfCurve(omega_p, omega, js, theta_tilde, seq.magnitudes)


def fold_to_observable(angles: np.ndarray) -> np.ndarray:
    """|angle| reduced mod 2 pi and reflected into [0, pi]."""
    a = np.abs(np.asarray(angles, dtype=float)) % math.tau
    return np.where(a > math.pi, math.tau - a, a)


def predicted_scattering_angle(curve: CqdfCurve) -> np.ndarray:
    """Observable angle predicted by the deflection curve.

    For integer J the exp(i pi J) modification raises the phase slope by
    exactly pi (the minimal-jump unwrap absorbs it into the continuous
    branch), so the physical deflection is theta_tilde - pi; its
    magnitude, folded into [0, pi] by reflection, is the angle where the
    corresponding joint-map ridge appears.
    """
    return fold_to_observable(curve.theta_tilde - math.pi)
