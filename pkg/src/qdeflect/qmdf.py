"""Joint (theta, J) decomposition of the differential cross section.

The map Q(theta, J) assigns to each total angular momentum J its share of
the angular intensity, keeping every coherence with the other partial
waves at half weight:

    Q(theta, J) = sin(theta)/(2j+1) * sum_{Omega' Omega} Re[ f^J (F)* ]

with f^J the J-partial helicity amplitude and F the full amplitude.  The
real part implements the symmetrized double sum over (J1, J2), so entries
are real by construction and may be negative where destructive coherence
dominates.  Two exact identities anchor everything:

    sum_J Q(theta, J)          = DCS(theta) * sin(theta)
    2 pi Int Q(theta, J) dtheta = sigma^J

J-window sums of Q are additive; windowed DCSs (amplitudes restricted to
the window, then squared) are not, and the difference between the two
localizes interference between window groups.

Map construction is data-parallel over theta; maps are immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .angular import AngularGrid, integrate_curve
from .observables import AngularCurve, AmplitudeCurve, partial_amplitude_rows, sum_rows
from .smatrix import SMatrixBlock


@dataclass(frozen=True)
class JWindow:
    """Inclusive range [j_lo, j_hi] of total angular momenta."""

    j_lo: int
    j_hi: int

    def __post_init__(self) -> None:
        if not 0 <= self.j_lo <= self.j_hi:
            raise ValueError(f"need 0 <= j_lo <= j_hi, got [{self.j_lo}, {self.j_hi}]")


@dataclass(frozen=True, eq=False)
class DeflectionMap:
    """Real matrix over (theta, J); sin(theta)-weighted intensity per unit
    theta per J, units length^2.  Individual entries may be negative."""

    grid: AngularGrid
    j_values: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        jv = np.asarray(self.j_values, dtype=int)
        v = np.asarray(self.values, dtype=float)
        if jv.ndim != 1 or np.any(np.diff(jv) != 1):
            raise ValueError("j_values must be consecutive integers")
        if v.shape != (len(self.grid), jv.size):
            raise ValueError("map values must have shape (n_theta, n_J)")
        jv.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "j_values", jv)
        object.__setattr__(self, "values", v)

    def j_index(self, J: int) -> int:
        lo, hi = int(self.j_values[0]), int(self.j_values[-1])
        if not lo <= J <= hi:
            raise ValueError(f"J={J} outside map range {lo}..{hi}")
        return J - lo

    def column(self, J: int) -> np.ndarray:
        return self.values[:, self.j_index(J)]


def j_partial_amplitude(
    block: SMatrixBlock, J: int, omega_p: int, omega: int, grid: AngularGrid
) -> AmplitudeCurve:
    """Single-J amplitude f^J_{Omega' Omega}(theta); zero curve if absent."""
    h = block.header
    if not 0 <= J <= h.J_max:
        raise ValueError(f"J={J} outside the block range 0..{h.J_max}")
    if abs(omega) > min(J, h.j) or abs(omega_p) > min(J, h.j_final):
        raise ValueError(
            f"helicities (Omega'={omega_p}, Omega={omega}) violate bounds at J={J}"
        )
    rows = partial_amplitude_rows(block, omega, omega_p, grid)
    return AmplitudeCurve(omega_p, omega, grid, rows[J])


def _helicity_values(block: SMatrixBlock, omega_p: int, grid: AngularGrid) -> np.ndarray:
    """Scaled map contribution from one product helicity (Omega averaged)."""
    h = block.header
    scale = grid.sin_thetas / (2 * h.j + 1)
    total = np.zeros((len(grid), h.J_max + 1))
    for omega, op in block.helicity_pairs():
        if op != omega_p:
            continue
        rows = partial_amplitude_rows(block, omega, omega_p, grid)
        full = sum_rows(rows)
        # Re(f^J F*) = |f^J|^2 + half of every cross term with J1 != J
        total = total + np.real(rows * np.conj(full)[None, :]).T
    return total * scale[:, None]


def qmdf_helicity_map(block: SMatrixBlock, omega_p: int, grid: AngularGrid) -> DeflectionMap:
    """Map restricted to a single product helicity Omega'."""
    if abs(omega_p) > block.header.j_final:
        raise ValueError(f"Omega'={omega_p} outside jp={block.header.j_final}")
    values = _helicity_values(block, omega_p, grid)
    return DeflectionMap(grid, np.arange(block.header.J_max + 1), values)


def qmdf_map(block: SMatrixBlock, grid: AngularGrid) -> DeflectionMap:
    """Full map; identical to the sum of its helicity-resolved maps."""
    h = block.header
    total = np.zeros((len(grid), h.J_max + 1))
    for omega_p in sorted({op for _, op in block.helicity_pairs()}):
        total = total + _helicity_values(block, omega_p, grid)
    return DeflectionMap(grid, np.arange(h.J_max + 1), total)


def random_phase_map(block: SMatrixBlock, grid: AngularGrid) -> DeflectionMap:
    """Diagonal |f^J|^2 part only (all inter-J coherences dropped); >= 0."""
    h = block.header
    total = np.zeros((len(grid), h.J_max + 1))
    for omega, omega_p in block.helicity_pairs():
        rows = partial_amplitude_rows(block, omega, omega_p, grid)
        total = total + (np.abs(rows) ** 2).T
    scale = grid.sin_thetas / (2 * h.j + 1)
    return DeflectionMap(grid, np.arange(h.J_max + 1), total * scale[:, None])


def _check_window(window: JWindow, j_values: np.ndarray) -> None:
    if window.j_lo < j_values[0] or window.j_hi > j_values[-1]:
        raise ValueError(
            f"window [{window.j_lo}, {window.j_hi}] outside J range "
            f"{j_values[0]}..{j_values[-1]}"
        )


def sum_over_j(dmap: DeflectionMap, window: JWindow) -> AngularCurve:
    """Sum of map columns over the window; windows are additive."""
    _check_window(window, dmap.j_values)
    lo = dmap.j_index(window.j_lo)
    hi = dmap.j_index(window.j_hi)
    return AngularCurve(dmap.grid, dmap.values[:, lo : hi + 1].sum(axis=1))


def partial_dcs(block: SMatrixBlock, window: JWindow, grid: AngularGrid) -> AngularCurve:
    """DCS from amplitudes restricted to the window, then squared.

    Keeps coherences inside the window only, so disjoint windows do not
    add up to the full DCS when groups of partial waves interfere.
    """
    h = block.header
    _check_window(window, np.arange(h.J_max + 1))
    total = np.zeros(len(grid))
    for omega, omega_p in block.helicity_pairs():
        rows = partial_amplitude_rows(block, omega, omega_p, grid)
        restricted = sum_rows(rows[window.j_lo : window.j_hi + 1])
        total += np.abs(restricted) ** 2
    return AngularCurve(grid, total / (2 * h.j + 1))


def integrate_over_theta(dmap: DeflectionMap, J: int) -> float:
    """2 pi Int Q(theta, J) dtheta; equals sigma^J to quadrature accuracy.

    Grids of >= 500 points are recommended; the sine-series rule used on
    uniform full-range grids is exact for band-limited columns.
    """
    return 2.0 * np.pi * integrate_curve(dmap.grid, dmap.column(J))


def _gauss_kernel(radius: int, sigma: float, spacing: float) -> np.ndarray:
    offsets = np.arange(-radius, radius + 1) * spacing
    w = np.exp(-((offsets / sigma) ** 2))
    return w / w.sum()


def smooth_map(dmap: DeflectionMap, s_j: float, s_theta: float) -> DeflectionMap:
    """Separable normalized Gaussian smoothing for presentation.

    s_j is in units of J, s_theta in radians; zero width is the identity on
    that axis.  Kernels are normalized to unit discrete sum, so the map
    total is preserved except for truncation at the boundaries.
    """
    if s_j < 0 or s_theta < 0:
        raise ValueError("smoothing widths must be nonnegative")
    values = np.array(dmap.values)
    if s_j > 0:
        kernel = _gauss_kernel(max(1, math.ceil(6.0 * s_j)), s_j, 1.0)
        values = convolve1d(values, kernel, axis=1, mode="constant", cval=0.0)
    if s_theta > 0:
        if not dmap.grid.is_uniform:
            raise ValueError("theta smoothing needs a uniform grid")
        h = float(dmap.grid.thetas[1] - dmap.grid.thetas[0])
        kernel = _gauss_kernel(max(1, math.ceil(6.0 * s_theta / h)), s_theta, h)
        values = convolve1d(values, kernel, axis=0, mode="constant", cval=0.0)
    return DeflectionMap(dmap.grid, dmap.j_values, values)


def map_without_sin(dmap: DeflectionMap) -> tuple[np.ndarray, np.ndarray]:
    """Map values divided by sin(theta), endpoint rows emitted as zero.

    Returns (values, endpoint_mask); masked rows were zeroed because the
    division is singular there.
    """
    s = dmap.grid.sin_thetas
    mask = s == 0.0
    safe = np.where(mask, 1.0, s)
    out = dmap.values / safe[:, None]
    out[mask, :] = 0.0
    return out, mask
