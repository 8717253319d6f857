"""Trajectory-ensemble estimators: opacity, J-partial cross section, DCS,
and the joint (theta, J) distribution, by Legendre moments or Gaussian
kernels.

An ensemble is a weighted list of reactive (or inelastic) records
(w_i, J_i, theta_i) plus the ensemble-level integral cross section used as
the overall normalization; the estimators shape distributions, they never
compute absolute cross sections from counts.  The J distribution is
expanded in the reduced variable

    x(J) = 2 J(J+1) / [J_max (J_max+1)] - 1,   x in [-1, 1],

which is uniform under the standard ell(ell+1) = xi * ell_max(ell_max+1)
sampling law, so dx/dJ = 2(2J+1)/[J_max(J_max+1)] carries the (2J+1)
degeneracy.  Gaussian kernels follow G(u) = exp(-(u/s)^2) / (s sqrt(pi)),
normalized to unit integral; s is the primary width parameter (see
fwhm_from_width / width_from_fwhm_log2_rule for the two FWHM conversions
in circulation).

Moment accumulation is a reduction over records; kernel evaluation is
data-parallel over grid points.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Callable, Mapping, Union

import numpy as np
from numpy.polynomial.legendre import legval, legvander
from scipy.special import erf

from .angular import AngularGrid
from .observables import AngularCurve
from .qmdf import DeflectionMap

_CHUNK = 4096


class GibbsOscillationWarning(UserWarning):
    """Truncated Legendre expansion of a nonnegative density undershoots."""


def fwhm_from_width(s: float) -> float:
    """Full width at half maximum of exp(-(u/s)^2)."""
    return 2.0 * s * math.sqrt(math.log(2.0))


def width_from_fwhm_log2_rule(fwhm: float) -> float:
    """Width under the alternate s = FWHM / ln 2 convention."""
    return fwhm / math.log(2.0)


@dataclass(frozen=True, eq=False)
class TrajectoryEnsemble:
    """Weighted reactive records (w_i, J_i, theta_i) with normalization data.

    j_values are real (continuous sampling) or integer-valued (discrete);
    thetas are radians in [0, pi].  n_tot_by_j gives the total trajectory
    count per integer J bin and is only needed for opacities.
    """

    weights: np.ndarray
    j_values: np.ndarray
    thetas: np.ndarray
    sigma_r: float
    j_max: float
    n_tot_by_j: Mapping[int, int] | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        j = np.asarray(self.j_values, dtype=float)
        t = np.asarray(self.thetas, dtype=float)
        if not (w.shape == j.shape == t.shape) or w.ndim != 1:
            raise ValueError("weights, j_values, thetas must be 1-D and congruent")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if np.any((t < 0) | (t > np.pi)):
            raise ValueError("thetas must lie in [0, pi]")
        if self.j_max <= 0:
            raise ValueError("j_max must be positive")
        if np.any((j < 0) | (j > self.j_max)):
            raise ValueError("j_values must lie in [0, j_max]")
        if self.sigma_r < 0:
            raise ValueError("sigma_r must be nonnegative")
        for arr, name in ((w, "weights"), (j, "j_values"), (t, "thetas")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return int(self.weights.size)

    @property
    def sum_of_weights(self) -> float:
        return float(np.sum(self.weights))


def _require_weights(ensemble: TrajectoryEnsemble) -> float:
    sw = ensemble.sum_of_weights
    if sw <= 0.0:
        raise ValueError("estimators need a positive total weight")
    return sw


def reduced_x(j: np.ndarray | float, j_max: float) -> np.ndarray | float:
    """Map J in [0, J_max] onto x in [-1, 1] with the degeneracy-weighted law."""
    return 2.0 * j * (j + 1.0) / (j_max * (j_max + 1.0)) - 1.0


def _dx_dj(j: np.ndarray | float, j_max: float) -> np.ndarray | float:
    return 2.0 * (2.0 * j + 1.0) / (j_max * (j_max + 1.0))


def qct_opacity(ensemble: TrajectoryEnsemble, J: int) -> float:
    """Weighted reactive fraction at integer J: S_w(J) / N_tot(J)."""
    if ensemble.n_tot_by_j is None:
        raise ValueError("opacity needs the per-J total-trajectory table")
    n_tot = ensemble.n_tot_by_j.get(int(J), 0)
    if n_tot <= 0:
        raise ValueError(f"no total-trajectory count at J={J}: opacity undefined")
    at_j = np.rint(ensemble.j_values).astype(int) == int(J)
    return float(np.sum(ensemble.weights[at_j])) / n_tot


@dataclass(frozen=True, eq=False)
class LegendreDF:
    """Legendre-moment representation of the (theta, J) distribution.

    a_m: DCS coefficients; b_n: J-density coefficients; alpha_mn: joint
    coefficients.  Zeroth moments are exactly a_0 = b_0 = 1/2 and
    alpha_00 = 1/4 for any nonempty weighted ensemble.
    """

    a: np.ndarray
    b: np.ndarray
    alpha: np.ndarray
    j_max: float
    sigma_r: float

    @property
    def orders(self) -> tuple[int, int]:
        return len(self.a) - 1, len(self.b) - 1

    def dcs(self, thetas: np.ndarray) -> np.ndarray:
        return self.sigma_r / (2.0 * np.pi) * legval(np.cos(thetas), self.a)

    def sigma_j(self, j: np.ndarray | float) -> np.ndarray | float:
        x = reduced_x(j, self.j_max)
        return self.sigma_r * _dx_dj(j, self.j_max) * legval(x, self.b)

    def joint(self, thetas: np.ndarray, j: np.ndarray) -> np.ndarray:
        """sin(theta)-weighted joint density on the (theta, j) product grid."""
        vt = legvander(np.cos(thetas), self.alpha.shape[0] - 1)
        vx = legvander(reduced_x(np.asarray(j, dtype=float), self.j_max),
                       self.alpha.shape[1] - 1)
        core = vt @ self.alpha @ vx.T
        pref = self.sigma_r / (2.0 * np.pi) * _dx_dj(np.asarray(j, dtype=float), self.j_max)
        return np.sin(thetas)[:, None] * core * pref[None, :]


def fit_legendre_df(
    ensemble: TrajectoryEnsemble, order_theta: int = 20, order_j: int = 20
) -> LegendreDF:
    """Weighted Legendre moments of the ensemble, through the given orders.

    Warns when a reconstructed marginal dips below -2% of its own maximum,
    the usual Gibbs signature of over-truncated expansions.
    """
    if order_theta < 0 or order_j < 0:
        raise ValueError("expansion orders must be nonnegative")
    _require_weights(ensemble)
    w = ensemble.weights
    vt = legvander(np.cos(ensemble.thetas), order_theta)  # (N, M+1)
    vx = legvander(reduced_x(ensemble.j_values, ensemble.j_max), order_j)

    raw_a = vt.T @ w
    raw_b = vx.T @ w
    raw_alpha = (vt * w[:, None]).T @ vx

    m = np.arange(order_theta + 1)
    n = np.arange(order_j + 1)
    a = (2 * m + 1) / 2.0 * raw_a / raw_a[0]
    b = (2 * n + 1) / 2.0 * raw_b / raw_b[0]
    alpha = ((2 * m[:, None] + 1) * (2 * n[None, :] + 1) / 4.0) * raw_alpha / raw_alpha[0, 0]

    df = LegendreDF(a, b, alpha, ensemble.j_max, ensemble.sigma_r)
    _warn_on_gibbs(df)
    return df


def _warn_on_gibbs(df: LegendreDF) -> None:
    probe_t = np.linspace(0.0, np.pi, 181)
    probe_j = np.linspace(0.0, df.j_max, 201)
    for label, vals in (("theta", df.dcs(probe_t)), ("J", np.asarray(df.sigma_j(probe_j)))):
        top = vals.max()
        if top > 0 and vals.min() < -0.02 * top:
            warnings.warn(
                f"reconstructed {label} marginal undershoots below -2% of its "
                "maximum; consider lowering the expansion order",
                GibbsOscillationWarning,
                stacklevel=3,
            )


def qct_sigma_j_legendre(
    ensemble: TrajectoryEnsemble, order: int = 20
) -> Callable[[np.ndarray], np.ndarray]:
    """J-partial cross section as a function of J, from Legendre moments."""
    df = fit_legendre_df(ensemble, 0, order)
    return df.sigma_j


def qct_dcs_legendre(
    ensemble: TrajectoryEnsemble, order: int, grid: AngularGrid
) -> AngularCurve:
    df = fit_legendre_df(ensemble, order, 0)
    return AngularCurve(grid, df.dcs(grid.thetas))


def qct_df_legendre(
    ensemble: TrajectoryEnsemble,
    order_theta: int,
    order_j: int,
    grid: AngularGrid,
    j_values: np.ndarray | None = None,
) -> DeflectionMap:
    df = fit_legendre_df(ensemble, order_theta, order_j)
    if j_values is None:
        j_values = np.arange(int(math.floor(ensemble.j_max)) + 1)
    return DeflectionMap(grid, j_values, df.joint(grid.thetas, j_values))


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel widths: s_j in J units, s_theta in radians."""

    s_j: float
    s_theta: float

    def __post_init__(self) -> None:
        if self.s_j <= 0 or self.s_theta <= 0:
            raise ValueError("kernel widths must be positive")

    @property
    def fwhm_j(self) -> float:
        return fwhm_from_width(self.s_j)

    @property
    def fwhm_theta(self) -> float:
        return fwhm_from_width(self.s_theta)

    @classmethod
    def from_ensemble(cls, ensemble: TrajectoryEnsemble, factor: float = 2.0) -> "KernelConfig":
        """Widths set to `factor` times the mean nearest-neighbor spacing."""
        return cls(
            factor * _mean_spacing(ensemble.j_values),
            factor * _mean_spacing(ensemble.thetas),
        )


def _mean_spacing(values: np.ndarray) -> float:
    distinct = np.unique(values)
    if distinct.size < 2:
        raise ValueError("kernel width heuristic needs at least two distinct values")
    return float(np.mean(np.diff(distinct)))


def _gauss(u: np.ndarray, s: float) -> np.ndarray:
    return np.exp(-((u / s) ** 2)) / (s * math.sqrt(math.pi))


def qct_sigma_j_gaussian(
    ensemble: TrajectoryEnsemble, config: KernelConfig
) -> Callable[[np.ndarray], np.ndarray]:
    """J-partial cross section as a kernel sum (sigma_r / S_w) sum w G(J - J_i)."""
    sw = _require_weights(ensemble)
    pref = ensemble.sigma_r / sw
    centers = ensemble.j_values
    weights = ensemble.weights

    def evaluate(j: np.ndarray | float) -> np.ndarray | float:
        j_arr = np.atleast_1d(np.asarray(j, dtype=float))
        out = np.zeros_like(j_arr)
        for lo in range(0, centers.size, _CHUNK):
            blk = slice(lo, lo + _CHUNK)
            out += _gauss(j_arr[:, None] - centers[blk][None, :], config.s_j) @ weights[blk]
        out *= pref
        return out if np.ndim(j) else float(out[0])

    return evaluate


def qct_df_gaussian(
    ensemble: TrajectoryEnsemble,
    config: KernelConfig,
    grid: AngularGrid,
    j_values: np.ndarray | None = None,
    renormalize_boundary: bool = False,
) -> DeflectionMap:
    """Joint map as a sum of separable Gaussian bumps, one per record.

    Kernel mass leaking past theta = 0, pi or J = 0, J_max is lost unless
    renormalize_boundary is set, which rescales each record by its
    in-domain kernel fraction.
    """
    sw = _require_weights(ensemble)
    if j_values is None:
        j_values = np.arange(int(math.floor(ensemble.j_max)) + 1)
    j_values = np.asarray(j_values)

    weights = ensemble.weights
    if renormalize_boundary:
        f_theta = 0.5 * (
            erf((np.pi - ensemble.thetas) / config.s_theta)
            + erf(ensemble.thetas / config.s_theta)
        )
        f_j = 0.5 * (
            erf((ensemble.j_max - ensemble.j_values) / config.s_j)
            + erf(ensemble.j_values / config.s_j)
        )
        weights = weights / (f_theta * f_j)

    values = np.zeros((len(grid), j_values.size))
    for lo in range(0, len(ensemble), _CHUNK):
        blk = slice(lo, lo + _CHUNK)
        g_theta = _gauss(grid.thetas[:, None] - ensemble.thetas[blk][None, :], config.s_theta)
        g_j = _gauss(ensemble.j_values[blk][:, None] - j_values[None, :].astype(float), config.s_j)
        values += g_theta @ (weights[blk][:, None] * g_j)
    values *= ensemble.sigma_r / (2.0 * np.pi * sw)
    return DeflectionMap(grid, j_values, values)


def sample_ell_continuous(
    j_max: float, count: int, rng: Union[int, np.random.Generator, None] = None
) -> np.ndarray:
    """Draw J with the (2J+1)-weighted law J(J+1) = xi * J_max(J_max+1)."""
    if count <= 0:
        raise ValueError("count must be positive")
    gen = np.random.default_rng(rng)
    xi = gen.random(count)
    d = j_max * (j_max + 1.0)
    return np.clip(0.5 * (np.sqrt(1.0 + 4.0 * xi * d) - 1.0), 0.0, j_max)


# ---------------------------------------------------------------------------
# trajectory file format: '#' comments carry sigma_r, j_max and the optional
# per-J totals; records are "<w> <J> <theta_deg>" lines.

_META_RE = re.compile(r"#\s*(sigma_r|j_max)\s*=\s*(\S+)")
_NTOT_RE = re.compile(r"#\s*n_tot\s+(\d+)\s+(\d+)")

Source = Union[str, Path, IO[str], IO[bytes], bytes]


def load_trajectories(source: Source) -> TrajectoryEnsemble:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data

    meta: dict[str, float] = {}
    n_tot: dict[int, int] = {}
    rows: list[tuple[float, float, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _META_RE.match(stripped)
            if m:
                meta[m.group(1)] = float(m.group(2))
            m = _NTOT_RE.match(stripped)
            if m:
                n_tot[int(m.group(1))] = int(m.group(2))
            continue
        fields = stripped.split()
        if len(fields) != 3:
            raise ValueError(f"line {lineno}: expected 'w J theta_deg'")
        try:
            rows.append((float(fields[0]), float(fields[1]), float(fields[2])))
        except ValueError:
            raise ValueError(f"line {lineno}: malformed record {stripped!r}") from None
    for key in ("sigma_r", "j_max"):
        if key not in meta:
            raise ValueError(f"trajectory header is missing '# {key} = ...'")
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    return TrajectoryEnsemble(
        weights=arr[:, 0],
        j_values=arr[:, 1],
        thetas=np.radians(arr[:, 2]),
        sigma_r=meta["sigma_r"],
        j_max=meta["j_max"],
        n_tot_by_j=n_tot or None,
    )


def save_trajectories(ensemble: TrajectoryEnsemble, destination: Union[str, Path, IO[str]]) -> None:
    lines = [
        "# qct trajectory ensemble",
        f"# sigma_r = {float(ensemble.sigma_r)!r}",
        f"# j_max = {float(ensemble.j_max)!r}",
    ]
    if ensemble.n_tot_by_j:
        lines += [f"# n_tot {j} {c}" for j, c in sorted(ensemble.n_tot_by_j.items())]
    lines.append("# columns: w J theta_deg")
    degs = np.degrees(ensemble.thetas)
    lines += [
        f"{float(w)!r} {float(j)!r} {float(t)!r}"
        for w, j, t in zip(ensemble.weights, ensemble.j_values, degs)
    ]
    text = "\n".join(lines) + "\n"
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text, encoding="utf-8")
    else:
        destination.write(text)
