"""Ensemble statistics of growing interfaces.

Time is measured in monolayers, ``tau = T / N``.  The width at time ``tau``
is the ensemble variance of each column height, averaged over columns:

    w(tau)^2 = (1/N) sum_i (<h_i^2> - <h_i>^2).

Family-Vicsek scaling predicts ``w = N^{1/2} g(tau / N^{3/2})`` with
``g(u) ~ u^{1/3}`` for small ``u``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .deposition import FREE, BoundaryCondition, ensemble_profiles
from .errors import InputDomainError
from .rng import RngStream

# an int64 sum of squares stays exact while max(h)^2 * runs < 2**62
_INT_LIMIT = 2 ** 62


class EnsembleAccumulator:
    """Per-column sums of ``h`` and ``h^2`` over runs, at fixed checkpoints.

    Hard-mode (integer) heights are summed exactly; merging is exact and
    therefore order independent.
    """

    def __init__(self, n_columns: int, checkpoints: Sequence[int]):
        cps = np.asarray(checkpoints, np.int64)
        if cps.ndim != 1 or cps.size == 0:
            raise InputDomainError("need at least one checkpoint")
        self.n_columns = int(n_columns)
        self.checkpoints = cps
        self.runs = 0
        self.s1 = np.zeros((cps.size, n_columns), np.int64)
        self.s2 = np.zeros((cps.size, n_columns), np.int64)
        self.hmax_s1 = np.zeros(cps.size, np.int64)
        self.hmax_s2 = np.zeros(cps.size, np.int64)

    def add(self, profiles: np.ndarray) -> None:
        """Add one run: ``profiles`` has one row per checkpoint."""
        h = np.asarray(profiles)
        if h.shape != self.s1.shape:
            raise InputDomainError(f"expected profiles of shape {self.s1.shape}")
        if not np.issubdtype(h.dtype, np.integer):
            raise InputDomainError("accumulator takes integer (hard-mode) heights")
        top = int(h.max()) if h.size else 0
        if top * top * (self.runs + 1) >= _INT_LIMIT:
            raise InputDomainError("heights too large for exact int64 accumulation")
        h = h.astype(np.int64)
        self.s1 += h
        self.s2 += h * h
        m = h.max(axis=1)
        self.hmax_s1 += m
        self.hmax_s2 += m * m
        self.runs += 1

    def merge(self, other: "EnsembleAccumulator") -> "EnsembleAccumulator":
        if other.n_columns != self.n_columns or not np.array_equal(other.checkpoints, self.checkpoints):
            raise InputDomainError("accumulators cover different setups")
        out = EnsembleAccumulator(self.n_columns, self.checkpoints)
        out.runs = self.runs + other.runs
        for name in ("s1", "s2", "hmax_s1", "hmax_s2"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        return out

    def _index(self, t: int) -> int:
        hits = np.nonzero(self.checkpoints == t)[0]
        if hits.size == 0:
            raise InputDomainError(f"{t} is not a checkpoint")
        return int(hits[0])

    def column_variance(self, t: int) -> np.ndarray:
        """``<h_i^2> - <h_i>^2`` per column, from exact integer sums."""
        if self.runs < 2:
            raise InputDomainError("variance needs at least two runs")
        k = self._index(t)
        r = self.runs
        s1 = self.s1[k].tolist()
        s2 = self.s2[k].tolist()
        return np.array([float(Fraction(r * b - a * a, r * r)) for a, b in zip(s1, s2)])

    def mean_height(self, t: int) -> float:
        k = self._index(t)
        return float(Fraction(int(self.s1[k].sum()), self.runs * self.n_columns))

    def __eq__(self, other):
        return (
            isinstance(other, EnsembleAccumulator)
            and self.runs == other.runs
            and np.array_equal(self.checkpoints, other.checkpoints)
            and np.array_equal(self.s1, other.s1)
            and np.array_equal(self.s2, other.s2)
        )


def width(acc: EnsembleAccumulator, t: int) -> float:
    return math.sqrt(float(np.mean(acc.column_variance(t))))


@dataclass(frozen=True)
class WidthSeries:
    n_columns: int
    tau: np.ndarray
    width: np.ndarray
    runs: int = 0

    def __post_init__(self):
        tau = np.asarray(self.tau, float)
        w = np.asarray(self.width, float)
        if tau.shape != w.shape or tau.ndim != 1:
            raise InputDomainError("tau and width must be 1-d and equally long")
        if np.any(np.diff(tau) <= 0):
            raise InputDomainError("tau must be strictly increasing")
        if np.any(w < 0):
            raise InputDomainError("widths must be non-negative")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "width", w)

    @property
    def u(self) -> np.ndarray:
        return self.tau / self.n_columns ** 1.5

    def rescaled(self) -> tuple[np.ndarray, np.ndarray]:
        return self.u, self.width / math.sqrt(self.n_columns)


def checkpoints_for(n_columns: int, taus: Sequence[float]) -> np.ndarray:
    """Event counts ``round(tau * N)``, deduplicated and at least 1."""
    cps = np.maximum(1, np.rint(np.asarray(taus, float) * n_columns)).astype(np.int64)
    return np.unique(cps)


def simulate_widths(n_columns: int, taus: Sequence[float], runs: int, rng: RngStream,
                    bc=FREE) -> tuple[WidthSeries, EnsembleAccumulator]:
    cps = checkpoints_for(n_columns, taus)
    acc = EnsembleAccumulator(n_columns, cps)
    for _, prof in ensemble_profiles(n_columns, cps, runs, rng, BoundaryCondition.coerce(bc)):
        acc.add(prof)
    ws = np.array([width(acc, int(t)) for t in cps])
    return WidthSeries(n_columns, cps / n_columns, ws, runs), acc


@dataclass
class FitResult:
    exponent: float
    stderr: float
    window: tuple[float, float]
    residual_norm: float
    n_points: int
    intercept: float = 0.0
    warnings: list = field(default_factory=list)


def log_log_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Slope, its stderr, intercept and residual norm of ``ln y`` on ``ln x``."""
    lx, ly = np.log(x), np.log(y)
    a = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(a, ly, rcond=None)
    resid = ly - a @ coef
    dof = lx.size - 2
    se = math.sqrt(resid @ resid / dof / np.sum((lx - lx.mean()) ** 2)) if dof > 0 else float("nan")
    return float(coef[0]), se, float(coef[1]), float(np.linalg.norm(resid))


def growth_exponent(series: WidthSeries, window: tuple[float, float] = (0.01, 0.1),
                    min_points: int = 8) -> FitResult:
    """Slope of ``ln w`` against ``ln tau`` for ``u`` inside ``window``."""
    lo, hi = window
    sel = (series.u >= lo) & (series.u <= hi) & (series.width > 0)
    notes = []
    if sel.sum() < 2:
        raise InputDomainError("fit window holds fewer than two points")
    if sel.sum() < min_points:
        notes.append(f"only {int(sel.sum())} points in the fit window")
    if hi > 0.3:
        notes.append("window reaches toward saturation")
    slope, se, icpt, rn = log_log_fit(series.tau[sel], series.width[sel])
    for n in notes:
        warnings.warn(n, stacklevel=2)
    return FitResult(slope, se, (float(lo), float(hi)), rn, int(sel.sum()), icpt, notes)


@dataclass
class CollapseReport:
    curves: dict
    grid: np.ndarray
    spread: np.ndarray
    mismatch: float
    saturation: dict
    roughness: FitResult | None
    comparable: bool = True


def collapse(series: Sequence[WidthSeries], u_range: tuple[float, float] | None = None,
             n_grid: int = 24, saturation_u: float = 3.0) -> CollapseReport:
    """Rescale to ``(u, w / N^{1/2})`` and measure how far the curves disagree.

    The mismatch is the largest relative spread ``(max - min) / mean``
    across curves on a log-spaced grid covering their common ``u`` range
    (optionally clipped to ``u_range``).  Curves are interpolated
    linearly in log-log coordinates.  Saturated widths (mean over
    ``u >= saturation_u``) give the roughness exponent by a log-log fit
    against ``N``.
    """
    if len({s.n_columns for s in series}) < 3:
        raise InputDomainError("collapse needs at least three system sizes")
    curves = {s.n_columns: s.rescaled() for s in series}
    lo = max(u[0] for u, _ in curves.values())
    hi = min(u[-1] for u, _ in curves.values())
    if u_range is not None:
        lo, hi = max(lo, u_range[0]), min(hi, u_range[1])
    sat = {}
    for s in series:
        m = s.u >= saturation_u
        if m.any():
            sat[s.n_columns] = float(s.width[m].mean())
    rough = None
    if len(sat) >= 2:
        ns = np.array(sorted(sat), float)
        slope, se, icpt, rn = log_log_fit(ns, np.array([sat[int(n)] for n in ns]))
        rough = FitResult(slope, se, (float(ns[0]), float(ns[-1])), rn, ns.size, icpt)
    if not lo < hi:
        return CollapseReport(curves, np.array([]), np.array([]), float("nan"), sat, rough, False)
    grid = np.geomspace(lo, hi, n_grid)
    vals = np.array([np.exp(np.interp(np.log(grid), np.log(u), np.log(g))) for u, g in curves.values()])
    spread = (vals.max(axis=0) - vals.min(axis=0)) / vals.mean(axis=0)
    return CollapseReport(curves, grid, spread, float(spread.max()), sat, rough, True)


@dataclass
class MomentReport:
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    n_samples: int
    velocity: float | None = None
    skewness_stderr: float = float("nan")
    warnings: list = field(default_factory=list)


def fit_velocity(taus: Sequence[float], mean_heights: Sequence[float]) -> float:
    """Slope of mean height against tau (least squares)."""
    slope, _ = np.polyfit(np.asarray(taus, float), np.asarray(mean_heights, float), 1)
    return float(slope)


def height_moments(samples, tau: float | None = None, velocity: float | None = None,
                   min_samples: int = 10_000) -> MomentReport:
    """Moments of ``tau^{-1/3} (h - v tau)``; skewness and excess kurtosis are
    unbiased sample estimators (scale and shift free)."""
    x = np.asarray(samples, float).reshape(-1)
    if x.size < 4:
        raise InputDomainError("need at least four samples")
    notes = []
    if x.size < min_samples:
        notes.append(f"{x.size} samples is below the {min_samples} recommended")
    if tau is not None:
        x = (x - (velocity or 0.0) * tau) / tau ** (1.0 / 3.0)
    var = float(np.var(x, ddof=1))
    if var == 0.0:
        sk, ku = 0.0, 0.0
    else:
        sk = float(stats.skew(x, bias=False))
        ku = float(stats.kurtosis(x, bias=False))
    n = x.size
    se = math.sqrt(6.0 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)))
    return MomentReport(float(x.mean()), var, sk, ku, n, velocity, se, notes)


def height_samples(n_columns: int, taus: Sequence[float], runs: int, rng: RngStream,
                   column_stride: int = 32, margin: int = 32, bc=FREE) -> dict:
    """Column heights (every ``column_stride``-th column away from the
    edges) and ``h_max`` per run, at each ``tau``."""
    cps = checkpoints_for(n_columns, taus)
    cols = np.arange(margin, n_columns - margin, column_stride)
    if cols.size == 0:
        cols = np.arange(n_columns)
    col_samples = [[] for _ in cps]
    hmax = [[] for _ in cps]
    for _, prof in ensemble_profiles(n_columns, cps, runs, rng, bc):
        for k in range(cps.size):
            col_samples[k].append(prof[k, cols])
            hmax[k].append(prof[k].max())
    return {
        "tau": cps / n_columns,
        "columns": [np.concatenate(c) for c in col_samples],
        "hmax": [np.asarray(h) for h in hmax],
    }
