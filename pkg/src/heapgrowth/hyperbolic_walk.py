"""Random walk on the hyperbolic plane generated by three involutions.

The group is the free product of three copies of Z_2, realised by the
matrices ``h_0, h_1, h_2`` below.  A reduced random word never repeats a
letter, so each step picks one of the two other generators with equal
probability.  Writing the current row vector as ``e^{mu/2} (cos theta,
sin theta)``, one step applies ``h_alpha^T`` and adds

    ln(5/3 + 4/3 cos(2 theta + phi_alpha)),   phi_alpha = (2 alpha - 1) pi / 3,

to ``mu``.  ``mu / n`` tends to the Lyapunov exponent ``gamma``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numba
import numpy as np

from .errors import InputDomainError, NumericalFailure
from .rng import RngStream

SQRT3 = math.sqrt(3.0)
FUNDAMENTAL_WIDTH = math.pi / 3


def gamma2_generators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    h0 = np.array([[1.0, -2.0 / SQRT3], [0.0, -1.0]])
    h1 = np.array([[1.0, 2.0 / SQRT3], [0.0, -1.0]])
    h2 = np.array([[0.0, 1.0 / SQRT3], [SQRT3, 0.0]])
    return h0, h1, h2


@dataclass(frozen=True)
class QSqrt3:
    """Exact number ``p + q sqrt(3)`` with rational ``p, q``."""

    p: Fraction = Fraction(0)
    q: Fraction = Fraction(0)

    def __add__(self, other: "QSqrt3") -> "QSqrt3":
        return QSqrt3(self.p + other.p, self.q + other.q)

    def __mul__(self, other: "QSqrt3") -> "QSqrt3":
        return QSqrt3(self.p * other.p + 3 * self.q * other.q, self.p * other.q + self.q * other.p)

    def __float__(self):
        return float(self.p) + float(self.q) * SQRT3


def gamma2_generators_exact() -> tuple:
    """The generators as 2x2 nested tuples of :class:`QSqrt3`."""
    z, one, m1 = QSqrt3(), QSqrt3(Fraction(1)), QSqrt3(Fraction(-1))
    two_over = QSqrt3(Fraction(0), Fraction(2, 3))  # 2/sqrt(3)
    neg_two_over = QSqrt3(Fraction(0), Fraction(-2, 3))
    inv = QSqrt3(Fraction(0), Fraction(1, 3))  # 1/sqrt(3)
    s3 = QSqrt3(Fraction(0), Fraction(1))
    return (
        ((one, neg_two_over), (z, m1)),
        ((one, two_over), (z, m1)),
        ((z, inv), (s3, z)),
    )


def exact_matmul(a, b):
    return tuple(
        tuple(a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2)) for i in range(2)
    )


def hyperbolic_distance(v) -> float:
    """``arccosh(Tr(V V^T) / 2)``."""
    v = np.asarray(v, float)
    half = float(np.sum(v * v)) / 2.0
    if half < 1.0 - 1e-12:
        raise NumericalFailure("Tr(V V^T) < 2", diagnostics={"half_trace": half})
    return math.acosh(max(half, 1.0))


def phase(alpha: int) -> float:
    return (2 * alpha - 1) * math.pi / 3


def increment(theta: float, alpha: int) -> float:
    return math.log(5.0 / 3.0 + 4.0 / 3.0 * math.cos(2.0 * theta + phase(alpha)))


@dataclass(frozen=True)
class WalkState:
    mu: float = 0.0
    theta: float = 0.0
    alpha: int = 2
    n: int = 0

    def __post_init__(self):
        if self.alpha not in (0, 1, 2):
            raise InputDomainError("alpha must be 0, 1 or 2")


def _apply(theta: float, alpha: int) -> float:
    """Direction of ``h_alpha^T (cos theta, sin theta)``, reduced mod pi."""
    h = gamma2_generators()[alpha]
    c, s = math.cos(theta), math.sin(theta)
    x = h[0, 0] * c + h[1, 0] * s
    y = h[0, 1] * c + h[1, 1] * s
    return math.atan2(y, x) % math.pi


def walk_step(state: WalkState, rng: RngStream, p_plus: float = 0.5) -> WalkState:
    shift = 1 if rng.generator.random() < p_plus else 2
    alpha = (state.alpha + shift) % 3
    mu = state.mu + increment(state.theta, alpha)
    return WalkState(mu, _apply(state.theta, alpha), alpha, state.n + 1)


@numba.njit(cache=True)
def _walk_kernel(shifts, theta, alpha, gens):
    n = shifts.shape[0]
    incs = np.empty(n)
    eff = np.empty(n)
    for k in range(n):
        alpha = (alpha + shifts[k]) % 3
        ph = (2 * alpha - 1) * np.pi / 3
        incs[k] = np.log(5.0 / 3.0 + 4.0 / 3.0 * np.cos(2.0 * theta + ph))
        eff[k] = theta + 0.5 * ph
        c = np.cos(theta)
        s = np.sin(theta)
        x = gens[alpha, 0, 0] * c + gens[alpha, 1, 0] * s
        y = gens[alpha, 0, 1] * c + gens[alpha, 1, 1] * s
        theta = np.arctan2(y, x) % np.pi
    return incs, eff, theta, alpha


def walk(n_steps: int, rng: RngStream | None, state: WalkState | None = None, p_plus: float = 0.5):
    """Run ``n_steps`` steps; returns ``(increments, effective_angles, final_state)``.

    ``effective_angles[k]`` is ``theta_k + phi/2`` for the generator used at
    step ``k``, so that the increment equals ``ln(5/3 + 4/3 cos 2 angle)``.
    """
    state = state or WalkState()
    if p_plus in (0.0, 1.0):
        shifts = np.full(n_steps, 1 if p_plus == 1.0 else 2, np.int64)
    else:
        if rng is None:
            raise InputDomainError("a random walk needs an RngStream")
        shifts = np.where(rng.generator.random(n_steps) < p_plus, 1, 2).astype(np.int64)
    gens = np.stack(gamma2_generators())
    incs, eff, theta, alpha = _walk_kernel(shifts, state.theta, state.alpha, gens)
    final = WalkState(state.mu + float(incs.sum()), float(theta), int(alpha), state.n + n_steps)
    return incs, eff, final


def fold(angles: np.ndarray) -> np.ndarray:
    """Map angles mod pi onto ``[0, pi/2]`` using the evenness of the increment."""
    return np.abs((np.asarray(angles) + math.pi / 2) % math.pi - math.pi / 2)


@dataclass
class MeasureHistogram:
    edges: np.ndarray
    counts: np.ndarray
    total: int = 0
    overflow: int = 0

    @classmethod
    def empty(cls, bins: int = 1024, width: float = FUNDAMENTAL_WIDTH) -> "MeasureHistogram":
        return cls(np.linspace(0.0, width, bins + 1), np.zeros(bins, np.int64), 0, 0)

    def add(self, folded: np.ndarray) -> None:
        folded = np.asarray(folded)
        inside = folded < self.edges[-1]
        c, _ = np.histogram(folded[inside], bins=self.edges)
        self.counts += c
        self.total += int(inside.sum())
        self.overflow += int((~inside).sum())

    def merge(self, other: "MeasureHistogram") -> "MeasureHistogram":
        if not np.array_equal(self.edges, other.edges):
            raise InputDomainError("histograms have different bins")
        return MeasureHistogram(
            self.edges.copy(), self.counts + other.counts,
            self.total + other.total, self.overflow + other.overflow,
        )

    def density(self) -> np.ndarray:
        if self.total == 0:
            raise InputDomainError("empty histogram")
        return self.counts / (self.total * np.diff(self.edges))

    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def integrate(self, f) -> float:
        """``int nu(theta) f(theta) d theta`` using bin centres."""
        return float(np.sum(self.density() * f(self.centers()) * np.diff(self.edges)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta_lo", "theta_hi", "count", "density"])
        for lo, hi, c, d in zip(self.edges[:-1], self.edges[1:], self.counts, self.density()):
            w.writerow([repr(float(lo)), repr(float(hi)), int(c), repr(float(d))])
        return buf.getvalue()


def log_weight(theta):
    return np.log(5.0 / 3.0 + 4.0 / 3.0 * np.cos(2.0 * theta))


@dataclass
class LyapunovEstimate:
    gamma: float
    stderr: float
    method: str
    n_steps: int
    trials: int
    warnings: list = field(default_factory=list)
    histogram: MeasureHistogram | None = None

    def __iter__(self):
        yield self.gamma
        yield self.stderr


def lyapunov_gamma(
    n_steps: int,
    trials: int,
    rng: RngStream,
    method: str = "montecarlo",
    bins: int = 1024,
    burn_in: float = 0.1,
    p_plus: float = 0.5,
    batches: int = 20,
) -> LyapunovEstimate:
    """Estimate ``gamma = lim <mu_n> / n``.

    ``montecarlo`` averages the per-step increments after the burn-in
    prefix.  ``measure_integral`` histograms the folded angle over the same
    window and integrates ``ln(5/3 + 4/3 cos 2 theta)`` against it.  Error
    bars come from batch means (``batches`` per trial).
    """
    if n_steps < 10_000:
        raise InputDomainError("n_steps must be at least 1e4")
    if trials < 1:
        raise InputDomainError("trials must be >= 1")
    if method not in ("montecarlo", "measure_integral"):
        raise InputDomainError(f"unknown method {method!r}")
    skip = int(burn_in * n_steps)
    batch_values = []
    hist = MeasureHistogram.empty(bins)
    for k in range(trials):
        incs, eff, _ = walk(n_steps, rng.child(k), p_plus=p_plus)
        incs, eff = incs[skip:], eff[skip:]
        for chunk_inc, chunk_eff in zip(np.array_split(incs, batches), np.array_split(eff, batches)):
            if method == "montecarlo":
                batch_values.append(chunk_inc.mean())
            else:
                h = MeasureHistogram.empty(bins)
                h.add(fold(chunk_eff))
                batch_values.append(h.integrate(log_weight))
                hist = hist.merge(h)
    vals = np.asarray(batch_values)
    gamma = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(vals.size))
    warnings = []
    if method == "measure_integral":
        gamma = hist.integrate(log_weight)
        if hist.overflow:
            warnings.append(f"{hist.overflow} samples outside the histogram range")
    if stderr > 0.01:
        warnings.append("standard error above 0.01; use more steps")
    return LyapunovEstimate(gamma, stderr, method, n_steps, trials, warnings,
                            hist if method == "measure_integral" else None)


def deterministic_slope() -> float:
    """Growth rate of ``mu`` along the periodic word ``h_0 h_1 h_2 h_0 ...``.

    ``h_0 h_1 h_2`` has eigenvalues ``2 +- sqrt(5)``, and ``mu`` grows by
    twice the log of the spectral radius every three steps.
    """
    return 2.0 * math.log(2.0 + math.sqrt(5.0)) / 3.0
