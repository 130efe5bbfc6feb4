"""Matrix pictures of deposition.

Two realisations live here.  In the (max, +) semiring the generator for
column ``i`` is the identity with row ``i`` replaced by ones on the three
neighbouring sites, and the product of generators applied to the zero
vector returns the heap heights.  In the soft picture each event multiplies
a running product by a random SL(2, R) block embedded on rows
``(i, i + 1)``; the log singular values of that product are its radial
coordinates, and ``h_max / mu_max`` defines the constant ``gamma_N``.

Running products are always kept factored as ``Q @ diag(exp(s)) @ B`` with
``Q`` refreshed by a pivoted QR step every 16 multiplications (sooner when
the pending blocks are badly conditioned), so ``t`` of order ``10**4`` never
overflows.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .deposition import BoundaryCondition, ColumnSequence, HeightProfile, FREE, PERIODIC
from .errors import InputDomainError, NumericalFailure
from .rng import RngStream

REFACTOR_EVERY = 16
# also refactor early once the pending blocks could amplify rounding by ~1e3
LOG_COND_LIMIT = math.log(1e3)
NEG_INF = -np.inf


# ---------------------------------------------------------------- tropical


def tropical_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(max, +) product; ``-inf`` is the additive zero."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return np.max(a[..., :, :, None] + b[..., None, :, :], axis=-2)


def tropical_identity(n: int) -> np.ndarray:
    m = np.full((n, n), NEG_INF)
    np.fill_diagonal(m, 0.0)
    return m


def tropical_generator(n: int, column: int, bc=FREE) -> np.ndarray:
    """The u -> infinity limit (in log_u units) of the deposition generator."""
    bc = BoundaryCondition.coerce(bc)
    if not 1 <= column <= n:
        raise InputDomainError(f"column {column} outside [1, {n}]")
    g = tropical_identity(n)
    i = column - 1
    g[i, :] = NEG_INF
    if bc is PERIODIC:
        nb = {(i - 1) % n, i, (i + 1) % n}
    else:
        nb = {j for j in (i - 1, i, i + 1) if 0 <= j < n}
    for j in nb:
        g[i, j] = 1.0
    return g


def tropical_product(events, n: int, bc=FREE) -> np.ndarray:
    """Time-ordered product ``g_{i_T} ... g_{i_1}`` in the (max, +) semiring."""
    seq = events if isinstance(events, ColumnSequence) else ColumnSequence(events, n)
    p = tropical_identity(n)
    for c in seq:
        p = tropical_matmul(tropical_generator(n, c, bc), p)
    return p


def tropical_heights(events, n: int, bc=FREE) -> HeightProfile:
    p = tropical_product(events, n, bc)
    h = tropical_matmul(p, np.zeros((n, 1)))[:, 0]
    return HeightProfile(h.astype(np.int64))


def tropical_heights_batch(events: np.ndarray, n: int, bc=FREE) -> np.ndarray:
    """Heights after every prefix for a batch of sequences.

    ``events`` is ``(batch, T)`` and 1-based.  The whole N x N tropical
    product is carried per sequence (generators only touch one row) and the
    heights are read off as row maxima, i.e. the product applied to zero.
    Output shape ``(T + 1, batch, N)``.
    """
    bc = BoundaryCondition.coerce(bc)
    ev = np.asarray(events, dtype=np.int64)
    batch, steps = ev.shape
    p = np.full((batch, n, n), np.iinfo(np.int32).min // 2, dtype=np.int64)
    p[:, np.arange(n), np.arange(n)] = 0
    out = np.empty((steps + 1, batch, n), np.int64)
    out[0] = p.max(axis=2)
    for t in range(steps):
        _kernels.tropical_rows_batch(p, ev[:, t] - 1, bc is PERIODIC)
        out[t + 1] = p.max(axis=2)
    return out


def _logsumexp_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = a[:, :, None] + b[None, :, :]
    m = np.max(s, axis=1)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return safe + np.log(np.exp(s - safe[:, None, :]).sum(axis=1))


def finite_u_heights(events, n: int, beta: float, bc=FREE) -> np.ndarray:
    """``ln(G_T ... G_1 a) / ln u`` for the finite-u generators, ``a = 1``.

    ``G_i`` is the identity with row ``i`` set to ``u`` on the neighbouring
    sites.  The product is formed in log space; as ``beta = ln u`` grows
    this tends to the tropical heights.
    """
    if not beta > 0:
        raise InputDomainError("beta must be positive")
    seq = events if isinstance(events, ColumnSequence) else ColumnSequence(events, n)
    logp = tropical_identity(n)
    for c in seq:
        g = tropical_generator(n, c, bc)
        g = np.where(np.isfinite(g), g * beta, NEG_INF)
        logp = _logsumexp_matmul(g, logp)
    return _logsumexp_matmul(logp, np.zeros((n, 1)))[:, 0] / beta


# ---------------------------------------------------------------- SL(2) blocks


@dataclass(frozen=True)
class Sl2Block:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        scale = max(abs(self.a * self.d), abs(self.b * self.c), 1.0)
        if not abs(det - 1.0) <= 1e-12 * scale:
            raise InputDomainError(f"block determinant {det!r} is not 1")

    @classmethod
    def from_matrix(cls, m) -> "Sl2Block":
        m = np.asarray(m, float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "Sl2Block":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def stretch(cls, r: float) -> "Sl2Block":
        return cls(math.exp(r), 0.0, 0.0, math.exp(-r))

    @classmethod
    def rotation(cls, theta: float) -> "Sl2Block":
        c, s = math.cos(theta), math.sin(theta)
        return cls(c, -s, s, c)

    @classmethod
    def shear(cls, x: float) -> "Sl2Block":
        return cls(1.0, x, 0.0, 1.0)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "Sl2Block") -> "Sl2Block":
        return Sl2Block.from_matrix(self.matrix() @ other.matrix())


def _compose(theta, r, x) -> np.ndarray:
    """R(theta) diag(e^r, e^-r) shear(x), vectorised over leading axes."""
    c, s = np.cos(theta), np.sin(theta)
    er, ir = np.exp(r), np.exp(-r)
    out = np.empty(np.shape(theta) + (2, 2))
    out[..., 0, 0] = c * er
    out[..., 0, 1] = c * er * x - s * ir
    out[..., 1, 0] = s * er
    out[..., 1, 1] = s * er * x + c * ir
    return out


@dataclass(frozen=True)
class BlockMeasure:
    """Random SL(2, R) blocks ``R(theta) diag(e^r, e^-r) shear(x)``.

    ``theta`` uniform on [0, 2 pi), ``r`` uniform on [-r0, r0], ``x``
    uniform on [-x0, x0].
    """

    r0: float = 1.0
    x0: float = 1.0

    def __post_init__(self):
        if self.r0 < 0 or self.x0 < 0:
            raise InputDomainError("r0 and x0 must be non-negative")

    @classmethod
    def reference(cls) -> "BlockMeasure":
        """Scale used for the gamma_N experiment (see README)."""
        return cls(GAMMA_REFERENCE_SCALE, GAMMA_REFERENCE_SCALE)

    def sample_array(self, rng: RngStream, size: int) -> np.ndarray:
        g = rng.generator
        theta = g.uniform(0.0, 2 * np.pi, size)
        r = g.uniform(-self.r0, self.r0, size)
        x = g.uniform(-self.x0, self.x0, size)
        return _compose(theta, r, x)

    def sample(self, rng: RngStream) -> Sl2Block:
        return Sl2Block.from_matrix(self.sample_array(rng, 1)[0])

    def as_dict(self) -> dict:
        return {"r0": self.r0, "x0": self.x0}


# Chosen by bisection so that gamma_10(0) from the coupled estimator sits at
# about 0.8 (16 trials, T = 1e4).  r0 = x0 = 1 gives roughly 6 instead.
GAMMA_REFERENCE_SCALE = 3.6


# ---------------------------------------------------------------- products


@dataclass(frozen=True)
class RadialCoords:
    mu: np.ndarray

    @property
    def mu_max(self) -> float:
        return float(self.mu[0])


class ProductState:
    """Running product ``V_t = g_t ... g_1`` kept as ``W diag(e^s) B``.

    ``W`` is orthogonal right after a refactorisation and absorbs the next
    few block multiplications; ``B`` has rows of unit max-norm so all the
    growth sits in the log-scales ``s``.
    """

    __slots__ = ("dim", "w", "scales", "rows", "t", "_pending", "_cond")

    def __init__(self, dim: int):
        if dim < 2:
            raise InputDomainError("product dimension must be >= 2")
        self.dim = dim
        self.w = np.eye(dim)
        self.scales = np.zeros(dim)
        self.rows = np.eye(dim)
        self.t = 0
        self._pending = 0
        self._cond = 0.0

    def copy(self) -> "ProductState":
        new = ProductState.__new__(ProductState)
        new.dim = self.dim
        new.w = self.w.copy()
        new.scales = self.scales.copy()
        new.rows = self.rows.copy()
        new.t = self.t
        new._pending = self._pending
        new._cond = self._cond
        return new

    def _multiply(self, column: int, m: np.ndarray) -> None:
        i = column - 1
        self.w[i : i + 2, :] = m @ self.w[i : i + 2, :]
        self.t += 1
        self._pending += 1
        self._cond += _kernels.block_log_condition(m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        if self._pending >= REFACTOR_EVERY or self._cond > LOG_COND_LIMIT:
            self.refactor()

    def refactor(self) -> None:
        self.w, self.scales, self.rows = _kernels.refactor(self.w, self.scales, self.rows)
        self._pending = 0
        self._cond = 0.0

    def matrix(self) -> np.ndarray:
        """Dense product; only for small ``t`` (raises if it would overflow)."""
        if self.scales.max() > 700:
            raise NumericalFailure(
                "product too large to form densely", diagnostics={"max_scale": float(self.scales.max())}
            )
        return self.w @ (np.exp(self.scales)[:, None] * self.rows)

    def log_abs_det(self) -> float:
        st = self.copy()
        st.refactor()
        sign, logdet = np.linalg.slogdet(st.rows)
        return float(st.scales.sum() + logdet)


def apply_soft_generator(state: ProductState, column: int, block: Sl2Block) -> ProductState:
    if not 1 <= column <= state.dim - 1:
        raise InputDomainError(
            f"block at column {column} does not fit in dimension {state.dim}"
        )
    new = state.copy()
    new._multiply(column, block.matrix())
    return new


def radial_coords(state: ProductState, mode: str = "singular") -> RadialCoords:
    """Sorted ``ln`` of the singular values (or eigenvalue moduli) of ``V_t``."""
    if mode == "singular":
        st = state.copy()
        st.refactor()
        vals, sweeps = _kernels.graded_log_singular_values(st.scales, st.rows, 1e-15, 60)
        if sweeps > 60 or not np.all(np.isfinite(vals)):
            raise NumericalFailure(
                "graded Jacobi did not converge",
                diagnostics={"sweeps": int(sweeps), "scales": st.scales.tolist(), "t": state.t},
            )
        mu = np.sort(vals)[::-1]
    elif mode == "eigen":
        ev = np.linalg.eigvals(state.matrix())
        with np.errstate(divide="ignore"):
            mu = np.sort(np.log(np.abs(ev)))[::-1]
    else:
        raise InputDomainError(f"unknown radial mode {mode!r}")
    mu = np.ascontiguousarray(mu)
    mu.setflags(write=False)
    return RadialCoords(mu)


def log_top_singular_value(state: ProductState) -> float:
    return float(_kernels.log_top_singular(state.w, state.scales, state.rows))


# ---------------------------------------------------------------- gamma_N


@dataclass
class GammaEstimate:
    n_columns: int
    mode: str
    measure: BlockMeasure
    checkpoints: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    counts: np.ndarray
    gamma0: float
    gamma0_stderr: float
    discarded: int = 0
    diagnostics: dict = field(default_factory=dict)

    def rows(self) -> list[tuple]:
        return [
            (int(t), float(m), float(e), int(k))
            for t, m, e, k in zip(self.checkpoints, self.mean, self.stderr, self.counts)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "mean", "stderr", "trials"])
        for t, m, e, k in self.rows():
            w.writerow([t, repr(m), repr(e), k])
        return buf.getvalue()


def default_checkpoints(t_max: int) -> np.ndarray:
    """Ten equally spaced checkpoints ending at ``t_max`` (1e3..1e4 by default)."""
    return np.unique(np.linspace(t_max / 10, t_max, 10).astype(np.int64))


def gamma_ratio(n_columns: int, events, blocks: np.ndarray, checkpoints, block_events=None):
    """``(h_max, mu_max)`` at each checkpoint for explicit inputs.

    ``events`` are 1-based heap columns; ``blocks`` has shape ``(T, 2, 2)``.
    The product has dimension ``n_columns + 1`` and event ``t`` puts its
    block on rows ``(i_t, i_t + 1)``, unless ``block_events`` gives a
    separate column sequence for the product.
    """
    ev = np.asarray(events, np.int64)
    if ev.size and (ev.min() < 1 or ev.max() > n_columns):
        raise InputDomainError(f"column indices must lie in [1, {n_columns}]")
    be = ev if block_events is None else np.asarray(block_events, np.int64)
    if be.shape != ev.shape:
        raise InputDomainError("block sequence length differs from event sequence")
    blocks = np.ascontiguousarray(blocks, dtype=float)
    if blocks.shape != (ev.size, 2, 2):
        raise InputDomainError("need one 2x2 block per event")
    cps = np.asarray(checkpoints, np.int64)
    if cps.size and (cps.min() < 1 or cps.max() > ev.size or np.any(np.diff(cps) <= 0)):
        raise InputDomainError("checkpoints must be increasing and within [1, T]")
    return _kernels.coupled_gamma_run(
        n_columns, ev - 1, blocks, be - 1, cps, REFACTOR_EVERY, LOG_COND_LIMIT
    )


def _extrapolate(ts: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Affine least squares of ``values`` against ``1/T``; intercept and its stderr."""
    x = 1.0 / ts.astype(float)
    a = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(a, values, rcond=None)
    dof = len(x) - 2
    if dof <= 0:
        return float(coef[0]), float("nan")
    resid = values - a @ coef
    s2 = resid @ resid / dof
    cov = s2 * np.linalg.inv(a.T @ a)
    return float(coef[0]), float(math.sqrt(cov[0, 0]))


def gamma_estimator(
    n_columns: int,
    t_max: int,
    trials: int,
    measure: BlockMeasure,
    rng: RngStream,
    mode: str = "coupled",
    checkpoints: Sequence[int] | None = None,
) -> GammaEstimate:
    """Ensemble average of ``h_max / mu_max`` and its ``1/T -> 0`` limit.

    Trial ``k`` uses ``rng.child(k)``.  In ``coupled`` mode one column
    sequence drives both the heap and the product; ``independent`` draws a
    second sequence for the product.
    """
    if n_columns < 2 or t_max < 1 or trials < 1:
        raise InputDomainError("need N >= 2, T >= 1 and at least one trial")
    if mode not in ("coupled", "independent"):
        raise InputDomainError(f"unknown mode {mode!r}")
    cps = default_checkpoints(t_max) if checkpoints is None else np.asarray(checkpoints, np.int64)
    ratios = np.full((trials, cps.size), np.nan)
    discarded = 0
    for k in range(trials):
        stream = rng.child(k)
        ev = stream.columns(n_columns, t_max) + 1
        blocks = measure.sample_array(stream, t_max)
        be = None if mode == "coupled" else stream.columns(n_columns, t_max) + 1
        hmax, mumax = gamma_ratio(n_columns, ev, blocks, cps, be)
        ok = mumax > 0
        discarded += int(np.count_nonzero(~ok))
        ratios[k, ok] = hmax[ok] / mumax[ok]
    counts = np.count_nonzero(~np.isnan(ratios), axis=0)
    mean = np.nanmean(ratios, axis=0)
    std = np.nanstd(ratios, axis=0, ddof=1) if trials > 1 else np.zeros(cps.size)
    stderr = std / np.sqrt(np.maximum(counts, 1))
    g0, g0e = _extrapolate(cps, mean)
    return GammaEstimate(
        n_columns, mode, measure, cps, mean, stderr, counts, g0, g0e, discarded,
        {"discarded_nonpositive_mu": discarded},
    )


# ---------------------------------------------------------------- diagnostics


def ricatti_step(rho: float, block: Sl2Block) -> float:
    """Projective action ``(a rho + b) / (c rho + d)``; ``inf`` at the pole."""
    if math.isinf(rho):
        return block.a / block.c if block.c != 0 else math.inf
    den = block.c * rho + block.d
    if den == 0:
        return math.inf
    return (block.a * rho + block.b) / den


def product_lyapunov(measure, steps: int, rng: RngStream | None = None, renorm_every: int = 8) -> float:
    """Top Lyapunov exponent of an i.i.d. product of 2x2 blocks.

    ``measure`` may be a :class:`BlockMeasure` or a fixed :class:`Sl2Block`.
    """
    if steps < 1000:
        raise InputDomainError("use at least 1000 steps")
    if isinstance(measure, Sl2Block):
        mats = np.broadcast_to(measure.matrix(), (steps, 2, 2))
    else:
        if rng is None:
            raise InputDomainError("a random measure needs an RngStream")
        mats = measure.sample_array(rng, steps)
    v = np.array([1.0, 0.0])
    total = 0.0
    for k in range(steps):
        v = mats[k] @ v
        if (k + 1) % renorm_every == 0:
            nrm = math.hypot(v[0], v[1])
            total += math.log(nrm)
            v /= nrm
    total += math.log(math.hypot(v[0], v[1]))
    return total / steps
