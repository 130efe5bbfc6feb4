"""Toda chain: dynamics, symplectic integration and Lax spectra.

Conventions: ``H = sum p_j^2 / 2 + kappa sum exp(mu_j - mu_{j+1})`` so that

    mu_j'' = kappa (exp(mu_{j-1} - mu_j) - exp(mu_j - mu_{j+1})).

Open chains drop the two boundary exponentials; periodic chains wrap.  A
Hamiltonian written as ``sum (p_j^2 + kappa e^{...})`` maps onto this one by
rescaling time by sqrt(2) and kappa by 1/2.

The Lax matrix has ``-p_j`` on the diagonal and
``a_j = sqrt(kappa) exp((mu_j - mu_{j+1}) / 2)`` next to it; the periodic
bond ``a_N`` sits in the corners as ``a_N / w`` (row 1) and ``w a_N``
(row N).  ``convention="skew"`` puts ``-w a_N`` in row N instead; that
matrix is not conserved by the flow and is kept for comparison only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputDomainError, IntegrationError


class ChainBoundary(str, enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class TodaState:
    mu: np.ndarray
    p: np.ndarray
    kappa: float = 1.0
    bc: ChainBoundary = ChainBoundary.OPEN

    def __post_init__(self):
        mu = np.array(self.mu, float).reshape(-1)
        p = np.array(self.p, float).reshape(-1)
        if mu.shape != p.shape or mu.size == 0:
            raise InputDomainError("mu and p must be non-empty and equally long")
        if self.kappa < 0:
            raise InputDomainError("kappa must be non-negative")
        mu.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "bc", ChainBoundary(self.bc))

    @property
    def n(self) -> int:
        return self.mu.size

    def replace(self, mu=None, p=None) -> "TodaState":
        return TodaState(self.mu if mu is None else mu, self.p if p is None else p, self.kappa, self.bc)

    @classmethod
    def random(cls, n: int, rng, kappa: float = 1.0, bc="periodic", spread: float = 1.0) -> "TodaState":
        g = rng.generator
        return cls(g.normal(0, spread, n), g.normal(0, spread, n), kappa, bc)


def _bond_gaps(mu: np.ndarray, periodic: bool) -> np.ndarray:
    """``mu_j - mu_{j+1}`` for each bond (N-1 open, N periodic)."""
    if periodic:
        return mu - np.roll(mu, -1)
    return mu[:-1] - mu[1:]


def _accel(mu: np.ndarray, kappa: float, periodic: bool) -> np.ndarray:
    f = kappa * np.exp(_bond_gaps(mu, periodic))
    if periodic:
        return np.roll(f, 1) - f
    acc = np.zeros_like(mu)
    acc[:-1] -= f
    acc[1:] += f
    return acc


def toda_rhs(state: TodaState) -> np.ndarray:
    return _accel(state.mu, state.kappa, state.bc is ChainBoundary.PERIODIC)


def hamiltonian(state: TodaState) -> float:
    periodic = state.bc is ChainBoundary.PERIODIC
    pot = state.kappa * np.exp(_bond_gaps(state.mu, periodic)).sum() if state.n > 1 else 0.0
    return float(0.5 * np.dot(state.p, state.p) + pot)


_CBRT2 = 2.0 ** (1.0 / 3.0)
YOSHIDA = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))


@dataclass
class TodaTrajectory:
    times: np.ndarray
    mu: np.ndarray
    p: np.ndarray
    kappa: float
    bc: ChainBoundary

    def state(self, k: int = -1) -> TodaState:
        return TodaState(self.mu[k], self.p[k], self.kappa, self.bc)

    def energies(self) -> np.ndarray:
        return np.array([hamiltonian(self.state(k)) for k in range(self.times.size)])


def toda_integrate(state: TodaState, dt: float, steps: int, sample_every: int | None = None,
                   order: int = 4) -> TodaTrajectory:
    """Symplectic integration (velocity Verlet, or its 4th-order Yoshida triple)."""
    if not dt > 0:
        raise InputDomainError("dt must be positive")
    if steps < 0:
        raise InputDomainError("steps must be non-negative")
    if order not in (2, 4):
        raise InputDomainError("order must be 2 or 4")
    sample_every = sample_every or max(steps, 1)
    periodic = state.bc is ChainBoundary.PERIODIC
    kappa = state.kappa
    weights = YOSHIDA if order == 4 else (1.0,)
    mu = state.mu.copy()
    p = state.p.copy()
    ts, mus, ps = [0.0], [mu.copy()], [p.copy()]
    # overflow is detected below and reported with the last finite state
    with np.errstate(over="ignore", invalid="ignore"):
        acc = _accel(mu, kappa, periodic)
        for k in range(1, steps + 1):
            for wgt in weights:
                h = wgt * dt
                p += 0.5 * h * acc
                mu += h * p
                acc = _accel(mu, kappa, periodic)
                p += 0.5 * h * acc
            if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(p))):
                last = TodaState(mus[-1], ps[-1], kappa, state.bc)
                raise IntegrationError(f"non-finite state at step {k}", last_valid=last,
                                       diagnostics={"step": k, "time": k * dt})
            if k % sample_every == 0 or k == steps:
                ts.append(k * dt)
                mus.append(mu.copy())
                ps.append(p.copy())
    return TodaTrajectory(np.array(ts), np.array(mus), np.array(ps), kappa, state.bc)


def lax_matrix(state: TodaState, w: complex = 1.0, convention: str = "symmetric") -> np.ndarray:
    if w == 0:
        raise InputDomainError("spectral parameter w must be nonzero")
    if convention not in ("symmetric", "skew"):
        raise InputDomainError(f"unknown convention {convention!r}")
    n = state.n
    periodic = state.bc is ChainBoundary.PERIODIC
    if periodic and n < 3:
        raise InputDomainError("periodic Lax matrix needs N >= 3")
    dtype = complex if isinstance(w, complex) and w.imag != 0 else float
    L = np.zeros((n, n), dtype=dtype)
    L[np.arange(n), np.arange(n)] = -state.p
    a = math.sqrt(state.kappa) * np.exp(0.5 * _bond_gaps(state.mu, periodic))
    for j in range(n - 1):
        L[j, j + 1] = L[j + 1, j] = a[j]
    if periodic:
        L[0, n - 1] = a[n - 1] / w
        L[n - 1, 0] = (w if convention == "symmetric" else -w) * a[n - 1]
    return L


def _sorted_spectrum(m: np.ndarray) -> np.ndarray:
    if np.isrealobj(m) and np.allclose(m, m.T, rtol=0, atol=0):
        return np.linalg.eigvalsh(m)
    ev = np.linalg.eigvals(m)
    return ev[np.lexsort((ev.imag, ev.real))]


def monodromy_trace(state: TodaState, lam: float) -> float:
    """Trace of the product of 2x2 transfer matrices around the ring.

    ``T_j = [[lam + p_j, -a_{j-1}], [a_j, 0]] / a_j`` carries
    ``(psi_j, psi_{j-1})`` to ``(psi_{j+1}, psi_j)`` for ``L psi = lam psi``.
    """
    if state.bc is not ChainBoundary.PERIODIC:
        raise InputDomainError("monodromy needs a periodic chain")
    if state.kappa == 0:
        raise InputDomainError("monodromy needs kappa > 0")
    a = math.sqrt(state.kappa) * np.exp(0.5 * _bond_gaps(state.mu, True))
    m = np.eye(2)
    for j in range(state.n):
        t = np.array([[lam + state.p[j], -a[j - 1]], [a[j], 0.0]]) / a[j]
        m = t @ m
    return float(np.trace(m))


def curve_structure(state: TodaState, lam: complex, convention: str = "symmetric",
                    ws=(1.0, 2.0, 0.5, 3.0)) -> dict:
    """Fit ``det(L(w) - lam) = A + B w + C / w`` on three ``w`` and test a fourth."""
    ws = [complex(w) for w in ws]
    n = state.n
    dets = [np.linalg.det(lax_matrix(state, w if w.imag else w.real, convention) - lam * np.eye(n))
            for w in ws]
    m = np.array([[1.0, w, 1.0 / w] for w in ws[:3]])
    a, b, c = np.linalg.solve(m, np.array(dets[:3], complex))
    pred = a + b * ws[3] + c / ws[3]
    scale = max(abs(d) for d in dets) or 1.0
    return {"A": complex(a), "B": complex(b), "C": complex(c),
            "fit_residual": float(abs(pred - dets[3]) / scale)}


@dataclass
class IsospectralReport:
    drift: float
    initial: np.ndarray
    final: np.ndarray
    energy_drift: float
    momentum_drift: float
    curve: dict = field(default_factory=dict)
    monodromy_drift: float | None = None


def isospectrality_check(state: TodaState, w: complex = 1.0, dt: float = 1e-3, steps: int = 10_000,
                         convention: str = "symmetric", order: int = 4,
                         probe_lambdas=(-1.3, 0.4, 2.1)) -> IsospectralReport:
    traj = toda_integrate(state, dt, steps, order=order)
    end = traj.state(-1)
    e0 = _sorted_spectrum(lax_matrix(state, w, convention))
    e1 = _sorted_spectrum(lax_matrix(end, w, convention))
    h0, h1 = hamiltonian(state), hamiltonian(end)
    report = IsospectralReport(
        drift=float(np.max(np.abs(e1 - e0))),
        initial=e0,
        final=e1,
        energy_drift=abs(h1 - h0) / max(abs(h0), 1e-300),
        momentum_drift=float(abs(end.p.sum() - state.p.sum())),
    )
    if state.bc is ChainBoundary.PERIODIC and state.kappa > 0:
        report.curve = curve_structure(state, probe_lambdas[0], convention)
        report.monodromy_drift = max(
            abs(monodromy_trace(end, lam) - monodromy_trace(state, lam)) for lam in probe_lambdas
        )
    return report


def time_reversal_error(state: TodaState, dt: float, steps: int) -> float:
    """Integrate forward, flip momenta, integrate again, flip back; max deviation."""
    fwd = toda_integrate(state, dt, steps).state(-1)
    back = toda_integrate(fwd.replace(p=-fwd.p), dt, steps).state(-1)
    return float(max(np.max(np.abs(back.mu - state.mu)), np.max(np.abs(-back.p - state.p))))
