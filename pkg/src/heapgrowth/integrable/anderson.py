"""Tight-binding chain versus its transfer-matrix recursion.

The open chain ``psi_{j-1} + U_j psi_j + psi_{j+1} = E psi_j`` has
Hamiltonian ``tridiag(1, U, 1)``.  Starting from ``(psi_1, psi_0) = (1, 0)``
the 2x2 transfer matrices ``[[E - U_j, -1], [1, 0]]`` produce
``psi_{N+1}``, which vanishes exactly when ``E`` is an eigenvalue.

Double precision is not enough to see this at the 1e-8 level: the
recursion amplifies the eigenvalue's rounding error by the size of the
orbit.  So eigenvalues from LAPACK are polished by Rayleigh-quotient
iteration in ``mpmath`` before the recursion (also in ``mpmath``) is run.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from ..errors import InputDomainError, NumericalFailure


def anderson_matrix(u) -> np.ndarray:
    u = np.asarray(u, float)
    n = u.size
    return np.diag(u) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)


def random_potential(n: int, rng, width: float = 2.0) -> np.ndarray:
    """Uniform disorder on ``[-width/2, width/2]``."""
    return rng.generator.uniform(-width / 2, width / 2, n)


def _tridiag_solve(diag, rhs):
    """Solve ``(tridiag(1, diag, 1)) x = rhs`` by Thomas elimination (mp)."""
    n = len(diag)
    c = [mpmath.mpf(0)] * n
    d = [mpmath.mpf(0)] * n
    denom = diag[0]
    c[0] = 1 / denom
    d[0] = rhs[0] / denom
    for i in range(1, n):
        denom = diag[i] - c[i - 1]
        c[i] = 1 / denom if i < n - 1 else mpmath.mpf(0)
        d[i] = (rhs[i] - d[i - 1]) / denom
    x = [mpmath.mpf(0)] * n
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _rayleigh(u, x):
    n = len(u)
    num = mpmath.mpf(0)
    for i in range(n):
        hx = u[i] * x[i]
        if i:
            hx += x[i - 1]
        if i < n - 1:
            hx += x[i + 1]
        num += x[i] * hx
    return num / mpmath.fsum(v * v for v in x)


def refine_eigenvalue(u_mp, e0: float, v0, iterations: int = 1):
    """Rayleigh-quotient iteration on ``tridiag(1, U, 1)`` from ``(e0, v0)``."""
    x = [mpmath.mpf(float(v)) for v in v0]
    e = _rayleigh(u_mp, x)
    for _ in range(iterations):
        try:
            x = _tridiag_solve([ui - e for ui in u_mp], x)
        except ZeroDivisionError:
            # a zero pivot in mp arithmetic: e already annihilates the matrix
            return e
        nrm = mpmath.sqrt(mpmath.fsum(v * v for v in x))
        x = [v / nrm for v in x]
        e = _rayleigh(u_mp, x)
    return e


def transfer_residual(u, e) -> float:
    """``|psi_{N+1}| / ||(psi_1..psi_N)||`` from the transfer recursion."""
    psi_prev, psi = 0 * e, 1 + 0 * e
    total = psi * psi
    for j, uj in enumerate(u):
        psi_prev, psi = psi, (e - uj) * psi - psi_prev
        if j < len(u) - 1:
            total += psi * psi
    return float(abs(psi) / (total ** 0.5 if not isinstance(total, mpmath.mpf) else mpmath.sqrt(total)))


@dataclass
class AndersonReport:
    energies: np.ndarray
    residuals: np.ndarray
    precision: str

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())


def anderson_duality_check(u, precision: str = "mp", dps: int = 32) -> AndersonReport:
    u = np.asarray(u, float).reshape(-1)
    if u.size == 0:
        raise InputDomainError("need at least one site")
    if precision not in ("mp", "double"):
        raise InputDomainError("precision must be 'mp' or 'double'")
    if u.size == 1:
        energies, vecs = u.copy(), np.ones((1, 1))
    else:
        energies, vecs = eigh_tridiagonal(u, np.ones(u.size - 1))
    if precision == "double":
        res = np.array([transfer_residual(u, float(e)) for e in energies])
        return AndersonReport(energies, res, precision)
    with mpmath.workdps(dps):
        u_mp = [mpmath.mpf(float(x)) for x in u]
        if u.size == 1:
            refined = [u_mp[0]]
        else:
            refined = [refine_eigenvalue(u_mp, e, vecs[:, k]) for k, e in enumerate(energies)]
        for a, b in zip(refined, refined[1:]):
            if not b > a:
                raise NumericalFailure("refinement merged two eigenvalues",
                                       diagnostics={"energies": energies.tolist()})
        res = np.array([transfer_residual(u_mp, e) for e in refined])
    return AndersonReport(energies, res, precision)
