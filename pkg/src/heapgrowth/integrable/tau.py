"""Tau functions of the open Toda chain.

``tau_j`` is the ``j x j`` Hankel determinant of ``phi, phi', phi'', ...``
and the positions are ``mu_j = ln(tau_{j-1} / tau_j)``.  With
``tau_0 = 1`` these solve ``mu_j'' = e^{mu_{j-1} - mu_j} - e^{mu_j - mu_{j+1}}``
(unit coupling) on a chain whose length is the rank of ``phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InputDomainError
from .exact import ExpPoly, RationalPoly, determinant


@dataclass(frozen=True)
class TauTable:
    phi: ExpPoly
    taus: tuple

    def __getitem__(self, j: int) -> ExpPoly:
        return self.taus[j]

    @property
    def j_max(self) -> int:
        return len(self.taus) - 1

    def rank(self) -> int:
        """Largest ``j`` with ``tau_j`` not identically zero."""
        r = 0
        for j, t in enumerate(self.taus):
            if not t.is_zero():
                r = j
            else:
                break
        return r


def tau_from_phi(phi, j_max: int) -> TauTable:
    if isinstance(phi, RationalPoly):
        phi = ExpPoly.poly(phi)
    if not isinstance(phi, ExpPoly):
        raise InputDomainError("phi must be an ExpPoly or RationalPoly")
    if j_max < 0:
        raise InputDomainError("j_max must be non-negative")
    ders = [phi]
    for _ in range(max(2 * j_max - 2, 0)):
        ders.append(ders[-1].derivative())
    taus = [ExpPoly.one()]
    for j in range(1, j_max + 1):
        m = [[ders[i + k] for k in range(j)] for i in range(j)]
        taus.append(determinant(m))
    return TauTable(phi, tuple(taus))


def bilinear_residual(table: TauTable, j: int) -> ExpPoly:
    """``tau_j'' tau_j - (tau_j')^2 - tau_{j+1} tau_{j-1}``; identically zero."""
    if not 1 <= j < table.j_max:
        raise InputDomainError(f"need 1 <= j < {table.j_max}")
    t = table[j]
    d1 = t.derivative()
    return t.derivative(2) * t - d1 * d1 - table[j + 1] * table[j - 1]


def positions(table: TauTable, s: float, n: int | None = None) -> list[float]:
    """``mu_1..mu_n`` at ``s`` (``n`` defaults to the rank)."""
    n = table.rank() if n is None else n
    vals = [table[j](s) for j in range(n + 1)]
    if any(v <= 0 for v in vals):
        raise InputDomainError("tau values must be positive to take logs")
    return [math.log(vals[j - 1] / vals[j]) for j in range(1, n + 1)]
