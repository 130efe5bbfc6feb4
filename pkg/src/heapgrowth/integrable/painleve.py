"""Yablonskii-Vorob'ev polynomials and rational Painleve II solutions."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvariantViolation
from .exact import GaussianRational, RationalPoly

Z = RationalPoly.z()


def yablonskii(j_max: int) -> list[RationalPoly]:
    """``Q_0 .. Q_{j_max}`` from

        Q_{j+1} Q_{j-1} = z Q_j^2 - 4 (Q_j'' Q_j - Q_j'^2),   Q_{-1} = Q_0 = 1, Q_1 = z.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    qs = [RationalPoly([1]), Z]
    for j in range(1, j_max):
        q = qs[j]
        num = Z * q * q - 4 * (q.derivative(2) * q - q.derivative() ** 2)
        quot, rem = num.divmod(qs[j - 1])
        if not rem.is_zero():
            raise InvariantViolation(f"Q_{j + 1}: division left remainder {rem!r}")
        qs.append(quot)
    return qs


def _q(qs: list[RationalPoly], j: int) -> RationalPoly:
    return RationalPoly([1]) if j == -1 else qs[j]


def painleve2_check(j: int, qs: list[RationalPoly] | None = None) -> RationalPoly:
    """Cleared residual of ``w'' = 2 w^3 + z w + j`` for ``w = (ln Q_{j-1}/Q_j)'``.

    With ``w = N / D`` the equation times ``D^3`` reads
    ``(N''D - ND'')D - 2D'(N'D - ND') - 2N^3 - zND^2 - jD^3 = 0``.
    """
    if j < 0:
        raise ValueError("j must be non-negative")
    qs = qs if qs is not None and len(qs) > j else yablonskii(max(j, 1))
    a, b = _q(qs, j - 1), _q(qs, j)
    n = a.derivative() * b - b.derivative() * a
    d = a * b
    n1, n2, d1, d2 = n.derivative(), n.derivative(2), d.derivative(), d.derivative(2)
    lhs = (n2 * d - n * d2) * d - 2 * d1 * (n1 * d - n * d1)
    return lhs - 2 * n ** 3 - Z * n * d * d - j * d ** 3


@dataclass
class GaugeReport:
    amplitude: GaussianRational
    exponent_sign: int
    residuals: dict = field(default_factory=dict)
    boundary_ok: bool = False

    @property
    def passed(self) -> bool:
        return self.boundary_ok and all(r.is_zero() for r in self.residuals.values())


def sigma_gauge_check(j_max: int, amplitude=GaussianRational(0, 1) / 2, exponent_sign: int = 1,
                      qs: list[RationalPoly] | None = None) -> GaugeReport:
    """Check ``sigma_j = A^{s j^2} Q_j`` against

        sigma_j'' sigma_j - sigma_j'^2 = sigma_{j+1} sigma_{j-1} - pq sigma_j^2

    for ``j = 0 .. j_max - 1`` with ``pq = -z/4`` and boundary data
    ``sigma_{-1} = p``, ``sigma_0 = 1``, ``sigma_1 = q``.  ``A = i/2`` with
    ``s = +1`` passes; the residual of each relation is returned.
    """
    amp = GaussianRational.coerce(amplitude)
    qs = qs if qs is not None and len(qs) > j_max else yablonskii(max(j_max, 1))

    def sigma(j: int) -> RationalPoly:
        c = amp ** (exponent_sign * j * j)
        return RationalPoly(c * x for x in _q(qs, j).coeffs)

    pq = RationalPoly([0, GaussianRational(-1, 0) / 4])
    p, q = sigma(-1), sigma(1)
    report = GaugeReport(amp, exponent_sign)
    report.boundary_ok = (p * q == pq) and sigma(0) == RationalPoly([1])
    for j in range(0, j_max):
        s = sigma(j)
        lhs = s.derivative(2) * s - s.derivative() ** 2
        rhs = sigma(j + 1) * sigma(j - 1) - pq * s * s
        report.residuals[j] = lhs - rhs
    return report
