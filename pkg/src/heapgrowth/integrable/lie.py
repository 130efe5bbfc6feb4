"""Exact checks of the sl_2 / sl_3 matrix relations behind the heap geometry."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


def _m(rows) -> np.ndarray:
    return np.array([[Fraction(x) for x in r] for r in rows], dtype=object)


def unit(n: int, i: int, j: int) -> np.ndarray:
    """Matrix unit ``E_ij`` (1-based) as an exact object array."""
    e = _m([[0] * n for _ in range(n)])
    e[i - 1, j - 1] = Fraction(1)
    return e


def diag(*vals) -> np.ndarray:
    n = len(vals)
    d = _m([[0] * n for _ in range(n)])
    for k, v in enumerate(vals):
        d[k, k] = Fraction(v)
    return d


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a.dot(b) - b.dot(a)


def sl2_generators() -> dict[str, np.ndarray]:
    return {"X1": unit(2, 1, 2), "X2": unit(2, 2, 1), "X3": diag(1, -1)}


def sl3_generators() -> dict[str, np.ndarray]:
    """Two shifted sl_2 triplets plus the corner generators."""
    return {
        "X1": unit(3, 1, 2), "X2": unit(3, 2, 1), "X3": diag(1, -1, 0),
        "Y1": unit(3, 2, 3), "Y2": unit(3, 3, 2), "Y3": diag(0, 1, -1),
        "X4": unit(3, 1, 3), "Y4": unit(3, 3, 1),
    }


# (left, right, coefficient, result): [left, right] = coefficient * result
SL3_RELATIONS = [
    ("X1", "X2", 1, "X3"), ("X1", "X3", -2, "X1"), ("X2", "X3", 2, "X2"),
    ("Y1", "Y2", 1, "Y3"), ("Y1", "Y3", -2, "Y1"), ("Y2", "Y3", 2, "Y2"),
    ("X1", "Y3", 1, "X1"), ("X2", "Y3", -1, "X2"),
    ("Y1", "X3", 1, "Y1"), ("Y2", "X3", -1, "Y2"),
    ("X1", "Y1", 1, "X4"), ("Y2", "X2", 1, "Y4"),
]


def casimir(g: dict[str, np.ndarray]) -> np.ndarray:
    """Quadratic Casimir of sl_3 evaluated in the defining representation."""
    x1, x2, x3, y1, y2, y3, x4, y4 = (g[k] for k in ("X1", "X2", "X3", "Y1", "Y2", "Y3", "X4", "Y4"))
    pair = lambda a, b: a.dot(b) + b.dot(a)  # noqa: E731
    return (pair(x1, x2) + pair(y1, y2) + pair(x4, y4)
            + Fraction(2, 3) * (x3.dot(x3) + y3.dot(y3) + x3.dot(y3)))


@dataclass
class LieReport:
    checks: dict = field(default_factory=dict)
    casimir_scalar: Fraction | None = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values()) and self.casimir_scalar is not None


def lie_checks() -> LieReport:
    report = LieReport()
    g2 = sl2_generators()
    for left, right, k, res in SL3_RELATIONS[:3]:
        report.checks[f"sl2 [{left},{right}] = {k} {res}"] = bool(
            np.all(commutator(g2[left], g2[right]) == k * g2[res])
        )
    g3 = sl3_generators()
    for left, right, k, res in SL3_RELATIONS:
        report.checks[f"sl3 [{left},{right}] = {k} {res}"] = bool(
            np.all(commutator(g3[left], g3[right]) == k * g3[res])
        )
    # the two corner generators are also plain products here
    report.checks["X4 = X1 Y1"] = bool(np.all(g3["X1"].dot(g3["Y1"]) == g3["X4"]))
    report.checks["Y4 = Y2 X2"] = bool(np.all(g3["Y2"].dot(g3["X2"]) == g3["Y4"]))
    c = casimir(g3)
    scalar = c[0, 0]
    is_scalar = bool(np.all(c == scalar * diag(1, 1, 1)))
    report.checks["Casimir is scalar"] = is_scalar
    report.casimir_scalar = scalar if is_scalar else None
    return report
