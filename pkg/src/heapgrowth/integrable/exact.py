"""Exact arithmetic: rational polynomials, Gaussian rationals, exponential sums."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable

from ..errors import InputDomainError


class GaussianRational:
    """``re + i im`` with both parts rational."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def coerce(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return GaussianRational(Fraction(x.real), Fraction(x.imag))
        return GaussianRational(Fraction(x), 0)

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.coerce(other))

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero")
        p = self * o.conjugate()
        return GaussianRational(p.re / n, p.im / n)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


def _is_zero(c) -> bool:
    return c == 0


def fraction_str(x) -> str:
    """``num/den`` text form used in every exported file."""
    if isinstance(x, GaussianRational):
        return f"{fraction_str(x.re)}+{fraction_str(x.im)}i"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


class RationalPoly:
    """Dense univariate polynomial with exact coefficients (ascending order).

    Coefficients are :class:`~fractions.Fraction` by default; any exact
    field element with ``+ - * /`` works, which is how Gaussian-rational
    polynomials are built.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [c if isinstance(c, GaussianRational) else Fraction(c) for c in coeffs]
        while cs and _is_zero(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def z(cls) -> "RationalPoly":
        return cls([0, 1])

    @classmethod
    def const(cls, c) -> "RationalPoly":
        return cls([c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def _lift(self, other) -> "RationalPoly":
        return other if isinstance(other, RationalPoly) else RationalPoly([other])

    def __add__(self, other):
        o = self._lift(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o.coeffs + (Fraction(0),) * (n - len(o.coeffs))
        return RationalPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        if self.is_zero() or o.is_zero():
            return RationalPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if _is_zero(a):
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] = out[i + j] + a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = RationalPoly([1])
        for _ in range(k):
            out = out * self
        return out

    def divmod(self, other: "RationalPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        lead = other.coeffs[-1]
        dq = len(rem) - len(other.coeffs) + 1
        quot = [Fraction(0)] * max(dq, 0)
        for k in range(dq - 1, -1, -1):
            c = rem[k + len(other.coeffs) - 1] / lead
            quot[k] = c
            if not _is_zero(c):
                for j, b in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * b
        return RationalPoly(quot), RationalPoly(rem)

    def derivative(self, k: int = 1) -> "RationalPoly":
        cs = list(self.coeffs)
        for _ in range(k):
            cs = [i * c for i, c in enumerate(cs)][1:]
        return RationalPoly(cs)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def scale_variable(self, factor) -> "RationalPoly":
        """``p(factor * z)``."""
        return RationalPoly(c * factor ** i for i, c in enumerate(self.coeffs))

    def is_integral(self) -> bool:
        return all(isinstance(c, Fraction) and c.denominator == 1 for c in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RationalPoly([other])
        if not isinstance(other, RationalPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def to_json(self) -> list[str]:
        return [fraction_str(c) for c in self.coeffs]

    def as_dict(self) -> dict[int, str]:
        """Nonzero coefficients keyed by power."""
        return {i: fraction_str(c) for i, c in enumerate(self.coeffs) if not _is_zero(c)}

    def __repr__(self):
        if self.is_zero():
            return "0"
        terms = []
        for i, c in reversed(list(enumerate(self.coeffs))):
            if _is_zero(c):
                continue
            mono = "" if i == 0 else ("z" if i == 1 else f"z^{i}")
            if i and c == 1:
                terms.append(mono)
            else:
                coef = str(c) if isinstance(c, Fraction) and c >= 0 else f"({c})"
                terms.append(coef + (f"*{mono}" if mono else ""))
        return " + ".join(terms)


class ExpPoly:
    """Finite sum ``sum_k c_k(s) exp(a_k s)`` with rational ``a_k``.

    ``c_k`` are :class:`RationalPoly` in ``s``.  The class is closed under
    ``+ - *`` and ``d/ds``, which is all a Hankel determinant of derivatives
    needs.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        clean = {}
        for a, c in (terms or {}).items():
            c = c if isinstance(c, RationalPoly) else RationalPoly([c])
            if not c.is_zero():
                clean[Fraction(a)] = c
        self.terms = clean

    @classmethod
    def exp(cls, a, coeff=1) -> "ExpPoly":
        return cls({Fraction(a): RationalPoly([coeff])})

    @classmethod
    def poly(cls, p) -> "ExpPoly":
        p = p if isinstance(p, RationalPoly) else RationalPoly(p)
        return cls({Fraction(0): p})

    @classmethod
    def one(cls) -> "ExpPoly":
        return cls.exp(0)

    def is_zero(self) -> bool:
        return not self.terms

    def _lift(self, other):
        if isinstance(other, ExpPoly):
            return other
        if isinstance(other, RationalPoly):
            return ExpPoly.poly(other)
        if isinstance(other, (int, Fraction)):
            return ExpPoly({0: other})
        raise InputDomainError(f"cannot combine ExpPoly with {type(other).__name__}")

    def __add__(self, other):
        o = self._lift(other)
        out = dict(self.terms)
        for a, c in o.terms.items():
            out[a] = out[a] + c if a in out else c
        return ExpPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly({a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        out: dict = {}
        for (a, c), (b, d) in itertools.product(self.terms.items(), o.terms.items()):
            k = a + b
            out[k] = out[k] + c * d if k in out else c * d
        return ExpPoly(out)

    __rmul__ = __mul__

    def derivative(self, k: int = 1) -> "ExpPoly":
        out = self
        for _ in range(k):
            out = ExpPoly({a: c.derivative() + c * a for a, c in out.terms.items()})
        return out

    def __call__(self, s: float) -> float:
        return math.fsum(float(c(s)) * math.exp(float(a) * s) for a, c in self.terms.items())

    def __eq__(self, other):
        try:
            o = self._lift(other)
        except InputDomainError:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for a in sorted(self.terms):
            c = self.terms[a]
            e = "" if a == 0 else f"exp({a}*s)"
            parts.append(f"[{c}]" + (f"*{e}" if e else ""))
        return " + ".join(parts)


def determinant(m: list[list]):
    """Exact determinant by permutation expansion (small matrices only)."""
    n = len(m)
    if n == 0:
        return 1
    if n > 7:
        raise InputDomainError("permutation expansion is limited to 7x7")
    total = None
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = m[0][perm[0]]
        for i in range(1, n):
            term = term * m[i][perm[i]]
        if inv % 2:
            term = -term
        total = term if total is None else total + term
    return total
