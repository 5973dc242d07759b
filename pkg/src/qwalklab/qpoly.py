"""Exact integer-coefficient polynomials in the formal variable q.

A polynomial c_0 + c_1 q + ... + c_n q^n is stored as the coefficient
tuple (c_0, c_1, ..., c_n) of Python big integers, with trailing zeros
stripped so the leading coefficient is nonzero; the zero polynomial is
the empty tuple.  Evaluation at an int or Fraction is exact, so these
polynomials double as generating tables for exact rational constants.

The operators +, -, * and ** are overloaded; ints coerce to constant
polynomials on either side.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

Scalar = Union[int, Fraction]


class QPolynomial:
    """Polynomial in q with (big) integer coefficients, index i = coeff of q^i."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int] = ()):
        cs = list(coeffs)
        for c in cs:
            if not isinstance(c, int):
                raise TypeError(f"integer coefficient expected, got {type(c).__name__}")
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[int, ...] = tuple(cs)

    @classmethod
    def zero(cls) -> "QPolynomial":
        return cls()

    @classmethod
    def one(cls) -> "QPolynomial":
        return cls((1,))

    @classmethod
    def q(cls) -> "QPolynomial":
        return cls((0, 1))

    @classmethod
    def monomial(cls, coeff: int, exponent: int) -> "QPolynomial":
        """Return coeff * q^exponent."""
        if exponent < 0:
            raise ValueError("exponent must be >= 0")
        return cls((0,) * exponent + (coeff,))

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading_coefficient(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, e: int) -> int:
        if e < 0:
            raise IndexError("no negative exponents")
        return self.coeffs[e] if e < len(self.coeffs) else 0

    @staticmethod
    def _coerce(other) -> "QPolynomial | None":
        if isinstance(other, QPolynomial):
            return other
        if isinstance(other, int):
            return QPolynomial((other,))
        return None

    def __add__(self, other) -> "QPolynomial":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = max(len(self.coeffs), len(o.coeffs))
        return QPolynomial(
            tuple(self[i] + o[i] for i in range(n))
        )

    __radd__ = __add__

    def __neg__(self) -> "QPolynomial":
        return QPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "QPolynomial":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "QPolynomial":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "QPolynomial":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return QPolynomial()
        out = [0] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] += a * b
        return QPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "QPolynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a natural number")
        result = QPolynomial.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, x: Scalar) -> Scalar:
        """Evaluate exactly at an int or Fraction (Horner scheme)."""
        acc: Scalar = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def _term(self, c: int, e: int) -> str:
        if e == 0:
            return str(abs(c))
        body = "q" if e == 1 else f"q^{e}"
        a = abs(c)
        return body if a == 1 else f"{a}{body}"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for e in range(self.degree, -1, -1):
            c = self[e]
            if c == 0:
                continue
            if not parts:
                sign = "-" if c < 0 else ""
                parts.append(sign + self._term(c, e))
            else:
                parts.append(("- " if c < 0 else "+ ") + self._term(c, e))
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"QPolynomial({self.coeffs!r})"
