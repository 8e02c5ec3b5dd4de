"""Exact real values of the form sum_i q_i * sqrt(m_i), q_i rational, m_i squarefree.

Dirichlet coefficients sourced from integer Hecke data are exact numbers of
this shape (the analytic normalization divides integers by p^(half-odd)
powers).  Storing them exactly and converting to floating point only at
evaluation time keeps coefficient tables valid at any working precision.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .arith import factorize

__all__ = ["ExactReal"]


def _reduce_surd(m):
    """m -> (k, d) with sqrt(m) = k*sqrt(d), d squarefree."""
    if m <= 0:
        raise ValueError("surd radicand must be positive")
    if m == 1:
        return 1, 1
    k, d = 1, 1
    for p, e in factorize(m):
        k *= p ** (e // 2)
        if e % 2:
            d *= p
    return k, d


class ExactReal:
    """Exact element of a real multiquadratic field, as {radicand: rational}."""

    __slots__ = ("terms",)

    def __init__(self, rational=0, surd=1):
        q = Fraction(rational)
        terms = {}
        if q:
            k, d = _reduce_surd(surd)
            terms[d] = q * k
        self.terms = terms

    @classmethod
    def _from_terms(cls, terms):
        obj = cls.__new__(cls)
        obj.terms = {m: q for m, q in terms.items() if q}
        return obj

    # -- predicates --------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_rational(self):
        return all(m == 1 for m in self.terms)

    def as_fraction(self):
        if not self.terms:
            return Fraction(0)
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self.terms[1]

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self.terms)
        for m, q in other.terms.items():
            terms[m] = terms.get(m, Fraction(0)) + q
        return ExactReal._from_terms(terms)

    __radd__ = __add__

    def __neg__(self):
        return ExactReal._from_terms({m: -q for m, q in self.terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = {}
        for m1, q1 in self.terms.items():
            for m2, q2 in other.terms.items():
                k, d = _reduce_surd(m1 * m2)
                terms[d] = terms.get(d, Fraction(0)) + q1 * q2 * k
        return ExactReal._from_terms(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * Fraction(1, 1) / ExactReal(other)
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError
        if other.is_rational():
            inv = 1 / other.as_fraction()
            return ExactReal._from_terms({m: q * inv for m, q in self.terms.items()})
        if len(other.terms) == 1:
            ((m, q),) = other.terms.items()
            # 1/(q sqrt(m)) = sqrt(m)/(q m)
            return self * ExactReal(Fraction(1) / (q * m), m)
        raise ValueError("division by a multi-term surd is not supported")

    def __pow__(self, e):
        if e < 0:
            raise ValueError("negative powers not supported")
        out = ExactReal(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- conversions -------------------------------------------------------

    def to_mpfr(self):
        """Value under the current gmpy2 context precision."""
        total = mpfr(0)
        for m, q in sorted(self.terms.items()):
            t = mpfr(q.numerator) / mpfr(q.denominator)
            if m != 1:
                t *= gmpy2.sqrt(mpfr(m))
            total += t
        return total

    def __float__(self):
        return float(
            sum(
                float(q.numerator) / float(q.denominator) * (m**0.5)
                for m, q in self.terms.items()
            )
        )

    def __repr__(self):
        if not self.terms:
            return "ExactReal(0)"
        parts = []
        for m, q in sorted(self.terms.items()):
            parts.append(str(q) if m == 1 else f"{q}*sqrt({m})")
        return f"ExactReal({' + '.join(parts)})"

    # -- serialization (cache / reports) ------------------------------------

    def serialize(self):
        return [[m, q.numerator, q.denominator] for m, q in sorted(self.terms.items())]

    @classmethod
    def deserialize(cls, data):
        terms = {int(m): Fraction(int(n), int(d)) for m, n, d in data}
        return cls._from_terms(terms)


def _coerce(x):
    if isinstance(x, ExactReal):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactReal(x)
    return NotImplemented
