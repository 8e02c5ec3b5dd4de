"""Satake parameters of a genus-2 eigenform from Hecke eigenvalue pairs.

From (lambda(p), lambda(p^2)) the degree-4 "spin" parameter quartic is
formed directly: writing P = p^(2k-3), the quantities

    A = lambda(p)^2 - lambda(p^2) - (2 + 1/p) P
    B = lambda(p)^2 - 4P - 2A

are integers, and the four products {a0, a0*a1, a0*a2, a0*a1*a2} are the
roots of the quartic with elementary symmetric values

    e1 = lambda(p),  e2 = A + 2P,  e3 = P*lambda(p),  e4 = P^2.

We solve the analytically normalized version (roots scaled by P^(-1/2),
coefficients O(1)), pair roots whose product is 1, and read off the triple.
No elimination theory is needed because A and B are linear in the data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from .arith import is_prime
from .exact import ExactReal
from .numerics import PrecisionContext, poly_roots

__all__ = [
    "HeckeDatum",
    "SatakeTriple",
    "solve_satake",
    "local_factor",
    "local_factor_exact",
    "parse_eigenvalue_table",
    "serialize_eigenvalue_table",
    "SatakeError",
    "RamanujanWarning",
]


class SatakeError(ValueError):
    pass


class RamanujanWarning(UserWarning):
    """Satake parameters off the unit circle (data violates the bound)."""


@dataclass(frozen=True)
class HeckeDatum:
    p: int
    lambda_p: int
    lambda_p2: int
    k: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.k % 2:
            raise ValueError("weight must be even")

    @property
    def big_p(self):
        return self.p ** (2 * self.k - 3)

    @property
    def a_value(self):
        """A = lambda(p)^2 - lambda(p^2) - (2 + 1/p) P, an integer."""
        pp = self.big_p
        return self.lambda_p**2 - self.lambda_p2 - 2 * pp - pp // self.p

    @property
    def b_value(self):
        """B = lambda(p)^2 - 4P - 2A, an integer."""
        return self.lambda_p**2 - 4 * self.big_p - 2 * self.a_value


@dataclass(frozen=True)
class SatakeTriple:
    """Analytically normalized parameters: alpha0^2 alpha1 alpha2 = 1."""

    alpha0: mpc
    alpha1: mpc
    alpha2: mpc
    p: int
    k: int

    def moduli_deviation(self):
        return max(abs(abs(a) - 1) for a in (self.alpha0, self.alpha1, self.alpha2))

    def spin_parameters(self):
        a0, a1, a2 = self.alpha0, self.alpha1, self.alpha2
        return [a0, a0 * a1, a0 * a2, a0 * a1 * a2]


def solve_satake(h, ctx):
    """Satake triple for one prime, by quartic root-finding plus pairing.

    Raises SatakeError if no root pairing multiplies to 1 within tolerance
    or if the reconstructed eigenvalues do not match the inputs.  Emits a
    RamanujanWarning (and proceeds) when |alpha_j| deviates from 1.
    """
    with ctx.active(16):
        sqrt_p_pow = gmpy2.sqrt(mpfr(h.big_p))
        e1 = mpfr(h.lambda_p) / sqrt_p_pow
        e2q = Fraction(h.a_value, h.big_p) + 2
        e2 = mpfr(e2q.numerator) / mpfr(e2q.denominator)
        # palindromic analytic quartic: x^4 - e1 x^3 + e2 x^2 - e1 x + 1
        roots = poly_roots([mpfr(1), -e1, e2, -e1, mpfr(1)], ctx)

        tol = mpfr(2) ** (-ctx.working_bits // 2 + 8)
        first = roots[0]
        partner = None
        best = mpfr("inf")
        for r in roots[1:]:
            dev = abs(first * r - 1)
            if dev < best:
                best, partner = dev, r
        if best > max(tol, mpfr(2) ** (-ctx.working_bits // 4)):
            raise SatakeError(
                f"p={h.p}: no root pairing with product p^(2k-3); best deviation {float(best):.3e}"
            )
        rest = [r for r in roots[1:] if r is not partner]
        alpha0 = first
        alpha1 = rest[0] / alpha0
        alpha2 = rest[1] / alpha0
        # canonical Weyl representative: Im(alpha0) >= 0, alphas by argument
        if alpha0.imag < 0:
            alpha0, alpha1, alpha2 = (
                gmpy2.mpc(alpha0.real, -alpha0.imag),
                gmpy2.mpc(alpha1.real, -alpha1.imag),
                gmpy2.mpc(alpha2.real, -alpha2.imag),
            )
        if gmpy2.atan2(alpha1.imag, alpha1.real) > gmpy2.atan2(alpha2.imag, alpha2.real):
            alpha1, alpha2 = alpha2, alpha1
        triple = SatakeTriple(alpha0, alpha1, alpha2, h.p, h.k)

        # round-trip through the defining system
        a_rec = (alpha1 + alpha2 + 1 / alpha1 + 1 / alpha2) * h.big_p
        b_rec = (alpha1 * alpha2 + 1 / (alpha1 * alpha2) + alpha1 / alpha2 + alpha2 / alpha1) * h.big_p
        lp2_rec = 4 * h.big_p + 2 * a_rec + b_rec
        lpp_rec = (2 * h.big_p - h.big_p // h.p) + a_rec + b_rec
        scale = mpfr(h.lambda_p) ** 2
        resid = max(abs(lp2_rec - scale), abs(lpp_rec - h.lambda_p2))
        if resid > mpfr(2) ** (-ctx.working_bits // 2) * max(scale, mpfr(1)):
            raise SatakeError(
                f"p={h.p}: eigenvalue reconstruction residual {float(resid):.3e}"
            )

        dev = triple.moduli_deviation()
        if dev > mpfr(10) ** (-(ctx.target_digits - 5)):
            warnings.warn(
                f"p={h.p}: Satake moduli deviate from 1 by {float(dev):.3e}; "
                "data violates the Ramanujan bound",
                RamanujanWarning,
            )
    return SatakeTriple(
        ctx.round_complex(triple.alpha0),
        ctx.round_complex(triple.alpha1),
        ctx.round_complex(triple.alpha2),
        h.p,
        h.k,
    )


_RHO_DEGREE = {"spin": 4, "stan": 5, "adj": 10}


def _factor_roots(t, rho):
    a1, a2 = t.alpha1, t.alpha2
    one = mpc(1)
    if rho == "spin":
        return t.spin_parameters()
    if rho == "stan":
        return [one, a1, 1 / a1, a2, 1 / a2]
    if rho == "adj":
        return [
            one,
            one,
            a1,
            1 / a1,
            a2,
            1 / a2,
            a1 * a2,
            1 / (a1 * a2),
            a1 / a2,
            a2 / a1,
        ]
    raise ValueError(f"unknown representation {rho!r}")


def local_factor(t, rho, ctx):
    """Local Euler polynomial prod (1 - r X) for rho in {spin, stan, adj}.

    Returns ascending real coefficients; complains if expansion leaves a
    nonreal residue (it cannot for a genuine triple).
    """
    with ctx.active(16):
        coeffs = [mpc(1)]
        for r in _factor_roots(t, rho):
            nxt = [mpc(0)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i] += c
                nxt[i + 1] -= c * r
            coeffs = nxt
        tol = mpfr(2) ** (-ctx.working_bits // 3)
        out = []
        for c in coeffs:
            if abs(c.imag) > tol * max(1, abs(c.real)):
                raise SatakeError(
                    f"nonreal local factor coefficient {c} (imag tolerance {float(tol):.3e})"
                )
            out.append(ctx.round_real(c.real))
    if len(out) != _RHO_DEGREE[rho] + 1:
        raise SatakeError("unexpected local factor degree")
    return out


def local_factor_exact(h, rho):
    """Exact local Euler polynomial from the integer invariants A, B.

    With x = a1 + 1/a1, y = a2 + 1/a2 one has x + y = A/P and x*y = B/P, so
    the standard and adjoint factors are rational and the spin factor lives
    in Q(sqrt(p)).  This is the precision-safe path used to build builtin
    coefficient tables; the numeric `local_factor` is its cross-check.
    """
    pp = h.big_p
    a = Fraction(h.a_value, pp)  # a1+a2+1/a1+1/a2
    b = Fraction(h.b_value, pp)  # a1*a2 + a1/a2 + a2/a1 + 1/(a1*a2)
    if rho == "spin":
        # roots scale by P^(-1/2):  e1~ = lambda(p)/sqrt(P), e2~ = a + 2
        e1 = ExactReal(Fraction(h.lambda_p, pp), pp)  # lambda_p * sqrt(P) / P
        e2 = ExactReal(a + 2)
        one = ExactReal(1)
        return [one, -e1, e2, -e1, one]
    # symmetric-function polynomials of the reciprocal 4-sets
    ps = [Fraction(1), -a, b + 2, -a, Fraction(1)]  # roots a1,1/a1,a2,1/a2
    if rho == "stan":
        full = _poly_mul([Fraction(1), Fraction(-1)], ps)
    elif rho == "adj":
        pt = [Fraction(1), -b, a * a - 2 * b - 2, -b, Fraction(1)]  # pair products
        full = _poly_mul(_poly_mul([Fraction(1), Fraction(-2), Fraction(1)], ps), pt)
    else:
        raise ValueError(f"unknown representation {rho!r}")
    return [ExactReal(c) for c in full]


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


# ---------------------------------------------------------------------------
# Eigenvalue table ingestion: one row per prime "p <tab> lambda_p <tab> lambda_p2"


def parse_eigenvalue_table(text, k):
    """{p: HeckeDatum} from the plain-text table format (# comments allowed)."""
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"bad eigenvalue row: {raw!r}")
        p, lp, lp2 = (int(x) for x in parts)
        if p in out:
            raise ValueError(f"duplicate prime {p}")
        out[p] = HeckeDatum(p, lp, lp2, k)
    return out


def serialize_eigenvalue_table(data):
    lines = ["# p\tlambda(p)\tlambda(p^2)"]
    for p in sorted(data):
        h = data[p]
        lines.append(f"{p}\t{h.lambda_p}\t{h.lambda_p2}")
    return "\n".join(lines) + "\n"
