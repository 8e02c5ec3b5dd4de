"""Configurable-precision complex arithmetic: gamma, vertical-line quadrature, roots.

All arithmetic is done with gmpy2 (MPFR/MPC) under an explicit PrecisionContext.
Values returned by the public operations are rounded to the context's
working precision; a few guard bits are used internally.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

__all__ = [
    "PrecisionContext",
    "IntegrationPlan",
    "NumericsError",
    "GammaPoleError",
    "IntegrationError",
    "RootFindingError",
    "complex_gamma",
    "log_gamma",
    "integrate_vertical",
    "poly_roots",
]


class NumericsError(Exception):
    pass


class GammaPoleError(NumericsError):
    """Gamma evaluated at a nonpositive integer (within working precision)."""


class IntegrationError(NumericsError):
    """Vertical-line quadrature failed its convergence contract."""


class RootFindingError(NumericsError):
    """Simultaneous root iteration did not converge within the cap."""


_MIN_GUARD_BITS = 64


def _bits_for_digits(digits):
    return int(math.ceil(digits * math.log2(10.0)))


@dataclass(frozen=True)
class PrecisionContext:
    """Binary working precision plus the decimal digits requested in answers.

    working_bits >= ceil(target_digits*log2(10)) + 64 is enforced so that
    displayed digits always sit well inside the working precision.
    """

    target_digits: int
    working_bits: int

    def __init__(self, target_digits, working_bits=None):
        minimum = _bits_for_digits(target_digits) + _MIN_GUARD_BITS
        if working_bits is None:
            working_bits = minimum
        if working_bits < minimum:
            raise ValueError(
                f"working_bits={working_bits} below required minimum {minimum} "
                f"for {target_digits} digits"
            )
        object.__setattr__(self, "target_digits", target_digits)
        object.__setattr__(self, "working_bits", int(working_bits))

    # -- gmpy2 context plumbing -------------------------------------------

    def gmpy_context(self, extra_bits=0):
        return gmpy2.context(
            precision=self.working_bits + extra_bits,
            allow_complex=True,
            trap_overflow=True,
            trap_divzero=True,
        )

    @contextmanager
    def active(self, extra_bits=0):
        """Make this context current for gmpy2 arithmetic; restores the old one."""
        old = gmpy2.get_context()
        gmpy2.set_context(self.gmpy_context(extra_bits))
        try:
            yield self
        finally:
            gmpy2.set_context(old)

    def with_bits(self, extra_bits):
        """A context with the same target but more working precision."""
        return PrecisionContext(self.target_digits, self.working_bits + extra_bits)

    # -- constructors under this precision --------------------------------

    def real(self, x):
        with self.active():
            if isinstance(x, Fraction):
                return mpfr(x.numerator) / mpfr(x.denominator)
            return mpfr(x)

    def complex(self, re, im=0):
        return mpc(self.real(re), self.real(im))

    def pi(self):
        with self.active():
            return gmpy2.const_pi()

    def eps(self):
        return self.real(2) ** (1 - self.working_bits)

    def round_real(self, x):
        with self.active():
            return mpfr(x)

    def round_complex(self, z):
        with self.active():
            return mpc(z)


def to_mpfr_exact(x):
    """Convert int/Fraction/mpfr/float to mpfr under the current gmpy2 context."""
    if isinstance(x, Fraction):
        return mpfr(x.numerator) / mpfr(x.denominator)
    return mpfr(x)


# ---------------------------------------------------------------------------
# Bernoulli numbers (exact, via tangent numbers), cached


_tangent_cache = [1]  # T_1, T_2, ... as plain ints


def _tangent_numbers(count):
    """First `count` tangent numbers T_1..T_count (Knuth-Buckholtz recurrence)."""
    if count <= len(_tangent_cache):
        return _tangent_cache[:count]
    count = max(count, 2 * len(_tangent_cache))  # grow geometrically
    t = [0] * (count + 1)
    t[1] = 1
    for k in range(2, count + 1):
        t[k] = (k - 1) * t[k - 1]
    for k in range(2, count + 1):
        for j in range(k, count + 1):
            t[j] = (j - k) * t[j - 1] + (j - k + 2) * t[j]
    _tangent_cache[:] = t[1:]
    return _tangent_cache[:count]


def bernoulli(n):
    """Exact Bernoulli number B_n as a Fraction (B_1 = -1/2 convention)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(-1, 2)
    if n % 2:
        return Fraction(0)
    m = n // 2
    t = _tangent_numbers(m)[m - 1]
    four_m = 4**m
    val = Fraction(n * t, four_m * (four_m - 1))
    return val if m % 2 else -val


# ---------------------------------------------------------------------------
# Complex gamma: reflection + argument shift + Stirling series

_stirling_fracs = []  # B_{2j} / (2j (2j-1)), j = 1, 2, ...
_stirling_mpfr_cache = {}  # bits -> list of mpfr-converted coefficients


def _stirling_coeff(j, bits):
    """B_{2j} / (2j (2j-1)) rounded to `bits`, cached per precision level."""
    cached = _stirling_mpfr_cache.setdefault(bits, [])
    while len(cached) < j:
        i = len(cached) + 1
        while len(_stirling_fracs) < i:
            m = len(_stirling_fracs) + 1
            _stirling_fracs.append(bernoulli(2 * m) / (2 * m * (2 * m - 1)))
        cached.append(to_mpfr_exact(_stirling_fracs[i - 1]))
    return cached[j - 1]


def _log_gamma_stirling(w, bits):
    """ln Gamma(w) for |w| in the Stirling-valid region at ~`bits` precision."""
    # Terms decrease until j ~ pi*|w|; with |w| >= bits/4 the smallest term is
    # far below 2^-bits, so the loop terminates by smallness well before then.
    half = mpfr(1) / 2
    res = (w - half) * gmpy2.log(w) - w + gmpy2.log(2 * gmpy2.const_pi()) / 2
    w2 = 1 / (w * w)
    pw = 1 / w
    cutoff = mpfr(2) ** (-bits - 8)
    scale = abs(res) + 1
    prev = None
    for j in range(1, 4 * bits):
        term = _stirling_coeff(j, bits) * pw
        res += term
        at = abs(term)
        if at < cutoff * scale:
            return res
        if prev is not None and at > prev:
            raise NumericsError("Stirling series diverging; shift region too small")
        prev = at
        pw *= w2
    raise NumericsError("Stirling series did not reach tolerance")


def _is_nonpositive_integer(z, bits):
    re, im = z.real, z.imag
    if abs(im) > mpfr(2) ** (-bits + 8) * (1 + abs(re)):
        return False
    r = gmpy2.rint(re)
    return r <= 0 and abs(re - r) <= mpfr(2) ** (-bits + 8) * (1 + abs(r))


def log_gamma(z, ctx):
    """Principal-ish log of Gamma(z): Stirling value after an argument shift.

    The imaginary part is not reduced to (-pi, pi]; exp(log_gamma(z))
    equals Gamma(z).  Re(z) >= 1/2 is required (callers reflect first).
    """
    guard = 32
    with ctx.active(guard):
        w = mpc(z)
        bits = ctx.working_bits + guard
        if w.real < 0.5:
            raise ValueError("log_gamma requires Re(z) >= 1/2")
        radius = max(20.0, bits / 4.0)
        shift = int(max(0, math.ceil(radius - float(w.real))))
        ws = w + shift
        res = _log_gamma_stirling(ws, bits)
        if shift:
            acc = mpc(1)
            for i in range(shift):
                acc *= w + i
            res -= gmpy2.log(acc)
        return res


def complex_gamma(z, ctx):
    """Gamma(z) at working precision via shifted Stirling plus the recurrence.

    Arguments left of Re(z) = 1/2 go through the reflection formula.
    Raises GammaPoleError at nonpositive integers (within working precision).
    """
    guard = 32
    with ctx.active(guard):
        w = mpc(z)
        bits = ctx.working_bits + guard
        if _is_nonpositive_integer(w, bits):
            raise GammaPoleError(f"gamma pole at z = {w}")
        if w.real < 0.5:
            # Gamma(z) Gamma(1-z) = pi / sin(pi z)
            pi = gmpy2.const_pi()
            val = pi / (gmpy2.sin(pi * w) * gmpy2.exp(log_gamma(1 - w, ctx)))
        else:
            val = gmpy2.exp(log_gamma(w, ctx))
    return ctx.round_complex(val)


# ---------------------------------------------------------------------------
# Vertical-line quadrature


@dataclass(frozen=True)
class IntegrationPlan:
    """Trapezoid rule on Re(z) = nu: nodes nu + i*k*step for |k*step| <= half_width."""

    nu: Fraction
    step: Fraction
    half_width: Fraction

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.half_width / self.step < 10:
            raise ValueError("half_width/step must be at least 10")

    @property
    def node_count(self):
        return 2 * int(self.half_width / self.step) + 1

    def refined(self, width_factor=2, step_factor=Fraction(1, 2)):
        return IntegrationPlan(
            self.nu, self.step * step_factor, self.half_width * width_factor
        )


def integrate_vertical(integrand, plan, ctx):
    """(1/2*pi*i) * integral of `integrand` along Re(z) = nu, by trapezoid sum.

    The integrand must decay at least exponentially in |Im z| along the
    contour.  Fails with IntegrationError when the outermost retained nodes
    are not negligible against the accumulated sum.
    """
    with ctx.active(16):
        nu = to_mpfr_exact(plan.nu)
        h = to_mpfr_exact(plan.step)
        m_max = int(plan.half_width / plan.step)
        total = mpc(integrand(mpc(nu)))
        last_mag = mpfr(0)
        for k in range(1, m_max + 1):
            y = h * k
            up = integrand(mpc(nu, y))
            dn = integrand(mpc(nu, -y))
            total += up
            total += dn
            if k == m_max:
                last_mag = max(abs(mpc(up)), abs(mpc(dn)))
        total *= h / (2 * gmpy2.const_pi())
        tol = mpfr(2) ** (-ctx.working_bits // 2)
        if last_mag * h > tol * max(abs(total), mpfr(2) ** (-ctx.working_bits)):
            raise IntegrationError(
                f"last node magnitude {float(last_mag):.3e} not negligible against "
                f"sum {float(abs(total)):.3e}; widen half_width"
            )
    return ctx.round_complex(total)


# ---------------------------------------------------------------------------
# Polynomial roots (Aberth simultaneous iteration)

_MAX_DEGREE = 8
_ABERTH_CAP = 500


def _horner(coeffs, z):
    acc = mpc(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def poly_roots(coeffs, ctx):
    """All complex roots of sum_k coeffs[k] x^k (degree <= 8), Aberth iteration.

    Each returned root r satisfies |p(r)| < 2^(-working_bits/2) * max|coeff|.
    """
    if not coeffs or len(coeffs) > _MAX_DEGREE + 1:
        raise ValueError("degree must be between 0 and 8")
    with ctx.active(16):
        cs = [mpc(to_mpfr_exact(c)) if not isinstance(c, mpc) else mpc(c) for c in coeffs]
        while cs and abs(cs[-1]) == 0:
            cs.pop()
        deg = len(cs) - 1
        if deg < 1:
            raise ValueError("leading coefficient is zero (or constant polynomial)")
        norm = max(abs(c) for c in cs)
        tol = mpfr(2) ** (-ctx.working_bits // 2) * norm
        # strip exact zero roots
        zeros = 0
        while abs(cs[0]) == 0:
            cs.pop(0)
            zeros += 1
        deg = len(cs) - 1
        roots = [mpc(0)] * zeros
        if deg >= 1:
            lead = cs[-1]
            monic = [c / lead for c in cs]
            deriv = [monic[k] * k for k in range(1, deg + 1)]
            radius = 1 + max(abs(c) for c in monic[:-1])
            two_pi = 2 * gmpy2.const_pi()
            zs = [
                radius * gmpy2.exp(mpc(0, two_pi * (j + mpfr(1) / 3) / deg))
                for j in range(deg)
            ]
            for _ in range(_ABERTH_CAP):
                worst = mpfr(0)
                new = []
                for i, zi in enumerate(zs):
                    pv = _horner(monic, zi)
                    worst = max(worst, abs(pv) * abs(lead))
                    dv = _horner(deriv, zi)
                    if abs(dv) == 0:
                        new.append(zi + mpfr(2) ** (-ctx.working_bits // 4))
                        continue
                    w = pv / dv
                    s = mpc(0)
                    for j, zj in enumerate(zs):
                        if j != i:
                            s += 1 / (zi - zj)
                    denom = 1 - w * s
                    if abs(denom) == 0:
                        new.append(zi + mpfr(2) ** (-ctx.working_bits // 4))
                        continue
                    new.append(zi - w / denom)
                zs = new
                if worst < tol:
                    break
            else:
                raise RootFindingError(
                    f"Aberth iteration did not converge in {_ABERTH_CAP} steps"
                )
            # final residual check on the original polynomial
            for r in zs:
                if abs(_horner(cs, r)) >= tol * 4:
                    raise RootFindingError("root residual above tolerance")
            roots.extend(zs)
        roots.sort(key=lambda r: (float(gmpy2.atan2(r.imag, r.real)) if abs(r) else 0.0, float(abs(r))))
    return [ctx.round_complex(r) for r in roots]
