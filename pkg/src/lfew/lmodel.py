"""Analytic data model: functional equations, test functions, coefficient tables.

Functional equations are stored in unfolded form Lambda(s) = Q^s * prod
Gamma(kappa_j s + lambda_j) * L(s) with kappa in {1/2, 1}.  Q is kept as an
exact symbolic product rat * pi^a * (2pi)^b so instances can be rebuilt at
any precision and description files round-trip losslessly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from .arith import binomial, factorize
from .exact import ExactReal
from .numerics import PrecisionContext, complex_gamma, log_gamma

__all__ = [
    "QExpr",
    "GammaShift",
    "FunctionalEquation",
    "TestFunction",
    "Known",
    "Unknown",
    "Partial",
    "CoefficientTable",
    "LFunctionInstance",
    "ramanujan_bound",
    "expand_euler",
    "fe_for",
    "UnknownProductError",
]


class UnknownProductError(ValueError):
    """A coefficient index would need a product of two unknown symbols."""


# ---------------------------------------------------------------------------
# Exact Q expressions: rat * pi^a * (2pi)^b


@dataclass(frozen=True)
class QExpr:
    rat: Fraction = Fraction(1)
    pi_exp: Fraction = Fraction(0)
    two_pi_exp: Fraction = Fraction(0)

    def __mul__(self, other):
        return QExpr(
            self.rat * other.rat,
            self.pi_exp + other.pi_exp,
            self.two_pi_exp + other.two_pi_exp,
        )

    def __pow__(self, m):
        return QExpr(self.rat**m, self.pi_exp * m, self.two_pi_exp * m)

    def log(self):
        """ln Q under the current gmpy2 context."""
        pi = gmpy2.const_pi()
        val = gmpy2.log(mpfr(self.rat.numerator)) - gmpy2.log(mpfr(self.rat.denominator))
        if self.pi_exp:
            val += _frac_mpfr(self.pi_exp) * gmpy2.log(pi)
        if self.two_pi_exp:
            val += _frac_mpfr(self.two_pi_exp) * gmpy2.log(2 * pi)
        return val

    def value(self):
        return gmpy2.exp(self.log())

    def __float__(self):
        import math

        return (
            float(self.rat)
            * math.pi ** float(self.pi_exp)
            * (2 * math.pi) ** float(self.two_pi_exp)
        )

    def serialize(self):
        parts = []
        if self.rat != 1 or (not self.pi_exp and not self.two_pi_exp):
            parts.append(str(self.rat))
        if self.pi_exp:
            parts.append(f"pi^({self.pi_exp})")
        if self.two_pi_exp:
            parts.append(f"2pi^({self.two_pi_exp})")
        return "*".join(parts)

    @classmethod
    def parse(cls, text):
        rat, a, b = Fraction(1), Fraction(0), Fraction(0)
        for tok in text.replace(" ", "").split("*"):
            if not tok:
                continue
            m = re.fullmatch(r"(pi|2pi)(?:\^\(?(-?\d+(?:/\d+)?)\)?)?", tok)
            if m:
                e = Fraction(m.group(2)) if m.group(2) else Fraction(1)
                if m.group(1) == "pi":
                    a += e
                else:
                    b += e
            else:
                rat *= Fraction(tok)
        return cls(rat, a, b)


def _frac_mpfr(q):
    return mpfr(q.numerator) / mpfr(q.denominator)


# ---------------------------------------------------------------------------
# Functional equations


@dataclass(frozen=True)
class GammaShift:
    """One factor Gamma(kappa*s + lam), lam = lam_re + i*lam_im exact."""

    kappa: Fraction
    lam_re: Fraction
    lam_im: Fraction = Fraction(0)

    def lam(self):
        return mpc(_frac_mpfr(self.lam_re), _frac_mpfr(self.lam_im))

    def kappa_mpfr(self):
        return _frac_mpfr(self.kappa)


@dataclass(frozen=True)
class FunctionalEquation:
    """Lambda(s) = Q^s prod_j Gamma(kappa_j s + lambda_j) L(s) = eps conj(Lambda(1-conj s))."""

    q_expr: QExpr
    gamma_shifts: tuple
    epsilon: int
    poles: tuple = ()  # ((s_k_re, s_k_im, r_k_re, r_k_im) as Fractions)
    label: str = ""

    def __post_init__(self):
        if self.epsilon not in (1, -1):
            # general |eps| = 1 is representable but the evaluation pipeline
            # only accepts +-1; reject early rather than at run time
            raise ValueError("epsilon must be +1 or -1")
        for sh in self.gamma_shifts:
            if sh.kappa <= 0:
                raise ValueError("kappa must be positive")
            if sh.lam_re < 0:
                raise ValueError("Re(lambda) must be nonnegative")

    @property
    def degree(self):
        d = 2 * sum(sh.kappa for sh in self.gamma_shifts)
        if d.denominator != 1:
            raise ValueError("gamma shifts do not define an integer degree")
        return int(d)

    def log_q(self):
        return self.q_expr.log()

    def gamma_factor(self, s, ctx):
        """Q^s * prod Gamma(kappa_j s + lambda_j) under the current context."""
        s = mpc(s)
        val = gmpy2.exp(s * self.log_q())
        for sh in self.gamma_shifts:
            val *= complex_gamma(sh.kappa_mpfr() * s + sh.lam(), ctx)
        return val

    def log_gamma_factor_desc(self, s, ctx):
        """(log magnitude, phase factor) of the completed gamma factor at s.

        Computed from log-gamma so it stays usable when the factor under- or
        overflows as a plain product.
        """
        s = mpc(s)
        lg = s * self.log_q()
        for sh in self.gamma_shifts:
            z = sh.kappa_mpfr() * s + sh.lam()
            if z.real >= 0.5:
                lg += log_gamma(z, ctx)
            else:
                lg += gmpy2.log(complex_gamma(z, ctx))
        phase = gmpy2.exp(mpc(0, lg.imag))
        return lg.real, phase

    def nu_lower_bound(self, s):
        """Max over {0, -Re(lambda_j/kappa_j + s)}: contour abscissae must exceed it."""
        s = mpc(s)
        worst = mpfr(0)
        for sh in self.gamma_shifts:
            v = -(_frac_mpfr(sh.lam_re) / sh.kappa_mpfr() + s.real)
            worst = max(worst, v)
        return worst

    def pole_data(self, ctx):
        out = []
        for s_re, s_im, r_re, r_im in self.poles:
            out.append((ctx.complex(s_re, s_im), ctx.complex(r_re, r_im)))
        return out

    # -- description file format -------------------------------------------
    #
    # Line-oriented text; `#` starts a comment.  Fields:
    #   label <text>
    #   degree <int>
    #   Q <qexpr>              e.g.  pi^(-1/2)*2pi^(-2)
    #   gamma <kappa> <lam_re> [<lam_im>]      (one line per factor, fractions)
    #   epsilon <1|-1>
    #   pole <s_re> <s_im> <r_re> <r_im>       (optional, fractions)

    def serialize(self):
        lines = [f"label {self.label}", f"degree {self.degree}", f"Q {self.q_expr.serialize()}"]
        for sh in self.gamma_shifts:
            lines.append(f"gamma {sh.kappa} {sh.lam_re} {sh.lam_im}")
        lines.append(f"epsilon {self.epsilon}")
        for p in self.poles:
            lines.append("pole " + " ".join(str(x) for x in p))
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text):
        label, q_expr, eps = "", QExpr(), 1
        shifts, poles, degree = [], [], None
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(" ")
            rest = rest.strip()
            if key == "label":
                label = rest
            elif key == "degree":
                degree = int(rest)
            elif key == "Q":
                q_expr = QExpr.parse(rest)
            elif key == "gamma":
                parts = rest.split()
                shifts.append(
                    GammaShift(
                        Fraction(parts[0]),
                        Fraction(parts[1]),
                        Fraction(parts[2]) if len(parts) > 2 else Fraction(0),
                    )
                )
            elif key == "epsilon":
                eps = int(rest)
            elif key == "pole":
                poles.append(tuple(Fraction(x) for x in rest.split()))
            else:
                raise ValueError(f"unknown field {key!r} in FE description")
        fe = cls(q_expr, tuple(shifts), eps, tuple(poles), label)
        if degree is not None and fe.degree != degree:
            raise ValueError(f"declared degree {degree} != derived degree {fe.degree}")
        return fe


def _gamma_r(mu):
    """Unfold Gamma_R(s + mu) = pi^(-(s+mu)/2) Gamma((s+mu)/2), dropping constants."""
    return QExpr(pi_exp=Fraction(-1, 2)), GammaShift(Fraction(1, 2), Fraction(mu) / 2)


def _gamma_c(mu):
    """Unfold Gamma_C(s + mu) = 2 (2pi)^(-(s+mu)) Gamma(s + mu), dropping constants."""
    return QExpr(two_pi_exp=Fraction(-1)), GammaShift(Fraction(1), Fraction(mu))


def fe_from_rc(gamma_r_shifts, gamma_c_shifts, epsilon, poles=(), label=""):
    """Build an unfolded FE from Gamma_R / Gamma_C shift lists."""
    q = QExpr()
    shifts = []
    for mu in gamma_r_shifts:
        dq, sh = _gamma_r(mu)
        q, shifts = q * dq, shifts + [sh]
    for mu in gamma_c_shifts:
        dq, sh = _gamma_c(mu)
        q, shifts = q * dq, shifts + [sh]
    return FunctionalEquation(q, tuple(shifts), epsilon, tuple(poles), label)


def fe_for(rho, k):
    """Functional equation of the spin/standard/adjoint L-function, weight k."""
    if k % 2 or k < 10:
        raise ValueError("weight must be even and >= 10")
    if rho == "spin":
        return fe_from_rc(
            [], [Fraction(1, 2), Fraction(2 * k - 3, 2)], (-1) ** k, label=f"spin-{k}"
        )
    if rho == "stan":
        return fe_from_rc([0], [k - 2, k - 1], 1, label=f"stan-{k}")
    if rho == "adj":
        return fe_from_rc([1, 1], [1, k - 2, k - 1, 2 * k - 3], 1, label=f"adj-{k}")
    raise ValueError(f"unknown representation {rho!r}")


# ---------------------------------------------------------------------------
# Test functions g(s) = exp(i b s + c (s - i t0)^2)


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # keep pytest from collecting this as a test class

    b: Fraction = Fraction(0)
    c: Fraction = Fraction(0)
    t0: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "b", Fraction(self.b))
        object.__setattr__(self, "c", Fraction(self.c))
        object.__setattr__(self, "t0", Fraction(self.t0))
        if self.c < 0:
            raise ValueError("c must be nonnegative")

    def valid_for_degree(self, d):
        """c > 0 always decays; c = 0 needs |b| < pi d / 4."""
        if self.c > 0:
            return True
        return abs(float(self.b)) < 3.141592653589793 * d / 4

    def __call__(self, w):
        """g(w) under the current gmpy2 context; exact parameter conversion."""
        w = mpc(w)
        arg = mpc(0)
        if self.b:
            arg += mpc(0, _frac_mpfr(self.b)) * w
        if self.c:
            u = w - mpc(0, _frac_mpfr(self.t0))
            arg += _frac_mpfr(self.c) * u * u
        return gmpy2.exp(arg)

    def is_one(self):
        return not self.b and not self.c

    @property
    def label(self):
        return f"b={self.b},c={self.c},t0={self.t0}"

    @classmethod
    def from_beta(cls, beta, c=Fraction(0), t0=Fraction(0)):
        """The paper family g(s) = exp(-i beta s + c (s - i t0)^2)."""
        return cls(-Fraction(beta), Fraction(c), Fraction(t0))

    def serialize(self):
        return {"b": str(self.b), "c": str(self.c), "t0": str(self.t0)}

    @classmethod
    def deserialize(cls, d):
        return cls(Fraction(d["b"]), Fraction(d["c"]), Fraction(d["t0"]))


# ---------------------------------------------------------------------------
# Ramanujan bound


def ramanujan_bound(n, d):
    """prod over p^j || n of binom(d+j-1, j); bound for |b_n| of a degree-d L-function."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = 1
    for _, e in factorize(n):
        out *= binomial(d + e - 1, e)
    return out


# ---------------------------------------------------------------------------
# Coefficient tables


@dataclass(frozen=True)
class Known:
    value: ExactReal

    def __post_init__(self):
        if not isinstance(self.value, ExactReal):
            object.__setattr__(self, "value", ExactReal(self.value))


@dataclass(frozen=True)
class Unknown:
    symbol: int


@dataclass(frozen=True)
class Partial:
    """b_n = scalar * b_symbol by multiplicativity, scalar fully known."""

    scalar: ExactReal
    symbol: int


class CoefficientTable:
    """Dirichlet coefficients b_1..b_N, split into known / unknown / partial.

    Symbols are integer indices; the multiplicative expansion only emits
    prime-power symbols, while `fe_only` tables (nothing assumed beyond the
    functional equation) make every index its own symbol.
    """

    def __init__(self, entries, degree, bound_constant=1, check=True):
        self.entries = dict(entries)
        self.degree = int(degree)
        self.bound_constant = Fraction(bound_constant)
        self.n_cutoff = max(self.entries)
        if check:
            self.validate()

    def validate(self):
        e1 = self.entries.get(1)
        if not isinstance(e1, Known) or e1.value != ExactReal(1):
            raise ValueError("entry 1 must be Known(1)")
        c = float(self.bound_constant)
        for n, e in self.entries.items():
            if isinstance(e, Known):
                bound = c * ramanujan_bound(n, self.degree) * (1 + 1e-9)
                if abs(float(e.value)) > bound:
                    raise ValueError(
                        f"known b_{n} = {float(e.value)} violates Ramanujan bound {bound}"
                    )

    def __getitem__(self, n):
        return self.entries[n]

    def symbols(self, max_index=None):
        """Sorted symbol indices present (Unknown or Partial)."""
        out = set()
        for e in self.entries.values():
            if isinstance(e, (Unknown, Partial)):
                q = e.symbol
                if max_index is None or q <= max_index:
                    out.add(q)
        return sorted(out)

    def known_count(self):
        return sum(isinstance(e, Known) for e in self.entries.values())

    def with_value(self, symbol, value):
        """Replace Unknown(symbol) by Known(value), resolving Partial entries."""
        value = value if isinstance(value, ExactReal) else ExactReal(value)
        entries = {}
        for n, e in self.entries.items():
            if isinstance(e, Unknown) and e.symbol == symbol:
                entries[n] = Known(value)
            elif isinstance(e, Partial) and e.symbol == symbol:
                entries[n] = Known(e.scalar * value)
            else:
                entries[n] = e
        return CoefficientTable(entries, self.degree, self.bound_constant, check=False)

    def hide_primes(self, primes):
        """Mark prime powers of `primes` (and their composites) unknown.

        Used for checks that recover coefficients which are secretly known.
        """
        hidden = set(primes)
        entries = {}
        for n in sorted(self.entries):
            fac = factorize(n)
            bad = [(p, e) for p, e in fac if p in hidden]
            if not bad:
                entries[n] = self.entries[n]
                continue
            if len(bad) > 1:
                raise UnknownProductError(f"n={n} has two hidden prime factors")
            p, e = bad[0]
            q = p**e
            if n == q:
                entries[n] = Unknown(q)
            else:
                m = n // q
                me = entries[m]
                if not isinstance(me, Known):
                    raise UnknownProductError(f"n={n}: cofactor {m} not known")
                entries[n] = Partial(me.value, q)
        return CoefficientTable(entries, self.degree, self.bound_constant, check=False)

    @classmethod
    def fe_only(cls, n_cutoff, degree, bound_constant=1):
        """Nothing known beyond b_1: every 2 <= n <= N is its own unknown symbol."""
        entries = {1: Known(ExactReal(1))}
        for n in range(2, n_cutoff + 1):
            entries[n] = Unknown(n)
        return cls(entries, degree, bound_constant, check=False)

    def serialize(self):
        rows = []
        for n in sorted(self.entries):
            e = self.entries[n]
            if isinstance(e, Known):
                rows.append([n, "K", e.value.serialize()])
            elif isinstance(e, Unknown):
                rows.append([n, "U", e.symbol])
            else:
                rows.append([n, "P", e.scalar.serialize(), e.symbol])
        return {
            "degree": self.degree,
            "bound_constant": str(self.bound_constant),
            "rows": rows,
        }


def _invert_local_factor(coeffs, max_power):
    """Power-series inverse of Q_p(X) (constant term 1) to X^max_power."""
    inv = [ExactReal(1)]
    for j in range(1, max_power + 1):
        acc = ExactReal(0)
        for i in range(1, min(j, len(coeffs) - 1) + 1):
            acc = acc + coeffs[i] * inv[j - i]
        inv.append(-acc)
    return inv


def expand_euler(local_factors, primes_known, n_cutoff, degree, bound_constant=1):
    """Build a CoefficientTable from local Euler factors.

    local_factors: {p: ascending coefficient list of Q_p(X), ExactReal or
    rational, constant term 1, degree <= `degree`}.  Prime powers of primes
    without a
    factor become Unknown symbols; composites with exactly one unknown
    prime-power factor become Partial.  Two unknown factors in one index is
    an error (outside the representable class).
    """
    prime_coeffs = {}
    for p, coeffs in local_factors.items():
        cs = [c if isinstance(c, ExactReal) else ExactReal(c) for c in coeffs]
        if cs[0] != ExactReal(1):
            raise ValueError(f"local factor at p={p} must have constant term 1")
        if len(cs) - 1 > degree:
            raise ValueError(f"local factor at p={p} exceeds degree {degree}")
        max_pow = 0
        pk = p
        while pk <= n_cutoff:
            max_pow += 1
            pk *= p
        prime_coeffs[p] = _invert_local_factor(cs, max_pow)

    known = set(primes_known) | set(local_factors)
    entries = {1: Known(ExactReal(1))}
    for n in range(2, n_cutoff + 1):
        parts = ExactReal(1)
        unknown_q = None
        for p, e in factorize(n):
            if p in known and p in prime_coeffs:
                parts = parts * prime_coeffs[p][e]
            elif p in known:
                raise ValueError(f"prime {p} declared known but has no local factor")
            else:
                if unknown_q is not None:
                    raise UnknownProductError(
                        f"n={n} needs the product of unknown symbols {unknown_q} and {p**e}"
                    )
                unknown_q = p**e
        if unknown_q is None:
            entries[n] = Known(parts)
        elif n == unknown_q:
            entries[n] = Unknown(unknown_q)
        else:
            entries[n] = Partial(parts, unknown_q)
    return CoefficientTable(entries, degree, bound_constant, check=False)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LFunctionInstance:
    fe: FunctionalEquation
    coeffs: CoefficientTable
    label: str

    def __post_init__(self):
        if self.coeffs.degree != self.fe.degree:
            raise ValueError(
                f"coefficient table degree {self.coeffs.degree} != FE degree {self.fe.degree}"
            )

    @property
    def degree(self):
        return self.fe.degree
