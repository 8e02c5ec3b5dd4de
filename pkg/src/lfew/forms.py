"""Level-1 modular forms: q-expansions, S_24 Hecke eigenforms, power lifts.

Everything here is exact integer/rational arithmetic; floating point enters
only when coefficient tables are evaluated inside the AFE engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .arith import primes_upto
from .exact import ExactReal
from .lmodel import (
    CoefficientTable,
    FunctionalEquation,
    Known,
    LFunctionInstance,
    expand_euler,
    fe_from_rc,
)

__all__ = [
    "QExpansion",
    "eisenstein",
    "delta_expansion",
    "hecke_eigenforms_s24",
    "power_lift",
    "eigenform_table",
    "cusp_form_fe",
]


@dataclass(frozen=True)
class QExpansion:
    """Truncated q-expansion sum a_n q^n, exact coefficients, fixed weight."""

    weight: int
    coeffs: tuple  # a_0 .. a_N

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __add__(self, other):
        if self.weight != other.weight:
            raise ValueError("can only add equal-weight expansions")
        n = min(len(self.coeffs), len(other.coeffs))
        return QExpansion(
            self.weight, tuple(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n]))
        )

    def __sub__(self, other):
        return self + (other * -1)

    def __mul__(self, other):
        if isinstance(other, QExpansion):
            n = min(len(self.coeffs), len(other.coeffs))
            a, b = self.coeffs[:n], other.coeffs[:n]
            out = [0] * n
            for i, ai in enumerate(a):
                if ai:
                    for j in range(n - i):
                        if b[j]:
                            out[i + j] += ai * b[j]
            return QExpansion(self.weight + other.weight, tuple(out))
        return QExpansion(self.weight, tuple(c * other for c in self.coeffs))

    __rmul__ = __mul__

    def exact_div(self, k):
        out = []
        for c in self.coeffs:
            if isinstance(c, int):
                q, r = divmod(c, k)
                if r:
                    raise ValueError(f"coefficient {c} not divisible by {k}")
                out.append(q)
            else:
                out.append(c / k)
        return QExpansion(self.weight, tuple(out))


def _sigma_list(power, n_max):
    """sigma_power(n) for 1 <= n <= n_max, by sieving over divisors."""
    out = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        dp = d**power
        for m in range(d, n_max + 1, d):
            out[m] += dp
    return out


@lru_cache(maxsize=32)
def eisenstein(k, n_terms):
    """E4 or E6 to q^n_terms (exact integers)."""
    if k == 4:
        mult, power = 240, 3
    elif k == 6:
        mult, power = -504, 5
    else:
        raise ValueError("only E4 and E6 are provided")
    sig = _sigma_list(power, n_terms)
    return QExpansion(k, tuple([1] + [mult * sig[n] for n in range(1, n_terms + 1)]))


@lru_cache(maxsize=8)
def delta_expansion(n_terms):
    """The weight-12 cusp form Delta = (E4^3 - E6^2)/1728, exact."""
    e4 = eisenstein(4, n_terms)
    e6 = eisenstein(6, n_terms)
    return (e4 * e4 * e4 - e6 * e6).exact_div(1728)


def cusp_form_fe(k, label=""):
    """Degree-2 FE of a weight-k level-1 cusp form: Gamma_C(s + (k-1)/2)."""
    if k % 4:
        raise ValueError("only weights divisible by 4 are needed here (eps = +1)")
    return fe_from_rc([], [Fraction(k - 1, 2)], 1, label=label or f"wt{k}")


@lru_cache(maxsize=4)
def _s24_eigen_data(n_terms):
    """Victor-Miller basis of S_24, T2 matrix, and exact eigenform expansions.

    Returns (matrix, disc_sqfree, eigen_plus, eigen_minus) where each eigen_*
    is a list of ExactReal integer coefficients a_1..a_N in Q(sqrt(disc)).
    """
    need = 2 * n_terms + 1
    delta = delta_expansion(need)
    e4 = eisenstein(4, need)
    e6 = eisenstein(6, need)
    g1 = delta * (e4 * e4 * e4)
    g2 = delta * (e6 * e6)
    # reduce to a_1(f1)=1, a_2(f1)=0 / a_1(f2)=0, a_2(f2)=1 (exact rationals)
    m11, m12 = Fraction(g1[1]), Fraction(g1[2])
    m21, m22 = Fraction(g2[1]), Fraction(g2[2])
    det = m11 * m22 - m12 * m21
    if det == 0:
        raise ValueError("basis is degenerate")
    f1 = [m22 / det * Fraction(a) - m12 / det * Fraction(b) for a, b in zip(g1.coeffs, g2.coeffs)]
    f2 = [-m21 / det * Fraction(a) + m11 / det * Fraction(b) for a, b in zip(g1.coeffs, g2.coeffs)]

    def t2(coeffs, n):
        # (T_2 f)_n = a_{2n} + 2^(k-1) a_{n/2},  k = 24
        val = coeffs[2 * n]
        if n % 2 == 0:
            val += 2**23 * coeffs[n // 2]
        return val

    t = [[t2(f1, 1), t2(f2, 1)], [t2(f1, 2), t2(f2, 2)]]
    tr = t[0][0] + t[1][1]
    det_t = t[0][0] * t[1][1] - t[0][1] * t[1][0]
    disc = tr * tr - 4 * det_t
    # represent the eigenvalues exactly: theta = tr/2 +- (sq/2) sqrt(d0)
    from .exact import _reduce_surd

    sq, d0 = _reduce_surd(int(disc))
    if Fraction(sq) ** 2 * d0 != disc:
        raise ValueError("discriminant reduction failed")
    half_tr = Fraction(tr, 2)
    eigenforms = []
    for sign in (1, -1):
        theta = ExactReal(half_tr) + ExactReal(Fraction(sign * sq, 2), d0)
        # eigenvector (1, c) with c = (theta - t11)/t12
        c = (theta - Fraction(t[0][0])) / ExactReal(Fraction(t[0][1]))
        coeffs = [ExactReal(a) + c * b for a, b in zip(f1[: n_terms + 1], f2[: n_terms + 1])]
        eigenforms.append((theta, coeffs))
    return t, d0, eigenforms[0], eigenforms[1]


def eigenform_table(theta_coeffs, k, n_terms, bound_constant=1):
    """CoefficientTable with b_n = a_n / n^((k-1)/2) from exact integer a_n."""
    _, coeffs = theta_coeffs
    half = (k - 1) // 2  # k even-weight forms here have odd k-1: n^((k-1)/2)=n^half*sqrt(n)
    entries = {}
    for n in range(1, n_terms + 1):
        a_n = coeffs[n]
        scale = ExactReal(Fraction(1, n ** (half + 1)), n)  # 1/n^((k-1)/2)
        entries[n] = Known(a_n * scale)
    return CoefficientTable(entries, 2, bound_constant, check=False)


def hecke_eigenforms_s24(n_terms, bound_constant=1):
    """The two normalized Hecke eigenforms of S_24 as degree-2 tables.

    Returns ((table_plus, meta_plus), (table_minus, meta_minus)); the plus
    branch has T2 eigenvalue tr/2 + (positive surd).  meta carries the exact
    eigenvalue and the raw integer coefficients for oracle checks.
    """
    if n_terms < 2:
        raise ValueError("need at least 2 terms")
    _, d0, plus, minus = _s24_eigen_data(n_terms)
    out = []
    for theta, coeffs in (plus, minus):
        table = eigenform_table((theta, coeffs), 24, n_terms, bound_constant)
        out.append((table, {"eigenvalue": theta, "coeffs": coeffs, "disc": d0}))
    return out[0], out[1]


def power_lift(table, fe, m, label="", n_cutoff=None, known_primes=None):
    """The m-th power L-function of a degree-2 instance.

    Local factors (1 - a X)^m (1 - b X)^m at known primes; unknown primes
    stay symbolic with degree-2m Ramanujan boxes.  The FE repeats every
    gamma shift m times and raises Q and epsilon to the m-th power.
    """
    if table.degree != 2 or fe.degree != 2:
        raise ValueError("power_lift expects a degree-2 instance")
    if m < 1:
        raise ValueError("m must be >= 1")
    n_cutoff = n_cutoff or table.n_cutoff
    if fe.poles:
        raise ValueError("power lifts of instances with poles are not supported")

    factors = {}
    one = ExactReal(1)
    for p in primes_upto(n_cutoff):
        if known_primes is not None and p not in known_primes:
            continue
        entry = table.entries.get(p)
        if not isinstance(entry, Known):
            continue
        base = [one, -entry.value, one]  # 1 - b_p X + X^2
        poly = [one]
        for _ in range(m):
            poly = _exact_poly_mul(poly, base)
        factors[p] = poly

    lifted = expand_euler(
        factors,
        set(factors),
        n_cutoff,
        2 * m,
        table.bound_constant**m,
    )
    fe_m = FunctionalEquation(
        fe.q_expr**m,
        fe.gamma_shifts * m,
        fe.epsilon**m,
        (),
        label or (fe.label + f"-pow{m}"),
    )
    return LFunctionInstance(fe_m, lifted, label or (fe.label + f"-pow{m}"))


def _exact_poly_mul(a, b):
    out = [ExactReal(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out
