"""Smoothed approximate-functional-equation engine.

For Lambda(s) = Q^s prod_j Gamma(kappa_j s + lambda_j) L(s) with test
function g, the identity

  Lambda(s) g(s) = sum_k r_k g(s_k)/(s - s_k)
                 + Q^s sum_n b_n n^-s f1(s, n)
                 + eps Q^(1-s) sum_n b_n n^(s-1) f2(1-s, n)

is evaluated by trapezoid quadrature on a vertical line.  Everything is
converted to the Hardy Z normalization, so one run yields a real known
part plus real coefficients delta_q multiplying the unknown b_q.

Performance notes: along the contour z = nu + i m h only (Q/n)^z depends
on n, and only g depends on the test function.  The kernel therefore
caches the gamma-factor node products per (instance, s) and runs a
geometric phase recurrence per n, so one evaluation costs O(nodes * N)
complex multiplies rather than O(nodes * N) gamma evaluations.

Working precision is raised internally by a measured allowance whenever
the integrand bulges above the size of the answer (severe for Gaussian
test functions centered high on the critical line); results are rounded
back to the caller's context.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from .lmodel import (
    CoefficientTable,
    FunctionalEquation,
    Known,
    LFunctionInstance,
    Partial,
    TestFunction,
    Unknown,
    ramanujan_bound,
)
from .numerics import (
    IntegrationError,
    IntegrationPlan,
    PrecisionContext,
    complex_gamma,
    integrate_vertical,
)

__all__ = [
    "Evaluation",
    "AfeKernel",
    "evaluate",
    "f1",
    "f2",
    "hardy_z",
    "error_l1",
    "EvaluationError",
    "NonRealError",
    "parse_s",
]

DEFAULT_N_CUTOFF = 2000
TAIL_WINDOW = 200
TAIL_SAFETY = 100


class EvaluationError(Exception):
    pass


class NonRealError(EvaluationError):
    """Hardy Z normalization left a non-negligible imaginary part."""


def parse_s(text):
    """'1/2+10i' / '0.5+14.134725i' / '1/2' -> (Fraction re, Fraction im)."""
    if isinstance(text, tuple):
        return Fraction(text[0]), Fraction(text[1])
    raw = str(text).replace(" ", "").replace("j", "i")
    has_i = raw.endswith("i")
    t = raw[:-1] if has_i else raw
    for i in range(len(t) - 1, 0, -1):
        if t[i] in "+-" and t[i - 1] not in "eE":
            re_part, im_part = t[:i], t[i:]
            break
    else:
        if has_i:
            return Fraction(0), Fraction(t if t not in ("", "+", "-") else t + "1")
        return Fraction(t), Fraction(0)
    if not has_i:
        raise ValueError(f"cannot parse s = {text!r} (expected 're+im i' or 're')")
    return Fraction(re_part), Fraction(im_part if im_part not in "+-" else im_part + "1")


# ---------------------------------------------------------------------------
# Result type


@dataclass
class Evaluation:
    """One AFE run, in Hardy Z normalization (real numbers throughout).

    known_part collects pole terms and all fully-known coefficients;
    deltas[q] multiplies the unknown b_q (Partial entries fold their known
    scalar into the aggregate); coeffs[n] is the full per-index coefficient
    (kept for reporting and the tail diagnostics); mu_log10[n] is an
    oscillation-proof envelope of the per-index term magnitude.
    """

    instance_label: str
    s: tuple  # (Fraction, Fraction)
    g: TestFunction
    n_cutoff: int
    degree: int
    bound_constant: Fraction
    known_part: mpfr
    deltas: dict
    tail_bound: mpfr
    z_normalizer_phase: mpc
    coeffs: list = field(repr=False, default=None)
    mu_log10: list = field(repr=False, default=None)
    diagnostics: dict = field(default_factory=dict)

    @property
    def beta(self):
        return -self.g.b

    def delta(self, q):
        return self.deltas.get(q, mpfr(0))

    def run_key(self):
        return (self.instance_label, str(self.s[0]), str(self.s[1]), self.n_cutoff)


def error_l1(ev, d, c):
    """sum_q |delta_q| * C * Ram(q, d) + tail_bound."""
    c = Fraction(c)
    bits = ev.known_part.precision + 16
    with gmpy2.context(precision=bits):
        cf = mpfr(c.numerator) / mpfr(c.denominator)
        total = mpfr(0)
        for q, dq in ev.deltas.items():
            total += abs(dq) * ramanujan_bound(q, d) * cf
        return total + ev.tail_bound


# ---------------------------------------------------------------------------
# Double-precision magnitude model (plan tuning only)


def _lgamma_re_f(z):
    """Re log Gamma(z) in doubles, Stirling with argument shift."""
    x, y = z.real, z.imag
    if x < 0.5:
        # reflection, overflow-safe ln|sin(pi z)|
        piy = math.pi * abs(y)
        if piy > 40:
            lsin = piy - math.log(2.0)
        else:
            lsin = cmath.log(cmath.sin(cmath.pi * complex(x, y))).real
        return math.log(math.pi) - lsin - _lgamma_re_f(complex(1 - x, -y))
    shift = 0
    corr = 0.0
    while x + shift < 12:
        corr += 0.5 * math.log((x + shift) ** 2 + y * y)
        shift += 1
    w = complex(x + shift, y)
    val = (w - 0.5) * cmath.log(w) - w + 0.5 * math.log(2 * math.pi) + 1 / (12 * w)
    return val.real - corr


def _log_abs_g_f(g, w):
    """log |g(w)| in doubles."""
    out = 0.0
    if g.b:
        out += -float(g.b) * w.imag
    if g.c:
        u = w - complex(0, float(g.t0))
        out += float(g.c) * (u.real**2 - u.imag**2)
    return out


def _node_logmag_f(fe, s, g, nu, y, side, log_q):
    """log of the f1/f2 integrand magnitude at z = nu + i y (doubles)."""
    z = complex(nu, y)
    total = -math.log(abs(z)) + nu * log_q
    if side == 1:
        w = s + z
        total += _log_abs_g_f(g, w)
        for sh in fe.gamma_shifts:
            total += _lgamma_re_f(float(sh.kappa) * w + complex(float(sh.lam_re), float(sh.lam_im)))
    else:
        w1 = 1 - s + z
        total += _log_abs_g_f(g, s - z)
        for sh in fe.gamma_shifts:
            total += _lgamma_re_f(
                float(sh.kappa) * w1 + complex(float(sh.lam_re), -float(sh.lam_im))
            )
    return total


@dataclass
class _PlanChoice:
    nu: Fraction
    h: Fraction
    half_width: float
    quad_bits: int
    bulge_digits: float
    anchor_log10: float


def _tune_plan(fe, s_f, gs, ctx, n_cutoff):
    """Choose (nu, h, T, precision) minimizing node count in a double-prec model."""
    log_q = math.log(float(fe.q_expr))
    anchor = s_f.real * log_q + _log_abs_g_f(gs[0], s_f)
    for sh in fe.gamma_shifts:
        anchor += _lgamma_re_f(float(sh.kappa) * s_f + complex(float(sh.lam_re), float(sh.lam_im)))
    # anchor uses g_0; per-g |g(s)| differences are part of each g's bulge

    lb = float(fe.nu_lower_bound(mpc(s_f.real, s_f.imag)))
    for s_re, s_im, _, _ in fe.poles:
        lb = max(lb, abs(float(s_re) - s_f.real))
    base = max(1.0, lb + 0.5)
    candidates = [Fraction(x) for x in (1, 2, 3, 4, 6, 8, 12, 16) if x >= base] or [
        Fraction(math.ceil(base))
    ]

    target_nats = (ctx.target_digits + 10) * math.log(10)
    x_osc = max(abs(log_q - math.log(n_cutoff)), abs(log_q)) + 1.0
    best = None
    for nu in candidates:
        nu_f = float(nu)
        peak = -math.inf
        t_need = 0.0
        for g in gs:
            g_anchor = anchor - _log_abs_g_f(gs[0], s_f) + _log_abs_g_f(g, s_f)
            for side in (1, 2):
                mx = -math.inf
                y = 0.0
                sign_ts = []
                for sign in (1.0, -1.0):
                    y = 0.0
                    local_max = -math.inf
                    while y < 40000:
                        lm = _node_logmag_f(fe, s_f, g, nu_f, sign * y, side, log_q)
                        local_max = max(local_max, lm)
                        if lm < g_anchor - target_nats - 8 and lm < local_max - 3:
                            break
                        y += 1.0
                    sign_ts.append(y)
                    mx = max(mx, local_max)
                peak = max(peak, mx - g_anchor)
                t_need = max(t_need, *sign_ts)
        bulge_nats = max(0.0, peak)
        quad_bits = ctx.working_bits + int(bulge_nats / math.log(2)) + 32
        h_max = (2 * math.pi * 0.9 * nu_f) / (quad_bits * math.log(2) + 0.9 * nu_f * x_osc + 25)
        h = Fraction(1, 2 ** max(3, int(math.ceil(-math.log2(min(h_max, 0.125))))))
        # refine T for the final precision cutoff
        t_need = t_need * 1.05 + 8 * float(h)
        cost = t_need / float(h) * quad_bits**2  # node count * per-op cost
        choice = _PlanChoice(
            nu, h, t_need, quad_bits, bulge_nats / math.log(10), anchor / math.log(10)
        )
        if best is None or cost < best[0]:
            best = (cost, choice)
    return best[1]


# ---------------------------------------------------------------------------
# The kernel


class AfeKernel:
    """Shared machinery for evaluating one instance at one point s.

    prepare() fixes the integration plan and internal precision for a set of
    test functions; evaluate() runs one test function.  Gamma node values,
    per-index logarithms and phase factors are cached across evaluations.
    """

    def __init__(self, instance, s, ctx, n_cutoff=None):
        self.instance = instance
        self.fe = instance.fe
        self.table = instance.coeffs
        self.ctx = ctx
        self.s_re, self.s_im = parse_s(s) if not isinstance(s, tuple) else (
            Fraction(s[0]),
            Fraction(s[1]),
        )
        self.n_cutoff = min(n_cutoff or DEFAULT_N_CUTOFF, self.table.n_cutoff)
        if self.fe.epsilon not in (1, -1):
            raise EvaluationError("evaluation pipeline requires epsilon = +-1")
        for s_re, s_im, _, _ in self.fe.poles:
            if (Fraction(s_re), Fraction(s_im)) == (self.s_re, self.s_im):
                raise EvaluationError(f"s = {s} is a pole of Lambda")
        self.on_critical_line = self.s_re == Fraction(1, 2)
        self._prepared_for = None
        self._choice = None
        self.quad_ctx = None
        # caches filled under quad_ctx
        self._a1p = self._a1n = self._a2p = self._a2n = None
        self._per_n = None
        self._consts = None

    # -- plan selection ------------------------------------------------------

    def prepare(self, gs):
        """Fix plan and internal precision adequate for every g in gs."""
        gs = list(gs)
        for g in gs:
            if not g.valid_for_degree(self.fe.degree):
                raise EvaluationError(
                    f"test function {g.label} invalid for degree {self.fe.degree}"
                )
        s_f = complex(float(self.s_re), float(self.s_im))
        choice = _tune_plan(self.fe, s_f, gs, self.ctx, self.n_cutoff)
        self._choice = choice
        self.quad_ctx = PrecisionContext(
            self.ctx.target_digits, max(choice.quad_bits, self.ctx.working_bits)
        )
        self._a1p, self._a1n = [], []
        self._a2p, self._a2n = [], []
        self._per_n = None
        self._consts = None
        self._prepared_for = tuple(g.label for g in gs)
        return choice

    @property
    def plan(self):
        c = self._choice
        m = max(10, int(math.ceil(c.half_width / float(c.h))))
        return IntegrationPlan(c.nu, c.h, c.h * m)

    # -- cached quantities under quad_ctx -------------------------------------

    def _constants(self):
        if self._consts is None:
            fe = self.fe
            s = mpc(
                mpfr(self.s_re.numerator) / mpfr(self.s_re.denominator),
                mpfr(self.s_im.numerator) / mpfr(self.s_im.denominator),
            )
            log_q = fe.log_q()
            log_gamma_mag, gamma_phase = fe.log_gamma_factor_desc(s, self.quad_ctx)
            self._consts = {
                "s": s,
                "log_q": log_q,
                "gamma_log_mag": log_gamma_mag,
                "gamma_phase": gamma_phase,
            }
        return self._consts

    def _node_z(self, m):
        c = self._choice
        h = mpfr(c.h.numerator) / mpfr(c.h.denominator)
        nu = mpfr(c.nu.numerator) / mpfr(c.nu.denominator)
        return mpc(nu, m * h)

    def _extend_nodes(self, m_count):
        """Ensure gamma node products exist for |m| <= m_count."""
        cst = self._constants()
        s = cst["s"]
        fe = self.fe
        kapl1 = [(sh.kappa_mpfr(), sh.lam()) for sh in fe.gamma_shifts]
        kapl2 = [
            (sh.kappa_mpfr(), mpc(sh.lam().real, -sh.lam().imag)) for sh in fe.gamma_shifts
        ]
        one_minus_s = 1 - s

        def gamma_product(z, shifted, kapl):
            val = 1 / z
            base = z + shifted
            for kap, lam in kapl:
                val *= complex_gamma(kap * base + lam, self.quad_ctx)
            return val

        def fill(lst, sign, shifted, kapl):
            while len(lst) <= m_count:
                m = len(lst)
                z = self._node_z(m if sign > 0 else -m)
                lst.append(gamma_product(z, shifted, kapl))

        fill(self._a1p, +1, s, kapl1)
        fill(self._a1n, -1, s, kapl1)
        fill(self._a2p, +1, one_minus_s, kapl2)
        fill(self._a2n, -1, one_minus_s, kapl2)

    def _per_n_data(self):
        """ln-based per-index factors shared by every test function."""
        if self._per_n is None:
            cst = self._constants()
            s, log_q = cst["s"], cst["log_q"]
            c = self._choice
            h = mpfr(c.h.numerator) / mpfr(c.h.denominator)
            nu = mpfr(c.nu.numerator) / mpfr(c.nu.denominator)
            eps = self.fe.epsilon
            data = []
            for n in range(1, self.n_cutoff + 1):
                w = log_q - gmpy2.log(mpfr(n))  # ln(Q/n)
                u = gmpy2.exp(mpc(0, h * w))  # phase step
                scale = gmpy2.exp(nu * w)  # |(Q/n)^nu|
                pref1 = gmpy2.exp(s * w)  # (Q/n)^s
                pref2 = eps * gmpy2.exp((1 - s) * w)  # eps (Q/n)^(1-s)
                data.append((u, scale * pref1, scale * pref2))
            self._per_n = data
        return self._per_n

    def _known_values(self):
        vals = {}
        for n in range(1, self.n_cutoff + 1):
            e = self.table.entries.get(n)
            if isinstance(e, Known):
                vals[n] = e.value.to_mpfr()
        return vals

    # -- main entry ------------------------------------------------------------

    def evaluate(self, g):
        """One AFE run with test function g; returns a Z-normalized Evaluation."""
        if self._prepared_for is None:
            self.prepare([g])
        if not self.on_critical_line:
            raise EvaluationError(
                "Hardy Z evaluation requires Re(s) = 1/2; use evaluate_completed()"
            )
        t_start = time.time()
        with self.quad_ctx.active():
            out = self._evaluate_inner(g)
        out.diagnostics["seconds"] = round(time.time() - t_start, 3)
        return out

    def _evaluate_inner(self, g, normalized=True):
        cst = self._constants()
        s = cst["s"]
        c = self._choice
        h = mpfr(c.h.numerator) / mpfr(c.h.denominator)
        quad_bits = self.quad_ctx.working_bits

        # node weights for this g (grow until the tails are negligible)
        m_count = max(10, int(math.ceil(c.half_width / float(c.h))))
        hard_cap = 16 * m_count
        while True:
            self._extend_nodes(m_count)
            w1p, w1n, w2p, w2n = [], [], [], []
            pref = h / (2 * gmpy2.const_pi())
            for m in range(m_count + 1):
                z = self._node_z(m)
                w1p.append(self._a1p[m] * g(s + z) * pref)
                w2p.append(self._a2p[m] * g(s - z) * pref)
                zn = self._node_z(-m)
                w1n.append(self._a1n[m] * g(s + zn) * pref)
                w2n.append(self._a2n[m] * g(s - zn) * pref)
            peak = max(
                max(abs(x) for x in w1p),
                max(abs(x) for x in w1n),
                max(abs(x) for x in w2p),
                max(abs(x) for x in w2n),
            )
            tail = max(
                max(abs(x) for x in w1p[-4:]),
                max(abs(x) for x in w1n[-4:]),
                max(abs(x) for x in w2p[-4:]),
                max(abs(x) for x in w2n[-4:]),
            )
            if tail <= peak * mpfr(2) ** (-quad_bits + 8):
                break
            if m_count >= hard_cap:
                raise IntegrationError(
                    f"quadrature tails not converged at {m_count} nodes per side "
                    f"(tail/peak = {float(tail / peak):.3e})"
                )
            m_count = int(m_count * 1.5) + 8

        # normalizer  N(s) = g(s) * eps^(1/2) * |gamma factor|  (modulus only:
        # Lambda(s)/eps^(1/2) is real on the critical line, so dividing by
        # |gamma| keeps it real and |Z| = |L|)
        eps = self.fe.epsilon
        eps_half = mpc(0, 1) if eps == -1 else mpc(1)  # eps^(1/2) pinned to +i
        if normalized:
            inv_norm = gmpy2.exp(-cst["gamma_log_mag"]) / (eps_half * g(s))
        else:
            inv_norm = mpc(1)

        # pole terms
        pole_sum = mpc(0)
        for s_k, r_k in self.fe.pole_data(self.quad_ctx):
            pole_sum += r_k * g(s_k) / (s - s_k)

        per_n = self._per_n_data()
        known_vals = self._known_values()
        entries = self.table.entries

        known_sum = pole_sum * inv_norm
        deltas = {}
        coeffs = [None] * (self.n_cutoff + 1)
        mu_log10 = [None] * (self.n_cutoff + 1)
        im_known = mpfr(0)
        im_delta_max = mpfr(0)

        w1p0, w2p0 = w1p[0], w2p[0]
        for n in range(1, self.n_cutoff + 1):
            u, p1, p2 = per_n[n - 1]
            acc1 = w1p0
            acc2 = w2p0
            v = mpc(1)
            for a1p, a1n, a2p, a2n in zip(w1p[1:], w1n[1:], w2p[1:], w2n[1:]):
                v = v * u
                cv = v.conjugate()
                acc1 = acc1 + a1p * v + a1n * cv
                acc2 = acc2 + a2p * v + a2n * cv
            t1 = p1 * acc1 * inv_norm
            t2 = p2 * acc2 * inv_norm
            c_n = t1 + t2
            coeffs[n] = c_n.real
            mu = abs(t1) + abs(t2)
            mu_log10[n] = float(gmpy2.log10(mu)) if mu > 0 else -float("inf")
            e = entries.get(n)
            if isinstance(e, Known):
                known_sum += known_vals[n] * c_n
            elif isinstance(e, Unknown):
                deltas[e.symbol] = deltas.get(e.symbol, mpfr(0)) + c_n.real
                im_delta_max = max(im_delta_max, abs(c_n.imag))
            elif isinstance(e, Partial):
                scal = e.scalar.to_mpfr()
                deltas[e.symbol] = deltas.get(e.symbol, mpfr(0)) + scal * c_n.real
                im_delta_max = max(im_delta_max, abs(scal * c_n.imag))
            else:
                raise EvaluationError(f"missing coefficient entry for n={n}")
        if not normalized:
            return known_sum
        im_known = abs(known_sum.imag)

        tail_bound, tail_diag = _tail_model(
            mu_log10, self.n_cutoff, self.fe.degree, self.table.bound_constant
        )
        # representation error of the stored numbers: everything is rounded
        # to the caller's working precision, so consumers comparing
        # evaluations (the LP constraints) must allow this granularity
        scale = abs(known_sum.real) + tail_bound
        c_float = float(self.table.bound_constant)
        for q, v in deltas.items():
            scale += abs(v) * ramanujan_bound(q, self.fe.degree) * c_float
        numeric_slack = float(scale * mpfr(2) ** (-self.ctx.working_bits + 4))

        base = self.ctx
        ev = Evaluation(
            instance_label=self.instance.label,
            s=(self.s_re, self.s_im),
            g=g,
            n_cutoff=self.n_cutoff,
            degree=self.fe.degree,
            bound_constant=self.table.bound_constant,
            known_part=base.round_real(known_sum.real),
            deltas={q: base.round_real(v) for q, v in deltas.items()},
            tail_bound=base.round_real(tail_bound),
            z_normalizer_phase=base.round_complex(eps_half * g(s)),
            coeffs=[None] + [base.round_real(x) for x in coeffs[1:]],
            mu_log10=mu_log10,
            diagnostics={
                "nu": str(c.nu),
                "h": str(c.h),
                "nodes_per_side": m_count,
                "quad_bits": quad_bits,
                "bulge_digits": round(c.bulge_digits, 2),
                "im_residual_known": float(im_known),
                "im_residual_delta_max": float(im_delta_max),
                "numeric_slack": numeric_slack,
                **tail_diag,
            },
        )
        return ev

    def evaluate_many(self, gs, progress=None):
        self.prepare(gs)
        out = []
        for i, g in enumerate(gs):
            out.append(self.evaluate(g))
            if progress:
                progress(i + 1, len(gs))
        return out

    def evaluate_completed(self, g):
        """Lambda(s) g(s) itself (complex), for any non-pole s.

        Requires a fully known coefficient table (no symbols).
        """
        if self.table.symbols():
            raise EvaluationError("evaluate_completed requires a fully known table")
        if self._prepared_for is None:
            self.prepare([g])
        with self.quad_ctx.active():
            ev = self._evaluate_inner(g, normalized=False)
        return self.ctx.round_complex(ev)


# ---------------------------------------------------------------------------
# Tail model


def _tail_model(mu_log10, n_cutoff, degree, bound_constant, window=TAIL_WINDOW):
    """Geometric extrapolation of the term envelope beyond n_cutoff.

    Least-squares line through log10(mu_n) on the last `window` indices;
    the extrapolated terms are summed against exact Ramanujan bounds
    (Ram(n, d) is the d-fold divisor function, so summing beats any
    pointwise envelope by many orders for high degree), a crude
    n^log2(d)-envelope integral bounds the far remainder, and the result
    carries the fixed safety factor 100.
    """
    lo = max(2, n_cutoff - window + 1)
    xs = list(range(lo, n_cutoff + 1))
    ys = [mu_log10[n] for n in xs]
    finite = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
    if len(finite) < max(8, len(xs) // 2):
        raise EvaluationError("tail model: too few finite term magnitudes")
    n_pts = len(finite)
    mean_x = sum(x for x, _ in finite) / n_pts
    mean_y = sum(y for _, y in finite) / n_pts
    sxx = sum((x - mean_x) ** 2 for x, _ in finite)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in finite)
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    if slope > -1e-7:
        raise EvaluationError(
            f"tail model: term magnitudes are not decaying (slope {slope:.3e}); "
            "increase the coefficient cutoff"
        )
    pred_next = intercept + slope * (n_cutoff + 1)
    # sum Ram(n, d) 10^(slope (n - N - 1)) exactly until the geometric factor
    # has eaten 36 orders of magnitude, then bound the rest by an integral
    horizon = min(int(36 / -slope) + 1, 4_000_000)
    ram_sum = 0.0
    for j in range(horizon):
        ram_sum += ramanujan_bound(n_cutoff + 1 + j, degree) * 10.0 ** (slope * j)
    lg_d = math.log2(degree) if degree > 1 else 0.0
    n_end = n_cutoff + horizon
    remainder = (
        (n_end**lg_d) * 10.0 ** (slope * (horizon - 1)) / (-slope * math.log(10)) * 2
    )
    log10_tail = pred_next + math.log10(ram_sum + remainder) + math.log10(TAIL_SAFETY)
    log10_tail += math.log10(float(bound_constant)) if bound_constant != 1 else 0.0
    tail = gmpy2.exp2(mpfr(log10_tail) * gmpy2.log2(mpfr(10)))
    diag = {
        "tail_slope_log10": slope,
        "tail_intercept_log10": intercept,
        "tail_pred_last_log10": intercept + slope * n_cutoff,
        "tail_actual_last_log10": mu_log10[n_cutoff],
        "tail_log10": log10_tail,
    }
    return tail, diag


# ---------------------------------------------------------------------------
# Spec-level single integrals (generic, used for cross-checks and tests)


def _check_nu(plan, fe, s):
    lb = fe.nu_lower_bound(s)
    if not float(plan.nu) > float(lb):
        raise ValueError(f"plan.nu = {plan.nu} must exceed {float(lb)}")


def f1(s, n, g, fe, plan, ctx):
    """f1(s, n): Mellin-side smoothing integral, direct quadrature."""
    with ctx.active(16):
        s = mpc(s)
        _check_nu(plan, fe, s)
        log_qn = fe.log_q() - gmpy2.log(mpfr(n))
        kapl = [(sh.kappa_mpfr(), sh.lam()) for sh in fe.gamma_shifts]

        def integrand(z):
            val = gmpy2.exp(z * log_qn) / z * g(s + z)
            for kap, lam in kapl:
                val *= complex_gamma(kap * (z + s) + lam, ctx)
            return val

        return integrate_vertical(integrand, plan, ctx)


def f2(one_minus_s, n, g, fe, plan, ctx):
    """f2(1-s, n): mirror integral with conjugated shifts and g(s - z)."""
    with ctx.active(16):
        oms = mpc(one_minus_s)
        s = 1 - oms
        _check_nu(plan, fe, oms)
        log_qn = fe.log_q() - gmpy2.log(mpfr(n))
        kapl = [
            (sh.kappa_mpfr(), mpc(sh.lam().real, -sh.lam().imag)) for sh in fe.gamma_shifts
        ]

        def integrand(z):
            val = gmpy2.exp(z * log_qn) / z * g(s - z)
            for kap, lam in kapl:
                val *= complex_gamma(kap * (z + oms) + lam, ctx)
            return val

        return integrate_vertical(integrand, plan, ctx)


def hardy_z(lambda_times_g, s, g, fe, ctx):
    """Rotate Lambda(s) g(s) to the real Hardy Z value at s = 1/2 + it.

    Divides by g(s), by the modulus of the completed gamma factor and by
    the eps^(1/2) phase; raises NonRealError when the residual imaginary
    part exceeds 10^(-target_digits/2) relative.
    """
    if fe.epsilon not in (1, -1):
        raise EvaluationError("hardy_z requires epsilon = +-1")
    with ctx.active(16):
        s = mpc(s)
        if s.real != mpfr(1) / 2:
            raise EvaluationError("hardy_z requires Re(s) = 1/2")
        log_mag, _ = fe.log_gamma_factor_desc(s, ctx)
        eps_half = mpc(0, 1) if fe.epsilon == -1 else mpc(1)
        z = mpc(lambda_times_g) * gmpy2.exp(-log_mag) / (eps_half * g(s))
        tol = mpfr(10) ** (-(ctx.target_digits // 2))
        if abs(z.imag) > tol * max(abs(z.real), tol):
            raise NonRealError(
                f"hardy_z residual imaginary part {float(z.imag):.3e} vs real {float(z.real):.3e}"
            )
    return ctx.round_real(z.real)


def evaluate(instance, s, g, ctx, n_cutoff=None):
    """Single-shot evaluation (builds a kernel; prefer AfeKernel for many g)."""
    kern = AfeKernel(instance, s, ctx, n_cutoff=n_cutoff)
    kern.prepare([g])
    return kern.evaluate(g)
