"""Combine many AFE evaluations: least-squares weights and LP bounds.

Both methods consume aligned Evaluation objects (same instance, same s,
different test functions).  Least squares minimizes the Ramanujan-weighted
L2 norm of the combined unknown-coefficient multipliers subject to the
weights summing to 1; linear programming treats pairwise equality of the
evaluations as constraints and yields certified [min, max] intervals for
the value or for an individual unknown coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .afe import Evaluation, error_l1
from .lmodel import ramanujan_bound
from .simplex import LPInfeasibleError, LPSolution, solve_lp

__all__ = [
    "WeightVector",
    "LPResult",
    "ls_weights",
    "combine",
    "lp_bounds",
    "recover_coefficients",
    "SingularSystemError",
    "DEFAULT_SYMBOL_CUT",
]

DEFAULT_SYMBOL_CUT = 1000


class SingularSystemError(Exception):
    """Normal equations singular: evaluations too similar to combine."""


@dataclass
class WeightVector:
    betas: list  # test-function labels
    c: list  # mpfr weights, sum 1
    condition: float = 0.0

    def __iter__(self):
        return iter(self.c)


@dataclass
class LPResult:
    objective_label: str
    min: mpfr
    max: mpfr
    certificate: dict  # constraint label -> active at min/max

    def _ctx(self):
        bits = max(self.min.precision, self.max.precision) + 8
        return gmpy2.context(precision=bits)

    @property
    def midpoint(self):
        with self._ctx():
            return (self.min + self.max) / 2

    @property
    def halfwidth(self):
        with self._ctx():
            return (self.max - self.min) / 2


def _check_aligned(evals):
    if len(evals) < 1:
        raise ValueError("need at least one evaluation")
    key = evals[0].run_key()
    for ev in evals[1:]:
        if ev.run_key() != key:
            raise ValueError(
                f"evaluations not aligned: {ev.run_key()} vs {key}"
            )


def _work_context(evals, extra_bits=32):
    """gmpy2 context at the evaluations' stored precision (plus guard)."""
    bits = max(ev.known_part.precision for ev in evals) + extra_bits
    return gmpy2.context(precision=bits, trap_divzero=True)


def _solve_dense(a, b):
    """Gaussian elimination with partial pivoting on mpfr; returns (x, cond_proxy)."""
    n = len(a)
    m = [row[:] + [bv] for row, bv in zip(a, b)]
    piv_min, piv_max = None, None
    for col in range(n):
        p = max(range(col, n), key=lambda r: abs(m[r][col]))
        if not abs(m[p][col]) > 0:
            raise SingularSystemError(
                "singular normal system: evaluations are linearly dependent"
            )
        m[col], m[p] = m[p], m[col]
        pv = abs(m[col][col])
        piv_min = pv if piv_min is None else min(piv_min, pv)
        piv_max = pv if piv_max is None else max(piv_max, pv)
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f:
                for cc in range(col, n + 1):
                    m[r][cc] -= f * m[col][cc]
    x = [mpfr(0)] * n
    for r in range(n - 1, -1, -1):
        acc = m[r][n]
        for cc in range(r + 1, n):
            acc -= m[r][cc] * x[cc]
        x[r] = acc / m[r][r]
    cond = float(piv_max / piv_min) if piv_min else float("inf")
    return x, cond


def ls_weights(evals, symbol_cut=DEFAULT_SYMBOL_CUT, d=None, c=None, protect=()):
    """Least-squares weights minimizing the combined unknown-term multipliers.

    Minimizes sum_q Ram(q,d)^2 C^2 (sum_j w_j delta_q^(j))^2 over weights with
    sum w_j = 1, via the Lagrange-multiplier normal equations.  Only symbols
    with index < symbol_cut enter the objective (matching the evaluation
    split); `protect` lists symbols deliberately excluded so that their
    multipliers survive into the combined answer (coefficient-formula runs).
    """
    _check_aligned(evals)
    if len(evals) < 2:
        raise ValueError("need at least two evaluations for a weighted combination")
    d = d or evals[0].degree
    c = Fraction(c if c is not None else evals[0].bound_constant)
    j = len(evals)
    symbols = sorted(
        {q for ev in evals for q in ev.deltas if q < symbol_cut and q not in set(protect)}
    )
    with _work_context(evals):
        cf = mpfr(c.numerator) / mpfr(c.denominator)
        weights = {q: (ramanujan_bound(q, d) * cf) ** 2 for q in symbols}
        m = [[mpfr(0)] * j for _ in range(j)]
        for q in symbols:
            wq = weights[q]
            ds = [ev.delta(q) for ev in evals]
            for r in range(j):
                if ds[r]:
                    row = m[r]
                    wr = wq * ds[r]
                    for cc in range(r, j):
                        row[cc] += wr * ds[cc]
        for r in range(j):
            for cc in range(r):
                m[r][cc] = m[cc][r]
        # KKT system: [2M  1; 1^T 0] [w; mu] = [0; 1]
        kkt = [[2 * m[r][cc] for cc in range(j)] + [mpfr(1)] for r in range(j)]
        kkt.append([mpfr(1)] * j + [mpfr(0)])
        rhs = [mpfr(0)] * j + [mpfr(1)]
        sol, cond = _solve_dense(kkt, rhs)
        return WeightVector([ev.g.label for ev in evals], sol[:j], cond)


def combine(evals, w, d=None, c=None):
    """Weighted combination: (value, L1 error bound).

    value = sum_j w_j known_j; the error combines the surviving unknown-term
    multipliers with Ramanujan boxes plus the weighted tail bounds.
    """
    _check_aligned(evals)
    if len(w.c) != len(evals):
        raise ValueError("weight vector does not align with evaluations")
    d = d or evals[0].degree
    c = Fraction(c if c is not None else evals[0].bound_constant)
    with _work_context(evals):
        cf = mpfr(c.numerator) / mpfr(c.denominator)
        value = sum(wj * ev.known_part for wj, ev in zip(w.c, evals))
        err = mpfr(0)
        symbols = sorted({q for ev in evals for q in ev.deltas})
        for q in symbols:
            tot = sum(wj * ev.delta(q) for wj, ev in zip(w.c, evals))
            err += abs(tot) * ramanujan_bound(q, d) * cf
        err += sum(abs(wj) * ev.tail_bound for wj, ev in zip(w.c, evals))
        # numerical floor: the stored evaluations are rounded, so a combined
        # claim can never be sharper than the weighted rounding granularity
        err += sum(
            abs(wj) * mpfr(ev.diagnostics.get("numeric_slack", 0))
            for wj, ev in zip(w.c, evals)
        )
        return value, err


def _lp_system(evals, symbol_cut, d, c, tail_slack):
    """Shared constraint assembly for lp_bounds objectives."""
    cf = mpfr(Fraction(c).numerator) / mpfr(Fraction(c).denominator)
    in_syms = sorted({q for ev in evals for q in ev.deltas if q < symbol_cut})
    out_syms = sorted({q for ev in evals for q in ev.deltas if q >= symbol_cut})
    boxes = {q: cf * ramanujan_bound(q, d) for q in in_syms + out_syms}
    e1 = evals[0]
    ns1 = mpfr(e1.diagnostics.get("numeric_slack", 0))
    rows, rhs, labels = [], [], []
    for jx, ev in enumerate(evals[1:], start=2):
        coeff = [e1.delta(q) - ev.delta(q) for q in in_syms]
        shift = e1.known_part - ev.known_part
        slack = e1.tail_bound + ev.tail_bound + mpfr(tail_slack)
        slack += ns1 + mpfr(ev.diagnostics.get("numeric_slack", 0))
        # eliminated symbols (>= cut) relax the equality into the slack
        for q in out_syms:
            slack += abs(e1.delta(q) - ev.delta(q)) * boxes[q]
        rows.append(coeff)
        rhs.append(slack - shift)  # +row . x <= slack - shift
        rows.append([-v for v in coeff])
        rhs.append(slack + shift)  # -row . x <= slack + shift
        labels.append(f"pair(1,{jx})")
    lo = [-boxes[q] for q in in_syms]
    up = [boxes[q] for q in in_syms]
    return in_syms, out_syms, boxes, rows, rhs, labels, lo, up


def lp_bounds(
    evals,
    objective="value",
    d=None,
    c=None,
    tail_slack=0,
    symbol_cut=DEFAULT_SYMBOL_CUT,
    precision_bits=None,
):
    """[min, max] of the value (or one unknown coefficient) over the LP polytope.

    Variables are the unknown coefficients with index < symbol_cut, boxed by
    the Ramanujan bound; each later evaluation contributes the pair of
    inequalities |known_1 - known_j + sum_q (delta^1_q - delta^j_q) x_q| <=
    tail_1 + tail_j (+ eliminated-symbol slack + tail_slack).  For the
    "value" objective the eliminated symbols of evaluation 1 widen the final
    interval by their boxed contribution.
    """
    _check_aligned(evals)
    d = d or evals[0].degree
    c = c if c is not None else evals[0].bound_constant
    with _work_context(evals, extra_bits=128):
        return _lp_bounds_inner(evals, objective, d, c, tail_slack, symbol_cut, precision_bits)


def _lp_bounds_inner(evals, objective, d, c, tail_slack, symbol_cut, precision_bits):
    in_syms, out_syms, boxes, rows, rhs, labels, lo, up = _lp_system(
        evals, symbol_cut, d, c, tail_slack
    )
    e1 = evals[0]
    if objective == "value":
        obj = [e1.delta(q) for q in in_syms]
        base = e1.known_part
        widen = e1.tail_bound + sum(abs(e1.delta(q)) * boxes[q] for q in out_syms)
        widen += mpfr(e1.diagnostics.get("numeric_slack", 0))
        label = "value"
    else:
        q_obj = int(objective)
        if q_obj not in in_syms:
            raise ValueError(f"symbol {q_obj} not among the boxed unknowns")
        obj = [mpfr(1) if q == q_obj else mpfr(0) for q in in_syms]
        base = mpfr(0)
        widen = mpfr(0)
        label = f"b_{q_obj}"

    sol_min = solve_lp(obj, rows, rhs, lo, up, precision_bits=precision_bits)
    sol_max = solve_lp([-v for v in obj], rows, rhs, lo, up, precision_bits=precision_bits)
    lo_val = base + sol_min.objective - widen
    hi_val = base - sol_max.objective + widen
    cert = {}
    for i, lab in enumerate(labels):
        state = []
        if 2 * i in sol_min.active_rows or 2 * i + 1 in sol_min.active_rows:
            state.append("min")
        if 2 * i in sol_max.active_rows or 2 * i + 1 in sol_max.active_rows:
            state.append("max")
        cert[lab] = "+".join(state) if state else ""
    return LPResult(label, lo_val, hi_val, cert)


def recover_coefficients(
    evals, symbols, d=None, c=None, tail_slack=0, symbol_cut=DEFAULT_SYMBOL_CUT
):
    """Per-symbol LP intervals: {q: (midpoint, halfwidth)}."""
    out = {}
    for q in symbols:
        res = lp_bounds(
            evals, objective=q, d=d, c=c, tail_slack=tail_slack, symbol_cut=symbol_cut
        )
        out[q] = (res.midpoint, res.halfwidth)
    return out
