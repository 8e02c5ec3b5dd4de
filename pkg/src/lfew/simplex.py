"""Dense two-phase primal simplex with Bland's rule, at working precision.

Problem form:

    minimize c . x   subject to   A x <= b,   lo <= x <= up

Sizes here are small (a few hundred variables and rows), degeneracy is
common (many near-parallel constraints), so Bland's anti-cycling rule and
mpfr arithmetic are a better fit than sparse or interior-point machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

__all__ = ["solve_lp", "LPSolution", "LPInfeasibleError", "LPUnboundedError"]


class LPInfeasibleError(Exception):
    pass


class LPUnboundedError(Exception):
    pass


@dataclass
class LPSolution:
    x: list
    objective: mpfr
    active_rows: list  # indices of tight A-rows at the optimum
    iterations: int


def _pivot(tab, basis, row, col, ncols):
    piv = tab[row][col]
    trow = tab[row]
    inv = 1 / piv
    for j in range(ncols):
        trow[j] *= inv
    for i, r in enumerate(tab):
        if i != row and r[col]:
            f = r[col]
            for j in range(ncols):
                r[j] -= f * trow[j]
    basis[row] = col


def _simplex_phase(tab, basis, ncols, cost_row, tol, max_iter):
    """Minimize the cost row in-place; Bland's rule; returns iteration count."""
    it = 0
    while True:
        it += 1
        if it > max_iter:
            raise LPInfeasibleError("simplex iteration cap exceeded (cycling?)")
        # Bland: entering = lowest-index column with negative reduced cost
        enter = -1
        for j in range(ncols - 1):
            if cost_row[j] < -tol:
                enter = j
                break
        if enter < 0:
            return it
        # ratio test, Bland tie-break on lowest basis index
        leave, best = -1, None
        for i, r in enumerate(tab):
            a = r[enter]
            if a > tol:
                ratio = r[ncols - 1] / a
                if best is None or ratio < best - tol or (
                    abs(ratio - best) <= tol and basis[i] < basis[leave]
                ):
                    leave, best = i, ratio
        if leave < 0:
            raise LPUnboundedError("objective unbounded below")
        _pivot(tab, basis, leave, enter, ncols)
        # keep the cost row consistent
        f = cost_row[enter]
        if f:
            trow = tab[leave]
            for j in range(ncols):
                cost_row[j] -= f * trow[j]


def solve_lp(c, a_rows, b, lo, up, precision_bits=None, max_iter=200000):
    """Minimize c.x subject to a_rows x <= b and lo <= x <= up (all mpfr-able).

    Returns an LPSolution; raises LPInfeasibleError / LPUnboundedError.
    """
    nv = len(c)
    ctx = gmpy2.get_context().copy()
    if precision_bits:
        ctx.precision = precision_bits
    with ctx:
        # the zero threshold sits a fixed margin above accumulated roundoff,
        # not at half precision: LP data here can legitimately span scales
        # down to 2^-(precision - 96) (tiny tail slacks against unit boxes)
        prec = gmpy2.get_context().precision
        tol = mpfr(2) ** (-max(48, prec - 72))
        c = [mpfr(x) for x in c]
        # normalize the objective scale so reduced-cost tests are meaningful
        # even when all multipliers are astronomically small
        c_scale = max((abs(x) for x in c), default=mpfr(0))
        if c_scale == 0:
            c_scale = mpfr(1)
        c = [x / c_scale for x in c]
        lo = [mpfr(x) for x in lo]
        up = [mpfr(x) for x in up]
        for l, u in zip(lo, up):
            if l > u:
                raise LPInfeasibleError("empty box")
        # shift x = lo + y, 0 <= y <= width
        width = [u - l for l, u in zip(lo, up)]
        rows = []
        rhs = []
        kept_rows = []  # original indices of retained A-rows
        for ix, (row, bi) in enumerate(zip(a_rows, b)):
            r = [mpfr(x) for x in row]
            shifted = mpfr(bi) - sum(v * l for v, l in zip(r, lo))
            r_scale = max((abs(x) for x in r), default=mpfr(0))
            r_scale = max(r_scale, abs(shifted) * mpfr(2) ** -20)
            if r_scale == 0:
                if shifted < 0:
                    raise LPInfeasibleError("constant row is violated")
                continue
            rows.append([x / r_scale for x in r])
            rhs.append(shifted / r_scale)
            kept_rows.append(ix)
        m_a = len(rows)
        for i in range(nv):
            e = [mpfr(0)] * nv
            e[i] = mpfr(1)
            rows.append(e)
            rhs.append(width[i])
        m = len(rows)
        # columns: y (nv) | slack (m) | artificial (added as needed) | rhs
        # negative rhs rows are negated into >= rows with artificials
        art_rows = [i for i in range(m) if rhs[i] < 0]
        n_art = len(art_rows)
        ncols = nv + m + n_art + 1
        tab = []
        basis = [0] * m
        art_ix = 0
        for i in range(m):
            r = [mpfr(0)] * ncols
            sign = mpfr(-1) if rhs[i] < 0 else mpfr(1)
            for j in range(nv):
                r[j] = sign * rows[i][j]
            r[nv + i] = sign  # slack
            r[ncols - 1] = sign * rhs[i]
            if rhs[i] < 0:
                r[nv + m + art_ix] = mpfr(1)
                basis[i] = nv + m + art_ix
                art_ix += 1
            else:
                basis[i] = nv + i
            tab.append(r)

        iters = 0
        if n_art:
            # phase 1: minimize sum of artificials
            cost = [mpfr(0)] * ncols
            for j in range(nv + m, nv + m + n_art):
                cost[j] = mpfr(1)
            for i in range(m):
                if basis[i] >= nv + m:
                    for j in range(ncols):
                        cost[j] -= tab[i][j]
            iters += _simplex_phase(tab, basis, ncols, cost, tol, max_iter)
            resid = -cost[ncols - 1]
            if resid > tol * max(1, n_art):
                raise LPInfeasibleError(
                    f"phase-1 residual {float(resid):.3e}: constraints inconsistent "
                    "(tails too tight or precision exhausted)"
                )
            # drive leftover artificials out of the basis where possible
            for i in range(m):
                if basis[i] >= nv + m:
                    for j in range(nv + m):
                        if abs(tab[i][j]) > tol:
                            _pivot(tab, basis, i, j, ncols)
                            break

        # phase 2 (big-M on artificial columns blocks their re-entry; any
        # artificial still basic after phase 1 sits at value 0)
        cost = [mpfr(0)] * ncols
        for j in range(nv):
            cost[j] = c[j]
        big = (sum(abs(x) for x in c) + 1) * mpfr(2) ** 24
        for j in range(nv + m, nv + m + n_art):
            cost[j] = big
        for i in range(m):
            f = cost[basis[i]]
            if f:
                trow = tab[i]
                for j in range(ncols):
                    cost[j] -= f * trow[j]
        iters += _simplex_phase(tab, basis, ncols, cost, tol, max_iter)

        y = [mpfr(0)] * (nv + m + n_art)
        for i in range(m):
            y[basis[i]] = tab[i][ncols - 1]
        x = [lo[i] + y[i] for i in range(nv)]
        obj = sum(ci * xi for ci, xi in zip(c, x)) * c_scale
        active = []
        for i in range(m_a):
            slack = y[nv + i]
            if abs(slack) <= tol * 16:
                active.append(kept_rows[i])
        return LPSolution([mpfr(v) for v in x], mpfr(obj), active, iters)
