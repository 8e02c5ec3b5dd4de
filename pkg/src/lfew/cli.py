"""Command-line front end: evaluations, beta scans, LS/LP runs, data dumps.

Every report echoes its configuration, precision and tail diagnostics, and
all numbers are printed deterministically, so identical configurations
produce byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import gmpy2

from . import __version__
from .afe import error_l1
from .cache import RunSpec, ensure_evaluations
from .instances import BUILTIN_NAMES, build_instance, load_upsilon20_table
from .lmodel import TestFunction, ramanujan_bound
from .numerics import PrecisionContext
from .optimize import DEFAULT_SYMBOL_CUT, combine, lp_bounds, ls_weights, recover_coefficients
from .satake import local_factor, solve_satake

__all__ = ["main"]


def fmt(x, digits=None):
    """Deterministic scientific formatting of mpfr/float to `digits` significant digits."""
    digits = digits or 12
    x = gmpy2.mpfr(x)
    if gmpy2.is_nan(x) or gmpy2.is_infinite(x):
        return str(x)
    if x == 0:
        return "0." + "0" * (digits - 1) + "e+00"
    mant, exp, _ = x.digits(10, digits)
    sign, body = ("-", mant[1:]) if mant.startswith("-") else ("", mant)
    e = exp - 1
    return f"{sign}{body[0]}.{body[1:]}e{'+' if e >= 0 else '-'}{abs(e):02d}"


def log10_str(x):
    x = abs(gmpy2.mpfr(x))
    if x == 0:
        return "-inf"
    return f"{float(gmpy2.log10(x)):.6f}"


def _betas_from_args(args):
    if args.beta is not None:
        return [Fraction(b) for b in args.beta.split(",") if b.strip()]
    if args.beta_range is not None:
        lo, hi, step = (Fraction(x) for x in args.beta_range.split(":"))
        out = []
        b = lo
        while b <= hi:
            out.append(b)
            b += step
        return out
    return [Fraction(0)]


def _gs_from_args(args):
    c = Fraction(args.gauss_c)
    t0 = Fraction(args.center)
    return [TestFunction.from_beta(b, c, t0) for b in _betas_from_args(args)]


def _spec_from_args(args):
    return RunSpec(
        args.instance,
        args.s,
        args.digits,
        n_cutoff=args.cutoff,
        known_mode=args.known,
        table_path=args.table,
        cache_dir=args.cache_dir,
        jobs=args.jobs,
    )


def _open_out(args):
    from contextlib import nullcontext

    return open(args.out, "w") if args.out else nullcontext(sys.stdout)


def _echo_header(fh, spec, extra=None):
    fh.write(f"# lfew {__version__}\n")
    for k, v in spec.echo().items():
        fh.write(f"# {k}: {v}\n")
    for k, v in (extra or {}).items():
        fh.write(f"# {k}: {v}\n")


def _progress(label):
    def cb(done, total):
        print(f"  {label}: {done}/{total}", file=sys.stderr, flush=True)

    return cb


def cmd_eval(args):
    spec = _spec_from_args(args)
    gs = _gs_from_args(args)
    evals = ensure_evaluations(spec, gs, progress=_progress("eval"))
    with _open_out(args) as fh:
        for ev in evals:
            _echo_header(
                fh,
                spec,
                {
                    "g": ev.g.label,
                    "quad_bits": ev.diagnostics.get("quad_bits"),
                    "nu": ev.diagnostics.get("nu"),
                    "h": ev.diagnostics.get("h"),
                    "tail_log10": ev.diagnostics.get("tail_log10"),
                    "im_residual_known": ev.diagnostics.get("im_residual_known"),
                },
            )
            err = error_l1(ev, ev.degree, ev.bound_constant)
            fh.write(f"value {fmt(ev.known_part, spec.digits)}\n")
            fh.write(f"error_l1 {fmt(err, 6)}\n")
            fh.write(f"tail_bound {fmt(ev.tail_bound, 6)}\n")
            if args.show_coeffs:
                for n in (int(x) for x in args.show_coeffs.split(",")):
                    fh.write(f"coeff {n} {fmt(ev.coeffs[n], spec.digits)}\n")
            top = sorted(ev.deltas.items(), key=lambda kv: -abs(kv[1]))[: args.top_deltas]
            for q, dq in top:
                fh.write(f"delta {q} {fmt(dq, 8)}\n")
    return 0


def cmd_scan(args):
    spec = _spec_from_args(args)
    gs = _gs_from_args(args)
    evals = ensure_evaluations(spec, gs, progress=_progress("scan"))
    with _open_out(args) as fh:
        _echo_header(fh, spec, {"gauss_c": args.gauss_c, "center": args.center})
        fh.write("beta,value,error,log10_abs_value,log10_error\n")
        for g, ev in zip(gs, evals):
            err = error_l1(ev, ev.degree, ev.bound_constant)
            fh.write(
                f"{-g.b},{fmt(ev.known_part, 15)},{fmt(err, 6)},"
                f"{log10_str(ev.known_part)},{log10_str(err)}\n"
            )
    return 0


def _ordered_for_averaging(gs, evals, pivot=Fraction(1, 2)):
    order = sorted(range(len(gs)), key=lambda i: (abs(-gs[i].b - pivot), i))
    return [gs[i] for i in order], [evals[i] for i in order]


def cmd_ls(args):
    spec = _spec_from_args(args)
    gs = _gs_from_args(args)
    protect = [int(x) for x in args.protect.split(",")] if args.protect else []
    evals = ensure_evaluations(spec, gs, progress=_progress("ls"))
    w = ls_weights(evals, symbol_cut=args.symbol_cut, protect=protect)
    value, err = combine(evals, w)
    with _open_out(args) as fh:
        _echo_header(
            fh, spec, {"symbol_cut": args.symbol_cut, "protect": protect or "none"}
        )
        for lbl, wj in zip(w.betas, w.c):
            fh.write(f"weight {lbl} {fmt(wj, 8)}\n")
        fh.write(f"condition {w.condition:.3e}\n")
        fh.write(f"value {fmt(value, spec.digits)}\n")
        fh.write(f"error_l1 {fmt(err, 6)}\n")
        for q in protect:
            mult = sum(wj * ev.delta(q) for wj, ev in zip(w.c, evals))
            fh.write(f"multiplier {q} {fmt(mult, spec.digits)}\n")
    if args.fig3_out:
        gso, evo = _ordered_for_averaging(gs, evals)
        with open(args.fig3_out, "w") as fh:
            _echo_header(fh, spec, {"series": "ls-error-vs-count"})
            fh.write("n_evals,log10_error\n")
            for n in range(2, len(evo) + 1):
                wv = ls_weights(evo[:n], symbol_cut=args.symbol_cut, protect=protect)
                _, e = combine(evo[:n], wv)
                fh.write(f"{n},{log10_str(e)}\n")
    return 0


def cmd_lp(args):
    spec = _spec_from_args(args)
    gs = _gs_from_args(args)
    evals = ensure_evaluations(spec, gs, progress=_progress("lp"))
    res = lp_bounds(
        evals, objective="value", symbol_cut=args.symbol_cut, tail_slack=args.tail_slack
    )
    with _open_out(args) as fh:
        _echo_header(fh, spec, {"symbol_cut": args.symbol_cut})
        fh.write(f"objective {res.objective_label}\n")
        fh.write(f"min {fmt(res.min, spec.digits)}\n")
        fh.write(f"max {fmt(res.max, spec.digits)}\n")
        fh.write(f"midpoint {fmt(res.midpoint, spec.digits)}\n")
        fh.write(f"halfwidth {fmt(res.halfwidth, 6)}\n")
        active = [k for k, v in res.certificate.items() if v]
        fh.write(f"active_constraints {len(active)}/{len(res.certificate)}\n")
    if args.fig4_out:
        gso, evo = _ordered_for_averaging(gs, evals)
        with open(args.fig4_out, "w") as fh:
            _echo_header(fh, spec, {"series": "lp-vs-ls-error-ratio"})
            fh.write("n_evals,log10_error_ratio\n")
            for n in range(3, len(evo) + 1):
                wv = ls_weights(evo[:n], symbol_cut=args.symbol_cut)
                _, ls_err = combine(evo[:n], wv)
                r = lp_bounds(evo[:n], "value", symbol_cut=args.symbol_cut)
                ratio = r.halfwidth / ls_err
                fh.write(f"{n},{log10_str(ratio)}\n")
    return 0


def cmd_recover(args):
    spec = _spec_from_args(args)
    gs = _gs_from_args(args)
    symbols = [int(x) for x in args.symbols.split(",")]
    evals = ensure_evaluations(spec, gs, progress=_progress("recover"))
    got = recover_coefficients(
        evals, symbols, tail_slack=args.tail_slack, symbol_cut=args.symbol_cut
    )
    with _open_out(args) as fh:
        _echo_header(fh, spec, {"symbols": args.symbols})
        fh.write("symbol,midpoint,halfwidth,box_bound\n")
        for q in symbols:
            mid, half = got[q]
            box = float(evals[0].bound_constant) * ramanujan_bound(q, evals[0].degree)
            fh.write(f"{q},{fmt(mid, spec.digits)},{fmt(half, 6)},{box}\n")
    return 0


def cmd_satake(args):
    ctx = PrecisionContext(args.digits)
    data = load_upsilon20_table(args.table)
    with _open_out(args) as fh:
        fh.write(f"# lfew {__version__} satake dump, digits={args.digits}\n")
        fh.write("# p alpha0 alpha1 alpha2 | local factor X-coefficients\n")
        for p in sorted(data):
            t = solve_satake(data[p], ctx)
            with ctx.active():
                fh.write(
                    f"p {p} alpha0 {fmt(t.alpha0.real, 10)}{'+' if t.alpha0.imag >= 0 else ''}"
                    f"{fmt(t.alpha0.imag, 10)}i alpha1 {fmt(t.alpha1.real, 10)}"
                    f"{'+' if t.alpha1.imag >= 0 else ''}{fmt(t.alpha1.imag, 10)}i "
                    f"alpha2 {fmt(t.alpha2.real, 10)}"
                    f"{'+' if t.alpha2.imag >= 0 else ''}{fmt(t.alpha2.imag, 10)}i\n"
                )
                for rho in ("spin", "stan", "adj"):
                    lf = local_factor(t, rho, ctx)
                    fh.write(f"  {rho} " + " ".join(fmt(c, 10) for c in lf) + "\n")
    return 0


def cmd_forms(args):
    from .forms import delta_expansion, hecke_eigenforms_s24

    with _open_out(args) as fh:
        fh.write(f"# lfew {__version__} forms dump\n")
        if args.what == "tau":
            d = delta_expansion(args.cutoff)
            fh.write("# n tau(n)\n")
            for n in range(1, args.cutoff + 1):
                fh.write(f"{n}\t{d[n]}\n")
        elif args.what == "s24":
            plus, minus = hecke_eigenforms_s24(args.cutoff)
            fh.write("# n a_n(f1) a_n(f2)   [integer coefficients, Q(sqrt(144169))]\n")
            for n in range(1, args.cutoff + 1):
                fh.write(
                    f"{n}\t{plus[1]['coeffs'][n]!r}\t{minus[1]['coeffs'][n]!r}\n"
                )
        else:
            raise SystemExit(f"unknown forms dump {args.what!r}")
    return 0


def _add_common(p, with_g=True):
    p.add_argument("--instance", required=True, help=f"builtin: {', '.join(BUILTIN_NAMES)}")
    p.add_argument("--s", required=True, help="evaluation point, e.g. '1/2+10i'")
    p.add_argument("--digits", type=int, default=30, help="target decimal digits")
    p.add_argument("--cutoff", type=int, default=2000, help="Dirichlet coefficient cutoff")
    p.add_argument("--symbol-cut", type=int, default=DEFAULT_SYMBOL_CUT)
    p.add_argument("--known", choices=("table", "structural", "none"), default="table")
    p.add_argument("--table", default=None, help="eigenvalue table file (upsilon20-*)")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    if with_g:
        p.add_argument("--beta", default=None, help="comma list of rational betas")
        p.add_argument("--beta-range", default=None, help="lo:hi:step (rationals)")
        p.add_argument("--gauss-c", default="0", help="Gaussian coefficient c")
        p.add_argument("--center", default="0", help="Gaussian center t0")


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="lfew",
        description="Evaluate L-functions from few Dirichlet coefficients "
        "(smoothed approximate functional equation + LS/LP combination)",
    )
    ap.add_argument("--version", action="version", version=f"lfew {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="single evaluations, one per beta")
    _add_common(p)
    p.add_argument("--show-coeffs", default=None, help="comma list of indices to print")
    p.add_argument("--top-deltas", type=int, default=10)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scan", help="CSV of value/error across a beta grid")
    _add_common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("ls", help="least-squares combination")
    _add_common(p)
    p.add_argument("--protect", default=None, help="symbols excluded from the objective")
    p.add_argument("--fig3-out", default=None, help="CSV: error vs evaluation count")
    p.set_defaults(func=cmd_ls)

    p = sub.add_parser("lp", help="linear-programming interval for the value")
    _add_common(p)
    p.add_argument("--tail-slack", default="0")
    p.add_argument("--fig4-out", default=None, help="CSV: LP/LS error ratio vs count")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("recover", help="LP intervals for unknown coefficients")
    _add_common(p)
    p.add_argument("--symbols", required=True, help="comma list, e.g. 83,89,97")
    p.add_argument("--tail-slack", default="0")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("satake", help="dump Satake triples and local factors")
    p.add_argument("--digits", type=int, default=30)
    p.add_argument("--table", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_satake)

    p = sub.add_parser("forms", help="dump tau(n) or S24 eigen-data")
    p.add_argument("what", choices=("tau", "s24"))
    p.add_argument("--cutoff", type=int, default=100)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_forms)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
