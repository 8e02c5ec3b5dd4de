"""Builtin L-function instances and the eigenvalue-table loader.

Builtin labels:

  zeta            Riemann zeta (degree 1, poles at 0 and 1, all b_n = 1)
  delta           weight-12 cusp form (degree 2, fully known from tau(n))
  s24-f1/-f2      the two weight-24 Hecke eigenforms (degree 2, fully known)
  s24-f1-pow5/-f2-pow5   their 5th-power L-functions (degree 10, Euler
                  factors known for p <= 79, the rest symbolic)
  upsilon20-stan/-adj/-spin   the weight-20 Siegel nonlift (degrees 5/10/4),
                  local factors from the vendored Hecke eigenvalue table

known modes:

  table        primes present in the eigenvalue table are known (honest default)
  structural   primes <= 79 are all classified known; placeholders (b = 0)
               stand in where the table lacks data.  This reproduces the
               paper-shaped unknown set {p >= 83} so that every quantity that
               depends only on the functional equation (the delta multipliers,
               least-squares weights, error bounds) is exact, while known
               parts are meaningless.  Labels are suffixed accordingly.
  none         nothing known beyond b_1; every index is its own symbol
"""

from __future__ import annotations

import importlib.resources
from fractions import Fraction

from .arith import primes_upto
from .exact import ExactReal
from .forms import cusp_form_fe, delta_expansion, hecke_eigenforms_s24, power_lift
from .lmodel import (
    CoefficientTable,
    FunctionalEquation,
    Known,
    LFunctionInstance,
    expand_euler,
    fe_for,
    fe_from_rc,
)
from .satake import local_factor_exact, parse_eigenvalue_table

__all__ = [
    "BUILTIN_NAMES",
    "build_instance",
    "load_upsilon20_table",
    "UPSILON20_WEIGHT",
    "STRUCTURAL_PRIME_LIMIT",
]

UPSILON20_WEIGHT = 20
STRUCTURAL_PRIME_LIMIT = 79
DEFAULT_N_CUTOFF = 2000

BUILTIN_NAMES = (
    "zeta",
    "delta",
    "s24-f1",
    "s24-f2",
    "s24-f1-pow5",
    "s24-f2-pow5",
    "upsilon20-stan",
    "upsilon20-adj",
    "upsilon20-spin",
)


def load_upsilon20_table(path=None):
    """{p: HeckeDatum} for the weight-20 nonlift, from `path` or the vendored file."""
    if path is None:
        text = (
            importlib.resources.files("lfew.data")
            .joinpath("upsilon20_eigenvalues.txt")
            .read_text()
        )
    else:
        with open(path) as fh:
            text = fh.read()
    return parse_eigenvalue_table(text, UPSILON20_WEIGHT)


def zeta_instance(n_cutoff=DEFAULT_N_CUTOFF):
    fe = fe_from_rc(
        [0],
        [],
        1,
        poles=(
            (Fraction(1), Fraction(0), Fraction(1), Fraction(0)),
            (Fraction(0), Fraction(0), Fraction(-1), Fraction(0)),
        ),
        label="zeta",
    )
    entries = {n: Known(ExactReal(1)) for n in range(1, n_cutoff + 1)}
    return LFunctionInstance(fe, CoefficientTable(entries, 1), "zeta")


def delta_instance(n_cutoff=DEFAULT_N_CUTOFF):
    d = delta_expansion(n_cutoff)
    entries = {
        n: Known(ExactReal(Fraction(d[n], n**6), n)) for n in range(1, n_cutoff + 1)
    }
    fe = cusp_form_fe(12, "delta")
    return LFunctionInstance(fe, CoefficientTable(entries, 2), "delta")


def s24_instance(which, n_cutoff=DEFAULT_N_CUTOFF):
    # f1 is the eigenform with a_2 < 0 (T2 eigenvalue 540 - 12 sqrt(144169))
    plus, minus = hecke_eigenforms_s24(n_cutoff)
    table = minus[0] if which == 1 else plus[0]
    fe = cusp_form_fe(24, f"s24-f{which}")
    return LFunctionInstance(fe, table, f"s24-f{which}")


def s24_pow5_instance(which, n_cutoff=DEFAULT_N_CUTOFF):
    base = s24_instance(which, n_cutoff)
    known = set(primes_upto(STRUCTURAL_PRIME_LIMIT))
    return power_lift(
        base.coeffs,
        base.fe,
        5,
        label=f"s24-f{which}-pow5",
        n_cutoff=n_cutoff,
        known_primes=known,
    )


def upsilon20_instance(rho, n_cutoff=DEFAULT_N_CUTOFF, table_path=None, structural=False):
    data = load_upsilon20_table(table_path)
    fe = fe_for(rho, UPSILON20_WEIGHT)
    factors = {}
    placeholders = []
    for p in primes_upto(n_cutoff):
        if p in data:
            factors[p] = local_factor_exact(data[p], rho)
        elif structural and p <= STRUCTURAL_PRIME_LIMIT:
            factors[p] = [ExactReal(1)]  # b_(p^e) = 0 placeholder
            placeholders.append(p)
    table = expand_euler(factors, set(factors), n_cutoff, fe.degree)
    label = f"upsilon20-{rho}"
    if placeholders:
        label += "[structural]"
    return LFunctionInstance(fe, table, label)


def _fe_only_variant(inst):
    table = CoefficientTable.fe_only(
        inst.coeffs.n_cutoff, inst.degree, inst.coeffs.bound_constant
    )
    return LFunctionInstance(inst.fe, table, inst.label + "[fe-only]")


def build_instance(
    name, n_cutoff=DEFAULT_N_CUTOFF, known_mode="table", table_path=None
):
    """Construct a builtin instance by label (see module docstring for modes)."""
    if known_mode not in ("table", "structural", "none"):
        raise ValueError(f"unknown known_mode {known_mode!r}")
    structural = known_mode == "structural"
    if name == "zeta":
        inst = zeta_instance(n_cutoff)
    elif name == "delta":
        inst = delta_instance(n_cutoff)
    elif name in ("s24-f1", "s24-f2"):
        inst = s24_instance(int(name[5]), n_cutoff)
    elif name in ("s24-f1-pow5", "s24-f2-pow5"):
        inst = s24_pow5_instance(int(name[5]), n_cutoff)
    elif name.startswith("upsilon20-"):
        rho = name.split("-", 1)[1]
        inst = upsilon20_instance(rho, n_cutoff, table_path, structural)
        return inst if known_mode != "none" else _fe_only_variant(inst)
    else:
        raise ValueError(f"unknown instance {name!r}; builtins: {', '.join(BUILTIN_NAMES)}")
    if known_mode == "none":
        return _fe_only_variant(inst)
    return inst
