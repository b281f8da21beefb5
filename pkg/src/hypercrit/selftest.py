"""Example tables run by ``hypercrit <subcommand> --selftest``."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, TextIO

from hypercrit import boundary, irs, series
from hypercrit.errors import InvalidInputError, InvalidIRSError, NotFoundError
from hypercrit.space.tree import Word
from hypercrit.subgroups import (
    CosetStabilizer,
    FiniteAction,
    KernelAbelian,
    KernelFinite,
    Stallings,
    annulus_count,
    sphere_counts,
)

LN3 = math.log(3)
Check = tuple[str, Callable[[], bool]]


def _raises(exc: type[BaseException], fn: Callable[[], object]) -> bool:
    try:
        fn()
    except exc:
        return True
    return False


def _close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol


F2 = Stallings.full(2)
CYCLIC = Stallings(2, ["a"])
COMM = KernelAbelian.commutator(2)
INDEX3 = CosetStabilizer([[1, 2, 0], [1, 0, 2]], 0)
PARITY = KernelFinite.cyclic(2, [1, 0])


TABLES: dict[str, list[Check]] = {
    "growth": [
        ("F_2 spheres 0..5", lambda: sphere_counts(F2, 5) == [1, 4, 12, 36, 108, 324]),
        ("commutator sphere 4", lambda: sphere_counts(COMM, 4)[4] == 8),
        ("<a> sphere 5", lambda: sphere_counts(CYCLIC, 5)[5] == 2),
        ("F_2 annulus [1,2]", lambda: annulus_count(F2, 1, 2).count == 16),
        ("commutator annulus [0,4]", lambda: annulus_count(COMM, 0, 4).count == 9),
    ],
    "delta": [
        ("F_2 slope ln 3", lambda: series.critical_exponent_estimate(F2, 20).slope == LN3),
        ("<a> slope 0", lambda: series.critical_exponent_estimate(CYCLIC, 20).slope == 0.0),
        ("commutator bracket", lambda: 0.95 <= series.critical_exponent_estimate(COMM, 40).bracket[0]
         and series.critical_exponent_estimate(COMM, 40).bracket[1] <= 1.0987),
    ],
    "poincare": [
        ("F_2 at ln 3", lambda: _close(series.poincare_partial(F2, LN3, 10).partial_sum, 1 + 40 / 3)),
        ("F_2 at ln 4 with tail", lambda: _close(
            (lambda e: e.partial_sum + e.tail_bound)(series.poincare_partial(F2, math.log(4), 20)), 5, 1e-3)),
        ("<a> at 1", lambda: _close(series.poincare_partial(CYCLIC, 1.0, 3).partial_sum,
                                    1 + 2 * (math.exp(-1) + math.exp(-2) + math.exp(-3)))),
        ("diagnostic F_2 at ln 3", lambda: series.divergence_diagnostic(F2, LN3, 20).classification == "linear-or-faster"),
        ("diagnostic F_2 above", lambda: series.divergence_diagnostic(F2, LN3 + 0.5, 20).classification == "apparently-bounded"),
    ],
    "conj-series": [
        ("centralizer of a", lambda: _close(series.conjugation_series(F2, "a", ["a"], 1.0, 5).partial_sum,
                                            math.fsum(math.exp(-abs(n)) for n in range(-5, 6)))),
        ("coset b<a>", lambda: _close(series.conjugation_series(F2, "a", ["baB"], 1.0, 5).partial_sum,
                                      math.fsum(math.exp(-(abs(n) + 1)) for n in range(-4, 5)))),
        ("half exponent equality", lambda: series.half_exponent_check(F2, "Babb", ["ab"], 1.0, 10).worst_length_slack == 0),
        ("shortest element b", lambda: series.shortest_element_bound(F2, "Babb", ["ab"], 1.0, 10).shortest == Word.parse("b")),
        ("empty search", lambda: _raises(NotFoundError, lambda: series.shortest_element_bound(F2, "a", ["b"], 1.0, 6))),
    ],
    "shadow": [
        ("S_0(e, ab)", lambda: boundary.shadow("", "ab", 0).stems == ((1, 2),)),
        ("S_1(e, ab)", lambda: boundary.shadow("", "ab", 1).stems == ((1,),)),
        ("S_R(e, e) whole", lambda: boundary.shadow("", "", 2).is_whole),
        ("cover k=0", lambda: (lambda c: c.covered and c.max_multiplicity == 1)(boundary.shadow_cover_check(F2, 0, 0, 3))),
        ("cover k=1 R=1", lambda: (lambda c: c.covered and c.max_multiplicity <= 9)(boundary.shadow_cover_check(F2, 1, 1, 4))),
        ("busemann bounds", lambda: (lambda b: b.violations == 0 and b.beta_min == 0 and b.beta_max == 2)(
            boundary.busemann_shadow_bounds_check("", "ab", 1, 6))),
    ],
    "ps-measure": [
        ("atom e", lambda: _close(boundary.ws_measure(F2, math.log(4), 2).atoms[0][1], 1 / 2.75, 1e-12)),
        ("projected Cyl(a)", lambda: _close(
            boundary.boundary_project(boundary.ws_measure(F2, math.log(4), 2), 1).mass("a"), 0.25, 1e-12)),
        ("exact nu_e(a)", lambda: boundary.exact_conformal_density(2, "", 1).mass("a") == Fraction(1, 4)),
        ("exact nu_a(a)", lambda: boundary.exact_conformal_density(2, "a", 1).mass("a") == Fraction(3, 4)),
        ("exact nu_a total", lambda: boundary.exact_conformal_density(2, "a", 1).total_mass == 1),
    ],
    "shadow-lemma": [
        ("R=0 ratio 3/4", lambda: (lambda t: t.minimum == t.maximum == Fraction(3, 4))(
            boundary.shadow_lemma_check(F2, None, 0, 6, boundary.full_group_density(2, 1)))),
        ("R=1 range", lambda: (lambda t: Fraction(3, 4) <= t.minimum and t.maximum <= 3)(
            boundary.shadow_lemma_check(F2, None, 1, 6, boundary.full_group_density(2, 1)))),
        ("pi = 1", lambda: boundary.full_group_density(2, 1).pi("abAAb") == 1),
    ],
    "recurrence": [
        ("3-coset infimum", lambda: irs.recurrence_counts(
            FiniteAction(((1, 2, 0), (1, 0, 2))), 0, [0, 1], 1, 12, LN3).infimum > 0),
        ("empty U", lambda: irs.recurrence_counts(
            FiniteAction(((1, 2, 0), (1, 0, 2))), 0, [], 1, 6, LN3).infimum == 0),
    ],
    "irs-report": [
        ("Dirac F_2", lambda: irs.expected_critical_exponent(irs.FiniteIRS.dirac(F2), 20).value == LN3),
        ("index-3 orbit", lambda: len(irs.irs_from_finite_index(INDEX3).support) == 3),
        ("commutator PASS", lambda: irs.theorem_one_check(irs.FiniteIRS.dirac(COMM), 40).verdict == "PASS"),
        ("non-normal Dirac", lambda: _raises(InvalidIRSError, lambda: irs.FiniteIRS.dirac(Stallings(2, ["aa", "ab"])))),
        ("<a> not normal", lambda: _raises(InvalidInputError, lambda: irs.irs_from_normal(CYCLIC))),
    ],
    "pipeline": [
        ("parity kernel, V={aa}", lambda: (lambda p: p.first_holds and p.second_holds and p.rhs > 0)(
            irs.divergence_pipeline(PARITY, ["aa"], 6))),
        ("empty chain", lambda: irs.divergence_pipeline(COMM, ["aa"], 3).empty_chain),
    ],
    "lambda0": [
        ("delta = d", lambda: series.lambda0_from_delta(2, 2) == 0),
        ("delta below d/2", lambda: series.lambda0_from_delta(0.5, 2) == 1),
        ("delta above d/2", lambda: series.lambda0_from_delta(1.5, 2) == 0.75),
    ],
}


def run_selftest(subcommand: str, out: TextIO) -> int:
    failures = 0
    for name, check in TABLES[subcommand]:
        try:
            ok = bool(check())
        except Exception as exc:  # a crash is a failed example
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        failures += not ok
        out.write(f"{'ok  ' if ok else 'FAIL'} {subcommand}: {name}\n")
    return failures
