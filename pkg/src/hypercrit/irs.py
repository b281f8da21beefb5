"""Finitely supported invariant random subgroups and the checks built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Iterable, Mapping, Sequence

from hypercrit._parallel import ordered_map
from hypercrit.boundary.measures import DensityFamily, Mass, density_for
from hypercrit.boundary.cocycle import pi_sphere_sums
from hypercrit.errors import FiniteMemberError, InvalidInputError, InvalidIRSError, NotFoundError
from hypercrit.series import (
    ExponentEstimate,
    conjugation_series,
    critical_exponent_estimate,
    half_exponent_check,
    poincare_partial,
    shortest_element_bound,
)
from hypercrit.space.tree import Word, as_word, iter_ball, iter_sphere, sphere_size
from hypercrit.subgroups.counting import orbit_sphere_counts
from hypercrit.subgroups.graphs import FiniteAction
from hypercrit.subgroups.handles import (
    CosetStabilizer,
    Stallings,
    SubgroupHandle,
    _GraphHandle,
    subgroup_from_json,
)

WEIGHT_TOL = 1e-12
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class FiniteIRS:
    """A conjugation-invariant probability measure with finite support."""

    support: tuple[tuple[SubgroupHandle, float], ...]

    def __post_init__(self) -> None:
        support = tuple((h, float(w)) for h, w in self.support)
        object.__setattr__(self, "support", support)
        if not support:
            raise InvalidIRSError("an IRS needs a nonempty support")
        ranks = {h.rank for h, _ in support}
        if len(ranks) != 1:
            raise InvalidIRSError("support members have different ranks")
        if any(not w > 0 for _, w in support):
            raise InvalidIRSError("weights must be positive")
        total = math.fsum(w for _, w in support)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvalidIRSError(f"weights sum to {total!r}, not 1")
        weights: dict[tuple, float] = {}
        for h, w in support:
            if h.key in weights:
                raise InvalidIRSError(f"duplicate support member {h!r}")
            weights[h.key] = w
        rank = ranks.pop()
        for h, w in support:
            for i in range(1, rank + 1):
                c = h.conjugate(Word((i,)))
                other = weights.get(c.key)
                if other is None:
                    raise InvalidIRSError(f"conjugating {h!r} by {Word((i,))} leaves the support")
                if abs(other - w) > WEIGHT_TOL:
                    raise InvalidIRSError(f"conjugates {h!r} and {c!r} carry different weights")

    @property
    def rank(self) -> int:
        return self.support[0][0].rank

    @classmethod
    def dirac(cls, h: SubgroupHandle) -> "FiniteIRS":
        return cls(((h, 1.0),))

    def to_json(self) -> dict[str, Any]:
        return {"support": [{"subgroup": h.to_json(), "weight": w} for h, w in self.support]}


def irs_from_finite_index(h: SubgroupHandle) -> FiniteIRS:
    """Uniform measure on cosets pushed to stabilizers: weights are fiber sizes / index."""
    if not h.finite_index:
        raise InvalidInputError("subgroup has infinite index")
    if not isinstance(h, _GraphHandle):
        # a finite-index abelian kernel is the whole group
        return FiniteIRS.dirac(Stallings.full(h.rank))
    table = h.coset_table()
    m = table.size
    fibers: dict[tuple, list[int]] = {}
    for p in range(m):
        stab = CosetStabilizer(table, p)
        fibers.setdefault(stab.key, []).append(p)
    support = []
    for pts in fibers.values():
        support.append((CosetStabilizer(table, pts[0]), len(pts) / m))
    return FiniteIRS(tuple(support))


def irs_from_normal(n: SubgroupHandle) -> FiniteIRS:
    if not n.is_normal:
        raise InvalidInputError(f"{n!r} is not normal")
    return FiniteIRS.dirac(n)


def irs_from_json(data: Mapping[str, Any]) -> FiniteIRS:
    """Either {"support": [{"subgroup": ..., "weight": w}]} or {"construct": ..., "subgroup": ...}."""
    if not isinstance(data, Mapping):
        raise InvalidInputError("IRS description must be a JSON object")
    if "construct" in data:
        extra = set(data) - {"construct", "subgroup"}
        if extra:
            raise InvalidInputError(f"unknown IRS keys: {sorted(extra)}")
        h = subgroup_from_json(data["subgroup"])
        if data["construct"] == "finiteIndex":
            return irs_from_finite_index(h)
        if data["construct"] == "normal":
            return irs_from_normal(h)
        raise InvalidInputError(f"unknown construct {data['construct']!r}")
    extra = set(data) - {"support"}
    if extra or "support" not in data:
        raise InvalidInputError("IRS description needs exactly a 'support' list")
    members = []
    for item in data["support"]:
        if set(item) != {"subgroup", "weight"}:
            raise InvalidInputError("support items need 'subgroup' and 'weight'")
        members.append((subgroup_from_json(item["subgroup"]), float(item["weight"])))
    return FiniteIRS(tuple(members))


# --- exponents ---------------------------------------------------------------


def _estimate(h: SubgroupHandle, rmax: int) -> ExponentEstimate:
    return critical_exponent_estimate(h, rmax)


@dataclass(frozen=True)
class ExpectedExponent:
    value: float
    members: list[tuple[SubgroupHandle, float, ExponentEstimate]]

    def to_json(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "expectedExponent": self.value,
            "members": [
                {"subgroup": h.to_json(), "weight": w, "slope": e.slope, "bracket": list(e.bracket), "finite": e.finite}
                for h, w, e in self.members
            ],
        }


def expected_critical_exponent(mu: FiniteIRS, rmax: int) -> ExpectedExponent:
    ests = ordered_map(partial(_estimate, rmax=rmax), [h for h, _ in mu.support])
    members = [(h, w, e) for (h, w), e in zip(mu.support, ests)]
    value = math.fsum(w * e.slope for _, w, e in members)
    return ExpectedExponent(value, members)


@dataclass(frozen=True)
class TheoremVerdict:
    bound: float
    verdict: str
    members: list[tuple[SubgroupHandle, float, tuple[float, float], str]]

    def to_json(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "halfDimension": self.bound,
            "verdict": self.verdict,
            "members": [
                {"subgroup": h.to_json(), "weight": w, "bracket": list(b), "verdict": v}
                for h, w, b, v in self.members
            ],
        }


def theorem_one_check(mu: FiniteIRS, rmax: int) -> TheoremVerdict:
    """Compare each member's exponent bracket with ln(2k-1)/2.

    PASS: bracket strictly above; CONTRADICTION: bracket entirely below
    (which would discredit the truncation); otherwise INCONCLUSIVE.
    """
    bound = math.log(2 * mu.rank - 1) / 2
    ests = ordered_map(partial(_estimate, rmax=rmax), [h for h, _ in mu.support])
    rows = []
    for (h, w), e in zip(mu.support, ests):
        if e.finite:
            raise FiniteMemberError(f"support member {h!r} is finite up to radius {rmax}")
        lo, hi = e.bracket
        if lo > bound:
            v = "PASS"
        elif hi < bound:
            v = "CONTRADICTION"
        else:
            v = "INCONCLUSIVE"
        rows.append((h, w, e.bracket, v))
    verdicts = {v for *_, v in rows}
    overall = "CONTRADICTION" if "CONTRADICTION" in verdicts else "INCONCLUSIVE" if "INCONCLUSIVE" in verdicts else "PASS"
    return TheoremVerdict(bound, overall, rows)


# --- recurrence ---------------------------------------------------------------


@dataclass(frozen=True)
class RecurrenceReport:
    x: int
    subset: tuple[int, ...]
    window: int
    delta: float
    counts: list[int]
    annulus: list[int]
    normalized: list[float]
    infimum: float
    kappa: float
    measure_margin: float

    def to_json(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "x": self.x,
            "U": list(self.subset),
            "k": self.window,
            "delta": self.delta,
            "rows": [
                {"r": r, "count": c, "annulus": a, "normalized": v}
                for r, (c, a, v) in enumerate(zip(self.counts, self.annulus, self.normalized))
            ],
            "infimum": self.infimum,
            "kappa": self.kappa,
            "measureMargin": self.measure_margin,
        }


def recurrence_counts(
    action: FiniteAction,
    x: int,
    subset: Iterable[int],
    k: int,
    rmax: int,
    delta: float,
    group: SubgroupHandle | None = None,
) -> RecurrenceReport:
    """|E_{r,k}(x, U)| = |{gamma : r <= |gamma| <= r+k, gamma.x in U}| for r = 0..rmax.

    The infimum of e^{-delta r}|E_{r,k}| is taken over 1 <= r <= rmax.
    kappa = min(infimum, 1); the measure margin mu(U) - (1 - kappa) says
    whether U is large enough for the recurrence statement to apply.
    """
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    if k < 0 or rmax < 1:
        raise InvalidInputError("need k >= 0 and rmax >= 1")
    subset = tuple(sorted(set(subset)))
    if any(not 0 <= q < action.size for q in subset):
        raise InvalidInputError("U contains points outside the action")
    group = group or Stallings.full(action.rank)
    table = orbit_sphere_counts(group, action, x, rmax + k)
    per_sphere = [sum(row[q] for q in subset) for row in table]
    spheres = [sum(row) for row in table]
    counts = [sum(per_sphere[r : r + k + 1]) for r in range(rmax + 1)]
    annulus = [sum(spheres[r : r + k + 1]) for r in range(rmax + 1)]
    normalized = [math.exp(math.log(c) - delta * r) if c else 0.0 for r, c in enumerate(counts)]
    inf = min(normalized[1:])
    kappa = min(inf, 1.0)
    margin = action.measure(subset) - (1 - kappa)
    return RecurrenceReport(x, subset, k, delta, counts, annulus, normalized, inf, kappa, margin)


# --- the divergence chain ------------------------------------------------------


@dataclass(frozen=True)
class PipelineReport:
    radius: int
    inner_radius: int
    delta: float
    alpha: float
    beta: float
    lhs: float
    middle: float
    rhs: float
    per_element: list[tuple[str, str, float]]
    empty_chain: bool
    half_violations: int

    @property
    def first_holds(self) -> bool:
        return self.lhs >= self.middle * (1 - 1e-12)

    @property
    def second_holds(self) -> bool:
        return self.middle >= self.rhs * (1 - 1e-12)

    def to_json(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "R": self.radius,
            "deltaRadius": self.inner_radius,
            "delta": self.delta,
            "alpha": self.alpha,
            "beta": self.beta,
            "seriesDeltaHalf": self.lhs,
            "sumOverConjugates": self.middle,
            "seriesOverOmegaV": self.rhs,
            "firstInequality": self.first_holds,
            "secondInequality": self.second_holds,
            "emptyChain": self.empty_chain,
            "halfExponentViolations": self.half_violations,
            "conjugates": [{"h": h, "v": v, "series": s} for h, v, s in self.per_element],
        }


def divergence_pipeline(
    delta_sub: SubgroupHandle, targets: Sequence[Word | str], radius: int, delta: float | None = None
) -> PipelineReport:
    """Truncated form of P_D(delta/2) >= (1/ab) sum_h P_G(delta; h, V) >= (1/ab) P_G(delta; D, Omega_V).

    G is the free group itself and delta defaults to its exponent ln(2k-1).
    Conjugators gamma run over the ball of radius R. Each h = gamma^-1 v gamma
    then has |h| <= 2R + max|v|, so the left series is summed to that radius;
    that makes the first inequality a term-by-term consequence of the two
    lemmas rather than an accident of truncation.
    """
    rank = delta_sub.rank
    vs = sorted({as_word(v, rank) for v in targets})
    if not vs or any(not v.letters for v in vs):
        raise InvalidInputError("V must be a nonempty set of nontrivial elements")
    if radius < 0:
        raise InvalidInputError("R must be nonnegative")
    if delta is None:
        delta = math.log(2 * rank - 1)
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    full = Stallings.full(rank)
    vmax = max(len(v) for v in vs)
    inner = 2 * radius + vmax
    beta = math.exp(0.5 * delta * vmax)

    # pair each conjugate h in Delta with the v it is conjugated into
    hs: dict[Word, set[Word]] = {}
    omega_terms: dict[tuple[int, ...], float] = {}
    for letters in iter_ball(rank, radius):
        g = Word(letters)
        for v in vs:
            h = v.conjugate(g.inverse())
            if delta_sub.contains(h):
                hs.setdefault(h, set()).add(v)
                omega_terms[letters] = math.exp(-delta * len(g))
    if not hs:
        return PipelineReport(radius, inner, delta, math.nan, beta, 0.0, 0.0, 0.0, [], True, 0)

    alpha = 0.0
    middle_terms = []
    per_element = []
    violations = 0
    for h in sorted(hs):
        ser = conjugation_series(full, h, vs, delta, radius)
        bound = shortest_element_bound(full, h, vs, delta, radius)
        alpha = max(alpha, bound.alpha)
        violations += half_exponent_check(full, h, vs, delta, radius).violations
        middle_terms.append(ser.partial_sum)
        per_element.append((str(h), ",".join(str(v) for v in sorted(hs[h])), ser.partial_sum))
    lhs = poincare_partial(delta_sub, delta / 2, inner).partial_sum
    scale = 1.0 / (alpha * beta)
    middle = scale * math.fsum(middle_terms)
    rhs = scale * math.fsum(omega_terms[key] for key in sorted(omega_terms))
    return PipelineReport(radius, inner, delta, alpha, beta, lhs, middle, rhs, per_element, False, violations)


# --- summed cocycle -----------------------------------------------------------


@dataclass(frozen=True)
class CocycleSumRow:
    r: int
    annulus: int
    pi_sum: float
    bound: float
    multiplicity: int

    @property
    def margin(self) -> float:
        return self.bound - self.pi_sum


@dataclass(frozen=True)
class SummedCocycleReport:
    window: int
    shadow_radius: int
    distortion: float
    members: list[dict]
    inverse_rows: list[tuple[int, float, float]]
    notes: list[str] = field(default_factory=list)

    @property
    def min_cocycle_margin(self) -> float:
        return min(row.margin for m in self.members for row in m["rows"])

    @property
    def min_inverse_margin(self) -> float:
        return min(rhs - lhs for _, lhs, rhs in self.inverse_rows)

    def to_json(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "k": self.window,
            "shadowRadius": self.shadow_radius,
            "distortion": self.distortion,
            "members": [
                {
                    "subgroup": m["subgroup"].to_json(),
                    "weight": m["weight"],
                    "density": m["density"].label,
                    "cPrime": m["c"],
                    "rows": [
                        {"r": row.r, "annulus": row.annulus, "piSum": row.pi_sum, "bound": row.bound,
                         "multiplicity": row.multiplicity, "margin": row.margin}
                        for row in m["rows"]
                    ],
                }
                for m in self.members
            ],
            "inverseTrick": [{"r": r, "countSide": lhs, "piSide": rhs, "margin": rhs - lhs} for r, lhs, rhs in self.inverse_rows],
            "minCocycleMargin": self.min_cocycle_margin,
            "minInverseMargin": self.min_inverse_margin,
            "notes": self.notes,
        }


def _shadow_multiplicity(rank: int, r: int, k: int, radius: int) -> int:
    """Largest number of shadows S_R(o, gamma o), r <= |gamma| <= r+k, over one end (full group)."""
    total = 0
    for n in range(r, r + k + 1):
        total += sphere_size(rank, n) if n <= radius else (2 * rank - 1) ** radius
    return total


def shadow_ratio_range(density: DensityFamily, radius: int, nmax: int) -> tuple[Mass, Mass]:
    """min and max over 1 <= |gamma| <= nmax in F_k of nu_o(S_R(o, gamma^-1 o)) e^{delta|gamma|} / pi(gamma).

    Both shadow mass and pi depend only on the first ``depth`` letters of
    gamma^-1 and on |gamma|, so one representative per depth-prefix suffices.
    """
    rank = density.rank
    depth = density.base.depth
    lo = hi = None
    for n in range(1, nmax + 1):
        m = min(n, depth + radius)
        for w in iter_sphere(rank, m):
            rep = w + (w[-1],) * (n - m)
            cut = max(n - radius, 0)
            mass = density.base.mass(rep[:cut]) if cut else density.base.total_mass
            pi = density.total_at(Word(rep))
            q = mass * density.growth(n) / pi
            lo = q if lo is None or q < lo else lo
            hi = q if hi is None or q > hi else hi
    return lo, hi


def summed_cocycle_check(
    mu: FiniteIRS,
    k: int,
    rmax: int,
    densities: Mapping[tuple, DensityFamily] | None = None,
    shadow_radius: int = 0,
) -> SummedCocycleReport:
    """Compare sum_{gamma in E_{r,k}} pi(gamma, D) with c' e^{delta r}, and the inverse trick.

    With Y the whole support, E_{r,k}(D, Y) is the full annulus of F_k.
    c' = c p e^{delta k} with c from the shadow-ratio range and p the shadow
    covering multiplicity of that annulus. The inverse-trick side checks
    sum_Y |E_{r,k}| <= 2 d^12 sum_Y sum pi.
    """
    if k < 0 or rmax < 1:
        raise InvalidInputError("need k >= 0 and rmax >= 1")
    rank = mu.rank
    notes = []
    members = []
    distortion = 1.0
    for h, w in mu.support:
        fam = densities.get(h.key) if densities is not None else density_for(h)
        if fam is None:
            raise NotFoundError(f"no density supplied for {h!r}")
        distortion = max(distortion, fam.distortion)
        notes.extend(n for n in fam.notes if n not in notes)
        lo, hi = shadow_ratio_range(fam, shadow_radius, rmax + k)
        c = max(float(hi), 1.0 / float(lo))
        pis = pi_sphere_sums(fam, rmax + k)
        spheres = [sphere_size(rank, n) for n in range(rmax + k + 1)]
        rows = []
        for r in range(1, rmax + 1):
            p = _shadow_multiplicity(rank, r, k, shadow_radius)
            c_prime = c * p * math.exp(fam.delta * k) * float(fam.base.total_mass)
            pi_sum = float(sum(pis[r : r + k + 1]))
            rows.append(CocycleSumRow(r, sum(spheres[r : r + k + 1]), pi_sum, c_prime * math.exp(fam.delta * r), p))
        members.append({"subgroup": h, "weight": w, "density": fam, "c": c, "rows": rows})
    inverse_rows = []
    for i in range(rmax):
        r = i + 1
        lhs = math.fsum(m["weight"] * m["rows"][i].annulus for m in members)
        rhs = 2 * distortion ** 12 * math.fsum(m["weight"] * m["rows"][i].pi_sum for m in members)
        inverse_rows.append((r, lhs, rhs))
    return SummedCocycleReport(k, shadow_radius, distortion, members, inverse_rows, notes)


__all__ = [
    "ExpectedExponent",
    "FiniteIRS",
    "PipelineReport",
    "RecurrenceReport",
    "SummedCocycleReport",
    "TheoremVerdict",
    "divergence_pipeline",
    "expected_critical_exponent",
    "irs_from_finite_index",
    "irs_from_json",
    "irs_from_normal",
    "recurrence_counts",
    "shadow_ratio_range",
    "summed_cocycle_check",
    "theorem_one_check",
]
