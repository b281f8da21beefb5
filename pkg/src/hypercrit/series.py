"""Poincare series, critical exponents and conjugation-restricted series.

All sums run over exact sphere counts in ascending radius, so results are
reproducible bit for bit. Floating point enters only when a count is
weighted by e^{-s n}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from hypercrit.errors import InvalidInputError, NotFoundError
from hypercrit.space.tree import Word, _cyclic_split, _inv, _mul, _primitive_root, as_word, axis_distance
from hypercrit.subgroups.counting import orbit_sphere_counts, sphere_counts
from hypercrit.subgroups.graphs import FiniteAction
from hypercrit.subgroups.handles import SubgroupHandle

RATIO_MARGIN = 1e-6


@dataclass(frozen=True)
class SeriesEstimate:
    """Truncated series sum_{|gamma| <= R} e^{-s |gamma|} with its per-sphere terms."""

    s: float
    radius: int
    counts: list[int]
    terms: list[float]
    cumulative: list[float]
    tail_bound: float | None

    @property
    def partial_sum(self) -> float:
        return self.cumulative[-1]

    def rows(self) -> list[tuple[int, int, float, float]]:
        return list(zip(range(self.radius + 1), self.counts, self.terms, self.cumulative))

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "R": self.radius,
            "partialSum": self.partial_sum,
            "tailBound": self.tail_bound,
            "perSphere": [
                {"n": n, "count": c, "term": t, "cumulative": cum} for n, c, t, cum in self.rows()
            ],
        }


def _period(counts: Sequence[int]) -> int:
    """gcd of the radii n >= 1 carrying a nonzero count (1 if there are none)."""
    p = 0
    for n, c in enumerate(counts):
        if n and c:
            p = math.gcd(p, n)
    return p or 1


def _term(count: int, s: float, n: int) -> float:
    # log first: counts overflow floats long before the weighted term does
    return math.exp(math.log(count) - s * n) if count else 0.0


def _tail_bound(terms: Sequence[float], period: int) -> float | None:
    """Geometric tail from the last three nonzero terms spaced one period apart.

    Emitted only when both consecutive ratios are below 1 - RATIO_MARGIN;
    the bound assumes the ratio never climbs back above the larger of them.
    """
    nz = [n for n, t in enumerate(terms) if t > 0]
    if not nz:
        return 0.0
    last = nz[-1]
    idx = [last - j * period for j in range(3)]
    if idx[-1] < 0 or any(terms[i] <= 0 for i in idx):
        return None
    q1 = terms[idx[0]] / terms[idx[1]]
    q2 = terms[idx[1]] / terms[idx[2]]
    if q1 >= 1 - RATIO_MARGIN or q2 >= 1 - RATIO_MARGIN:
        return None
    q = max(q1, q2)
    return terms[last] * q / (1 - q)


def series_from_counts(counts: Sequence[int], s: float) -> SeriesEstimate:
    if s < 0:
        raise InvalidInputError("exponent s must be nonnegative")
    terms = [_term(c, s, n) for n, c in enumerate(counts)]
    cumulative, total = [], 0.0
    for t in terms:
        total += t
        cumulative.append(total)
    return SeriesEstimate(s, len(counts) - 1, list(counts), terms, cumulative, _tail_bound(terms, _period(counts)))


def poincare_partial(h: SubgroupHandle, s: float, radius: int) -> SeriesEstimate:
    if radius < 0:
        raise InvalidInputError("radius must be nonnegative")
    return series_from_counts(sphere_counts(h, radius), s)


@dataclass(frozen=True)
class ExponentEstimate:
    """Growth-rate estimates from exact counts.

    ``differences[i]`` is ln(s_n / s_{n-p}) / p at radius ``difference_radii[i]``,
    with s_n the sphere count and p the period of the nonzero spheres.
    ``log_counts`` holds ln of the ball counts and ``ratio_estimates`` the
    liminf-style (1/R) ln n_R.
    """

    rmax: int
    period: int
    sphere_counts: list[int]
    log_counts: list[float]
    ratio_estimates: list[float]
    difference_radii: list[int]
    differences: list[float]
    slope: float
    bracket: tuple[float, float]
    finite: bool = False
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "Rmax": self.rmax,
            "period": self.period,
            "finiteGroup": self.finite,
            "slopeEstimate": self.slope,
            "bracket": list(self.bracket),
            "ratioBracket": [min(self.ratio_estimates[-self._window():], default=0.0),
                             max(self.ratio_estimates[-self._window():], default=0.0)],
            "rows": [
                {
                    "R": r,
                    "sphereCount": self.sphere_counts[r],
                    "logBallCount": self.log_counts[r],
                    "ratioEstimate": self.ratio_estimates[r - 1] if r else None,
                    "differenceEstimate": self._diff_at(r),
                }
                for r in range(self.rmax + 1)
            ],
            "notes": list(self.notes),
        }

    def _window(self) -> int:
        return math.ceil(self.rmax / 4)

    def _diff_at(self, r: int) -> float | None:
        try:
            return self.differences[self.difference_radii.index(r)]
        except ValueError:
            return None


def critical_exponent_estimate(h: SubgroupHandle, rmax: int) -> ExponentEstimate:
    if rmax < 2:
        raise InvalidInputError("Rmax must be at least 2")
    counts = sphere_counts(h, rmax)
    balls, total = [], 0
    for c in counts:
        total += c
        balls.append(total)
    log_counts = [math.log(b) for b in balls]
    ratio_estimates = [log_counts[r] / r for r in range(1, rmax + 1)]
    if not any(counts[1:]):
        return ExponentEstimate(
            rmax, 1, counts, log_counts, ratio_estimates, [], [], 0.0, (0.0, 0.0), True,
            ["finite group: every sphere beyond the identity is empty"],
        )
    p = _period(counts)
    radii, diffs = [], []
    for n in range(p + 1, rmax + 1):
        a, b = counts[n], counts[n - p]
        if a and b:
            radii.append(n)
            # the exact ratio keeps ln 3 exact when counts grow by exactly 3
            diffs.append(math.log(Fraction(a, b)) / p)
    notes = []
    if not diffs:
        notes.append("no two nonzero spheres one period apart; using the ratio estimate")
        slope = ratio_estimates[-1]
        return ExponentEstimate(rmax, p, counts, log_counts, ratio_estimates, [], [], slope, (slope, slope), False, notes)
    window = diffs[-math.ceil(rmax / 4):]
    return ExponentEstimate(
        rmax, p, counts, log_counts, ratio_estimates, radii, diffs, diffs[-1], (min(window), max(window)), False, notes,
    )


@dataclass(frozen=True)
class DivergenceReport:
    delta: float
    radius: int
    series: SeriesEstimate
    block_increments: list[float]
    classification: str
    note: str = "semi-decidable: verdict reflects truncation at R only"

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "R": self.radius,
            "classification": self.classification,
            "blockIncrements": self.block_increments,
            "partialSums": self.series.cumulative,
            "note": self.note,
        }


def divergence_diagnostic(h: SubgroupHandle, delta: float, rmax: int) -> DivergenceReport:
    """Classify partial-sum growth at s = delta over the last half of the radii.

    Increments are summed over blocks of one period so parity gaps do not
    read as decay.
    """
    if delta < 0:
        raise InvalidInputError("delta must be nonnegative")
    if rmax < 2:
        raise InvalidInputError("Rmax must be at least 2")
    est = poincare_partial(h, delta, rmax)
    p = _period(est.counts)
    start = rmax // 2 + 1
    blocks = []
    n = start
    while n + p - 1 <= rmax:
        blocks.append(math.fsum(est.terms[n : n + p]))
        n += p
    verdict = "inconclusive"
    if len(blocks) >= 2:
        if all(b > 0 for b in blocks) and blocks[-1] >= blocks[0] * (1 - 1e-9):
            verdict = "linear-or-faster"
        elif all(b > 0 for b in blocks):
            ratios = [b / a for a, b in zip(blocks, blocks[1:])]
            if all(q <= 1 - RATIO_MARGIN for q in ratios) and all(
                y <= x * (1 + 1e-9) for x, y in zip(ratios, ratios[1:])
            ):
                verdict = "apparently-bounded"
        elif not any(blocks):
            verdict = "apparently-bounded"
    return DivergenceReport(delta, rmax, est, blocks, verdict)


def partial_poincare_over_action(
    h: SubgroupHandle, action: FiniteAction, z: int, subset: Iterable[int], s: float, radius: int
) -> SeriesEstimate:
    """Series over E(z, U) = {gamma in H : gamma.z in U}."""
    subset = set(subset)
    bad = [q for q in subset if not 0 <= q < action.size]
    if bad:
        raise InvalidInputError(f"points {sorted(bad)} outside the action")
    table = orbit_sphere_counts(h, action, z, radius)
    counts = [sum(row[q] for q in subset) for row in table]
    return series_from_counts(counts, s)


# --- conjugates of a hyperbolic element -----------------------------------


def _conjugator(h: tuple[int, ...], v: tuple[int, ...]) -> tuple[int, ...] | None:
    """Some g with g h g^-1 = v, or None if h and v are not conjugate."""
    u, c = _cyclic_split(h)
    u2, c2 = _cyclic_split(v)
    if len(c) != len(c2) or not c:
        return None
    doubled = c + c
    for i in range(len(c)):
        if doubled[i : i + len(c)] == c2:
            # c2 = q p with c = p q, p = c[:i]; then c2 = p^-1 c p
            p = c[:i]
            return _mul(_mul(u2, _inv(p)), _inv(u))
    return None


def conjugation_elements(h: SubgroupHandle, g: Word | str, targets: Iterable[Word | str], radius: int) -> list[Word]:
    """{gamma in H : |gamma| <= radius, gamma g gamma^-1 in targets}, shortlex sorted.

    Solutions for one target v form the coset C(v) gamma0 with C(v) the cyclic
    centralizer generated by the primitive root of v, so they are enumerated
    along that axis instead of searching the ball.
    """
    g = as_word(g, h.rank)
    if not g.letters:
        raise InvalidInputError("conjugation series needs a nontrivial element")
    found: set[tuple[int, ...]] = set()
    for v in targets:
        v = as_word(v, h.rank)
        g0 = _conjugator(g.letters, v.letters)
        if g0 is None:
            continue
        u, c = _cyclic_split(v.letters)
        root_core = _primitive_root(c)
        rho = Word(_mul(_mul(u, root_core), _inv(u)))
        step = len(root_core)
        jmax = (radius + len(g0)) // step + 1
        for j in range(-jmax, jmax + 1):
            gamma = (rho ** j).letters
            gamma = _mul(gamma, g0)
            if len(gamma) <= radius and h.contains(Word(gamma)):
                found.add(gamma)
    return sorted((Word(w) for w in found))


def conjugation_series(
    h: SubgroupHandle, g: Word | str, targets: Iterable[Word | str], s: float, radius: int
) -> SeriesEstimate:
    elems = conjugation_elements(h, g, targets, radius)
    counts = [0] * (radius + 1)
    for w in elems:
        counts[len(w)] += 1
    est = series_from_counts(counts, s)
    # solutions grow along a single axis: no geometric certificate applies
    return SeriesEstimate(est.s, est.radius, est.counts, est.terms, est.cumulative, None)


@dataclass(frozen=True)
class HalfExponentReport:
    beta: float
    checked: int
    violations: int
    worst_slack: float | None
    worst_length_slack: int | None
    worst_element: str | None

    def to_json(self) -> dict:
        return {
            "beta": self.beta,
            "checked": self.checked,
            "violations": self.violations,
            "worstLogSlack": self.worst_slack,
            "worstLengthSlack": self.worst_length_slack,
            "worstElement": self.worst_element,
        }


def half_exponent_check(
    h: SubgroupHandle, g: Word | str, targets: Sequence[Word | str], s: float, radius: int
) -> HalfExponentReport:
    """Check e^{-s|gamma|} <= beta e^{-(s/2)|g|} for every conjugator gamma found.

    beta = max_{k in K} e^{(s/2)|k|}. Slack is reported in log space; the
    integer 2|gamma| + max|k| - |g| is the same inequality with s factored out.
    """
    g = as_word(g, h.rank)
    targets = [as_word(v, h.rank) for v in targets]
    if not targets:
        raise InvalidInputError("target set K must be nonempty")
    kmax = max(len(v) for v in targets)
    beta = math.exp(0.5 * s * kmax)
    elems = conjugation_elements(h, g, targets, radius)
    violations = 0
    worst = worst_len = None
    worst_el = None
    for gamma in elems:
        lhs = -s * len(gamma)
        rhs = math.log(beta) - 0.5 * s * len(g)
        slack = rhs - lhs
        length_slack = 2 * len(gamma) + kmax - len(g)
        if length_slack < 0 or slack < -1e-12:
            violations += 1
        if worst is None or (length_slack, slack) < (worst_len, worst):
            worst, worst_len, worst_el = slack, length_slack, str(gamma)
    return HalfExponentReport(beta, len(elems), violations, worst, worst_len, worst_el)


@dataclass(frozen=True)
class ShortestElementReport:
    shortest: Word
    series_value: float
    bound_value: float
    alpha: float
    axis_distance: int
    multiplicity: int

    @property
    def holds(self) -> bool:
        return self.series_value <= self.bound_value * (1 + 1e-12)

    def to_json(self) -> dict:
        return {
            "gammaH": str(self.shortest),
            "seriesValue": self.series_value,
            "boundValue": self.bound_value,
            "alpha": self.alpha,
            "D": self.axis_distance,
            "multiplicity": self.multiplicity,
            "holds": self.holds,
        }


def shortest_element_bound(
    h: SubgroupHandle, g: Word | str, targets: Sequence[Word | str], s: float, radius: int
) -> ShortestElementReport:
    """Compare the truncated conjugation series with alpha e^{-s |gamma_h|}.

    alpha = n e^{2 s D} / (1 - e^{-s}) with D the largest distance from the
    basepoint to an axis of an element of K and n = 2|K|: for each target the
    solutions lie on one axis, at most two per translation step.
    """
    if s <= 0:
        raise InvalidInputError("the bound needs s > 0")
    targets = [as_word(v, h.rank) for v in targets]
    if not targets or any(not v.letters for v in targets):
        raise InvalidInputError("K must be a nonempty set of nontrivial elements")
    elems = conjugation_elements(h, g, targets, radius)
    if not elems:
        raise NotFoundError(f"no conjugator within radius {radius}", radius=radius)
    shortest = elems[0]
    series = conjugation_series(h, g, targets, s, radius).partial_sum
    d = max(axis_distance(v) for v in targets)
    n = 2 * len(set(targets))
    alpha = n * math.exp(2 * s * d) / (1 - math.exp(-s))
    return ShortestElementReport(shortest, series, alpha * math.exp(-s * len(shortest)), alpha, d, n)


def lambda0_from_delta(delta: float, dim: float) -> float:
    """Bottom of the spectrum from the critical exponent and boundary dimension."""
    if dim < 0 or not 0 <= delta <= dim:
        raise InvalidInputError(f"need 0 <= delta <= d, got delta={delta}, d={dim}")
    if delta <= dim / 2:
        return dim * dim / 4
    return delta * (dim - delta)
