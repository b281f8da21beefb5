"""Orbit measures, cylinder measures and conformal density families on the tree.

Exact densities use Fractions throughout; densities projected from orbit
measures use floats. Below its stored depth a cylinder measure splits mass
evenly among children, which is what the conformal density of the full group
does, so exact densities stay exact at every depth >= |x|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from hypercrit.errors import InvalidInputError
from hypercrit.space.tree import Letters, Word, alphabet, as_word, check_rank, iter_sphere, sort_key
from hypercrit.subgroups.counting import elements
from hypercrit.subgroups.handles import SubgroupHandle

Mass = Union[Fraction, float]

EPSILON_LADDER = (0.1, 0.05, 0.02, 0.01)


@dataclass(frozen=True)
class OrbitMeasure:
    """Normalised sum of e^{-s|gamma|} point masses over H cap B(o, R)."""

    rank: int
    s: float
    radius: int
    atoms: tuple[tuple[Word, float], ...]
    total_mass: float
    degenerate: bool

    def mass_with_prefix(self, stem: Letters) -> float:
        n = len(stem)
        return math.fsum(w for g, w in self.atoms if g.letters[:n] == stem)


def ws_measure(h: SubgroupHandle, s: float, radius: int) -> OrbitMeasure:
    if s < 0 or radius < 0:
        raise InvalidInputError("s and R must be nonnegative")
    elems = elements(h, radius)
    raw = [math.exp(-s * len(g)) for g in elems]
    z = math.fsum(raw)
    atoms = tuple((g, w / z) for g, w in zip(elems, raw))
    return OrbitMeasure(h.rank, s, radius, atoms, math.fsum(w for _, w in atoms), len(elems) == 1)


def _nu_o(rank: int, n: int) -> Fraction:
    """Mass of a depth-n cylinder under the normalised full-group density at o."""
    if n == 0:
        return Fraction(1)
    return Fraction(1, 2 * rank * (2 * rank - 1) ** (n - 1))


def _iter_stems(rank: int, depth: int) -> Iterator[Letters]:
    for n in range(1, depth + 1):
        yield from iter_sphere(rank, n)


@dataclass(frozen=True)
class CylinderMeasure:
    """Masses of every cylinder of depth 1..depth."""

    rank: int
    depth: int
    masses: dict = field(repr=False)
    total_mass: Mass = 0

    @classmethod
    def from_leaves(cls, rank: int, depth: int, leaves: dict[Letters, Mass], zero: Mass = 0) -> "CylinderMeasure":
        masses: dict[Letters, Mass] = {}
        for w in iter_sphere(rank, depth):
            masses[w] = leaves.get(w, zero)
        for n in range(depth - 1, 0, -1):
            for w in iter_sphere(rank, n):
                masses[w] = sum((masses[c] for c in _kids(w, rank)), zero)
        total = sum((masses[(x,)] for x in alphabet(rank)), zero)
        return cls(rank, depth, masses, total)

    @property
    def exact(self) -> bool:
        return isinstance(self.total_mass, Fraction)

    def mass(self, stem: Letters | Word | str) -> Mass:
        if not isinstance(stem, tuple):
            stem = as_word(stem, self.rank).letters
        if not stem:
            return self.total_mass
        n = len(stem)
        if n <= self.depth:
            return self.masses[stem]
        head = self.masses[stem[: self.depth]]
        scale = (2 * self.rank - 1) ** (n - self.depth)
        return head / scale if self.exact else head / float(scale)

    def mass_of(self, stems) -> Mass:
        zero: Mass = Fraction(0) if self.exact else 0.0
        return sum((self.mass(s) for s in stems), zero)

    def additivity_defect(self) -> float:
        worst = 0.0
        for w in _iter_stems(self.rank, self.depth - 1):
            diff = self.masses[w] - sum(self.masses[c] for c in _kids(w, self.rank))
            worst = max(worst, abs(float(diff)))
        return worst

    def to_json(self) -> dict:
        def fmt(m: Mass):
            return f"{m.numerator}/{m.denominator}" if isinstance(m, Fraction) else m

        return {
            "rank": self.rank,
            "depth": self.depth,
            "totalMass": fmt(self.total_mass),
            "masses": {str(Word(w)): fmt(m) for w, m in sorted(self.masses.items(), key=lambda kv: sort_key(kv[0]))},
        }


def _kids(stem: Letters, rank: int) -> list[Letters]:
    return [stem + (x,) for x in alphabet(rank) if x != -stem[-1]]


def boundary_project(m: OrbitMeasure, depth: int) -> CylinderMeasure:
    """Push an orbit measure to depth-``depth`` cylinders.

    Atoms at least ``depth`` long go to the cylinder of their prefix. A
    shorter atom a is spread over Cyl(a) (over everything when a = e) in
    proportion to the full group's conformal weights, i.e. evenly.
    """
    if depth < 1:
        raise InvalidInputError("depth must be at least 1")
    rank = m.rank
    leaves: dict[Letters, float] = {}
    for g, w in m.atoms:
        word = g.letters
        if len(word) >= depth:
            key = word[:depth]
            leaves[key] = leaves.get(key, 0.0) + w
            continue
        if word:
            share = w / (2 * rank - 1) ** (depth - len(word))
            stems = _extend(word, rank, depth)
        else:
            share = w * float(_nu_o(rank, depth))
            stems = iter_sphere(rank, depth)
        for leaf in stems:
            leaves[leaf] = leaves.get(leaf, 0.0) + share
    return CylinderMeasure.from_leaves(rank, depth, leaves, 0.0)


def _extend(stem: Letters, rank: int, depth: int) -> Iterator[Letters]:
    if len(stem) == depth:
        yield stem
        return
    for c in _kids(stem, rank):
        yield from _extend(c, rank, depth)


@dataclass(frozen=True)
class DensityFamily:
    """x -> nu_x obtained from nu_o by the conformal rule with dimension delta.

    ``exact_base`` is e^delta when that is an integer (then masses stay
    rational). ``distortion`` records the multiplicative slack of the
    family (1 for the exact tree density).
    """

    base: CylinderMeasure
    delta: float
    exact_base: int | None = None
    distortion: float = 1.0
    label: str = ""
    notes: tuple[str, ...] = ()
    _totals: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def rank(self) -> int:
        return self.base.rank

    @property
    def exact(self) -> bool:
        return self.exact_base is not None and self.base.exact

    def growth(self, n: int) -> Mass:
        """e^{delta n}."""
        if self.exact:
            return Fraction(self.exact_base) ** n
        return math.exp(self.delta * n)

    def at(self, x: Word | str, depth: int | None = None) -> CylinderMeasure:
        x = as_word(x, self.rank)
        depth = max(depth or self.base.depth, len(x), 1)
        leaves = {}
        xl = x.letters
        for w in iter_sphere(self.rank, depth):
            j = 0
            while j < len(xl) and xl[j] == w[j]:
                j += 1
            leaves[w] = self.base.mass(w) * self.growth(2 * j - len(xl))
        zero: Mass = Fraction(0) if self.exact else 0.0
        return CylinderMeasure.from_leaves(self.rank, depth, leaves, zero)

    def total_at(self, x: Word | str) -> Mass:
        """||nu_x||, summed over the sets {xi : (x|xi) = j}."""
        xl = as_word(x, self.rank).letters
        hit = self._totals.get(xl)
        if hit is not None:
            return hit
        n = len(xl)
        acc: Mass = Fraction(0) if self.exact else 0.0
        for j in range(n + 1):
            inner = self.base.mass(xl[:j])
            outer = self.base.mass(xl[: j + 1]) if j < n else 0
            acc += self.growth(2 * j) * (inner - outer)
        total = acc / self.growth(n) if self.exact else acc * math.exp(-self.delta * n)
        self._totals[xl] = total
        return total

    def pi(self, g: Word | str) -> Mass:
        """Poincare quasi-cocycle value ||nu_{g^-1 o}||."""
        return self.total_at(as_word(g, self.rank).inverse())


def exact_conformal_density(rank: int, x: Word | str = "", depth: int = 1) -> CylinderMeasure:
    """nu_x for the full group, dimension ln(2k-1), exact rationals."""
    return full_group_density(rank, depth).at(x, depth)


def full_group_density(rank: int, depth: int = 1) -> DensityFamily:
    check_rank(rank)
    if depth < 1:
        raise InvalidInputError("depth must be at least 1")
    leaves = {w: _nu_o(rank, depth) for w in iter_sphere(rank, depth)}
    base = CylinderMeasure.from_leaves(rank, depth, leaves, Fraction(0))
    return DensityFamily(base, math.log(2 * rank - 1), 2 * rank - 1, 1.0, f"conformal F_{rank}")


def projected_density(h: SubgroupHandle, s: float, radius: int, depth: int) -> DensityFamily:
    base = boundary_project(ws_measure(h, s, radius), depth)
    return DensityFamily(
        base, s, None, 1.0, f"projected W_s, s={s:g}, R={radius}",
        ("uncontrolled approximation: truncated orbit measure",),
    )


def density_ladder(h: SubgroupHandle, delta: float, radius: int, depth: int) -> list[DensityFamily]:
    """Projected densities at s = delta + eps for the fixed epsilon ladder."""
    return [projected_density(h, delta + eps, radius, depth) for eps in EPSILON_LADDER]


def density_for(h: SubgroupHandle, delta: float | None = None, radius: int = 8, depth: int = 3) -> DensityFamily:
    """Exact family for finite-index subgroups, otherwise the last ladder rung."""
    if h.finite_index:
        return full_group_density(h.rank, depth)
    if delta is None:
        from hypercrit.series import critical_exponent_estimate

        delta = critical_exponent_estimate(h, max(radius, 2)).slope
    return projected_density(h, delta + EPSILON_LADDER[-1], radius, depth)
