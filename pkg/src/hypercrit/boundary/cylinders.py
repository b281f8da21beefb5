"""Cylinder sets of the tree boundary and shadows built from them.

A boundary set is a finite union of cylinders Cyl(w) = {ends starting with w}.
Canonical form: no stem is a prefix of another and no complete family of
siblings survives (it is merged into the parent). The whole boundary is the
family of the 2k one-letter stems.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Iterator

from hypercrit.errors import InvalidInputError
from hypercrit.space.tree import (
    BoundaryPoint,
    Letters,
    Word,
    _mul,
    alphabet,
    as_word,
    busemann,
    check_rank,
    dist,
    extensions,
    sort_key,
)
from hypercrit.subgroups.counting import elements
from hypercrit.subgroups.handles import SubgroupHandle


def children(stem: Letters, rank: int) -> list[Letters]:
    last = stem[-1] if stem else 0
    return [stem + (x,) for x in alphabet(rank) if x != -last]


def whole_boundary(rank: int) -> tuple[Letters, ...]:
    return tuple((x,) for x in alphabet(rank))


def canonicalize(stems: Iterable[Letters], rank: int) -> tuple[Letters, ...]:
    """Canonical cylinder form of a union of cylinders."""
    stems = {tuple(s) for s in stems}
    if () in stems:
        return whole_boundary(rank)
    # drop stems lying under another stem
    kept = set()
    for s in sorted(stems, key=len):
        if not any(s[:j] in kept for j in range(1, len(s))):
            kept.add(s)
    # merge complete sibling families, deepest first
    changed = True
    while changed:
        changed = False
        for s in sorted(kept, key=len, reverse=True):
            if len(s) < 2 or s not in kept:
                continue
            parent = s[:-1]
            sibs = children(parent, rank)
            if all(c in kept for c in sibs):
                kept.difference_update(sibs)
                kept.add(parent)
                changed = True
    return tuple(sorted(kept, key=sort_key))


def union(a: Iterable[Letters], b: Iterable[Letters], rank: int) -> tuple[Letters, ...]:
    return canonicalize(list(a) + list(b), rank)


def intersection(a: Iterable[Letters], b: Iterable[Letters], rank: int) -> tuple[Letters, ...]:
    """Two cylinders meet only when one stem extends the other."""
    b = list(b)
    out = []
    for s in a:
        for t in b:
            if t[: len(s)] == s:
                out.append(t)
            elif s[: len(t)] == t:
                out.append(s)
    return canonicalize(out, rank)


def complement(stem: Letters, rank: int) -> list[Letters]:
    """Stems whose cylinders partition the boundary minus Cyl(stem)."""
    out = []
    for j in range(len(stem)):
        for c in children(stem[:j], rank):
            if c != stem[: j + 1]:
                out.append(c)
    return out


def translate_cylinder(g: Letters, stem: Letters, rank: int) -> tuple[Letters, ...]:
    """Canonical stems of g . Cyl(stem)."""
    if not stem:
        return whole_boundary(rank)
    prod = _mul(g, stem)
    cancelled = (len(g) + len(stem) - len(prod)) // 2
    if cancelled < len(stem):
        return (prod,)
    # stem fully absorbed: g = g' stem^-1, and the image is everything seen
    # from g' except the branch leading back towards g
    return canonicalize(complement(prod + (-stem[-1],), rank), rank)


def contains_end(stems: Iterable[Letters], xi: BoundaryPoint | Letters) -> bool:
    for s in stems:
        head = xi.head(len(s)) if isinstance(xi, BoundaryPoint) else tuple(xi[: len(s)])
        if head == s:
            return True
    return False


def refine(stems: Iterable[Letters], rank: int, depth: int) -> Iterator[Letters]:
    """All words of length ``depth`` inside the union (stems longer than depth kept as is)."""
    for s in stems:
        yield from extensions(s, rank, max(depth, len(s)))


@dataclass(frozen=True)
class Shadow:
    """S_R(x, y): ends whose ray from x meets the closed ball B(y, R)."""

    rank: int
    x: Word
    y: Word
    radius: int
    stems: tuple[Letters, ...]

    @property
    def is_whole(self) -> bool:
        return self.stems == whole_boundary(self.rank)

    def contains(self, xi: BoundaryPoint) -> bool:
        return contains_end(self.stems, xi)

    def to_json(self) -> dict:
        return {
            "x": str(self.x),
            "y": str(self.y),
            "R": self.radius,
            "cylinders": [str(Word(s)) for s in self.stems],
        }


def shadow(x: Word | str, y: Word | str, radius: int, rank: int = 2) -> Shadow:
    check_rank(rank)
    if radius < 0:
        raise InvalidInputError("shadow radius must be nonnegative")
    x, y = as_word(x, rank), as_word(y, rank)
    w = (x.inverse() * y).letters
    m = len(w) - radius
    if m <= 0:
        stems = whole_boundary(rank)
    else:
        stems = translate_cylinder(x.letters, w[:m], rank)
    return Shadow(rank, x, y, radius, stems)


@dataclass(frozen=True)
class CoverReport:
    covered: bool
    max_multiplicity: int
    min_multiplicity: int
    depth: int
    shadows: int

    def to_json(self) -> dict:
        return {
            "covered": self.covered,
            "maxMultiplicity": self.max_multiplicity,
            "minMultiplicity": self.min_multiplicity,
            "depth": self.depth,
            "shadows": self.shadows,
        }


def shadow_cover_check(h: SubgroupHandle, k: int, radius: int, r: int) -> CoverReport:
    """Do the shadows S_R(o, gamma o), gamma in A_H[r, r+k], cover the boundary?

    Multiplicities are exact at depth r+k+R+1: each shadow is one cylinder
    (or everything), so the multiplicity of a deep cylinder is the sum of the
    shadow counts along its prefixes. The maximum and minimum are taken over
    the trie of shadow stems, without listing the deep cylinders.
    """
    if min(k, radius, r) < 0:
        raise InvalidInputError("k, R and r must be nonnegative")
    rank = h.rank
    depth = r + k + radius + 1
    weight: dict[Letters, int] = {}
    n_shadows = 0
    for g in elements(h, r + k):
        if len(g) < r:
            continue
        n_shadows += 1
        m = max(len(g) - radius, 0)
        stem = g.letters[:m]
        weight[stem] = weight.get(stem, 0) + 1
    nodes = set()
    for s in weight:
        for j in range(len(s) + 1):
            nodes.add(s[:j])
    best_max, best_min = 0, None
    stack = [((), weight.get((), 0))]
    while stack:
        node, acc = stack.pop()
        best_max = max(best_max, acc)
        for c in children(node, rank):
            if c in nodes:
                stack.append((c, acc + weight.get(c, 0)))
            else:
                # branch leaves the trie: no further shadows below
                best_min = acc if best_min is None else min(best_min, acc)
    if best_min is None:
        best_min = best_max
    return CoverReport(best_min >= 1, best_max, best_min, depth, n_shadows)


def representative_end(stem: Letters) -> BoundaryPoint:
    """stem . (last letter)^inf, a point of Cyl(stem)."""
    return BoundaryPoint(stem, stem[-1:])


@dataclass(frozen=True)
class BusemannBoundsReport:
    distance: int
    radius: int
    samples: int
    violations: int
    beta_min: int | None
    beta_max: int | None

    def to_json(self) -> dict:
        return {
            "d": self.distance,
            "R": self.radius,
            "samples": self.samples,
            "violations": self.violations,
            "betaMin": self.beta_min,
            "betaMax": self.beta_max,
            "lower": self.distance - 2 * self.radius,
            "upper": self.distance,
        }


def busemann_shadow_bounds_check(
    x: Word | str, y: Word | str, radius: int, sample_depth: int, rank: int = 2
) -> BusemannBoundsReport:
    """Check d(x,y) - 2R <= beta_xi(x,y) <= d(x,y) over ends sampled in S_R(x,y).

    One end is taken per cylinder of the shadow at ``sample_depth``.
    """
    x, y = as_word(x, rank), as_word(y, rank)
    if x == y:
        raise InvalidInputError("busemann bounds need x != y")
    sh = shadow(x, y, radius, rank)
    d = dist(x, y)
    lo, hi = d - 2 * radius, d
    bmin = bmax = None
    n = bad = 0
    for leaf in refine(sh.stems, rank, sample_depth):
        b = busemann(representative_end(leaf), x, y)
        n += 1
        if b < lo or b > hi:
            bad += 1
        bmin = b if bmin is None else min(bmin, b)
        bmax = b if bmax is None else max(bmax, b)
    return BusemannBoundsReport(d, radius, n, bad, bmin, bmax)


def random_end_in(stems: tuple[Letters, ...], rank: int, rng: random.Random, depth: int) -> BoundaryPoint:
    """A random eventually periodic end inside the union of cylinders."""
    w = list(rng.choice(stems))
    while len(w) < depth:
        w.append(rng.choice([c for c in alphabet(rank) if c != -w[-1]]))
    c1 = rng.choice([c for c in alphabet(rank) if c != -w[-1]])
    tail = [c1]
    if rng.random() < 0.5:
        tail.append(rng.choice([c for c in alphabet(rank) if c != -c1]))
    return BoundaryPoint(tuple(w), tuple(tail))


__all__ = [
    "BusemannBoundsReport",
    "CoverReport",
    "Shadow",
    "busemann_shadow_bounds_check",
    "canonicalize",
    "children",
    "complement",
    "contains_end",
    "intersection",
    "random_end_in",
    "refine",
    "representative_end",
    "shadow",
    "shadow_cover_check",
    "translate_cylinder",
    "union",
    "whole_boundary",
]
