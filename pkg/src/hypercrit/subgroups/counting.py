"""Exact orbit counting by dynamic programming over automaton states.

Words are grown by prepending letters. The DP state is (automaton state,
first letter), which is enough to keep words reduced; the ambient sphere is
never materialised. Optionally the state also carries a point of a finite
action, giving the counts of {gamma : gamma.z = q} needed for recurrence
and partial series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable

from hypercrit.errors import InvalidInputError
from hypercrit.space.tree import Word, alphabet, sort_key
from hypercrit.subgroups.graphs import FiniteAction
from hypercrit.subgroups.handles import SubgroupHandle

_cache: dict[tuple, list[int]] = {}
_CACHE_LIMIT = 256


def _layers(h: SubgroupHandle, nmax: int, action: FiniteAction | None = None, z: int | None = None):
    """Yield, for n = 0..nmax, the DP layer {(state, first, point): multiplicity}."""
    letters = alphabet(h.rank)
    layer: dict[tuple[Hashable, int, int | None], int] = {(h.initial_state(), 0, z): 1}
    yield layer
    for n in range(1, nmax + 1):
        remaining = nmax - n
        nxt: dict[tuple[Hashable, int, int | None], int] = {}
        for (state, first, p), mult in layer.items():
            for x in letters:
                if x == -first:
                    continue
                s2 = h.step(state, x)
                if s2 is None or not h.viable(s2, remaining):
                    continue
                p2 = action.act_letter(x, p) if action is not None else None
                key = (s2, x, p2)
                nxt[key] = nxt.get(key, 0) + mult
        layer = nxt
        yield layer


def sphere_counts(h: SubgroupHandle, nmax: int) -> list[int]:
    """[|H cap S(n)| for n = 0..nmax], exact."""
    if nmax < 0:
        raise InvalidInputError("radius must be nonnegative")
    key = h.key
    cached = _cache.get(key)
    if cached is not None and len(cached) > nmax:
        return cached[: nmax + 1]
    counts = []
    for layer in _layers(h, nmax):
        counts.append(sum(m for (s, _, _), m in layer.items() if h.accepts(s)))
    if len(_cache) >= _CACHE_LIMIT:
        _cache.clear()
    _cache[key] = counts
    return list(counts)


def sphere_count(h: SubgroupHandle, n: int) -> int:
    return sphere_counts(h, n)[n]


def ball_counts(h: SubgroupHandle, rmax: int) -> list[int]:
    out, total = [], 0
    for c in sphere_counts(h, rmax):
        total += c
        out.append(total)
    return out


@dataclass(frozen=True)
class AnnulusCount:
    r1: int
    r2: int
    count: int


def annulus_count(h: SubgroupHandle, r1: int, r2: int) -> AnnulusCount:
    if r1 < 0 or r1 > r2:
        raise InvalidInputError(f"need 0 <= r1 <= r2, got [{r1}, {r2}]")
    return AnnulusCount(r1, r2, sum(sphere_counts(h, r2)[r1:]))


def orbit_sphere_counts(h: SubgroupHandle, action: FiniteAction, z: int, nmax: int) -> list[list[int]]:
    """counts[n][q] = |{gamma in H : |gamma| = n, gamma.z = q}|."""
    if not 0 <= z < action.size:
        raise InvalidInputError(f"point {z} outside the action")
    if action.rank != h.rank:
        raise InvalidInputError("action and subgroup have different ranks")
    out = []
    for layer in _layers(h, nmax, action, z):
        row = [0] * action.size
        for (s, _, p), m in layer.items():
            if h.accepts(s):
                row[p] += m
        out.append(row)
    return out


def elements(h: SubgroupHandle, radius: int) -> list[Word]:
    """All elements of H of length <= radius, shortlex sorted."""
    letters = alphabet(h.rank)
    found: list[tuple[int, ...]] = []

    def grow(word: tuple[int, ...], state: Hashable) -> None:
        if h.accepts(state):
            found.append(word)
        if len(word) == radius:
            return
        remaining = radius - len(word) - 1
        first = word[0] if word else 0
        for x in letters:
            if x == -first:
                continue
            s2 = h.step(state, x)
            if s2 is not None and h.viable(s2, remaining):
                grow((x,) + word, s2)

    grow((), h.initial_state())
    found.sort(key=sort_key)
    return [Word(w) for w in found]


@dataclass(frozen=True)
class CoornaertTable:
    window: int
    delta: float
    radii: list[int]
    counts: list[int]
    ratios: list[float]
    minimum: float
    maximum: float
    delta_estimated: bool

    @property
    def spread(self) -> float:
        return self.maximum / self.minimum if self.minimum > 0 else math.inf


def coornaert_ratio(h: SubgroupHandle, k: int, rmax: int, delta: float | None = None) -> CoornaertTable:
    """|A_H[r, r+k]| e^{-delta r} for r = 0..rmax; min and max are taken over r >= 1."""
    if k < 1:
        raise InvalidInputError("window must be at least 1")
    if rmax < 1:
        raise InvalidInputError("rmax must be at least 1")
    estimated = delta is None
    if delta is None:
        from hypercrit.series import critical_exponent_estimate

        delta = critical_exponent_estimate(h, max(rmax + k, 2)).slope
    spheres = sphere_counts(h, rmax + k)
    counts = [sum(spheres[r : r + k + 1]) for r in range(rmax + 1)]
    ratios = [math.exp(math.log(c) - delta * r) if c else 0.0 for r, c in enumerate(counts)]
    tail = ratios[1:]
    return CoornaertTable(k, delta, list(range(rmax + 1)), counts, ratios, min(tail), max(tail), estimated)


def clear_cache() -> None:
    _cache.clear()


def annuli(h: SubgroupHandle, k: int, radii: Iterable[int]) -> list[AnnulusCount]:
    radii = list(radii)
    spheres = sphere_counts(h, max(radii) + k) if radii else []
    return [AnnulusCount(r, r + k, sum(spheres[r : r + k + 1])) for r in radii]
