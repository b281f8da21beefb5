"""Stallings core graphs, finite permutation actions and coset tables."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from hypercrit.errors import InvalidInputError
from hypercrit.space.tree import Letters, Word, _inv, _mul, alphabet, check_rank


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if ry < rx:
            rx, ry = ry, rx
        self.parent[ry] = rx
        return True


def _fold(n: int, edges: Iterable[tuple[int, int, int]]) -> tuple[_UnionFind, set[tuple[int, int, int]]]:
    uf = _UnionFind(n)
    edges = set(edges)
    while True:
        edges = {(uf.find(u), x, uf.find(v)) for u, x, v in edges}
        seen: dict[tuple[int, int], int] = {}
        merged = False
        for u, x, v in sorted(edges):
            for key, target in (((u, x), v), ((v, -x), u)):
                other = seen.get(key)
                if other is None:
                    seen[key] = target
                elif uf.find(other) != uf.find(target):
                    uf.union(other, target)
                    merged = True
        if not merged:
            return uf, edges


def _prune(base: int, edges: set[tuple[int, int, int]]) -> set[tuple[int, int, int]]:
    """Strip hanging trees: repeatedly drop non-base vertices of degree 1."""
    edges = set(edges)
    while True:
        degree: dict[int, int] = {}
        for u, _, v in edges:
            degree[u] = degree.get(u, 0) + 1
            degree[v] = degree.get(v, 0) + 1
        leaves = {v for v, d in degree.items() if d == 1 and v != base}
        if not leaves:
            return edges
        edges = {e for e in edges if e[0] not in leaves and e[2] not in leaves}


@dataclass(frozen=True)
class StallingsGraph:
    """A folded, based, labelled graph in canonical breadth-first numbering.

    Vertex 0 is the basepoint. ``edges`` holds (u, generator, v) triples with
    a positive generator index; reading the inverse letter walks the edge
    backwards.
    """

    rank: int
    size: int
    edges: tuple[tuple[int, int, int], ...]
    _next: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        nxt: dict[tuple[int, int], int] = {}
        for u, x, v in self.edges:
            if x <= 0 or x > self.rank:
                raise InvalidInputError(f"edge label {x} outside F_{self.rank}")
            for key, target in (((u, x), v), ((v, -x), u)):
                if nxt.setdefault(key, target) != target:
                    raise InvalidInputError("graph is not folded")
        object.__setattr__(self, "_next", nxt)

    @classmethod
    def from_edges(
        cls, rank: int, n: int, edges: Iterable[tuple[int, int, int]], base: int = 0, core: bool = True
    ) -> "StallingsGraph":
        """Fold an arbitrary labelled graph, optionally take its core, renumber canonically."""
        check_rank(rank)
        uf, folded = _fold(n, edges)
        base = uf.find(base)
        if core:
            folded = _prune(base, folded)
        return cls._canonical(rank, base, folded)

    @classmethod
    def _canonical(cls, rank: int, base: int, edges: Iterable[tuple[int, int, int]]) -> "StallingsGraph":
        nxt: dict[tuple[int, int], int] = {}
        for u, x, v in edges:
            nxt[(u, x)] = v
            nxt[(v, -x)] = u
        order = {base: 0}
        queue = deque([base])
        letters = alphabet(rank)
        while queue:
            u = queue.popleft()
            for x in letters:
                v = nxt.get((u, x))
                if v is not None and v not in order:
                    order[v] = len(order)
                    queue.append(v)
        relabelled = sorted({(order[u], x, order[v]) for u, x, v in edges if u in order})
        return cls(rank, len(order), tuple(relabelled))

    @classmethod
    def fold(cls, rank: int, generators: Sequence[Word]) -> "StallingsGraph":
        """Folded core graph of the subgroup generated by ``generators``."""
        check_rank(rank)
        edges = []
        n = 1
        for g in generators:
            w = g.letters
            if not w:
                continue
            if max(abs(x) for x in w) > rank:
                raise InvalidInputError(f"generator {g} outside F_{rank}")
            path = [0] + list(range(n, n + len(w) - 1)) + [0]
            n += len(w) - 1
            for i, x in enumerate(w):
                u, v = path[i], path[i + 1]
                if x > 0:
                    edges.append((u, x, v))
                else:
                    edges.append((v, -x, u))
        return cls.from_edges(rank, n, edges)

    def step(self, v: int, letter: int) -> int | None:
        return self._next.get((v, letter))

    def trace(self, w: Word | Letters, start: int = 0) -> int | None:
        v: int | None = start
        for x in w:
            v = self._next.get((v, x))
            if v is None:
                return None
        return v

    def contains(self, w: Word) -> bool:
        return self.trace(w.letters) == 0

    def is_complete(self) -> bool:
        """Every vertex has every letter: the subgroup has finite index."""
        return len(self._next) == 2 * self.rank * self.size

    def degree(self, v: int) -> int:
        return sum(1 for x in alphabet(self.rank) if (v, x) in self._next)

    def _tree_paths(self) -> tuple[dict[int, Letters], set[tuple[int, int, int]]]:
        paths: dict[int, Letters] = {0: ()}
        tree_edges: set[tuple[int, int, int]] = set()
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for x in alphabet(self.rank):
                v = self._next.get((u, x))
                if v is not None and v not in paths:
                    paths[v] = paths[u] + (x,)
                    tree_edges.add((u, x, v) if x > 0 else (v, -x, u))
                    queue.append(v)
        return paths, tree_edges

    def basis(self) -> list[Word]:
        """A free basis read off a breadth-first spanning tree."""
        paths, tree_edges = self._tree_paths()
        out = []
        for u, x, v in self.edges:
            if (u, x, v) in tree_edges:
                continue
            out.append(Word(_mul(_mul(paths[u], (x,)), _inv(paths[v]))))
        return out

    def vertex_words(self) -> dict[int, Letters]:
        """A word reaching each vertex from the basepoint (coset representatives)."""
        return self._tree_paths()[0]

    @property
    def key(self) -> tuple:
        return ("graph", self.rank, self.size, self.edges)


@dataclass(frozen=True)
class FiniteAction:
    """F_k acting on {0..m-1} on the left: generator i moves p to perms[i-1][p].

    A word acts letter by letter from the right, so (uv).p = u.(v.p).
    The invariant measure is the uniform one.
    """

    perms: tuple[tuple[int, ...], ...]
    _inverse: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        perms = tuple(tuple(int(v) for v in p) for p in self.perms)
        object.__setattr__(self, "perms", perms)
        if len(perms) < 2:
            raise InvalidInputError("an action of F_k needs k >= 2 generator permutations")
        m = len(perms[0])
        if m == 0:
            raise InvalidInputError("empty action")
        inverses = []
        for p in perms:
            if len(p) != m or sorted(p) != list(range(m)):
                raise InvalidInputError(f"not a permutation of 0..{m - 1}: {list(p)}")
            inv = [0] * m
            for i, v in enumerate(p):
                inv[v] = i
            inverses.append(tuple(inv))
        object.__setattr__(self, "_inverse", tuple(inverses))

    @property
    def rank(self) -> int:
        return len(self.perms)

    @property
    def size(self) -> int:
        return len(self.perms[0])

    def act_letter(self, letter: int, p: int) -> int:
        if letter > 0:
            return self.perms[letter - 1][p]
        return self._inverse[-letter - 1][p]

    def act(self, w: Word | Letters, p: int) -> int:
        for x in reversed(tuple(w)):
            p = self.act_letter(x, p)
        return p

    def orbit(self, p: int) -> list[int]:
        seen = {p}
        queue = deque([p])
        while queue:
            q = queue.popleft()
            for x in alphabet(self.rank):
                r = self.act_letter(x, q)
                if r not in seen:
                    seen.add(r)
                    queue.append(r)
        return sorted(seen)

    def is_transitive(self) -> bool:
        return len(self.orbit(0)) == self.size

    def stabilizer_graph(self, p: int) -> StallingsGraph:
        """Schreier graph of the orbit of p, read as the Stallings graph of Stab(p).

        Edges follow the right action q . x = x^-1 . q, so tracing a word w
        from p ends at w^-1 . p, and closes exactly when w fixes p.
        """
        if not 0 <= p < self.size:
            raise InvalidInputError(f"point {p} outside the action")
        pts = self.orbit(p)
        edges = []
        for q in pts:
            for i in range(1, self.rank + 1):
                edges.append((q, i, self._inverse[i - 1][q]))
        return StallingsGraph._canonical(self.rank, p, edges)

    def measure(self, subset: Iterable[int]) -> float:
        return len(set(subset)) / self.size


class CosetTable(FiniteAction):
    """A transitive finite action; points are the cosets of a finite-index subgroup."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.is_transitive():
            raise InvalidInputError("coset tables must be transitive")

    @classmethod
    def from_graph(cls, graph: StallingsGraph) -> "CosetTable":
        """The left action on vertices of a complete Stallings graph."""
        if not graph.is_complete():
            raise InvalidInputError("subgroup has infinite index")
        perms = []
        for i in range(1, graph.rank + 1):
            # left action x.v = v . x^-1 in the graph's right action
            perms.append(tuple(graph.step(v, -i) for v in range(graph.size)))
        return cls(tuple(perms))
