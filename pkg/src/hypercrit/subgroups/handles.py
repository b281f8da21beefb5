"""Subgroup handles: the four ways a subgroup of F_k is described.

Every handle is also a small automaton used by the counting code: words are
built by *prepending* letters, and the automaton state after reading ``w``
decides whether ``w`` lies in the subgroup. Prepending keeps left actions
incremental, (x w).p = x.(w.p); the Stallings variant reads w^-1 instead,
which is harmless because subgroups are closed under inversion.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from functools import cached_property
from typing import Any, Hashable, Sequence

from hypercrit.errors import InvalidInputError
from hypercrit.space.tree import Word, alphabet, as_word, check_rank
from hypercrit.subgroups.graphs import CosetTable, FiniteAction, StallingsGraph

MAX_FINITE_IMAGE = 200_000


class SubgroupHandle:
    """Base class. Subclasses provide the automaton and a canonical ``key``."""

    rank: int

    # --- automaton -----------------------------------------------------
    def initial_state(self) -> Hashable:
        raise NotImplementedError

    def step(self, state: Hashable, letter: int) -> Hashable | None:
        """State after prepending ``letter``; ``None`` when no extension can be in H."""
        raise NotImplementedError

    def accepts(self, state: Hashable) -> bool:
        raise NotImplementedError

    def viable(self, state: Hashable, remaining: int) -> bool:
        """False only when no completion within ``remaining`` letters is accepted."""
        return True

    # --- subgroup API --------------------------------------------------
    def contains(self, w: Word | str) -> bool:
        w = as_word(w, self.rank)
        state = self.initial_state()
        for x in reversed(w.letters):
            state = self.step(state, x)
            if state is None:
                return False
        return self.accepts(state)

    @property
    def key(self) -> tuple:
        raise NotImplementedError

    @property
    def is_normal(self) -> bool:
        raise NotImplementedError

    @property
    def finite_index(self) -> bool:
        return False

    def conjugate(self, g: Word) -> "SubgroupHandle":
        raise NotImplementedError

    def to_json(self) -> dict[str, Any]:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SubgroupHandle) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)


class _GraphHandle(SubgroupHandle):
    """Shared machinery for variants with a finite Stallings graph."""

    @property
    def graph(self) -> StallingsGraph:
        raise NotImplementedError

    def initial_state(self) -> int:
        return 0

    def step(self, state: int, letter: int) -> int | None:
        return self.graph.step(state, -letter)

    def accepts(self, state: int) -> bool:
        return state == 0

    @property
    def key(self) -> tuple:
        return self.graph.key

    @property
    def finite_index(self) -> bool:
        return self.graph.is_complete()

    @property
    def index(self) -> int | None:
        return self.graph.size if self.finite_index else None

    def coset_table(self) -> CosetTable:
        return CosetTable.from_graph(self.graph)

    @cached_property
    def is_normal(self) -> bool:
        return all(self.conjugate(Word((x,))).key == self.key for x in alphabet(self.rank))


class Stallings(_GraphHandle):
    """A finitely generated subgroup, stored as its folded core graph."""

    def __init__(self, rank: int, generators: Sequence[Word | str] = (), graph: StallingsGraph | None = None):
        self.rank = check_rank(rank)
        if graph is None:
            gens = [as_word(g, rank) for g in generators]
            graph = StallingsGraph.fold(rank, gens)
        elif graph.rank != rank:
            raise InvalidInputError("graph rank mismatch")
        self._graph = graph

    @classmethod
    def full(cls, rank: int) -> "Stallings":
        return cls(rank, [Word((i,)) for i in range(1, rank + 1)])

    @property
    def graph(self) -> StallingsGraph:
        return self._graph

    def generators(self) -> list[Word]:
        return self._graph.basis()

    def conjugate(self, g: Word | str) -> "Stallings":
        g = as_word(g, self.rank)
        return Stallings(self.rank, [b.conjugate(g) for b in self.generators()])

    def to_json(self) -> dict[str, Any]:
        return {"type": "stallings", "rank": self.rank, "generators": [str(w) for w in self.generators()]}

    def __repr__(self) -> str:
        gens = ", ".join(str(w) for w in self.generators())
        return f"Stallings(rank={self.rank}, <{gens}>)"


class CosetStabilizer(_GraphHandle):
    """Stab(point) for a transitive finite action (a coset table)."""

    def __init__(self, table: CosetTable | FiniteAction | Sequence[Sequence[int]], point: int = 0):
        if not isinstance(table, CosetTable):
            perms = table.perms if isinstance(table, FiniteAction) else table
            table = CosetTable(tuple(tuple(p) for p in perms))
        if not 0 <= point < table.size:
            raise InvalidInputError(f"point {point} outside the coset table")
        self.table = table
        self.point = point
        self.rank = check_rank(table.rank)

    @cached_property
    def graph(self) -> StallingsGraph:
        return self.table.stabilizer_graph(self.point)

    def conjugate(self, g: Word | str) -> "CosetStabilizer":
        g = as_word(g, self.rank)
        return CosetStabilizer(self.table, self.table.act(g, self.point))

    def to_json(self) -> dict[str, Any]:
        return {
            "type": "cosetStabilizer",
            "rank": self.rank,
            "permutations": [list(p) for p in self.table.perms],
            "point": self.point,
        }

    def __repr__(self) -> str:
        return f"CosetStabilizer(index={self.table.size}, point={self.point})"


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """p after q."""
    return tuple(p[i] for i in q)


class KernelFinite(_GraphHandle):
    """Kernel of a homomorphism to a finite permutation group.

    ``images[i]`` is the permutation assigned to generator i+1. The kernel is
    the stabilizer of the identity in the regular action of the image group,
    which gives its Stallings graph.
    """

    def __init__(self, images: Sequence[Sequence[int]]):
        self.images = tuple(tuple(int(v) for v in p) for p in images)
        self.rank = check_rank(len(self.images))
        m = len(self.images[0])
        for p in self.images:
            if len(p) != m or sorted(p) != list(range(m)):
                raise InvalidInputError(f"not a permutation: {list(p)}")

    @classmethod
    def cyclic(cls, modulus: int, exponents: Sequence[int]) -> "KernelFinite":
        """Kernel of x_i -> exponents[i] in Z/modulus."""
        if modulus < 1:
            raise InvalidInputError("modulus must be positive")
        perms = [tuple((j + e) % modulus for j in range(modulus)) for e in exponents]
        return cls(perms)

    @cached_property
    def _group(self) -> tuple[list[tuple[int, ...]], dict[tuple[int, ...], int]]:
        m = len(self.images[0])
        identity = tuple(range(m))
        inverses = []
        for p in self.images:
            inv = [0] * m
            for i, v in enumerate(p):
                inv[v] = i
            inverses.append(tuple(inv))
        elements = [identity]
        index = {identity: 0}
        queue = deque([identity])
        while queue:
            g = queue.popleft()
            for p in self.images + tuple(inverses):
                h = _compose(p, g)
                if h not in index:
                    index[h] = len(elements)
                    elements.append(h)
                    if len(elements) > MAX_FINITE_IMAGE:
                        raise InvalidInputError("finite image group too large")
                    queue.append(h)
        return elements, index

    @property
    def image_order(self) -> int:
        return len(self._group[0])

    @cached_property
    def graph(self) -> StallingsGraph:
        elements, index = self._group
        perms = []
        for p in self.images:
            perms.append(tuple(index[_compose(p, g)] for g in elements))
        return FiniteAction(tuple(perms)).stabilizer_graph(0)

    @property
    def is_normal(self) -> bool:
        return True

    def conjugate(self, g: Word | str) -> "KernelFinite":
        as_word(g, self.rank)
        return self

    def to_json(self) -> dict[str, Any]:
        return {"type": "kernelFinite", "rank": self.rank, "images": [list(p) for p in self.images]}

    def __repr__(self) -> str:
        return f"KernelFinite(order={self.image_order})"


def _rref_key(images: Sequence[Sequence[int]]) -> tuple:
    """Reduced row echelon form of the k x m image matrix, transposed to m x k.

    The kernel of w -> sum(exponent_i * image_i) depends only on the row
    space of the m x k matrix whose columns are the images.
    """
    k = len(images)
    m = len(images[0]) if images else 0
    rows = [[Fraction(images[j][i]) for j in range(k)] for i in range(m)]
    pivot_row = 0
    for col in range(k):
        pr = next((r for r in range(pivot_row, m) if rows[r][col] != 0), None)
        if pr is None:
            continue
        rows[pivot_row], rows[pr] = rows[pr], rows[pivot_row]
        pv = rows[pivot_row][col]
        rows[pivot_row] = [v / pv for v in rows[pivot_row]]
        for r in range(m):
            if r != pivot_row and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[pivot_row])]
        pivot_row += 1
    return tuple(tuple(str(v) for v in row) for row in rows[:pivot_row])


class KernelAbelian(SubgroupHandle):
    """Kernel of a homomorphism F_k -> Z^m given by integer image vectors.

    With the standard basis as images this is the commutator subgroup. Such
    kernels usually have infinite rank, so they exist only as a predicate and
    an automaton over exponent vectors.
    """

    def __init__(self, images: Sequence[Sequence[int]]):
        self.images = tuple(tuple(int(v) for v in vec) for vec in images)
        self.rank = check_rank(len(self.images))
        dims = {len(v) for v in self.images}
        if len(dims) != 1 or 0 in dims:
            raise InvalidInputError("image vectors must share a positive dimension")
        self.dim = dims.pop()
        self._step = {}
        for i, vec in enumerate(self.images, start=1):
            self._step[i] = vec
            self._step[-i] = tuple(-v for v in vec)
        self._max_norm = max(sum(abs(v) for v in vec) for vec in self.images)

    @classmethod
    def commutator(cls, rank: int) -> "KernelAbelian":
        return cls([tuple(1 if j == i else 0 for j in range(rank)) for i in range(rank)])

    def initial_state(self) -> tuple[int, ...]:
        return (0,) * self.dim

    def step(self, state: tuple[int, ...], letter: int) -> tuple[int, ...]:
        d = self._step[letter]
        return tuple(a + b for a, b in zip(state, d))

    def accepts(self, state: tuple[int, ...]) -> bool:
        return not any(state)

    def viable(self, state: tuple[int, ...], remaining: int) -> bool:
        return sum(abs(v) for v in state) <= remaining * self._max_norm

    def image(self, w: Word) -> tuple[int, ...]:
        state = self.initial_state()
        for x in w.letters:
            state = self.step(state, x)
        return state

    @cached_property
    def key(self) -> tuple:
        return ("abelian", self.rank, _rref_key(self.images))

    @property
    def is_normal(self) -> bool:
        return True

    @property
    def finite_index(self) -> bool:
        return not _rref_key(self.images)

    def conjugate(self, g: Word | str) -> "KernelAbelian":
        as_word(g, self.rank)
        return self

    def to_json(self) -> dict[str, Any]:
        return {"type": "kernelAbelian", "rank": self.rank, "images": [list(v) for v in self.images]}

    def __repr__(self) -> str:
        return f"KernelAbelian(images={self.images})"


def full_group(rank: int) -> Stallings:
    return Stallings.full(rank)


def conjugate_subgroup(h: SubgroupHandle, g: Word | str) -> SubgroupHandle:
    """Handle for g H g^-1."""
    return h.conjugate(as_word(g, h.rank))


def contains(h: SubgroupHandle, w: Word | str) -> bool:
    return h.contains(w)


def subgroup_from_json(data: dict[str, Any], rank: int | None = None) -> SubgroupHandle:
    """Build a handle from its JSON description (see README for the schema)."""
    if not isinstance(data, dict) or "type" not in data:
        raise InvalidInputError("subgroup description needs a 'type' field")
    kind = data["type"]
    allowed = {
        "stallings": {"type", "rank", "generators"},
        "kernelFinite": {"type", "rank", "images"},
        "kernelAbelian": {"type", "rank", "images"},
        "cosetStabilizer": {"type", "rank", "permutations", "point"},
    }
    if kind not in allowed:
        raise InvalidInputError(f"unknown subgroup type {kind!r}")
    extra = set(data) - allowed[kind]
    if extra:
        raise InvalidInputError(f"unknown keys for {kind}: {sorted(extra)}")
    required = {"kernelFinite": "images", "kernelAbelian": "images", "cosetStabilizer": "permutations"}
    if kind in required and required[kind] not in data:
        raise InvalidInputError(f"{kind} description needs {required[kind]!r}")
    r = data.get("rank", rank)
    if kind == "stallings":
        if r is None:
            raise InvalidInputError("stallings description needs a rank")
        return Stallings(int(r), [Word.parse(g, int(r)) for g in data.get("generators", [])])
    if kind == "kernelFinite":
        h: SubgroupHandle = KernelFinite(data["images"])
    elif kind == "kernelAbelian":
        h = KernelAbelian(data["images"])
    else:
        h = CosetStabilizer(data["permutations"], int(data.get("point", 0)))
    if r is not None and int(r) != h.rank:
        raise InvalidInputError(f"rank {r} does not match the {h.rank} images given")
    return h
