"""Exact geometry of the Cayley tree of the free group F_k.

Letters are nonzero integers: ``i`` is the i-th generator and ``-i`` its
inverse. In string form generator ``i`` is the i-th lowercase letter and its
inverse the matching capital, so ``"abA"`` is a*b*a^-1.

All hot loops work on plain tuples; :class:`Word` is the public wrapper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Iterator, Sequence

from hypercrit.errors import InvalidInputError

Letters = tuple[int, ...]

MAX_RANK = 26


def letter_char(letter: int) -> str:
    c = chr(ord("a") + abs(letter) - 1)
    return c if letter > 0 else c.upper()


def char_letter(ch: str) -> int:
    if len(ch) != 1 or not ch.isascii() or not ch.isalpha():
        raise InvalidInputError(f"not a word letter: {ch!r}")
    if ch.islower():
        return ord(ch) - ord("a") + 1
    return -(ord(ch) - ord("A") + 1)


def letter_rank(letter: int) -> int:
    """Total order on letters used for every tie-break: a < A < b < B < ..."""
    return 2 * (abs(letter) - 1) + (letter < 0)


def alphabet(rank: int) -> Letters:
    """Letters of F_rank in ``letter_rank`` order."""
    out = []
    for i in range(1, rank + 1):
        out.extend((i, -i))
    return tuple(out)


def check_rank(rank: int) -> int:
    if not isinstance(rank, int) or rank < 2 or rank > MAX_RANK:
        raise InvalidInputError(f"rank must be an integer in [2, {MAX_RANK}], got {rank!r}")
    return rank


def _reduce(letters: Iterable[int]) -> Letters:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _mul(u: Sequence[int], v: Sequence[int]) -> Letters:
    i = 0
    n, m = len(u), len(v)
    while i < n and i < m and u[n - 1 - i] == -v[i]:
        i += 1
    return tuple(u[: n - i]) + tuple(v[i:])


def _inv(u: Sequence[int]) -> Letters:
    return tuple(-x for x in reversed(u))


def _is_reduced(u: Sequence[int]) -> bool:
    return all(u[i] != -u[i + 1] for i in range(len(u) - 1))


def _lcp(u: Sequence[int], v: Sequence[int]) -> int:
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def _cyclic_split(u: Letters) -> tuple[Letters, Letters]:
    """Split reduced ``u`` as conj * core * conj^-1 with core cyclically reduced."""
    i = 0
    n = len(u)
    while 2 * i + 1 < n and u[i] == -u[n - 1 - i]:
        i += 1
    return u[:i], u[i : n - i]


def _primitive_root(u: Letters) -> Letters:
    """Shortest r with u == r^m as sequences (u assumed nonempty)."""
    n = len(u)
    for p in range(1, n + 1):
        if n % p == 0 and u[:p] * (n // p) == u:
            return u[:p]
    return u


def sort_key(u: Sequence[int]) -> tuple:
    return (len(u), tuple(letter_rank(x) for x in u))


@total_ordering
@dataclass(frozen=True, slots=True)
class Word:
    """A reduced word, i.e. a group element and a vertex of the Cayley tree.

    Ordering is shortlex with letters ordered a < A < b < B < ...
    """

    letters: Letters = ()

    def __post_init__(self) -> None:
        if not isinstance(self.letters, tuple):
            object.__setattr__(self, "letters", tuple(self.letters))
        if any((not isinstance(x, int)) or x == 0 for x in self.letters):
            raise InvalidInputError(f"invalid letters {self.letters!r}")
        if not _is_reduced(self.letters):
            raise InvalidInputError(f"word is not reduced: {self.letters!r}")

    @classmethod
    def parse(cls, text: str, rank: int | None = None) -> "Word":
        """Parse ``"abA"``-style text, reducing it. ``"e"``/``""`` is the identity."""
        text = text.strip()
        if text in ("", "e", "1"):
            return cls()
        return reduce_word([char_letter(c) for c in text], rank)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.letters[item])
        return self.letters[item]

    def __mul__(self, other: "Word") -> "Word":
        if not isinstance(other, Word):
            return NotImplemented
        return Word(_mul(self.letters, other.letters))

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        out: Letters = ()
        for _ in range(abs(n)):
            out = _mul(out, base.letters)
        return Word(out)

    def inverse(self) -> "Word":
        return Word(_inv(self.letters))

    def conjugate(self, g: "Word") -> "Word":
        """g * self * g^-1."""
        return Word(_mul(_mul(g.letters, self.letters), _inv(g.letters)))

    def max_letter(self) -> int:
        return max((abs(x) for x in self.letters), default=0)

    def __lt__(self, other: "Word") -> bool:
        return sort_key(self.letters) < sort_key(other.letters)

    def __str__(self) -> str:
        return "".join(letter_char(x) for x in self.letters) or "e"

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


IDENTITY = Word()


def reduce_word(letters: Iterable[int | str], rank: int | None = None) -> Word:
    """Freely reduce a raw letter sequence.

    Letters may be integers (``-i`` for the inverse of generator ``i``) or
    single characters. With ``rank`` given, letters beyond it are rejected.
    """
    raw = []
    for x in letters:
        if isinstance(x, str):
            x = char_letter(x)
        if not isinstance(x, int) or x == 0:
            raise InvalidInputError(f"invalid letter {x!r}")
        if rank is not None and abs(x) > rank:
            raise InvalidInputError(f"letter {letter_char(x)!r} outside the alphabet of F_{rank}")
        raw.append(x)
    return Word(_reduce(raw))


def as_word(w: Word | str | Sequence[int], rank: int | None = None) -> Word:
    if isinstance(w, Word):
        if rank is not None and w.max_letter() > rank:
            raise InvalidInputError(f"word {w} outside the alphabet of F_{rank}")
        return w
    if isinstance(w, str):
        return Word.parse(w, rank)
    return reduce_word(w, rank)


def iter_sphere(rank: int, n: int) -> Iterator[Letters]:
    """All reduced words of length exactly ``n``, lexicographic in letter order."""
    letters = alphabet(rank)
    if n == 0:
        yield ()
        return
    stack: list[int] = []

    def rec(depth: int) -> Iterator[Letters]:
        for x in letters:
            if stack and stack[-1] == -x:
                continue
            stack.append(x)
            if depth + 1 == n:
                yield tuple(stack)
            else:
                yield from rec(depth + 1)
            stack.pop()

    yield from rec(0)


def iter_ball(rank: int, radius: int) -> Iterator[Letters]:
    """All reduced words of length at most ``radius``, in shortlex order."""
    for n in range(radius + 1):
        yield from iter_sphere(rank, n)


def sphere_size(rank: int, n: int) -> int:
    return 1 if n == 0 else 2 * rank * (2 * rank - 1) ** (n - 1)


def extensions(stem: Letters, rank: int, depth: int) -> Iterator[Letters]:
    """Reduced words of length ``depth`` having ``stem`` as a prefix."""
    if len(stem) >= depth:
        if len(stem) == depth:
            yield stem
        return
    letters = alphabet(rank)
    for x in letters:
        if stem and stem[-1] == -x:
            continue
        yield from extensions(stem + (x,), rank, depth)


# --- distances -------------------------------------------------------------


def dist(x: Word, y: Word) -> int:
    return len(_mul(_inv(x.letters), y.letters))


def gromov_product(x: Word, y: Word, base: Word = IDENTITY) -> int:
    """(x|y)_base; on the tree the common-prefix length of base^-1 x and base^-1 y."""
    bi = _inv(base.letters)
    return _lcp(_mul(bi, x.letters), _mul(bi, y.letters))


# --- boundary --------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class BoundaryPoint:
    """The infinite reduced word ``prefix . tail . tail . ...``.

    Stored in canonical form: tail primitive and cyclically reduced, prefix
    as short as possible. Two points are equal iff they are equal as ends.
    """

    prefix: Letters
    tail: Letters

    def __post_init__(self) -> None:
        prefix = _reduce(tuple(self.prefix))
        tail = _reduce(tuple(self.tail))
        if not tail:
            raise InvalidInputError("boundary point needs a nonempty periodic tail")
        conj, core = _cyclic_split(tail)
        if conj:
            # prefix . (c k c^-1)^inf == prefix c . k^inf
            prefix = _mul(prefix, conj)
            tail = core
        while prefix and prefix[-1] == -tail[0]:
            prefix = prefix[:-1]
            tail = tail[1:] + tail[:1]
        tail = _primitive_root(tail)
        while prefix and prefix[-1] == tail[-1]:
            prefix = prefix[:-1]
            tail = tail[-1:] + tail[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "tail", tail)

    @classmethod
    def parse(cls, text: str, rank: int | None = None) -> "BoundaryPoint":
        """Parse ``"prefix(tail)"``, e.g. ``"a(b)"`` for a b^inf."""
        text = text.strip()
        if not text.endswith(")") or "(" not in text:
            raise InvalidInputError(f"boundary point must look like 'prefix(tail)': {text!r}")
        head, tail = text[:-1].split("(", 1)
        p = Word.parse(head, rank).letters if head else ()
        t = Word.parse(tail, rank).letters
        return cls(p, t)

    @classmethod
    def ray(cls, w: Word | str) -> "BoundaryPoint":
        """w^inf for a nontrivial element (the attracting end of its axis)."""
        w = as_word(w)
        if not w.letters:
            raise InvalidInputError("the identity has no attracting end")
        return cls((), w.letters)

    def letter(self, i: int) -> int:
        p = len(self.prefix)
        if i < p:
            return self.prefix[i]
        return self.tail[(i - p) % len(self.tail)]

    def head(self, n: int) -> Letters:
        return tuple(self.letter(i) for i in range(n))

    def translate(self, g: Word) -> "BoundaryPoint":
        """The image g . xi."""
        return BoundaryPoint(_mul(g.letters, self.prefix), self.tail)

    def common_prefix(self, other: "BoundaryPoint") -> float:
        """Length of the common prefix; ``inf`` when the points coincide."""
        if self == other:
            return math.inf
        bound = max(len(self.prefix), len(other.prefix)) + math.lcm(len(self.tail), len(other.tail))
        i = 0
        while i < bound and self.letter(i) == other.letter(i):
            i += 1
        return i

    def word_product(self, w: Word | Letters) -> int:
        """(w|xi)_o: common-prefix length of the word and the end."""
        letters = w.letters if isinstance(w, Word) else w
        i = 0
        while i < len(letters) and letters[i] == self.letter(i):
            i += 1
        return i

    def __str__(self) -> str:
        p = "".join(letter_char(x) for x in self.prefix)
        t = "".join(letter_char(x) for x in self.tail)
        return f"{p}({t})"


def visual_distance(xi: BoundaryPoint, eta: BoundaryPoint, base: Word = IDENTITY, a: float = math.e) -> float:
    """a^{-(xi|eta)_base}; with a = e the visual bracket holds with k1 = k2 = 1."""
    if a <= 1:
        raise InvalidInputError("visual parameter must exceed 1")
    bi = base.inverse()
    gp = xi.translate(bi).common_prefix(eta.translate(bi))
    return 0.0 if gp == math.inf else a ** (-gp)


def busemann(xi: BoundaryPoint, x: Word, y: Word) -> int:
    """beta_xi(x, y) = lim d(x,z) - d(y,z) as z runs to xi."""
    return len(x) - 2 * xi.word_product(x) - len(y) + 2 * xi.word_product(y)


def classify(g: Word) -> str:
    """Free actions on trees have no elliptic or parabolic elements."""
    return "identity" if not g.letters else "hyperbolic"


def axis_decomposition(h: Word) -> tuple[Word, Word]:
    """h = u c u^-1 with c cyclically reduced; returns (u, c)."""
    u, c = _cyclic_split(h.letters)
    return Word(u), Word(c)


def axis_endpoints(h: Word) -> tuple[BoundaryPoint, BoundaryPoint]:
    """(repelling, attracting) ends: u c^-inf and u c^inf."""
    if not h.letters:
        raise InvalidInputError("the identity is not hyperbolic")
    u, c = _cyclic_split(h.letters)
    return BoundaryPoint(u, _inv(c)), BoundaryPoint(u, c)


def translation_length(h: Word) -> int:
    if not h.letters:
        raise InvalidInputError("the identity is not hyperbolic")
    return len(_cyclic_split(h.letters)[1])


def axis_distance(h: Word) -> int:
    """Distance from the basepoint to the axis of h."""
    return len(_cyclic_split(h.letters)[0])
