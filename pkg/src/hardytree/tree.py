"""Addressing and enumeration of the (q+1)-homogeneous rooted tree.

A vertex is addressed by its path word from the root ``o``: the first letter
picks one of the ``q+1`` children of the root, every later letter one of the
``q`` children of a non-root vertex.  Words are ordered lexicographically,
which is also the order in which :func:`enumerate_level` yields them.  Inside
a level the lexicographic rank of a word is a mixed-radix number, so vertices
convert to and from ``(level, index)`` pairs in O(depth) and whole levels can
be handled as numpy index arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DepthCapError, DomainError, VertexFormatError

DEFAULT_DEPTH_CAP = 16


@dataclass(frozen=True)
class TreeParams:
    """Branching parameter ``q`` plus the depth cap used for range checks."""

    q: int
    depth_cap: int = DEFAULT_DEPTH_CAP

    def __post_init__(self) -> None:
        if isinstance(self.q, bool) or not isinstance(self.q, int) or self.q < 1:
            raise DomainError(f"q must be an integer >= 1, got {self.q!r}")
        if self.depth_cap < 0:
            raise DomainError(f"depth_cap must be >= 0, got {self.depth_cap}")

    def check_depth(self, n: int) -> None:
        if n < 0:
            raise DomainError(f"level must be nonnegative, got {n}")
        if n > self.depth_cap:
            raise DepthCapError(f"level {n} exceeds depth cap {self.depth_cap}")

    def is_valid(self, v: "Vertex") -> bool:
        word = v.word
        if not word:
            return True
        if not 0 <= word[0] <= self.q:
            return False
        return all(0 <= a < self.q for a in word[1:])


@dataclass(frozen=True, order=True)
class Vertex:
    """A vertex, identified by its path word from the root."""

    word: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.word, tuple):
            object.__setattr__(self, "word", tuple(self.word))

    @property
    def depth(self) -> int:
        return len(self.word)

    @property
    def is_root(self) -> bool:
        return not self.word

    def parent(self) -> "Vertex":
        return parent(self)

    def child(self, i: int) -> "Vertex":
        return Vertex(self.word + (i,))

    def __str__(self) -> str:
        return format_vertex(self)

    def __repr__(self) -> str:
        return f"Vertex({format_vertex(self)!r})"


ROOT = Vertex(())


def level_size(params: TreeParams, n: int) -> int:
    """Number of vertices at distance ``n`` from the root.

    >>> level_size(TreeParams(3), 4)
    108
    """
    params.check_depth(n)
    if n == 0:
        return 1
    return (params.q + 1) * params.q ** (n - 1)


def ball_size(params: TreeParams, n: int) -> int:
    """Number of vertices with ``|v| <= n``."""
    return sum(level_size(params, k) for k in range(n + 1))


def level_offset(params: TreeParams, n: int) -> int:
    """Position of the first level-``n`` vertex in breadth-first order."""
    return sum(level_size(params, k) for k in range(n))


def parent(v: Vertex) -> Vertex:
    if v.is_root:
        raise DomainError("the root has no parent")
    return Vertex(v.word[:-1])


def children(params: TreeParams, v: Vertex) -> list[Vertex]:
    k = params.q + 1 if v.is_root else params.q
    return [v.child(i) for i in range(k)]


def neighbors(params: TreeParams, v: Vertex) -> list[Vertex]:
    """Parent (if any) followed by the children, in lexicographic order."""
    out = [] if v.is_root else [parent(v)]
    return out + children(params, v)


def adjacent(v: Vertex, w: Vertex) -> bool:
    if v.depth == w.depth + 1:
        return v.word[:-1] == w.word
    if w.depth == v.depth + 1:
        return w.word[:-1] == v.word
    return False


def distance(v: Vertex, w: Vertex) -> int:
    common = 0
    for a, b in zip(v.word, w.word):
        if a != b:
            break
        common += 1
    return v.depth + w.depth - 2 * common


def vertex_index(params: TreeParams, v: Vertex) -> int:
    """Lexicographic rank of ``v`` within its level."""
    idx = 0
    for a in v.word[1:]:
        idx = idx * params.q + a
    if v.word:
        idx += v.word[0] * params.q ** (v.depth - 1)
    return idx


def vertex_at(params: TreeParams, n: int, index: int) -> Vertex:
    """Inverse of :func:`vertex_index`."""
    size = level_size(params, n)
    if not 0 <= index < size:
        raise DomainError(f"index {index} out of range for level {n} (size {size})")
    if n == 0:
        return ROOT
    q = params.q
    rest = []
    for _ in range(n - 1):
        index, a = divmod(index, q)
        rest.append(a)
    return Vertex((index,) + tuple(reversed(rest)))


def enumerate_level(params: TreeParams, n: int) -> list[Vertex]:
    """All level-``n`` vertices, in lexicographic word order."""
    return list(iter_level(params, n))


def iter_level(params: TreeParams, n: int) -> Iterator[Vertex]:
    params.check_depth(n)
    if n == 0:
        yield ROOT
        return
    q = params.q
    for first in range(q + 1):
        for rest in np.ndindex(*([q] * (n - 1))):
            yield Vertex((first,) + tuple(int(a) for a in rest))


def iter_ball(params: TreeParams, n: int) -> Iterator[Vertex]:
    for k in range(n + 1):
        yield from iter_level(params, k)


def parent_indices(params: TreeParams, n: int, idx: np.ndarray) -> np.ndarray:
    """Within-level indices of the parents of level-``n`` vertices ``idx``."""
    if n < 1:
        raise DomainError("the root has no parent")
    if n == 1:
        return np.zeros_like(idx)
    return idx // params.q


def child_indices(params: TreeParams, n: int, idx: np.ndarray, c: int | np.ndarray) -> np.ndarray:
    """Within-level indices (at level ``n+1``) of child ``c`` of level-``n`` vertices."""
    if n == 0:
        return np.zeros_like(idx) + c
    return idx * params.q + c


def format_vertex(v: Vertex) -> str:
    if v.is_root:
        return "o"
    return ".".join(str(a) for a in v.word)


def parse_vertex(text: str, params: TreeParams) -> Vertex:
    """Parse ``"o"`` or dot-separated decimal letters, checking ranges for ``q``.

    >>> parse_vertex("2.1.0", TreeParams(2))
    Vertex('2.1.0')
    """
    if not isinstance(text, str):
        raise VertexFormatError(f"vertex must be a string, got {type(text).__name__}")
    s = text.strip()
    if s == "o":
        return ROOT
    if not s:
        raise VertexFormatError("empty vertex text")
    letters = []
    for pos, part in enumerate(s.split(".")):
        if not part.isdigit():
            raise VertexFormatError(f"malformed vertex {text!r}: letter {part!r}")
        a = int(part)
        limit = params.q + 1 if pos == 0 else params.q
        if a >= limit:
            raise VertexFormatError(
                f"vertex {text!r}: letter {a} at position {pos} must be < {limit} for q={params.q}"
            )
        letters.append(a)
    v = Vertex(tuple(letters))
    params.check_depth(v.depth)
    return v


def lex_least(params: TreeParams, n: int) -> Vertex:
    """The lexicographically least level-``n`` vertex, ``0.0...0``."""
    params.check_depth(n)
    return Vertex((0,) * n)


def default_chosen(params: TreeParams, depth: int) -> list[Vertex]:
    return [lex_least(params, n) for n in range(depth + 1)]


def check_chosen(params: TreeParams, chosen: Sequence[Vertex]) -> None:
    for n, v in enumerate(chosen):
        if v.depth != n or not params.is_valid(v):
            raise DomainError(f"chosen vertex for level {n} is {v}, which is not a level-{n} vertex")
