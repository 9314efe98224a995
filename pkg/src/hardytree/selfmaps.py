"""Self maps of the tree and the statistics they induce.

Every :class:`SelfMap` declares a ``coverage_depth``: it is evaluable on the
ball ``|v| <= coverage_depth`` and refuses anything deeper.  Maps expose their
images one level at a time as ``(levels, indices)`` integer arrays, which is
what the counting function and the composition operator consume.  Built-in
maps produce those arrays in closed form; table-backed maps fill them from a
dict.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from os import PathLike
from typing import Callable, Sequence

import numpy as np

from .errors import CoverageError, DomainError, FileFormatError, HardyTreeError
from .tree import (
    ROOT,
    TreeParams,
    Vertex,
    adjacent,
    check_chosen,
    child_indices,
    default_chosen,
    format_vertex,
    iter_ball,
    iter_level,
    level_size,
    neighbors,
    parent_indices,
    parse_vertex,
    vertex_at,
    vertex_index,
)

LevelImages = Callable[[int], "tuple[np.ndarray, np.ndarray]"]


class SelfMap:
    """A vertex-to-vertex map known on the ball of radius ``coverage_depth``.

    Give either a per-vertex ``rule`` or a vectorized ``level_images(n)``
    returning the image levels and within-level indices of level ``n`` in
    enumeration order (or both, when they agree).
    """

    def __init__(
        self,
        params: TreeParams,
        coverage_depth: int,
        label: str,
        rule: Callable[[Vertex], Vertex] | None = None,
        level_images: LevelImages | None = None,
    ):
        if rule is None and level_images is None:
            raise HardyTreeError("a self map needs a rule or level_images")
        params.check_depth(coverage_depth)
        self.params = params
        self.coverage_depth = coverage_depth
        self.label = label
        self._rule = rule
        self._level_images = level_images
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def __call__(self, v: Vertex) -> Vertex:
        self._check_covered(v.depth, v)
        if not self.params.is_valid(v):
            raise DomainError(f"{v} is not a vertex for q={self.params.q}")
        if self._rule is not None:
            return self._rule(v)
        levels, idx = self.images(v.depth)
        i = vertex_index(self.params, v)
        return vertex_at(self.params, int(levels[i]), int(idx[i]))

    def images(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Image ``(levels, indices)`` of level ``n``, in enumeration order."""
        self._check_covered(n)
        if n not in self._cache:
            if self._level_images is not None:
                levels, idx = self._level_images(n)
            else:
                out = [self._rule(v) for v in iter_level(self.params, n)]
                levels = np.fromiter((w.depth for w in out), dtype=np.int64, count=len(out))
                idx = np.fromiter((vertex_index(self.params, w) for w in out), dtype=np.int64, count=len(out))
            levels = np.asarray(levels, dtype=np.int64)
            idx = np.asarray(idx, dtype=np.int64)
            levels.setflags(write=False)
            idx.setflags(write=False)
            self._cache[n] = (levels, idx)
        return self._cache[n]

    def image_depths(self, n: int) -> np.ndarray:
        return self.images(n)[0]

    def max_image_depth(self, n_max: int | None = None) -> int:
        """Largest ``|phi(v)|`` over the ball of radius ``n_max``."""
        n_max = self.coverage_depth if n_max is None else n_max
        return max(int(self.image_depths(n).max()) for n in range(n_max + 1))

    def _check_covered(self, n: int, v: Vertex | None = None) -> None:
        if n < 0:
            raise DomainError(f"level must be nonnegative, got {n}")
        if n > self.coverage_depth:
            what = f"vertex {v}" if v is not None else f"level {n}"
            raise CoverageError(f"{what} lies beyond coverage depth {self.coverage_depth} of map {self.label!r}")

    def as_table(self, depth: int | None = None) -> dict[Vertex, Vertex]:
        depth = self.coverage_depth if depth is None else depth
        return {v: self(v) for v in iter_ball(self.params, depth)}

    def __repr__(self) -> str:
        return f"SelfMap({self.label!r}, q={self.params.q}, coverage={self.coverage_depth})"


# -- built-ins


def identity_map(params: TreeParams, depth: int) -> SelfMap:
    def images(n):
        size = level_size(params, n)
        return np.full(size, n), np.arange(size)

    return SelfMap(params, depth, "identity", rule=lambda v: v, level_images=images)


def map_collapse_phi1(params: TreeParams, depth: int, chosen: Sequence[Vertex] | None = None) -> SelfMap:
    """Send every level-``n`` vertex to the chosen vertex ``v_n``."""
    chosen = list(default_chosen(params, depth) if chosen is None else chosen)
    if len(chosen) < depth + 1:
        raise DomainError(f"need a chosen vertex for each level 0..{depth}")
    check_chosen(params, chosen)
    targets = [vertex_index(params, v) for v in chosen]

    def images(n):
        size = level_size(params, n)
        return np.full(size, n), np.full(size, targets[n])

    return SelfMap(params, depth, "collapse", rule=lambda v: chosen[v.depth], level_images=images)


def map_parent_phi2(params: TreeParams, depth: int) -> SelfMap:
    """The root stays put; every other vertex goes to its parent."""

    def rule(v):
        return v if v.is_root else v.parent()

    def images(n):
        idx = np.arange(level_size(params, n))
        if n == 0:
            return np.zeros(1), np.zeros(1)
        return np.full(idx.size, n - 1), parent_indices(params, n, idx)

    return SelfMap(params, depth, "parent", rule=rule, level_images=images)


def map_child_phi3(params: TreeParams, depth: int, selector: int | Callable[[Vertex], int] = 0) -> SelfMap:
    """Send every vertex to one of its children, picked by ``selector``.

    An integer selector picks that child index everywhere; a callable
    receives the vertex and returns a child index.
    """
    if isinstance(selector, int):
        c = selector
        if not 0 <= c < params.q:
            raise DomainError(f"child index {c} invalid: non-root vertices have only {params.q} children")

        def images(n):
            idx = np.arange(level_size(params, n))
            return np.full(idx.size, n + 1), child_indices(params, n, idx, c)

        label = "child" if c == 0 else f"child:{c}"
        return SelfMap(params, depth, label, rule=lambda v: v.child(c), level_images=images)

    def rule(v):
        c = selector(v)
        limit = params.q + 1 if v.is_root else params.q
        if not 0 <= c < limit:
            raise DomainError(f"selector returned child index {c} for {v}")
        return v.child(c)

    return SelfMap(params, depth, "child:custom", rule=rule)


def map_halving_phi4(params: TreeParams, depth: int, chosen: Sequence[Vertex] | None = None) -> SelfMap:
    """``v_{2k} -> v_k`` for ``k >= 1``; every other vertex goes to the root."""
    chosen = list(default_chosen(params, depth) if chosen is None else chosen)
    if len(chosen) < depth + 1:
        raise DomainError(f"need a chosen vertex for each level 0..{depth}")
    check_chosen(params, chosen)
    targets = [vertex_index(params, v) for v in chosen]

    def rule(v):
        n = v.depth
        if n >= 2 and n % 2 == 0 and v == chosen[n]:
            return chosen[n // 2]
        return ROOT

    def images(n):
        size = level_size(params, n)
        levels, idx = np.zeros(size), np.zeros(size)
        if n >= 2 and n % 2 == 0:
            levels[targets[n]] = n // 2
            idx[targets[n]] = targets[n // 2]
        return levels, idx

    return SelfMap(params, depth, "halving", rule=rule, level_images=images)


def map_clamp(params: TreeParams, depth: int, radius: int) -> SelfMap:
    """Bounded map: send ``v`` to its ancestor at level ``min(|v|, radius)``."""
    if radius < 0:
        raise DomainError("clamp radius must be nonnegative")

    def images(n):
        idx = np.arange(level_size(params, n))
        m = n
        while m > radius:
            idx = parent_indices(params, m, idx)
            m -= 1
        return np.full(idx.size, m), idx

    return SelfMap(params, depth, f"clamp:{radius}", rule=lambda v: Vertex(v.word[:radius]), level_images=images)


class TableMap(SelfMap):
    """A self map given by an explicit table on a ball."""

    def __init__(self, params: TreeParams, table: dict[Vertex, Vertex], depth: int, label: str = "table"):
        for v in iter_ball(params, depth):
            if v not in table:
                raise FileFormatError(f"map table is not total: missing vertex {format_vertex(v)} (depth {depth})")
        for v, w in table.items():
            if not params.is_valid(v) or not params.is_valid(w):
                raise FileFormatError(f"entry {v} -> {w} is not a pair of vertices for q={params.q}")
        self.table = dict(table)
        super().__init__(params, depth, label, rule=self.table.__getitem__)


class PartialAutomorphism(TableMap):
    """Restriction of a tree automorphism to the ball of radius ``depth``."""

    def __init__(self, params: TreeParams, table: dict[Vertex, Vertex], depth: int, label: str = "automorphism"):
        super().__init__(params, table, depth, label)
        self.inverse = {w: v for v, w in self.table.items()}
        self.validate()

    def inverse_of(self, w: Vertex) -> Vertex:
        try:
            return self.inverse[w]
        except KeyError:
            raise CoverageError(f"{w} is not in the image of the covered ball") from None

    def validate(self) -> None:
        """Check injectivity and adjacency preservation both ways on the ball."""
        if len(self.inverse) != len(self.table):
            raise DomainError("map is not injective on the covered ball")
        for v, x in self.table.items():
            for u in neighbors(self.params, v):
                if u in self.table and not adjacent(x, self.table[u]):
                    raise DomainError(f"adjacency broken: {v} ~ {u} but images {x}, {self.table[u]} are not neighbours")
            for y in neighbors(self.params, x):
                if y in self.inverse and not adjacent(v, self.inverse[y]):
                    raise DomainError(f"adjacency not reflected: {x} ~ {y} but preimages are not neighbours")

    @property
    def root_image(self) -> Vertex:
        return self.table[ROOT]


def shift_automorphism(
    params: TreeParams,
    u: Vertex,
    depth: int,
    rng: random.Random | None = None,
) -> PartialAutomorphism:
    """Partial automorphism with ``o -> u``, built by breadth-first extension.

    Having mapped ``v`` to ``x``, the neighbours of ``v`` that are still
    unmapped (its children) are sent to the neighbours of ``x`` not yet used
    (everything but the image of ``v``'s parent), in lexicographic order, or
    in a random order when ``rng`` is given.
    """
    if not params.is_valid(u):
        raise DomainError(f"{u} is not a vertex for q={params.q}")
    params.check_depth(u.depth + depth)
    table: dict[Vertex, Vertex] = {ROOT: u}
    queue = deque([ROOT])
    while queue:
        v = queue.popleft()
        if v.depth == depth:
            continue
        x = table[v]
        used = None if v.is_root else table[v.parent()]
        free = [y for y in neighbors(params, x) if y != used]
        if rng is not None:
            rng.shuffle(free)
        kids = [v.child(i) for i in range(params.q + 1 if v.is_root else params.q)]
        for child, y in zip(kids, free, strict=True):
            table[child] = y
            queue.append(child)
    label = f"shift:{format_vertex(u)}"
    return PartialAutomorphism(params, table, depth, label)


# -- map files: {"q": int, "depth": int, "entries": [{"v": "2.0", "to": "0"}, ...]}


def map_to_json(phi: SelfMap, depth: int | None = None) -> dict:
    depth = phi.coverage_depth if depth is None else depth
    return {
        "q": phi.params.q,
        "depth": depth,
        "entries": [{"v": format_vertex(v), "to": format_vertex(w)} for v, w in phi.as_table(depth).items()],
    }


def map_from_json(data: dict, label: str = "file") -> TableMap:
    try:
        q, depth, entries = data["q"], data["depth"], data["entries"]
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"map file needs keys q, depth, entries ({exc})") from None
    if not isinstance(q, int) or not isinstance(depth, int) or not isinstance(entries, list):
        raise FileFormatError("q and depth must be integers and entries a list")
    params = TreeParams(q)
    table: dict[Vertex, Vertex] = {}
    for k, e in enumerate(entries):
        try:
            v, w = parse_vertex(e["v"], params), parse_vertex(e["to"], params)
        except HardyTreeError as exc:
            raise FileFormatError(f"entry {k}: {exc}") from None
        except (KeyError, TypeError, AttributeError) as exc:
            raise FileFormatError(f"entry {k}: malformed ({exc!r})") from None
        if v.depth > depth:
            raise FileFormatError(f"entry {k}: vertex {e['v']} deeper than declared depth {depth}")
        if v in table:
            raise FileFormatError(f"entry {k}: duplicate vertex {e['v']}")
        table[v] = w
    return TableMap(params, table, depth, label)


def map_from_file(path: str | PathLike, params: TreeParams | None = None) -> TableMap:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    phi = map_from_json(data, label=f"file:{path}")
    if params is not None and phi.params.q != params.q:
        raise FileFormatError(f"{path}: map is for q={phi.params.q}, expected q={params.q}")
    return phi


def random_table_map(params: TreeParams, depth: int, rng: random.Random, target_depth: int | None = None) -> TableMap:
    """Uniformly random targets among the vertices with ``|w| <= target_depth``."""
    target_depth = depth if target_depth is None else target_depth
    pool = list(iter_ball(params, target_depth))
    table = {v: rng.choice(pool) for v in iter_ball(params, depth)}
    return TableMap(params, table, depth, "random")


# -- counting and displacement


class CountingTable:
    """Preimage counts ``N(n, w)``: how many level-``n`` vertices map to ``w``."""

    def __init__(self, params: TreeParams, rows: list[tuple[np.ndarray, np.ndarray, np.ndarray]]):
        self.params = params
        self._rows = rows
        self._lookup = [
            {(int(m), int(i)): int(c) for m, i, c in zip(*row)} for row in rows
        ]

    @property
    def n_max(self) -> int:
        return len(self._rows) - 1

    def N(self, n: int, w: Vertex) -> int:
        if not 0 <= n <= self.n_max:
            raise CoverageError(f"level {n} not in counting table 0..{self.n_max}")
        return self._lookup[n].get((w.depth, vertex_index(self.params, w)), 0)

    def row(self, n: int) -> dict[Vertex, int]:
        """Nonzero counts of level ``n``, in canonical order of ``w``."""
        levels, idx, counts = self._rows[n]
        return {vertex_at(self.params, int(m), int(i)): int(c) for m, i, c in zip(levels, idx, counts)}

    def row_arrays(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._rows[n]

    def row_sum(self, n: int) -> int:
        return int(self._rows[n][2].sum())

    def level_maxima(self, n: int) -> dict[int, tuple[int, int]]:
        """For each image level ``m``: ``(max_w N(n, w), index of lex-least argmax)``."""
        levels, idx, counts = self._rows[n]
        out: dict[int, tuple[int, int]] = {}
        for m, i, c in zip(levels.tolist(), idx.tolist(), counts.tolist()):
            if m not in out or c > out[m][0]:
                out[m] = (c, i)
        return out

    def targets(self) -> set[Vertex]:
        return {w for n in range(self.n_max + 1) for w in self.row(n)}


def counting_function(phi: SelfMap, n_max: int | None = None) -> CountingTable:
    n_max = phi.coverage_depth if n_max is None else n_max
    phi._check_covered(n_max)
    rows = []
    for n in range(n_max + 1):
        levels, idx = phi.images(n)
        # (level, index) pairs sort in canonical order when packed this way
        stride = int(idx.max()) + 1
        keys = levels * stride + idx
        uniq, counts = np.unique(keys, return_counts=True)
        rows.append((uniq // stride, uniq % stride, counts))
    return CountingTable(phi.params, rows)


@dataclass(frozen=True)
class LevelDisplacement:
    """Statistics of ``|v| - |phi(v)|`` over one level."""

    level: int
    min: int
    max: int
    mean: float


def displacement_profile(phi: SelfMap, n_max: int | None = None) -> list[LevelDisplacement]:
    n_max = phi.coverage_depth if n_max is None else n_max
    phi._check_covered(n_max)
    out = []
    for n in range(n_max + 1):
        d = n - phi.image_depths(n)
        out.append(LevelDisplacement(n, int(d.min()), int(d.max()), float(d.mean())))
    return out


MAP_SPEC_HELP = "parent | child[:<index>] | collapse | halving | identity | clamp:<radius> | shift:<vertex> | file:<path>"


def map_from_spec(spec: str, params: TreeParams, depth: int) -> SelfMap:
    """Build a map from the CLI mini-language (see ``MAP_SPEC_HELP``)."""
    name, _, arg = spec.strip().partition(":")
    try:
        if name == "parent":
            return map_parent_phi2(params, depth)
        if name == "child":
            return map_child_phi3(params, depth, int(arg) if arg else 0)
        if name == "collapse":
            return map_collapse_phi1(params, depth)
        if name == "halving":
            return map_halving_phi4(params, depth)
        if name == "identity":
            return identity_map(params, depth)
        if name == "clamp":
            return map_clamp(params, depth, int(arg))
        if name == "shift":
            return shift_automorphism(params, parse_vertex(arg or "o", params), depth)
        if name == "file":
            phi = map_from_file(arg, params)
            if phi.coverage_depth < depth:
                raise CoverageError(f"{arg}: map covers depth {phi.coverage_depth} < requested depth {depth}")
            return phi
    except ValueError as exc:
        if isinstance(exc, HardyTreeError):
            raise
        raise DomainError(f"bad map spec {spec!r}: {exc}") from None
    raise DomainError(f"unknown map {spec!r}; expected {MAP_SPEC_HELP}")
