"""Functions on the truncated tree and their T_p norms.

A :class:`TreeFunction` is defined on every vertex with ``|v| <= depth`` and
undefined beyond.  It is stored either densely (one flat complex array in
breadth-first, lexicographic order) or sparsely (a support dict with implicit
zeros).  Both forms give identical level means.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, Mapping

import numpy as np

from .errors import CoverageError, DomainError, FileFormatError, HardyTreeError
from .tree import (
    ROOT,
    TreeParams,
    Vertex,
    format_vertex,
    level_offset,
    level_size,
    parse_vertex,
    vertex_at,
    vertex_index,
)

INF = math.inf


def as_exponent(p: float | str) -> float:
    """Normalize an exponent: a real ``p >= 1`` or infinity (``"inf"`` accepted)."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "∞"):
            return INF
        try:
            p = float(s)
        except ValueError:
            raise DomainError(f"exponent must be a number >= 1 or 'inf', got {p!r}") from None
    p = float(p)
    if math.isnan(p) or p < 1:
        raise DomainError(f"exponent must satisfy p >= 1, got {p}")
    return p


def format_exponent(p: float) -> str:
    return "inf" if p == INF else f"{p:g}"


def _finite_exponent(p: float | str) -> float:
    p = as_exponent(p)
    if p == INF:
        raise DomainError("this operation needs a finite exponent")
    return p


class TreeFunction:
    """Complex-valued function on the vertices with ``|v| <= depth``."""

    __slots__ = ("params", "depth", "_flat", "_support")

    def __init__(self, params: TreeParams, depth: int, *, flat=None, support=None):
        params.check_depth(depth)
        if (flat is None) == (support is None):
            raise HardyTreeError("give exactly one of flat= or support=")
        self.params = params
        self.depth = depth
        self._flat: np.ndarray | None = None
        self._support: dict[Vertex, complex] | None = None
        if flat is not None:
            arr = np.asarray(flat, dtype=complex).ravel()
            expected = level_offset(params, depth + 1)
            if arr.shape != (expected,):
                raise HardyTreeError(f"dense function of depth {depth} needs {expected} values, got {arr.size}")
            arr.setflags(write=False)
            self._flat = arr
        else:
            sup: dict[Vertex, complex] = {}
            for v, val in support.items():
                if not params.is_valid(v):
                    raise DomainError(f"{v} is not a vertex for q={params.q}")
                if v.depth > depth:
                    raise CoverageError(f"support vertex {v} lies beyond depth {depth}")
                val = complex(val)
                if val != 0:
                    sup[v] = val
            self._support = sup

    # construction

    @classmethod
    def dense(cls, params: TreeParams, depth: int, values) -> "TreeFunction":
        """From a flat array, or a sequence of per-level arrays."""
        if isinstance(values, (list, tuple)) and values and np.ndim(values[0]) == 1:
            values = np.concatenate([np.asarray(a, dtype=complex) for a in values])
        return cls(params, depth, flat=values)

    @classmethod
    def sparse(cls, params: TreeParams, depth: int, support: Mapping[Vertex, complex]) -> "TreeFunction":
        return cls(params, depth, support=dict(support))

    @classmethod
    def zeros(cls, params: TreeParams, depth: int) -> "TreeFunction":
        return cls(params, depth, support={})

    @classmethod
    def constant(cls, params: TreeParams, depth: int, c: complex) -> "TreeFunction":
        return cls(params, depth, flat=np.full(level_offset(params, depth + 1), c, dtype=complex))

    @classmethod
    def indicator(cls, params: TreeParams, w: Vertex, depth: int | None = None, value: complex = 1.0) -> "TreeFunction":
        return cls(params, w.depth if depth is None else depth, support={w: value})

    # access

    @property
    def is_sparse(self) -> bool:
        return self._support is not None

    def __call__(self, v: Vertex) -> complex:
        if v.depth > self.depth:
            raise CoverageError(f"{v} lies beyond the function depth {self.depth}")
        if self._support is not None:
            return self._support.get(v, 0j)
        return complex(self._flat[level_offset(self.params, v.depth) + vertex_index(self.params, v)])

    def level(self, n: int) -> np.ndarray:
        """Dense values on level ``n`` in enumeration order."""
        self._check_level(n)
        if self._flat is not None:
            start = level_offset(self.params, n)
            return self._flat[start:start + level_size(self.params, n)]
        out = np.zeros(level_size(self.params, n), dtype=complex)
        for v, val in self._support.items():
            if v.depth == n:
                out[vertex_index(self.params, v)] = val
        return out

    def level_support(self, n: int) -> np.ndarray:
        """Values on level ``n``; may omit zeros (for sparse functions)."""
        self._check_level(n)
        if self._flat is not None:
            return self.level(n)
        return np.array([val for v, val in self._support.items() if v.depth == n], dtype=complex)

    def items(self) -> Iterable[tuple[Vertex, complex]]:
        """Nonzero values, in canonical order."""
        if self._support is not None:
            for v in sorted(self._support, key=lambda u: (u.depth, u.word)):
                yield v, self._support[v]
            return
        for n in range(self.depth + 1):
            row = self.level(n)
            for i in np.flatnonzero(row):
                yield vertex_at(self.params, n, int(i)), complex(row[i])

    def values_at(self, levels: np.ndarray, indices: np.ndarray) -> np.ndarray:
        """Vectorized lookup of ``f`` at ``(level, index)`` pairs."""
        levels = np.asarray(levels)
        if levels.size and int(levels.max()) > self.depth:
            raise CoverageError(f"lookup at level {int(levels.max())} beyond the function depth {self.depth}")
        if self._flat is not None:
            offsets = np.array([level_offset(self.params, n) for n in range(self.depth + 1)], dtype=np.int64)
            return self._flat[offsets[levels] + indices]
        out = np.zeros(levels.shape, dtype=complex)
        if not self._support:
            return out
        offsets = np.array([level_offset(self.params, n) for n in range(self.depth + 1)], dtype=np.int64)
        keys = np.array(
            [offsets[v.depth] + vertex_index(self.params, v) for v in self._support], dtype=np.int64
        )
        vals = np.array(list(self._support.values()), dtype=complex)
        order = np.argsort(keys)
        keys, vals = keys[order], vals[order]
        probe = offsets[levels] + np.asarray(indices, dtype=np.int64)
        pos = np.clip(np.searchsorted(keys, probe), 0, keys.size - 1)
        hit = keys[pos] == probe
        out[hit] = vals[pos[hit]]
        return out

    def to_dense(self) -> "TreeFunction":
        if self._flat is not None:
            return self
        flat = np.zeros(level_offset(self.params, self.depth + 1), dtype=complex)
        for v, val in self._support.items():
            flat[level_offset(self.params, v.depth) + vertex_index(self.params, v)] = val
        return TreeFunction(self.params, self.depth, flat=flat)

    def to_sparse(self) -> "TreeFunction":
        if self._support is not None:
            return self
        return TreeFunction(self.params, self.depth, support=dict(self.items()))

    def with_depth(self, depth: int) -> "TreeFunction":
        """Extend with zeros (or cut) to a new depth."""
        if self._support is not None:
            return TreeFunction(self.params, depth, support={v: x for v, x in self._support.items() if v.depth <= depth})
        n_new = level_offset(self.params, depth + 1)
        flat = np.zeros(n_new, dtype=complex)
        k = min(n_new, self._flat.size)
        flat[:k] = self._flat[:k]
        return TreeFunction(self.params, depth, flat=flat)

    def _check_level(self, n: int) -> None:
        if n < 0 or n > self.depth:
            raise CoverageError(f"level {n} outside the function domain 0..{self.depth}")

    # arithmetic (needed for norm-axiom checks)

    def _coerce(self, other: "TreeFunction") -> None:
        if other.params != self.params or other.depth != self.depth:
            raise DomainError("functions live on different truncated trees")

    def __add__(self, other: "TreeFunction") -> "TreeFunction":
        self._coerce(other)
        if self.is_sparse and other.is_sparse:
            out = dict(self._support)
            for v, x in other._support.items():
                out[v] = out.get(v, 0j) + x
            return TreeFunction(self.params, self.depth, support=out)
        return TreeFunction(self.params, self.depth, flat=self.to_dense()._flat + other.to_dense()._flat)

    def __neg__(self) -> "TreeFunction":
        return self * -1

    def __sub__(self, other: "TreeFunction") -> "TreeFunction":
        return self + (-other)

    def __mul__(self, c: complex) -> "TreeFunction":
        c = complex(c)
        if self._support is not None:
            return TreeFunction(self.params, self.depth, support={v: c * x for v, x in self._support.items()})
        return TreeFunction(self.params, self.depth, flat=c * self._flat)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        kind = "sparse" if self.is_sparse else "dense"
        return f"TreeFunction(q={self.params.q}, depth={self.depth}, {kind})"


@dataclass
class NormReport:
    """Per-level means ``M_p(n, f)`` for ``n = 0..depth`` and their maximum."""

    p: float
    per_level: list[float]
    sup: float = field(init=False)
    argmax: int = field(init=False)

    def __post_init__(self) -> None:
        self.sup = max(self.per_level) if self.per_level else 0.0
        self.argmax = int(np.argmax(self.per_level)) if self.per_level else 0

    @property
    def attained_at_boundary(self) -> bool:
        """True when the sup sits at the deepest level, so truncation may hide a larger value."""
        return len(self.per_level) > 1 and self.argmax == len(self.per_level) - 1 and self.sup > 0

    def to_dict(self) -> dict:
        return {
            "p": format_exponent(self.p),
            "per_level": self.per_level,
            "sup": self.sup,
            "argmax_level": self.argmax,
            "attained_at_boundary": self.attained_at_boundary,
        }


def weight(params: TreeParams, w: Vertex) -> int:
    """Normalizing weight: 1 at the root, ``(q+1) q^(|w|-1)`` elsewhere."""
    if w.is_root:
        return 1
    return (params.q + 1) * params.q ** (w.depth - 1)


def mp_level_pow(f: TreeFunction, p: float, n: int) -> float:
    """``M_p(n, f)^p`` for finite ``p`` (avoids a root when callers want the p-th power)."""
    p = _finite_exponent(p)
    vals = np.abs(f.level_support(n))
    return float(np.sum(vals ** p)) / level_size(f.params, n)


def mp_level(f: TreeFunction, p: float | str, n: int) -> float:
    p = as_exponent(p)
    vals = np.abs(f.level_support(n))
    if p == INF:
        return float(vals.max()) if vals.size else 0.0
    if n == 0:
        return float(vals[0]) if vals.size else 0.0
    return mp_level_pow(f, p, n) ** (1.0 / p)


def tp_norm(f: TreeFunction, p: float | str) -> NormReport:
    p = as_exponent(p)
    return NormReport(p, [mp_level(f, p, n) for n in range(f.depth + 1)])


def norm(f: TreeFunction, p: float | str) -> float:
    return tp_norm(f, p).sup


def extremal_fw(params: TreeParams, w: Vertex, p: float | str, depth: int | None = None) -> TreeFunction:
    """Unit-norm test function ``(W(w) * indicator_w)^(1/p)``."""
    p = as_exponent(p)
    if p == INF:
        raise DomainError("f_w needs a finite p; for p = inf use the indicator of w, which has norm 1")
    return TreeFunction.indicator(params, w, depth, value=weight(params, w) ** (1.0 / p))


@dataclass
class GrowthReport:
    """Largest ratio ``|f(v)| / (W(v)^(1/p) ||f||)``; the growth estimate says it is at most 1."""

    max_ratio: float
    attained_at: Vertex
    norm: float


def growth_bound_check(f: TreeFunction, p: float | str) -> GrowthReport:
    p = _finite_exponent(p)
    nrm = norm(f, p)
    if nrm == 0:
        raise DomainError("growth ratio is undefined for the zero function")
    best, at = -1.0, ROOT
    if f.is_sparse:
        for v, val in f.items():
            r = abs(val) / (weight(f.params, v) ** (1.0 / p) * nrm)
            if r > best:
                best, at = r, v
        if best < 0:
            best = 0.0
        return GrowthReport(best, at, nrm)
    for n in range(f.depth + 1):
        w = 1 if n == 0 else level_size(f.params, n)
        ratios = np.abs(f.level(n)) / (w ** (1.0 / p) * nrm)
        i = int(np.argmax(ratios))
        if ratios[i] > best:
            best, at = float(ratios[i]), vertex_at(f.params, n, i)
    return GrowthReport(best, at, nrm)


# -- JSON function files: {"q": int, "depth": int, "entries": [{"v", "re", "im"}, ...]}


def function_to_json(f: TreeFunction) -> dict:
    return {
        "q": f.params.q,
        "depth": f.depth,
        "entries": [{"v": format_vertex(v), "re": val.real, "im": val.imag} for v, val in f.items()],
    }


def function_from_json(data: dict, depth_cap: int | None = None) -> TreeFunction:
    try:
        q, depth, entries = data["q"], data["depth"], data["entries"]
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"function file needs keys q, depth, entries ({exc})") from None
    if not isinstance(q, int) or not isinstance(depth, int) or not isinstance(entries, list):
        raise FileFormatError("q and depth must be integers and entries a list")
    params = TreeParams(q) if depth_cap is None else TreeParams(q, depth_cap)
    support: dict[Vertex, complex] = {}
    for k, e in enumerate(entries):
        try:
            v = parse_vertex(e["v"], params)
            val = complex(float(e.get("re", 0.0)), float(e.get("im", 0.0)))
        except HardyTreeError as exc:
            raise FileFormatError(f"entry {k}: {exc}") from None
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise FileFormatError(f"entry {k}: malformed ({exc!r})") from None
        if v.depth > depth:
            raise FileFormatError(f"entry {k}: vertex {e['v']} deeper than declared depth {depth}")
        if v in support:
            raise FileFormatError(f"entry {k}: duplicate vertex {e['v']}")
        support[v] = val
    return TreeFunction(params, depth, support=support)


def load_function(path: str | PathLike) -> TreeFunction:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return function_from_json(data)


def save_function(f: TreeFunction, path: str | PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(function_to_json(f), fh, indent=1)
