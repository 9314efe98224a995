"""Seeded random functions for the property checks."""

from __future__ import annotations

import numpy as np

from .hardy import TreeFunction, weight
from .tree import TreeParams, level_offset, level_size, vertex_at


def random_function(
    params: TreeParams,
    depth: int,
    rng: np.random.Generator,
    p: float = 2.0,
    kind: str | None = None,
) -> TreeFunction:
    """A random complex function, either dense or supported on a few vertices.

    Sparse samples scale their values by ``W(v)^(1/p)`` so the growth ratio
    gets close to its bound; dense samples have i.i.d. complex entries.
    """
    if kind is None:
        kind = "sparse" if rng.random() < 0.5 else "dense"
    size = level_offset(params, depth + 1)
    if kind == "dense":
        vals = rng.normal(size=size) + 1j * rng.normal(size=size)
        vals[rng.random(size) < 0.3] = 0
        return TreeFunction(params, depth, flat=vals)
    support = {}
    for _ in range(int(rng.integers(1, 6))):
        n = int(rng.integers(0, depth + 1))
        v = vertex_at(params, n, int(rng.integers(0, level_size(params, n))))
        mag = weight(params, v) ** (1.0 / p) * rng.uniform(0.1, 1.0)
        support[v] = mag * np.exp(1j * rng.uniform(0, 2 * np.pi))
    return TreeFunction.sparse(params, depth, support)
