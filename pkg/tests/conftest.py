import sys

import networkx as nx
import numpy as np
import pytest

from hardytree.tree import TreeParams


def bfs_tree(q: int, depth: int) -> tuple[nx.Graph, dict]:
    """Truncated tree grown node by node, independent of the word arithmetic."""
    g = nx.Graph()
    g.add_node(0)
    label = {0: ()}
    frontier, nxt = [0], 1
    for d in range(depth):
        new = []
        for u in frontier:
            for c in range(q + 1 if d == 0 else q):
                g.add_edge(u, nxt)
                label[nxt] = label[u] + (c,)
                new.append(nxt)
                nxt += 1
        frontier = new
    return g, label


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[1, 2, 3], ids=lambda q: f"q{q}")
def params(request):
    return TreeParams(request.param)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
