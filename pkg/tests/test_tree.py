import networkx as nx
import pytest

from hardytree.errors import DepthCapError, DomainError, VertexFormatError
from hardytree.tree import (
    ROOT,
    TreeParams,
    Vertex,
    adjacent,
    ball_size,
    children,
    distance,
    enumerate_level,
    format_vertex,
    iter_ball,
    level_size,
    parent,
    parse_vertex,
    vertex_at,
    vertex_index,
)

from conftest import bfs_tree


def test_level_size_examples():
    assert level_size(TreeParams(1), 5) == 2
    assert level_size(TreeParams(2), 0) == 1
    # frozen from the BFS oracle below
    assert level_size(TreeParams(3), 4) == 108


@pytest.mark.parametrize("q", [1, 2, 3])
def test_level_sizes_match_bfs(q):
    g, label = bfs_tree(q, 5)
    dist = nx.single_source_shortest_path_length(g, 0)
    for n in range(6):
        assert sum(1 for d in dist.values() if d == n) == level_size(TreeParams(q), n)
        bfs_words = sorted(label[u] for u, d in dist.items() if d == n)
        assert [v.word for v in enumerate_level(TreeParams(q), n)] == bfs_words
    assert g.number_of_nodes() == ball_size(TreeParams(q), 5)


def test_enumerate_level_examples():
    assert enumerate_level(TreeParams(1), 1) == [Vertex((0,)), Vertex((1,))]
    lvl = enumerate_level(TreeParams(2), 2)
    assert len(lvl) == 6 and str(lvl[0]) == "0.0" and str(lvl[-1]) == "2.1"
    assert enumerate_level(TreeParams(2), 0) == [ROOT]


def test_depth_cap():
    p = TreeParams(2, depth_cap=4)
    with pytest.raises(DepthCapError):
        level_size(p, 5)
    with pytest.raises(DepthCapError):
        enumerate_level(p, 5)
    # exact big integers, no overflow
    assert level_size(TreeParams(7, depth_cap=40), 40) == 8 * 7 ** 39


def test_parent():
    assert parent(Vertex((2, 0, 1))) == Vertex((2, 0))
    assert parent(Vertex((0,))) == ROOT
    with pytest.raises(DomainError):
        parent(ROOT)


def test_children_round_trip(params):
    for n in range(4):
        for v in enumerate_level(params, n):
            kids = children(params, v)
            assert len(kids) == (params.q + 1 if v.is_root else params.q)
            for c in kids:
                assert parent(c) == v and adjacent(c, v) and distance(c, v) == 1


def test_children_appear_in_next_level(params):
    nxt = set(enumerate_level(params, 4))
    for v in enumerate_level(params, 3):
        assert sum(1 for w in nxt if parent(w) == v) == params.q


def test_parse_format():
    p = TreeParams(2)
    assert parse_vertex("o", p) == ROOT
    assert parse_vertex("2.1.0", p) == Vertex((2, 1, 0))
    for bad in ["2.2.0", "3", "", "a.b", "1..0", "-1", "o.1"]:
        with pytest.raises(VertexFormatError):
            parse_vertex(bad, p)


def test_parse_format_round_trip_depth8():
    p = TreeParams(2)
    for v in iter_ball(p, 8):
        assert parse_vertex(format_vertex(v), p) == v


def test_index_round_trip(params):
    for n in range(5):
        for i, v in enumerate(enumerate_level(params, n)):
            assert vertex_index(params, v) == i
            assert vertex_at(params, n, i) == v


def test_invalid_q():
    for q in [0, -1, 1.5, True]:
        with pytest.raises(DomainError):
            TreeParams(q)
