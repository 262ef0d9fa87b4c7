from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from semitree.tree import (
    ROOT,
    TreeError,
    TreeParams,
    TruncatedTree,
    distance,
    format_vertex,
    neighbors,
    parse_vertex,
    sphere_around,
    sphere_count,
    sphere_size,
    sphere_size_around,
)

P23 = TreeParams(2, 3)


def words(params, max_level):
    @st.composite
    def build(draw):
        n = draw(st.integers(0, max_level))
        return tuple(draw(st.integers(0, params.out_degree(i) - 1)) for i in range(n))

    return build()


def test_sphere_sizes_23():
    assert [sphere_size(P23, n) for n in range(5)] == [1, 3, 9, 18, 54]


@pytest.mark.parametrize("qp,qm", [(2, 3), (3, 2), (2, 2), (4, 3)])
def test_sphere_size_matches_enumeration(qp, qm):
    params = TreeParams(qp, qm)
    tree = TruncatedTree(params, 6)
    for n in range(7):
        assert len(tree.sphere(n)) == sphere_size(params, n)


@pytest.mark.parametrize("bad", [(1, 3), (2, 0), (2.0, 3), (True, 3)])
def test_params_rejected(bad):
    with pytest.raises(TreeError):
        TreeParams(*bad)


def test_degrees_alternate():
    assert [P23.degree(n) for n in range(4)] == [2, 3, 2, 3]
    assert [P23.out_degree(n) for n in range(4)] == [3, 3, 2, 3]


def test_neighbors_count_is_degree_plus_one():
    tree = TruncatedTree(P23, 5)
    for v in tree.vertices(max_level=4):
        assert len(tree.neighbors(v)) == P23.degree(len(v)) + 1


def test_boundary_neighbors_rejected():
    tree = TruncatedTree(P23, 3)
    with pytest.raises(TreeError):
        tree.neighbors((0, 0, 0))


def test_word_validation():
    assert P23.check_word((2, 1, 1)) == (2, 1, 1)
    with pytest.raises(TreeError):
        P23.check_word((0, 0, 2))  # level-2 vertices have q+ = 2 children


def test_vertex_round_trip():
    assert format_vertex(ROOT) == ""
    assert parse_vertex("0/2/1", P23) == (0, 2, 1)
    assert parse_vertex("") == ROOT


@given(words(P23, 7), words(P23, 7))
def test_distance_matches_bfs(u, w):
    # breadth-first search over explicit neighbor lists
    seen = {u: 0}
    frontier = [u]
    while w not in seen:
        nxt = []
        for x in frontier:
            for y in neighbors(P23, x):
                if y not in seen and len(y) <= 8:
                    seen[y] = seen[x] + 1
                    nxt.append(y)
        frontier = nxt
    assert distance(u, w) == seen[w]


@settings(max_examples=40)
@given(words(TreeParams(3, 2), 5), st.integers(0, 4))
def test_sphere_around_sizes(v, k):
    params = TreeParams(3, 2)
    sphere = list(sphere_around(params, v, k))
    assert len(sphere) == len(set(sphere)) == sphere_size_around(params, v, k)
    assert all(distance(v, w) == k for w in sphere)


@pytest.mark.parametrize("qp,qm", [(2, 3), (3, 2)])
def test_sphere_count_matches_enumeration(qp, qm):
    params = TreeParams(qp, qm)
    tree = TruncatedTree(params, 4)
    for v in tree.vertices(max_level=4):
        for k in range(5):
            levels = [len(w) for w in sphere_around(params, v, k)]
            for m in range(len(v) + k + 1):
                assert levels.count(m) == sphere_count(params, len(v), k, m)


def test_truncated_sphere_around_window():
    tree = TruncatedTree(P23, 4)
    assert len(tree.sphere_around((0, 0), 2)) == sphere_size_around(P23, (0, 0), 2)
    with pytest.raises(TreeError):
        tree.sphere_around((0, 0), 3)


def test_distance_is_a_metric_on_window():
    verts = list(TruncatedTree(P23, 3).vertices())
    for a, b in combinations(verts[:30], 2):
        assert distance(a, b) == distance(b, a) > 0


@pytest.mark.parametrize("qp,qm", [(2, 3), (3, 2), (4, 4)])
def test_even_sphere_sizes_are_constant_multiple_of_power(qp, qm):
    # a constant factor cannot change any l^p ratio test
    params = TreeParams(qp, qm)
    for n in range(1, 8):
        assert sphere_size(params, 2 * n) * qp == (qp + 1) * (qp * qm) ** n


def test_truncated_size():
    tree = TruncatedTree(P23, 4)
    assert tree.size == 1 + 3 + 9 + 18 + 54 == len(list(tree.vertices()))
