import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ftspanner import build_net_tree, default_gamma, from_coords, normalize
from ftspanner.metric import from_matrix
from ftspanner.nettree import (
    base_path_weights,
    base_spanner_path,
    build_nets,
    connecting_level,
    path_weight,
)
from ftspanner.verify import base_spanner_stretch

from conftest import rng_points


def check_net_invariants(t):
    d = t.metric.dist
    assert sorted(t.levels[0]) == list(range(t.metric.n))
    assert len(t.levels[-1]) == 1
    for i in range(1, t.top + 1):
        cur, prev = t.levels[i], t.levels[i - 1]
        assert set(cur) <= set(prev)
        for a, b in itertools.combinations(cur, 2):
            assert d[a, b] > 5.0**i
        for p in prev:
            par = t.parent[(p, i - 1)]
            assert par[1] == i and d[p, par[0]] <= 3.0 * 5.0**i * (1 + 1e-12)
            if p in cur:
                assert par == (p, i)
    for x in t.nodes():
        far = [q for q in t.descendants(x) if d[x[0], q] > 4.0 * 5.0 ** x[1] * (1 + 1e-12)]
        assert not far


def test_singleton():
    t = build_net_tree(from_coords([[1.0, 2.0]]), 400)
    assert t.top == 0 and t.nodes() == [(0, 0)]
    assert t.cross_edges == [[]]
    assert t.xi == 0


def test_four_point_nets(four_points):
    t = build_nets(four_points)
    assert t.levels == [[0, 1, 2, 3], [0, 3], [0]]
    assert t.parent[(1, 0)] == (0, 1) and t.parent[(2, 0)] == (0, 1)
    assert t.parent[(3, 0)] == (3, 1)
    assert t.parent[(0, 1)] == (0, 2) and t.parent[(3, 1)] == (0, 2)


def test_four_point_cross_edges(four_points):
    t = build_net_tree(four_points, 400)
    assert len(t.cross_edges[0]) == 6
    assert t.cross_edges[1] == [(0, 3)]
    assert sum(map(len, t.cross_edges)) == 7


def test_four_point_base_path(four_points):
    t = build_net_tree(four_points, 400)
    assert base_spanner_path(t, 1, 3) == [(1, 0), (3, 0)]
    assert connecting_level(t, 1, 3) == 0


def test_random_invariants_200():
    t = build_net_tree(rng_points(200, seed=5), default_gamma(0.5))
    check_net_invariants(t)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 1000), st.sampled_from([1, 2, 3]))
def test_net_invariants_property(n, seed, dim):
    t = build_nets(rng_points(n, seed, dim))
    check_net_invariants(t)


def test_cross_edge_weights_bounded():
    t = build_net_tree(rng_points(120, seed=2), 50.0)
    d = t.metric.dist
    for i, edges in enumerate(t.cross_edges):
        for a, b in edges:
            assert d[a, b] <= 50.0 * 5.0**i * (1 + 1e-9)
            assert t.has_cross_edge(a, b, i) and t.has_cross_edge(b, a, i)


def test_descendants_partition_leaves():
    t = build_nets(rng_points(80, seed=9))
    for i in range(t.top + 1):
        sets = [t.descendants(x) for x in t.nodes(i)]
        assert sum(map(len, sets)) == 80
        assert frozenset().union(*sets) == frozenset(range(80))


def test_path_weights_match_explicit_paths():
    t = build_net_tree(rng_points(40, seed=4), default_gamma(1.0))
    w = base_path_weights(t)
    for p, q in [(0, 1), (3, 17), (39, 5), (12, 30)]:
        assert np.isclose(w[p, q], path_weight(t, base_spanner_path(t, p, q)))


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0])
def test_base_spanner_stretch_random(eps):
    t = build_net_tree(rng_points(150, seed=11), default_gamma(eps))
    worst, _ = base_spanner_stretch(t)
    assert worst <= 1 + eps + 1e-9


def test_base_spanner_stretch_multiscale():
    from ftspanner.instances import multiscale_points

    t = build_net_tree(multiscale_points(200, seed=1), default_gamma(0.5))
    worst, _ = base_spanner_stretch(t)
    assert worst <= 1.5 + 1e-9


def test_default_gamma():
    assert default_gamma(0.5) == 1200 and default_gamma(10) == 395
    with pytest.raises(ValueError):
        default_gamma(0)


def test_matrix_metric_tree():
    m = normalize(from_matrix([[0, 2, 9], [2, 0, 8], [9, 8, 0]]))
    t = build_net_tree(m, 400)
    check_net_invariants(t)
