import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist

from ftspanner.metric import (
    MetricError,
    from_coords,
    from_matrix,
    leq,
    load_points,
    log5_ceil,
    min_distance,
    normalize,
    triangle_violations,
)

coords_st = st.lists(
    st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=2, max_size=25, unique=True
)


def test_distances_match_scipy():
    pts = np.random.default_rng(3).normal(size=(40, 3)) * 50
    m = from_coords(pts)
    assert np.allclose(m.dist, cdist(pts, pts), rtol=1e-12, atol=1e-9)


def test_multiscale_coordinates_keep_precision():
    pts = np.array([[0.0, 0.0], [1e10, 0.0], [1e10 + 1.0, 0.0]])
    m = from_coords(pts)
    assert m.dist[1, 2] == 1.0


def test_load_points_csv_and_comments(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("# header\n0,0\n\n3 4  # trailing\n6,8\n")
    m = load_points(f)
    assert m.n == 3 and m.dist[0, 1] == 5.0 and m.dist[0, 2] == 10.0


def test_load_points_rejects_ragged(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("0,0\n1,2,3\n")
    with pytest.raises(MetricError, match="inconsistent"):
        load_points(f)


def test_load_matrix(tmp_path):
    f = tmp_path / "m.txt"
    f.write_text("3\n0 1 2\n1 0 1.5\n2 1.5 0\n")
    m = load_points(f, "matrix")
    assert m.n == 3 and m.dist[1, 2] == 1.5


@pytest.mark.parametrize(
    "mat, msg",
    [
        ([[0, 1], [2, 0]], "asymmetric"),
        ([[0, -1], [-1, 0]], "negative"),
        ([[1, 1], [1, 0]], "diagonal"),
        ([[0, 0], [0, 0]], "distance 0"),
        ([[0, float("nan")], [float("nan"), 0]], "NaN"),
        ([[0, 1, 2], [1, 0, 1]], "square"),
    ],
)
def test_matrix_validation(mat, msg):
    with pytest.raises(MetricError, match=msg):
        from_matrix(mat)


def test_duplicate_points_rejected():
    with pytest.raises(MetricError, match="duplicate"):
        from_coords([[0, 0], [1, 1], [0, 0]])


def test_normalize_singleton_and_pair():
    one = normalize(from_coords([[5.0, 5.0]]))
    assert one.n == 1 and one.scale == 1.0
    two = normalize(from_coords([[0.0], [4.0]]))
    assert two.dist[0, 1] == 1.0 and two.scale == 4.0


@settings(max_examples=40, deadline=None)
@given(coords_st)
def test_normalize_minimum_is_one(pts):
    try:
        m = from_coords(pts)
    except MetricError:
        return
    nm = normalize(m)
    assert math.isclose(min_distance(nm), 1.0, rel_tol=1e-12)
    assert math.isclose(nm.diameter() * nm.scale, m.diameter(), rel_tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(coords_st)
def test_mst_weight_matches_scipy(pts):
    try:
        m = normalize(from_coords(pts))
    except MetricError:
        return
    # scipy reads dense zeros as missing edges, so compare on normalized inputs
    ref = minimum_spanning_tree(m.dist).sum()
    assert math.isclose(m.mst_weight(), ref, rel_tol=1e-9)


def test_mst_numpy_fallback(monkeypatch):
    m = from_coords(np.random.default_rng(1).random((30, 2)))
    fast = m.mst_weight()
    monkeypatch.setenv("FTSPAN_NUMBA", "0")
    m2 = from_coords(m.coords)
    assert math.isclose(m2.mst_weight(), fast, rel_tol=1e-12)


def test_triangle_violations():
    good = from_coords(np.random.default_rng(2).random((20, 2)))
    assert triangle_violations(good) == []
    bad = from_matrix([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    assert (0, 1, 2) in triangle_violations(bad)


@pytest.mark.parametrize("x, want", [(0.5, 0), (1, 0), (5, 1), (5.0000001, 2), (25, 2), (126, 4)])
def test_log5_ceil(x, want):
    assert log5_ceil(x) == want


def test_leq_tolerance():
    assert leq(10.0 * (1 + 1e-12), 10.0)
    assert not leq(10.001, 10.0)
