import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from ftspanner.kernels import all_pairs_shortest_paths, hop_bounded_min_hops, to_csr


def random_graph(n, m, seed):
    rng = np.random.default_rng(seed)
    us = rng.integers(0, n, size=m)
    vs = rng.integers(0, n, size=m)
    keep = us != vs
    us, vs = us[keep], vs[keep]
    ws = rng.uniform(0.5, 10.0, size=len(us))
    return us, vs, ws


def scipy_apsp(n, us, vs, ws, alive):
    mat = np.full((n, n), np.inf)
    for u, v, w in zip(us, vs, ws):
        if alive[u] and alive[v]:
            mat[u, v] = min(mat[u, v], w)
            mat[v, u] = min(mat[v, u], w)
    g = csr_matrix(np.where(np.isfinite(mat), mat, 0.0))
    out = shortest_path(g, directed=False)
    out[~alive, :] = np.inf
    out[:, ~alive] = np.inf
    return out


def brute_hops(n, us, vs, ws, budget, hmax):
    """Dynamic programme over (hops, vertex) per source, plain Python."""
    adj = [[] for _ in range(n)]
    for u, v, w in zip(us, vs, ws):
        adj[u].append((v, w))
        adj[v].append((u, w))
    out = np.full((n, n), hmax + 1, dtype=np.int64)
    for s in range(n):
        best = [float("inf")] * n
        best[s] = 0.0
        out[s, s] = 0
        for h in range(1, hmax + 1):
            nxt = best[:]
            for u in range(n):
                if best[u] < float("inf"):
                    for v, w in adj[u]:
                        nxt[v] = min(nxt[v], best[u] + w)
            best = nxt
            for v in range(n):
                if out[s, v] > hmax and best[v] <= budget[s, v]:
                    out[s, v] = h
    return out


@pytest.mark.parametrize("flag", ["1", "0"])
@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(2, 25), st.integers(0, 80), st.integers(0, 10_000))
def test_apsp_matches_scipy(monkeypatch, flag, n, m, seed):
    monkeypatch.setenv("FTSPAN_NUMBA", flag)
    us, vs, ws = random_graph(n, m, seed)
    alive = np.random.default_rng(seed + 1).random(n) > 0.2
    got = all_pairs_shortest_paths(*to_csr(n, us, vs, ws), alive=alive)
    want = scipy_apsp(n, us, vs, ws, alive)
    fin = np.isfinite(want)
    assert np.array_equal(fin, np.isfinite(got))
    assert np.allclose(got[fin], want[fin])


@pytest.mark.parametrize("flag", ["1", "0"])
@settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(2, 14), st.integers(1, 40), st.integers(0, 10_000), st.floats(1.0, 3.0))
def test_min_hops_matches_brute_force(monkeypatch, flag, n, m, seed, slack):
    monkeypatch.setenv("FTSPAN_NUMBA", flag)
    us, vs, ws = random_graph(n, m, seed)
    ref = scipy_apsp(n, us, vs, ws, np.ones(n, dtype=bool))
    budget = np.where(np.isfinite(ref), ref * slack, 0.0)
    got = hop_bounded_min_hops(*to_csr(n, us, vs, ws), budget, 6)
    assert np.array_equal(got, brute_hops(n, us, vs, ws, budget, 6))


def test_backends_agree_on_path_graph(monkeypatch):
    n = 50
    us, vs = np.arange(n - 1), np.arange(1, n)
    ws = np.ones(n - 1)
    csr = to_csr(n, us, vs, ws)
    budget = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    a = hop_bounded_min_hops(*csr, budget, 60)
    monkeypatch.setenv("FTSPAN_NUMBA", "0")
    b = hop_bounded_min_hops(*csr, budget, 60)
    assert np.array_equal(a, b)
    assert a[0, n - 1] == n - 1


def test_csr_is_symmetric():
    indptr, idx, w = to_csr(3, [0, 1], [1, 2], [1.0, 2.0])
    assert list(indptr) == [0, 1, 3, 4]
    assert list(idx) == [1, 0, 2, 1]
