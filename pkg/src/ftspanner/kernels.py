"""Hot numeric loops.

Every kernel has a numba implementation and a numpy implementation with the
same signature; the public wrappers pick one via ``FTSPAN_NUMBA``.  Graphs are
passed in CSR form (``indptr``, ``indices``, ``weights``) with both directions
of every undirected edge present.
"""
from __future__ import annotations

import numpy as np

from ._accel import njit, numba_enabled

__all__ = [
    "pairwise_distances",
    "prim_mst_weight",
    "all_pairs_shortest_paths",
    "hop_bounded_min_hops",
    "to_csr",
]


def pairwise_distances(coords: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix from coordinate differences.

    The Gram-matrix shortcut loses all precision on multi-scale inputs, so
    differences are formed explicitly, one coordinate at a time.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    n = len(coords)
    d2 = np.zeros((n, n))
    for j in range(coords.shape[1]):
        diff = coords[:, j, None] - coords[None, :, j]
        d2 += diff * diff
    d = np.sqrt(d2)
    np.fill_diagonal(d, 0.0)
    return d


def to_csr(n: int, us, vs, ws):
    """Symmetric CSR arrays from an undirected edge list."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    ws = np.asarray(ws, dtype=np.float64)
    src = np.concatenate([us, vs])
    dst = np.concatenate([vs, us])
    w = np.concatenate([ws, ws])
    order = np.lexsort((dst, src))
    src, dst, w = src[order], dst[order], w[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst, w


# ---------------------------------------------------------------- MST weight


@njit
def _prim_numba(dist):
    n = dist.shape[0]
    if n <= 1:
        return 0.0
    in_tree = np.zeros(n, dtype=np.bool_)
    best = np.full(n, np.inf)
    best[0] = 0.0
    total = 0.0
    for _ in range(n):
        u = -1
        bu = np.inf
        for v in range(n):
            if not in_tree[v] and best[v] < bu:
                bu = best[v]
                u = v
        in_tree[u] = True
        total += bu
        for v in range(n):
            if not in_tree[v]:
                d = dist[u, v]
                if d < best[v]:
                    best[v] = d
    return total


def _prim_numpy(dist):
    n = dist.shape[0]
    if n <= 1:
        return 0.0
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    best[0] = 0.0
    total = 0.0
    for _ in range(n):
        cand = np.where(in_tree, np.inf, best)
        u = int(np.argmin(cand))
        total += float(cand[u])
        in_tree[u] = True
        np.minimum(best, dist[u], out=best)
    return total


def prim_mst_weight(dist: np.ndarray) -> float:
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    if numba_enabled():
        return float(_prim_numba(dist))
    return float(_prim_numpy(dist))


# ------------------------------------------------------- all-pairs distances


@njit
def _heap_push(hk, hv, size, key, val):
    i = size
    hk[i] = key
    hv[i] = val
    while i > 0:
        p = (i - 1) >> 1
        if hk[p] <= hk[i]:
            break
        hk[p], hk[i] = hk[i], hk[p]
        hv[p], hv[i] = hv[i], hv[p]
        i = p
    return size + 1


@njit
def _heap_pop(hk, hv, size):
    key = hk[0]
    val = hv[0]
    size -= 1
    hk[0] = hk[size]
    hv[0] = hv[size]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= size:
            break
        c = l
        r = l + 1
        if r < size and hk[r] < hk[l]:
            c = r
        if hk[i] <= hk[c]:
            break
        hk[c], hk[i] = hk[i], hk[c]
        hv[c], hv[i] = hv[i], hv[c]
        i = c
    return key, val, size


@njit
def _apsp_numba(indptr, indices, weights, alive):
    n = indptr.shape[0] - 1
    out = np.full((n, n), np.inf)
    m = indices.shape[0]
    hk = np.empty(m + n + 1)
    hv = np.empty(m + n + 1, dtype=np.int64)
    for s in range(n):
        if not alive[s]:
            continue
        dist = out[s]
        dist[s] = 0.0
        size = _heap_push(hk, hv, 0, 0.0, s)
        while size > 0:
            d, u, size = _heap_pop(hk, hv, size)
            if d > dist[u]:
                continue
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if not alive[v]:
                    continue
                nd = d + weights[e]
                if nd < dist[v]:
                    dist[v] = nd
                    size = _heap_push(hk, hv, size, nd, v)
    return out


def _apsp_numpy(indptr, indices, weights, alive):
    n = indptr.shape[0] - 1
    d = np.full((n, n), np.inf)
    src = np.repeat(np.arange(n), np.diff(indptr))
    keep = alive[src] & alive[indices]
    np.minimum.at(d, (src[keep], indices[keep]), weights[keep])
    idx = np.nonzero(alive)[0]
    d[idx, idx] = 0.0
    for k in idx:
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    d[~alive, :] = np.inf
    d[:, ~alive] = np.inf
    return d


def all_pairs_shortest_paths(indptr, indices, weights, alive=None) -> np.ndarray:
    """Dense shortest-path matrix; rows/columns of dead vertices are ``inf``."""
    n = len(indptr) - 1
    if alive is None:
        alive = np.ones(n, dtype=np.bool_)
    alive = np.ascontiguousarray(alive, dtype=np.bool_)
    args = (
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
        alive,
    )
    if numba_enabled():
        return _apsp_numba(*args)
    return _apsp_numpy(*args)


# ------------------------------------------------------ hop-bounded distances


@njit
def _min_hops_numba(indptr, indices, weights, budget, hmax):
    n = indptr.shape[0] - 1
    out = np.full((n, n), hmax + 1, dtype=np.int64)
    cur = np.empty(n)
    nxt = np.empty(n)
    for s in range(n):
        for v in range(n):
            cur[v] = np.inf
        cur[s] = 0.0
        out[s, s] = 0
        remaining = n - 1
        for h in range(1, hmax + 1):
            for v in range(n):
                nxt[v] = cur[v]
            for u in range(n):
                du = cur[u]
                if du == np.inf:
                    continue
                for e in range(indptr[u], indptr[u + 1]):
                    v = indices[e]
                    nd = du + weights[e]
                    if nd < nxt[v]:
                        nxt[v] = nd
            for v in range(n):
                cur[v] = nxt[v]
                if out[s, v] > hmax and cur[v] <= budget[s, v]:
                    out[s, v] = h
                    remaining -= 1
            if remaining == 0:
                break
    return out


def _min_hops_numpy(indptr, indices, weights, budget, hmax):
    n = indptr.shape[0] - 1
    out = np.full((n, n), hmax + 1, dtype=np.int64)
    np.fill_diagonal(out, 0)
    src = np.repeat(np.arange(n), np.diff(indptr))
    m = max(len(src), 1)
    chunk = max(1, min(n, 20_000_000 // m))
    for lo in range(0, n, chunk):
        rows = slice(lo, min(n, lo + chunk))
        cur = np.full((rows.stop - lo, n), np.inf)
        cur[np.arange(rows.stop - lo), np.arange(lo, rows.stop)] = 0.0
        sub_out = out[rows]
        sub_budget = budget[rows]
        for h in range(1, hmax + 1):
            nxt = cur.copy()
            # relax every edge for every source of the chunk at once
            cand = cur[:, src] + weights[None, :]
            np.minimum.at(nxt.T, indices, cand.T)
            cur = nxt
            newly = (sub_out > hmax) & (cur <= sub_budget)
            sub_out[newly] = h
            if not (sub_out > hmax).any():
                break
    return out


def hop_bounded_min_hops(indptr, indices, weights, budget, hmax: int) -> np.ndarray:
    """Per pair, the fewest edges of a path whose weight is within ``budget``.

    ``budget`` is an n x n matrix of allowed path weights.  Pairs that need
    more than ``hmax`` edges get ``hmax + 1``.
    """
    args = (
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(budget, dtype=np.float64),
        int(hmax),
    )
    if numba_enabled():
        return _min_hops_numba(*args)
    return _min_hops_numpy(*args)
