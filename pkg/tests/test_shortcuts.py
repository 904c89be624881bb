import math
from collections import Counter

import numpy as np
import pytest

from ftspanner import build_net_tree, build_spanner, default_gamma
from ftspanner.construct import SHORTCUT_MATCHING, ConstructionError, DerivedParams, FtSpanner, compute_sets
from ftspanner.instances import multiscale_points
from ftspanner.shortcuts import (
    Subtree,
    add_shortcuts,
    light_subtrees,
    prune_tree,
    tree_hops,
    tree_one_spanner,
)

from conftest import rng_points


def path_subtree(n):
    parent = {(i, n - i): (i - 1, n - i + 1) for i in range(1, n)}
    children = {}
    for c, p in parent.items():
        children.setdefault(p, []).append(c)
    return Subtree(root=(0, n), parent=parent, children=children)


def star_subtree(m):
    parent = {(i, 0): (0, 1) for i in range(1, m + 1)}
    return Subtree(root=(0, 1), parent=parent, children={(0, 1): sorted(parent)})


def random_subtree(n, seed):
    rng = np.random.default_rng(seed)
    depth = {0: 0}
    parent = {}
    for v in range(1, n):
        p = int(rng.integers(0, v))
        parent[v] = p
        depth[v] = depth[p] + 1
    top = max(depth.values()) + 1
    node = {v: (v, top - depth[v]) for v in range(n)}
    par = {node[v]: node[p] for v, p in parent.items()}
    ch = {}
    for c, p in par.items():
        ch.setdefault(p, []).append(c)
    return Subtree(root=node[0], parent=par, children=ch)


def test_all_clean_prunes_to_nothing():
    m = rng_points(8, seed=1)
    t = build_net_tree(m, 400)
    tab = compute_sets(t, DerivedParams.derive(t, 6, 0.5))
    pt = prune_tree(t, tab)
    assert pt.root is None and len(pt) == 0
    assert light_subtrees(pt, m.diameter(), m.n) == []


def test_four_point_prune(four_point_table):
    t, tab = four_point_table
    pt = prune_tree(t, tab)
    # (0,1) and its leech (30,1) share S with the root, so both collapse
    # into it; their children are clean leaves.
    assert pt.root == (0, 2)
    assert pt.children[(0, 2)] == []
    assert len(pt) == 1


@pytest.mark.parametrize("seed", range(3))
def test_pruned_tree_properties(seed):
    m = multiscale_points(300, seed=seed)
    sp, t, tab, ex = build_spanner(m, 1, 0.5)
    pt = ex["pruned"]
    for x in pt.nodes:
        assert tab[x].dirty
        kids = pt.children.get(x, [])
        # either all redundant or none: kept children never all repeat the parent's set
        assert not kids or not all(pt.S[c] == pt.S[x] for c in kids)
        for c in kids:
            assert t.ancestor(c, x[1]) == x
    counts = Counter(p for x in pt.nodes for p in pt.S[x])
    assert max(counts.values(), default=0) <= 40


def test_light_subtrees_partition():
    m = multiscale_points(400, seed=3)
    sp, t, tab, ex = build_spanner(m, 1, 0.5)
    pt, subs = ex["pruned"], ex["light_subtrees"]
    lim = m.diameter() / m.n
    light = {x for x in pt.nodes if 5.0 ** x[1] < lim}
    seen = set()
    for sub in subs:
        nodes = set(sub.nodes)
        assert not (nodes & seen)
        seen |= nodes
        assert all(5.0 ** x[1] < lim for x in nodes)
        par = pt.parent.get(sub.root)
        assert par is None or par not in light
    assert seen == light
    assert subs, "instance should have light subtrees"


def test_path_metric_has_no_light_nodes():
    from ftspanner import from_coords, normalize

    m = normalize(from_coords(np.arange(256.0)[:, None]))
    sp, t, tab, ex = build_spanner(m, 1, 0.5)
    lim = m.diameter() / m.n
    assert all(5.0 ** x[1] >= lim for x in ex["pruned"].nodes)
    assert ex["light_subtrees"] == []


def test_two_node_subtree_no_shortcuts():
    assert tree_one_spanner(path_subtree(2)) == []


def test_star_no_shortcuts():
    sub = star_subtree(12)
    assert tree_one_spanner(sub) == []
    _, hops = tree_hops(sub, [])
    assert hops.max() == 2


def test_path_1024_contract():
    sub = path_subtree(1024)
    pairs = tree_one_spanner(sub)
    _, hops = tree_hops(sub, pairs)
    assert hops.max() <= 3 * 10
    assert len(pairs) <= 1024
    deg = Counter()
    for a, b in pairs:
        deg[a] += 1
        deg[b] += 1
    assert max(deg.values()) <= sub.degree() + 2 * math.ceil(math.log2(1024))


@pytest.mark.parametrize("seed", range(5))
def test_random_tree_contract(seed):
    sub = random_subtree(300, seed)
    pairs = tree_one_spanner(sub)
    assert len(pairs) < len(sub)
    _, hops = tree_hops(sub, pairs)
    assert hops.max() <= 3 * math.ceil(math.log2(len(sub)))
    # shortcuts only ever point to ancestors
    for v, a in pairs:
        y = v
        while y != a:
            y = sub.parent[y]


def test_add_shortcuts_skips_redundant_and_rejects_clean(four_point_table):
    t, tab = four_point_table
    sp = FtSpanner(n=4)
    same = add_shortcuts(sp, [((0, 1), (3, 1))], tab)
    assert len(same) == 0
    with pytest.raises(ConstructionError):
        add_shortcuts(sp, [((0, 0), (0, 2))], tab)


def test_no_light_subtrees_means_no_shortcut_edges():
    m = rng_points(60, seed=2)
    a = build_spanner(m, 1, 0.5, mode="matching")[0]
    b, _, _, ex = build_spanner(m, 1, 0.5, mode="full")
    assert ex["shortcut_pairs"] == []
    assert a.edges == b.edges


def test_shortcut_edge_weight_bound():
    m = multiscale_points(500, seed=0)
    sp, t, tab, ex = build_spanner(m, 1, 0.5)
    d = m.dist
    assert ex["shortcut_pairs"]
    for x, y in ex["shortcut_pairs"]:
        lo, hi = (x, y) if x[1] < y[1] else (y, x)
        z, tree_w = lo, 0.0
        while z != hi:
            par = t.parent[z]
            tree_w += d[z[0], par[0]]
            z = par
        bound = tree_w + 34 * (5.0 ** x[1] + 5.0 ** y[1])
        for u, v in zip(sorted(tab[x].S), sorted(tab[y].S)):
            if u != v:
                assert d[u, v] <= bound * (1 + 1e-9)
    kinds = sp.kind_counts()
    assert kinds[SHORTCUT_MATCHING] > 0
