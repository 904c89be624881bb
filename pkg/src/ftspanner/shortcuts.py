"""Pruned tree of dirty nodes, light subtrees and their shortcut matchings."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .construct import SHORTCUT_MATCHING, ConstructionError, FtSpanner, SurrogateTable, connect_sets
from .kernels import all_pairs_shortest_paths, hop_bounded_min_hops, to_csr
from .nettree import Node, NetTree


@dataclass
class PrunedTree:
    root: Node | None
    parent: dict[Node, Node] = field(default_factory=dict)
    children: dict[Node, list[Node]] = field(default_factory=dict)
    S: dict[Node, frozenset] = field(default_factory=dict)

    @property
    def nodes(self) -> list[Node]:
        return list(self.S)

    def __len__(self) -> int:
        return len(self.S)

    def max_children(self) -> int:
        return max((len(c) for c in self.children.values()), default=0)


@dataclass
class Subtree:
    root: Node
    parent: dict[Node, Node]
    children: dict[Node, list[Node]]

    @property
    def nodes(self) -> list[Node]:
        return [self.root] + list(self.parent)

    def __len__(self) -> int:
        return 1 + len(self.parent)

    def degree(self) -> int:
        deg = {x: len(self.children.get(x, ())) for x in self.nodes}
        for x in self.parent:
            deg[x] += 1
        return max(deg.values())


def prune_tree(t: NetTree, table: SurrogateTable) -> PrunedTree:
    """Drop clean nodes, then collapse runs of redundant dirty children top-down.

    The dirty children of a kept node are either all redundant (same surrogate
    set as the node) or none is; redundant ones are replaced by their own dirty
    children until the frontier is non-redundant or empty.
    """
    st = table.states
    root = t.root
    if not st[root].dirty:
        return PrunedTree(root=None)
    pt = PrunedTree(root=root)
    pt.S[root] = st[root].S

    def dirty_kids(x: Node) -> list[Node]:
        return [c for c in t.children.get(x, ()) if st[c].dirty] if x[1] > 0 else []

    stack = [root]
    while stack:
        x = stack.pop()
        sx = st[x].S
        front = dirty_kids(x)
        while front and all(st[c].S == sx for c in front):
            front = [g for c in front for g in dirty_kids(c)]
        front.sort()
        pt.children[x] = front
        for c in front:
            pt.parent[c] = x
            pt.S[c] = st[c].S
            stack.append(c)
    return pt


def light_subtrees(pt: PrunedTree, diameter: float, n: int) -> list[Subtree]:
    """Maximal connected pieces of the pruned tree made of nodes with radius < diameter / n."""
    if pt.root is None or n <= 0:
        return []
    lim = diameter / n
    light = {x for x in pt.S if 5.0 ** x[1] < lim}
    out = []
    for x in sorted(light, key=lambda y: (-y[1], y[0])):
        par = pt.parent.get(x)
        if par is not None and par in light:
            continue
        parent: dict[Node, Node] = {}
        children: dict[Node, list[Node]] = {}
        stack = [x]
        while stack:
            y = stack.pop()
            kids = [c for c in pt.children.get(y, ()) if c in light]
            children[y] = kids
            for c in kids:
                parent[c] = y
                stack.append(c)
        out.append(Subtree(root=x, parent=parent, children=children))
    return out


def tree_one_spanner(sub: Subtree) -> list[tuple[Node, Node]]:
    """Shortcut pairs from skew-binary jump pointers.

    Every node links to one ancestor, so at most one shortcut per node, and
    any ancestor is reachable in O(log depth) hops along monotone upward
    links; hence any two nodes are joined by O(log size) hops whose tree
    weight equals their tree distance.
    """
    if len(sub) <= 2:
        return []
    depth = {sub.root: 0}
    jump = {sub.root: sub.root}
    pairs = []
    stack = [sub.root]
    while stack:
        p = stack.pop()
        for v in sub.children.get(p, ()):
            depth[v] = depth[p] + 1
            j1 = jump[p]
            j2 = jump[j1]
            if depth[p] - depth[j1] == depth[j1] - depth[j2] and j1 != p:
                jump[v] = j2
            else:
                jump[v] = p
            if jump[v] != p:
                pairs.append((v, jump[v]))
            stack.append(v)
    return pairs


def tree_hops(sub: Subtree, pairs, weight=None):
    """Fewest hops between all node pairs using tree edges plus shortcuts.

    Every link is weighted by the tree distance between its endpoints, and
    only paths whose weight equals the tree distance count, so the result
    measures the 1-spanner hop diameter.  ``weight(child, parent)`` gives
    tree-edge weights (default 1).  Returns ``(nodes, hops)``.
    """
    nodes = sorted(sub.nodes, key=lambda x: (-x[1], x[0]))
    idx = {x: i for i, x in enumerate(nodes)}
    n = len(nodes)
    weight = weight or (lambda c, p: 1.0)
    tu, tv, tw = [], [], []
    for c, par in sub.parent.items():
        tu.append(idx[c])
        tv.append(idx[par])
        tw.append(weight(c, par))
    tree_d = all_pairs_shortest_paths(*to_csr(n, tu, tv, tw))
    us, vs = [], []
    for c, par in sub.parent.items():
        us.append(idx[c])
        vs.append(idx[par])
    for a, b in pairs:
        us.append(idx[a])
        vs.append(idx[b])
    ws = [tree_d[u, v] for u, v in zip(us, vs)]
    budget = tree_d * (1 + 1e-9) + 1e-12
    hmax = max(n, 1)
    hops = hop_bounded_min_hops(*to_csr(n, us, vs, ws), budget, hmax)
    return nodes, hops


def add_shortcuts(sp: FtSpanner, pairs, table: SurrogateTable) -> FtSpanner:
    """Turn each non-redundant shortcut pair into a (k+1)-matching of surrogates."""
    out = sp.copy()
    d = table.tree.metric.dist
    for x, y in pairs:
        xs, ys = table.states[x], table.states[y]
        if not (xs.dirty and ys.dirty):
            raise ConstructionError(f"shortcut endpoint not dirty: {x if not xs.dirty else y}")
        if xs.S == ys.S:
            continue
        connect_sets(out, d, xs.S, ys.S, True, SHORTCUT_MATCHING, SHORTCUT_MATCHING, min(x[1], y[1]))
    return out
