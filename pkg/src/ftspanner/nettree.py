"""Hierarchical nets, the net-tree and the cross-edge base spanner."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metric import Metric, leq

Node = tuple[int, int]  # (net point, level)


class NetTreeError(RuntimeError):
    """Internal inconsistency while building the hierarchy."""


def default_gamma(eps: float) -> float:
    if eps <= 0:
        raise ValueError("eps must be positive")
    return float(max(395, math.ceil(600.0 / eps)))


@dataclass
class NetTree:
    metric: Metric
    levels: list[list[int]]
    parent: dict[Node, Node]
    children: dict[Node, list[Node]]
    gamma: float | None = None
    cross_edges: list[list[tuple[int, int]]] = field(default_factory=list)
    cross_nbrs: list[dict[int, list[int]]] = field(default_factory=list)
    xi: int = 0
    # anc[i][p]: net point of p's i-level ancestor; climb[i][p]: weight of that climb
    anc: np.ndarray | None = None
    climb: np.ndarray | None = None
    _desc: dict[Node, frozenset] = field(default_factory=dict, repr=False)

    @property
    def top(self) -> int:
        return len(self.levels) - 1

    @property
    def root(self) -> Node:
        return (self.levels[-1][0], self.top)

    def rad(self, node: Node) -> float:
        return 5.0 ** node[1]

    def has_node(self, p: int, i: int) -> bool:
        return 0 <= i <= self.top and p in self._members[i]

    def nodes(self, level: int | None = None):
        if level is not None:
            return [(p, level) for p in self.levels[level]]
        return [(p, i) for i, lv in enumerate(self.levels) for p in lv]

    def descendants(self, node: Node) -> frozenset:
        """Points in the leaves below ``node``."""
        got = self._desc.get(node)
        if got is None:
            if node[1] == 0:
                got = frozenset((node[0],))
            else:
                got = frozenset().union(*(self.descendants(c) for c in self.children[node]))
            self._desc[node] = got
        return got

    def ancestor(self, node: Node, level: int) -> Node:
        p, i = node
        if level < i:
            raise ValueError("target level below node")
        if i == 0:
            return (int(self.anc[level, p]), level)
        while i < level:
            p, i = self.parent[(p, i)]
        return (p, i)

    def has_cross_edge(self, a: int, b: int, level: int) -> bool:
        return a != b and b in self._nbr_sets[level].get(a, ())

    def node_degree(self, node: Node) -> int:
        p, i = node
        deg = len(self.children.get(node, ()))
        if node in self.parent:
            deg += 1
        if i < len(self.cross_nbrs):
            deg += len(self.cross_nbrs[i].get(p, ()))
        return deg

    def __post_init__(self):
        self._members = [set(lv) for lv in self.levels]
        self._nbr_sets: list[dict[int, set[int]]] = []


def build_nets(m: Metric) -> NetTree:
    """Greedy nested nets with ascending-id scans, plus parent/child links.

    A point of N_{i-1} joins N_i unless an already chosen point lies within
    3 * 5**i of it, so N_i is a 3*5**i cover and (a fortiori) a 5**i packing
    of N_{i-1}.  Levels stop at the first singleton net.
    """
    n = m.n
    if n == 0:
        raise NetTreeError("empty metric")
    d = m.dist
    levels = [list(range(n))]
    parent: dict[Node, Node] = {}
    children: dict[Node, list[Node]] = {}
    i = 0
    while len(levels[-1]) > 1:
        i += 1
        r = 3.0 * 5.0**i
        prev = levels[-1]
        chosen: list[int] = []
        for p in prev:
            if chosen and leq(float(d[p, chosen].min()), r):
                continue
            chosen.append(p)
        members = set(chosen)
        for p in prev:
            if p in members:
                par = p
            else:
                near = [q for q in chosen if leq(float(d[p, q]), r)]
                if not near:
                    raise NetTreeError(f"point {p} has no parent at level {i}")
                par = min(near)
            parent[(p, i - 1)] = (par, i)
            children.setdefault((par, i), []).append((p, i - 1))
        levels.append(chosen)
        if i > 2000:
            raise NetTreeError("net hierarchy does not terminate")
    for ch in children.values():
        ch.sort()
    top = len(levels) - 1
    anc = np.zeros((top + 1, n), dtype=np.int64)
    climb = np.zeros((top + 1, n))
    anc[0] = np.arange(n)
    for lv in range(1, top + 1):
        for p in range(n):
            a = anc[lv - 1, p]
            par = parent[(int(a), lv - 1)][0]
            anc[lv, p] = par
            climb[lv, p] = climb[lv - 1, p] + d[a, par]
    return NetTree(metric=m, levels=levels, parent=parent, children=children, anc=anc, climb=climb)


def add_cross_edges(t: NetTree, gamma: float) -> NetTree:
    """Connect same-level nodes within ``gamma * 5**i`` for every level below the root."""
    d = t.metric.dist
    t.gamma = float(gamma)
    t.cross_edges = []
    t.cross_nbrs = []
    t._nbr_sets = []
    for i in range(t.top + 1):
        pts = np.asarray(t.levels[i], dtype=np.int64)
        edges: list[tuple[int, int]] = []
        nbrs: dict[int, list[int]] = {}
        if i < t.top and len(pts) > 1:
            sub = d[np.ix_(pts, pts)]
            lim = gamma * 5.0**i
            close = sub <= lim * (1.0 + 1e-9)
            a_idx, b_idx = np.nonzero(np.triu(close, k=1))
            for a, b in zip(pts[a_idx].tolist(), pts[b_idx].tolist()):
                edges.append((min(a, b), max(a, b)))
                nbrs.setdefault(a, []).append(b)
                nbrs.setdefault(b, []).append(a)
            for v in nbrs.values():
                v.sort()
            edges.sort()
        t.cross_edges.append(edges)
        t.cross_nbrs.append(nbrs)
        t._nbr_sets.append({p: set(v) for p, v in nbrs.items()})
    t.xi = max((t.node_degree(x) for x in t.nodes()), default=0)
    return t


def build_net_tree(m: Metric, gamma: float) -> NetTree:
    return add_cross_edges(build_nets(m), gamma)


def connecting_level(t: NetTree, p: int, q: int) -> int:
    """Lowest level where the ancestors of p and q coincide or are cross-linked."""
    d = t.metric.dist
    for j in range(t.top + 1):
        a, b = int(t.anc[j, p]), int(t.anc[j, q])
        if a == b or t.has_cross_edge(a, b, j):
            return j
    raise NetTreeError(f"no connecting level for {p}, {q}")


def base_spanner_path(t: NetTree, p: int, q: int) -> list[Node]:
    """Climb from both leaves in lockstep until the ancestors meet or share a cross edge."""
    if p == q:
        raise ValueError("endpoints must differ")
    j = connecting_level(t, p, q)
    up = [(int(t.anc[i, p]), i) for i in range(j + 1)]
    down = [(int(t.anc[i, q]), i) for i in range(j, -1, -1)]
    if up[-1] == down[0]:
        return up + down[1:]
    return up + down


def path_weight(t: NetTree, path: list[Node]) -> float:
    d = t.metric.dist
    return float(sum(d[a[0], b[0]] for a, b in zip(path, path[1:])))


def base_path_weights(t: NetTree) -> np.ndarray:
    """Weight of the climbing path for every ordered pair (n x n, zero diagonal)."""
    n = t.metric.n
    d = t.metric.dist
    out = np.full((n, n), np.nan)
    done = np.eye(n, dtype=bool)
    np.fill_diagonal(out, 0.0)
    for j in range(t.top + 1):
        a = t.anc[j]
        lim = (t.gamma or 0.0) * 5.0**j
        da = d[np.ix_(a, a)]
        linked = (a[:, None] == a[None, :]) | ((da <= lim * (1.0 + 1e-9)) & (j < t.top))
        new = linked & ~done
        if new.any():
            w = t.climb[j][:, None] + t.climb[j][None, :] + da
            out[new] = w[new]
            done |= new
        if done.all():
            break
    return out
