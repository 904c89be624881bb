"""Surrogate, friend and reserve sets, and emission of the FT spanner edges.

The net-tree is processed bottom-up one level at a time.  For each level the
friend sets are computed for every node, then the reserve sets (which read the
neighbours' friend sets), then the surrogate sets in a fixed order.  After the
surrogate sets of a level are known, that level's cross edges are charged to
the per-point degree counters and to the terms of the surrogate sets involved.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .metric import leq
from .nettree import Node, NetTree

log = logging.getLogger(__name__)

CROSS_CLIQUE = "cross-clique"
CROSS_MATCHING = "cross-matching"
TREE_CLIQUE = "tree-clique"
TREE_MATCHING = "tree-matching"
INTERNAL_CLIQUE = "internal-clique"
SHORTCUT_MATCHING = "shortcut-matching"
SHORTCUT_CLIQUE = "shortcut-clique"
EDGE_KINDS = (
    CROSS_CLIQUE,
    CROSS_MATCHING,
    TREE_CLIQUE,
    TREE_MATCHING,
    INTERNAL_CLIQUE,
    SHORTCUT_MATCHING,
    SHORTCUT_CLIQUE,
)


class ConstructionError(RuntimeError):
    """The construction reached a state its invariants rule out."""


@dataclass(frozen=True)
class DerivedParams:
    gamma: float
    tau: int
    xi: int
    D: int
    k: int
    eps: float

    @classmethod
    def derive(cls, t: NetTree, k: int, eps: float, xi: int | None = None) -> "DerivedParams":
        if t.gamma is None:
            raise ValueError("net tree has no cross edges yet")
        if k < 0:
            raise ValueError("k must be non-negative")
        tau = math.ceil(math.log(t.gamma, 5) - 1e-12) + 1
        xi = t.xi if xi is None else xi
        xi = max(int(xi), 1)
        return cls(gamma=t.gamma, tau=tau, xi=xi, D=(tau + 4) * xi * xi * (2 * k + 1), k=k, eps=eps)

    @property
    def friend_cap(self) -> int:
        return 3 * self.k + 3

    @property
    def large(self) -> int:
        return 2 * self.k + 2

    @property
    def reserve_cap(self) -> int:
        return (self.tau + 4) * (3 * self.k + 3) * self.xi


@dataclass
class Term:
    """Lifetime of one appointed surrogate set."""

    appointer: Node
    seq: int
    start_level: int
    surrogates: frozenset
    phase: int = 1
    degree: int = 0  # cross-edge degree of each surrogate since the appointment
    phase1_end: int | None = None
    phase2_end: int | None = None
    forced_end: int | None = None

    @property
    def last_level(self) -> float:
        ends = [e for e in (self.phase2_end, self.forced_end) if e is not None]
        return min(ends) if ends else math.inf

    def copyable_at(self, level: int) -> bool:
        """True when a node at ``level`` may still re-use these surrogates."""
        return level <= self.last_level


@dataclass
class NodeState:
    node: Node
    D: frozenset
    F: list[int]
    R: dict[int, int]  # reserve point -> level it was first recorded
    S: frozenset = frozenset()
    dirty: bool = False
    role: str = "none"  # none | leech | host
    host: Node | None = None
    appointing: Node | None = None
    term: Term | None = None
    how: str = ""  # clean | appointed | copy | leech
    F_size_part1: int = 0

    @property
    def level(self) -> int:
        return self.node[1]

    @property
    def point(self) -> int:
        return self.node[0]

    @property
    def non_leech_dirty(self) -> bool:
        return self.dirty and self.role != "leech"


@dataclass
class SurrogateTable:
    tree: NetTree
    params: DerivedParams
    states: dict[Node, NodeState] = field(default_factory=dict)
    deg: np.ndarray | None = None  # running cross-edge degree per point
    deg_by_level: np.ndarray | None = None  # deg_i(p) after level i
    dirty_since: np.ndarray | None = None  # level a point became dirty (inf: never)
    appoint_count: np.ndarray | None = None
    appointed_by: dict[int, Node] = field(default_factory=dict)
    terms: list[Term] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    evicted: list[tuple[Node, int]] = field(default_factory=list)

    def __getitem__(self, node: Node) -> NodeState:
        return self.states[node]

    def S(self, node: Node) -> frozenset:
        return self.states[node].S

    def is_clean_point(self, p: int, level: int) -> bool:
        """Point status at the *start* of ``level`` processing part 2."""
        return self.dirty_since[p] > level

    def dirty_nodes(self):
        return [s for s in self.states.values() if s.dirty]


# ---------------------------------------------------------------- part one


def _compute_friends(t: NetTree, table: SurrogateTable, node: Node, clean) -> NodeState:
    d = t.metric.dist
    p, i = node
    cap = table.params.friend_cap
    lim = 10.0 * 5.0**i
    F: list[int] = []
    R: dict[int, int] = {}
    if i == 0:
        F.append(p)
        R[p] = 0
        for q in sorted(t.cross_nbrs[0].get(p, ()), key=lambda q: (d[p, q], q)):
            R[q] = 0
            if len(F) < cap and leq(d[p, q], lim):
                F.append(q)
        return NodeState(node=node, D=t.descendants(node), F=F, R=R)
    seen = set()
    for c in t.children[node]:
        cs = table.states[c]
        for r, lv in cs.R.items():
            if clean(r):
                R[r] = min(lv, R.get(r, lv))
        for f in cs.F:
            if clean(f):
                R.setdefault(f, i)
                if f not in seen and len(F) < cap:
                    F.append(f)
                    seen.add(f)
    if len(F) < cap:
        extra = [r for r in R if r not in seen and leq(d[p, r], lim)]
        extra.sort(key=lambda r: (d[p, r], r))
        for r in extra[: cap - len(F)]:
            F.append(r)
    return NodeState(node=node, D=t.descendants(node), F=F, R=R)


def neighbour_offer(t: NetTree, table: SurrogateTable, node: Node, base_R: dict[int, int], clean) -> list[int]:
    """Clean points ``node`` hands to each cross neighbour's reserve: its friends and clean 10-friends of R."""
    d = t.metric.dist
    q, i = node
    lim = 10.0 * 5.0**i
    out = [f for f in table.states[node].F if clean(f)]
    seen = set(out)
    if base_R:
        rs = np.fromiter(base_R.keys(), dtype=np.int64, count=len(base_R))
        near = rs[d[q, rs] <= lim * (1.0 + 1e-9)]
        out.extend(int(r) for r in near if r not in seen and clean(r))
    return out


def propagate_reserve(
    t: NetTree, table: SurrogateTable, node: Node, offers: dict[Node, list[int]], truncate: bool = True
) -> dict[int, int]:
    """Finish R(node): add the neighbours' clean friends and clean 10-friends, then truncate.

    ``offers`` maps each same-level node to what it hands its neighbours, taken
    from reserve sets before this step so the result does not depend on the
    order nodes are completed in.
    """
    p, i = node
    R = table.states[node].R
    if i > 0:
        for q in t.cross_nbrs[i].get(p, ()):
            for f in offers[(q, i)]:
                if f not in R:
                    R[f] = i
    if truncate:
        _truncate_reserve(t, table, node, R)
    return R


def _truncate_reserve(t: NetTree, table: SurrogateTable, node: Node, R: dict[int, int]) -> None:
    params = table.params
    cap = params.reserve_cap
    if len(R) <= cap:
        return
    d = t.metric.dist
    p, i = node
    lim = 10.0 * 5.0**i
    # youngest first; among equals, nearest first
    order = sorted(R, key=lambda r: (-R[r], d[p, r], r))
    friends = [r for r in order if leq(d[p, r], lim)][: params.friend_cap]
    keep = set(friends)
    for r in order:
        if len(keep) >= cap:
            break
        keep.add(r)
    for r in list(R):
        if r not in keep:
            table.evicted.append((node, r))
            del R[r]


# ---------------------------------------------------------------- part two


def find_host(t: NetTree, table: SurrogateTable, node: Node, decided: set[Node]) -> Node | None:
    """Nearest already-decided dirty non-leech 24-friend at the same level."""
    d = t.metric.dist
    p, i = node
    lim = 24.0 * 5.0**i
    best = None
    for q in t.cross_nbrs[i].get(p, ()):
        qn = (q, i)
        if qn not in decided:
            continue
        qs = table.states[qn]
        if not qs.non_leech_dirty or not leq(d[p, q], lim):
            continue
        key = (d[p, q], q)
        if best is None or key < best[0]:
            best = (key, qn)
    return None if best is None else best[1]


def appoint_surrogates(table: SurrogateTable, node: Node) -> frozenset:
    """Pick k+1 clean friends (lowest degree, then id) as fresh surrogates of ``node``."""
    params = table.params
    st = table.states[node]
    i = node[1]
    if len(st.F) < params.large:
        table.violations.append(
            f"appointing node {node} has |F|={len(st.F)} < 2k+2={params.large}"
        )
    avail = [f for f in st.F if table.dirty_since[f] > i]
    if len(avail) < params.k + 1:
        raise ConstructionError(
            f"node {node} must appoint {params.k + 1} surrogates but F={st.F} has only "
            f"{len(avail)} clean points"
        )
    avail.sort(key=lambda f: (table.deg[f], f))
    chosen = frozenset(avail[: params.k + 1])
    for f in chosen:
        if table.appoint_count[f] > 0:
            raise ConstructionError(f"point {f} re-appointed by {node}")
        table.appoint_count[f] += 1
        table.dirty_since[f] = i
        table.appointed_by[f] = node
    term = Term(appointer=node, seq=len(table.terms), start_level=i, surrogates=chosen)
    table.terms.append(term)
    st.S = chosen
    st.dirty = True
    st.role = "none"
    st.appointing = node
    st.term = term
    st.how = "appointed"
    return chosen


def _make_leech(table: SurrogateTable, node: Node, host: Node) -> None:
    st = table.states[node]
    hs = table.states[host]
    st.S = hs.S
    st.dirty = True
    st.role = "leech"
    st.host = host
    st.appointing = hs.appointing
    st.term = hs.term
    st.how = "leech"
    hs.role = "host"


def _copy_candidate(t: NetTree, table: SurrogateTable, node: Node) -> NodeState | None:
    i = node[1]
    best = None
    for c in t.children.get(node, ()):
        cs = table.states[c]
        if cs.non_leech_dirty and cs.term.copyable_at(i):
            if best is None or cs.term.seq > best.term.seq:
                best = cs
    return best


def _decide(t: NetTree, table: SurrogateTable, node: Node, decided: set[Node]) -> None:
    params = table.params
    st = table.states[node]
    p, i = node
    if i == 0:
        # Leaves keep their own point.  A dirty leaf would route a pair at
        # distance 1 through surrogates up to 34 away; clean leaves make every
        # level-0 cross edge a direct edge.
        st.S = frozenset((p,))
        st.how = "clean"
        return
    kids = t.children.get(node, [])
    if any(table.states[c].dirty for c in kids):
        chosen = _copy_candidate(t, table, node)
        if chosen is not None:
            st.S = chosen.S
            st.dirty = True
            st.appointing = chosen.appointing
            st.term = chosen.term
            st.how = "copy"
            for c in kids:
                cs = table.states[c]
                if cs is not chosen and cs.non_leech_dirty and cs.term is not chosen.term:
                    cs.term.forced_end = min(i - 1, cs.term.forced_end if cs.term.forced_end is not None else i - 1)
            return
        host = find_host(t, table, node, decided)
        if host is not None:
            _make_leech(table, node, host)
            return
        appoint_surrogates(table, node)
        return
    host = find_host(t, table, node, decided)
    if host is not None:
        _make_leech(table, node, host)
    elif len(st.F) < params.large:
        st.S = st.D
        st.how = "clean"
    else:
        appoint_surrogates(table, node)


def _charge_cross_edges(t: NetTree, table: SurrogateTable, level: int) -> None:
    k = table.params.k
    touched: dict[int, Term] = {}
    for a, b in t.cross_edges[level]:
        xs, ys = table.states[(a, level)], table.states[(b, level)]
        if xs.S == ys.S:
            continue
        sx, sy = len(xs.S), len(ys.S)
        for s in xs.S:
            table.deg[s] += sy
        for s in ys.S:
            table.deg[s] += sx
        if xs.dirty:
            xs.term.degree += sy
            touched[xs.term.seq] = xs.term
        if ys.dirty:
            ys.term.degree += sx
            touched[ys.term.seq] = ys.term
    for term in touched.values():
        if term.phase == 1 and term.degree >= k + 1:
            term.phase = 2
            term.phase1_end = level
            term.phase2_end = level + table.params.tau + 2


def compute_sets(t: NetTree, params: DerivedParams, truncate_reserve: bool = True) -> SurrogateTable:
    """Run the level-by-level surrogate computation over the whole net-tree."""
    n = t.metric.n
    if n >= 2 and params.k > n - 2:
        raise ValueError(f"k must be <= n-2 (k={params.k}, n={n})")
    table = SurrogateTable(tree=t, params=params)
    table.deg = np.zeros(n, dtype=np.int64)
    table.deg_by_level = np.zeros((t.top + 1, n), dtype=np.int64)
    table.dirty_since = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    table.appoint_count = np.zeros(n, dtype=np.int64)

    for i in range(t.top + 1):
        nodes = t.nodes(i)
        clean = lambda r, _i=i: table.dirty_since[r] >= _i  # noqa: E731
        for node in nodes:
            table.states[node] = _compute_friends(t, table, node, clean)
        offers = {}
        if i > 0:
            offers = {node: neighbour_offer(t, table, node, table.states[node].R, clean) for node in nodes}
        for node in nodes:
            propagate_reserve(t, table, node, offers, truncate=truncate_reserve)
        for node in nodes:
            table.states[node].F_size_part1 = len(table.states[node].F)

        # Copies are fixed by the children alone, so settle them before any
        # host search; then large nodes, then the rest, each by point id.
        copies, large, rest = [], [], []
        for node in nodes:
            kids = t.children.get(node, []) if i > 0 else []
            if kids and _copy_candidate(t, table, node) is not None and any(
                table.states[c].dirty for c in kids
            ):
                copies.append(node)
            elif len(table.states[node].F) >= params.large:
                large.append(node)
            else:
                rest.append(node)
        decided: set[Node] = set()
        for node in itertools.chain(copies, large, rest):
            _decide(t, table, node, decided)
            decided.add(node)

        if i < t.top:
            _charge_cross_edges(t, table, i)
        table.deg_by_level[i] = table.deg
    log.debug(
        "compute_sets: %d nodes, %d terms, %d dirty points",
        len(table.states),
        len(table.terms),
        int((table.appoint_count > 0).sum()),
    )
    return table


# ---------------------------------------------------------------- spanner


@dataclass
class FtSpanner:
    n: int
    edges: dict[tuple[int, int], tuple[float, str, int]] = field(default_factory=dict)

    def add(self, u: int, v: int, w: float, kind: str, level: int) -> bool:
        if u == v:
            return False
        key = (u, v) if u < v else (v, u)
        if key in self.edges:
            return False
        self.edges[key] = (float(w), kind, int(level))
        return True

    def __len__(self) -> int:
        return len(self.edges)

    def copy(self) -> "FtSpanner":
        return FtSpanner(n=self.n, edges=dict(self.edges))

    def edge_arrays(self):
        if not self.edges:
            return (np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))
        keys = np.array(list(self.edges.keys()), dtype=np.int64)
        w = np.array([v[0] for v in self.edges.values()])
        return keys[:, 0], keys[:, 1], w

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def weight(self) -> float:
        return float(sum(v[0] for v in self.edges.values()))

    def kind_counts(self) -> dict[str, int]:
        out = {k: 0 for k in EDGE_KINDS}
        for _, kind, _ in self.edges.values():
            out[kind] = out.get(kind, 0) + 1
        return out

    def remove(self, u: int, v: int) -> None:
        self.edges.pop((min(u, v), max(u, v)), None)


def connect_sets(sp: FtSpanner, dist, A: frozenset, B: frozenset, matching: bool, kind_clique: str, kind_match: str, level: int) -> int:
    """Bipartite clique, or id-sorted index-wise perfect matching, between A and B."""
    added = 0
    if matching:
        if len(A) != len(B):
            raise ConstructionError(f"matching between sets of sizes {len(A)} and {len(B)}")
        for u, v in zip(sorted(A), sorted(B)):
            added += sp.add(u, v, dist[u, v], kind_match, level)
    else:
        for u in sorted(A):
            for v in sorted(B):
                added += sp.add(u, v, dist[u, v], kind_clique, level)
    return added


def assemble_spanner(t: NetTree, table: SurrogateTable, mode: str = "matching") -> FtSpanner:
    """Replace every non-redundant base-spanner edge by a clique or matching."""
    if mode not in ("clique-only", "matching"):
        raise ValueError(f"unknown mode {mode!r}")
    k = table.params.k
    matching_mode = mode == "matching"
    d = t.metric.dist
    sp = FtSpanner(n=t.metric.n)
    st = table.states

    def both_dirty(x: NodeState, y: NodeState) -> bool:
        if not (x.dirty and y.dirty):
            return False
        for z in (x, y):
            if len(z.S) != k + 1:
                raise ConstructionError(f"dirty node {z.node} has {len(z.S)} surrogates, expected {k + 1}")
        return True

    for i in range(t.top + 1):
        if i < t.top:
            for a, b in t.cross_edges[i]:
                x, y = st[(a, i)], st[(b, i)]
                if x.S == y.S:
                    continue
                connect_sets(sp, d, x.S, y.S, matching_mode and both_dirty(x, y), CROSS_CLIQUE, CROSS_MATCHING, i)
        if i > 0:
            for p in t.levels[i]:
                par = st[(p, i)]
                for c in t.children[(p, i)]:
                    ch = st[c]
                    if ch.S == par.S:
                        continue
                    connect_sets(sp, d, ch.S, par.S, matching_mode and both_dirty(ch, par), TREE_CLIQUE, TREE_MATCHING, i - 1)
    # A dirty leaf's own point need not be one of its surrogates, so the
    # internal clique is taken over S(x) plus the leaf point.
    for p in t.levels[0]:
        leaf = st[(p, 0)]
        if leaf.dirty:
            members = sorted(leaf.S | {p})
            for u, v in itertools.combinations(members, 2):
                sp.add(u, v, d[u, v], INTERNAL_CLIQUE, 0)
    return sp


def build_spanner(m, k: int, eps: float, gamma: float | None = None, mode: str = "full", xi: int | None = None, truncate_reserve: bool = True):
    """End-to-end construction; returns ``(spanner, tree, table, extras)``.

    ``mode`` is ``clique-only``, ``matching`` or ``full`` (matching plus
    shortcuts of the light subtrees).
    """
    from .nettree import build_net_tree, default_gamma
    from . import shortcuts

    gamma = default_gamma(eps) if gamma is None else float(gamma)
    t = build_net_tree(m, gamma)
    params = DerivedParams.derive(t, k, eps, xi=xi)
    table = compute_sets(t, params, truncate_reserve=truncate_reserve)
    extras: dict = {}
    if mode == "full":
        sp = assemble_spanner(t, table, "matching")
        pruned = shortcuts.prune_tree(t, table)
        subs = shortcuts.light_subtrees(pruned, m.diameter(), m.n)
        pairs = []
        for sub in subs:
            pairs.extend(shortcuts.tree_one_spanner(sub))
        sp = shortcuts.add_shortcuts(sp, pairs, table)
        extras.update(pruned=pruned, light_subtrees=subs, shortcut_pairs=pairs)
    else:
        sp = assemble_spanner(t, table, mode)
    return sp, t, table, extras
