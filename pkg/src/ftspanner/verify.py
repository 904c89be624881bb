"""Independent checks: stretch under faults, hop diameter, lightness, structural audit, greedy oracle."""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .construct import FtSpanner, SurrogateTable, DerivedParams
from .kernels import all_pairs_shortest_paths, hop_bounded_min_hops, to_csr
from .metric import Metric, leq
from .nettree import NetTree, base_path_weights

WEIGHT_TOL = 1e-9  # relative slack on path-weight sums


@dataclass(frozen=True)
class FaultSet:
    points: frozenset = frozenset()

    @classmethod
    def of(cls, pts, n: int | None = None, k: int | None = None) -> "FaultSet":
        pts = frozenset(int(p) for p in pts)
        if k is not None and len(pts) > k:
            raise ValueError(f"fault set of size {len(pts)} exceeds k={k}")
        if n is not None and any(p < 0 or p >= n for p in pts):
            raise ValueError("fault point outside the metric")
        return cls(pts)

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class StretchResult:
    worst: float
    pair: tuple[int, int] | None
    faults: FaultSet

    def ok(self, eps: float) -> bool:
        return self.worst <= (1.0 + eps) * (1.0 + WEIGHT_TOL)


@dataclass
class SuiteResult:
    passed: bool
    tested: int
    worst: StretchResult
    strategy: str


@dataclass
class Report:
    max_degree: int
    edge_count: int
    lightness: float
    hop_diameter: int
    worst_stretch: dict | None = None
    audit_findings: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "max_degree": self.max_degree,
            "edge_count": self.edge_count,
            "lightness": self.lightness,
            "hop_diameter": self.hop_diameter,
            "worst_stretch": self.worst_stretch,
            "audit_findings": [str(f) for f in self.audit_findings],
            "timings": self.timings,
        }


def spanner_csr(sp: FtSpanner):
    us, vs, ws = sp.edge_arrays()
    return to_csr(sp.n, us, vs, ws)


# ------------------------------------------------------------------ stretch


def _worst_ratio(dist_sp: np.ndarray, m: Metric, alive: np.ndarray) -> tuple[float, tuple[int, int] | None]:
    n = m.n
    idx = np.nonzero(alive)[0]
    if len(idx) < 2:
        return 1.0, None
    sub = dist_sp[np.ix_(idx, idx)]
    base = m.dist[np.ix_(idx, idx)]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = sub / base
    np.fill_diagonal(ratio, 1.0)
    a, b = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    worst = float(ratio[a, b])
    if worst <= 1.0:
        return max(worst, 1.0), None
    return worst, (int(idx[a]), int(idx[b]))


def check_stretch(sp: FtSpanner, m: Metric, eps: float = 0.0, f: FaultSet | None = None, csr=None) -> StretchResult:
    """Worst dist_{sp - f}(p, q) / d(p, q) over surviving pairs (inf if disconnected)."""
    f = f or FaultSet()
    alive = np.ones(m.n, dtype=bool)
    for p in f.points:
        alive[p] = False
    csr = csr or spanner_csr(sp)
    dist_sp = all_pairs_shortest_paths(*csr, alive=alive)
    worst, pair = _worst_ratio(dist_sp, m, alive)
    return StretchResult(worst=worst, pair=pair, faults=f)


def count_fault_sets(n: int, k: int) -> int:
    return sum(math.comb(n, j) for j in range(0, min(k, n) + 1))


def _targeted_sets(sp: FtSpanner, m: Metric, eps: float, k: int, csr, table: SurrogateTable | None):
    n = m.n
    deg = sp.degrees()
    yield frozenset(np.argsort(-deg, kind="stable")[:k].tolist())
    if table is not None:
        freq = np.zeros(n, dtype=np.int64)
        for s in table.states.values():
            if s.dirty:
                for p in s.S:
                    freq[p] += 1
        yield frozenset(np.argsort(-freq, kind="stable")[:k].tolist())
    # isolate each point: drop its k heaviest-used neighbours (by degree)
    nbrs: dict[int, list[int]] = {p: [] for p in range(n)}
    for u, v in sp.edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    for p in range(n):
        near = sorted(nbrs[p], key=lambda q: (m.dist[p, q], q))[:k]
        yield frozenset(near)
    # greedy max-damage, one point at a time
    cur: set[int] = set()
    for _ in range(k):
        best, best_p = -1.0, None
        for p in range(n):
            if p in cur:
                continue
            r = check_stretch(sp, m, eps, FaultSet(frozenset(cur | {p})), csr=csr).worst
            if r > best:
                best, best_p = r, p
        if best_p is None:
            break
        cur.add(best_p)
        yield frozenset(cur)


def fault_suite(
    sp: FtSpanner,
    m: Metric,
    eps: float,
    k: int,
    strategy: str = "exhaustive",
    trials: int = 500,
    seed: int = 0,
    table: SurrogateTable | None = None,
    stop_on_fail: bool = False,
) -> SuiteResult:
    """Check stretch <= 1+eps after removing each fault set the strategy produces.

    ``strategy`` is ``exhaustive``, ``random`` (``trials`` uniform sets of
    size exactly min(k, n-2)) or ``targeted``.
    """
    n = m.n
    csr = spanner_csr(sp)
    if strategy == "exhaustive":
        if count_fault_sets(n, k) > 2_000_000:
            raise ValueError(f"C({n}, <={k}) fault sets is too many for exhaustive checking")
        sets = (frozenset(c) for j in range(k + 1) for c in itertools.combinations(range(n), j))
    elif strategy == "random":
        rng = np.random.default_rng(seed)
        size = min(k, max(n - 2, 0))
        sets = (frozenset(rng.choice(n, size=size, replace=False).tolist()) for _ in range(trials))
    elif strategy == "targeted":
        sets = _targeted_sets(sp, m, eps, k, csr, table)
    else:
        raise ValueError(f"unknown fault strategy {strategy!r}")
    worst = StretchResult(1.0, None, FaultSet())
    tested = 0
    passed = True
    seen = set()
    for fs in sets:
        if fs in seen and strategy != "random":
            continue
        seen.add(fs)
        res = check_stretch(sp, m, eps, FaultSet(fs), csr=csr)
        tested += 1
        if res.worst > worst.worst:
            worst = res
        if not res.ok(eps):
            passed = False
            if stop_on_fail:
                break
    return SuiteResult(passed=passed, tested=tested, worst=worst, strategy=strategy)


# -------------------------------------------------------- size measurements


def default_hmax(n: int) -> int:
    return 4 * math.ceil(math.log2(max(n, 2))) + 8


def measure_hop_diameter(sp: FtSpanner, m: Metric, eps: float, hmax: int | None = None):
    """Return ``(Lambda, over)`` where ``over`` lists pairs needing more than ``hmax`` hops."""
    hmax = default_hmax(m.n) if hmax is None else hmax
    if m.n < 2:
        return 0, []
    budget = m.dist * (1.0 + eps) * (1.0 + WEIGHT_TOL)
    hops = hop_bounded_min_hops(*spanner_csr(sp), budget, hmax)
    lam = int(hops.max())
    over = [tuple(map(int, p)) for p in np.argwhere(np.triu(hops > hmax, k=1))]
    return min(lam, hmax + 1), over


def lightness(sp: FtSpanner, m: Metric) -> float:
    mst = m.mst_weight()
    return sp.weight() / mst if mst > 0 else 0.0


def summarize(sp: FtSpanner, m: Metric, eps: float, hops: bool = True) -> Report:
    t0 = time.perf_counter()
    lam = measure_hop_diameter(sp, m, eps)[0] if hops else -1
    deg = sp.degrees()
    return Report(
        max_degree=int(deg.max(initial=0)),
        edge_count=len(sp),
        lightness=lightness(sp, m),
        hop_diameter=lam,
        timings={"measure": time.perf_counter() - t0},
    )


def base_spanner_stretch(t: NetTree) -> tuple[float, tuple[int, int] | None]:
    """Worst ratio of climbing-path weight to distance over all pairs."""
    w = base_path_weights(t)
    n = t.metric.n
    if n < 2:
        return 1.0, None
    with np.errstate(divide="ignore", invalid="ignore"):
        r = w / t.metric.dist
    np.fill_diagonal(r, 1.0)
    a, b = np.unravel_index(int(np.nanargmax(r)), r.shape)
    return float(r[a, b]), (int(a), int(b))


# ------------------------------------------------------------ structural audit


@dataclass(frozen=True)
class Finding:
    invariant: int
    node: object
    message: str

    def __str__(self) -> str:
        return f"#{self.invariant} {self.node}: {self.message}"


def structural_audit(table: SurrogateTable, params: DerivedParams | None = None, tree: NetTree | None = None) -> list[Finding]:
    """Re-check invariants 1-10 of the surrogate computation from scratch."""
    params = params or table.params
    t = tree or table.tree
    k = params.k
    d = t.metric.dist
    st = table.states
    out: list[Finding] = []

    def add(inv, node, msg):
        out.append(Finding(inv, node, msg))

    # 1: exact size, dirty ancestors
    for x, s in st.items():
        if s.dirty:
            if len(s.S) != k + 1:
                add(1, x, f"dirty with {len(s.S)} surrogates")
            par = t.parent.get(x)
            if par is not None and not st[par].dirty:
                add(1, x, f"dirty node has clean parent {par}")
    # 2 and 3: clean nodes
    for x, s in st.items():
        if s.dirty:
            continue
        D = t.descendants(x)
        if s.S != D:
            add(2, x, "clean node with S != D")
        if not D <= set(s.F):
            add(2, x, "clean node with D not inside F")
        if x[1] > 0 and len(set(s.F) | s.S) >= 2 * k + 2:
            add(2, x, f"clean node with |F u S| = {len(set(s.F) | s.S)}")
        bad = [p for p in D if table.dirty_since[p] <= x[1]]
        if bad:
            add(3, x, f"clean node with dirty descendant points {sorted(bad)[:5]}")
    # 4: disjointness of same-level dirty non-leeches
    by_level: dict[int, list] = {}
    for x, s in st.items():
        if s.non_leech_dirty:
            by_level.setdefault(x[1], []).append(s)
    for lv, group in by_level.items():
        owner_s: dict[int, tuple] = {}
        owner_f: dict[int, tuple] = {}
        for s in group:
            for p in s.S:
                if p in owner_s:
                    add(4, s.node, f"surrogate {p} shared with {owner_s[p]}")
                owner_s[p] = s.node
            if s.appointing is None or s.appointing not in st:
                add(4, s.node, "missing appointing copy")
                continue
            for p in set(st[s.appointing].F):
                if p in owner_f and owner_f[p] != s.appointing:
                    add(4, s.node, f"old friend {p} shared via {owner_f[p]}")
                owner_f[p] = s.appointing
    # 5: equal or disjoint, across levels
    index: list[dict[int, set]] = [dict() for _ in range(t.top + 1)]
    for x, s in st.items():
        for p in s.S:
            index[x[1]].setdefault(p, set()).add(s.S)
    for x, s in st.items():
        if not s.dirty:
            continue
        for j in range(x[1], t.top + 1):
            for p in s.S:
                for other in index[j].get(p, ()):
                    if other != s.S:
                        add(5, x, f"partial overlap with a level-{j} surrogate set")
                        break
    # 6: 34-friends
    for x, s in st.items():
        lim = 34.0 * 5.0 ** x[1]
        far = [q for q in s.S if not leq(d[x[0], q], lim)]
        if far:
            add(6, x, f"surrogates {far[:3]} farther than 34*5^{x[1]}")
    # 7: degree threshold
    Dthr = params.D
    for x, s in st.items():
        if s.dirty:
            continue
        j = x[1]
        for p in s.S:
            if table.deg_by_level[j, p] > Dthr:
                add(7, x, f"deg_{j}({p}) = {table.deg_by_level[j, p]} > D = {Dthr}")
    over = np.nonzero(table.deg_by_level[-1] > 2 * Dthr)[0]
    for p in over:
        add(7, int(p), f"final degree {table.deg_by_level[-1, p]} > 2D = {2 * Dthr}")
    # 8: no appointment among near ancestors of an appointing node
    for x, s in st.items():
        if s.how != "appointed":
            continue
        y = x
        while y in t.parent:
            y = t.parent[y]
            if y[1] > x[1] + params.tau + 2:
                break
            if st[y].how == "appointed":
                add(8, x, f"ancestor {y} also appoints")
                break
    # 9: leeches and hosts
    for x, s in st.items():
        if s.role != "leech":
            continue
        h = s.host
        hs = st.get(h)
        if hs is None or h[1] != x[1] or not hs.non_leech_dirty:
            add(9, x, f"host {h} is not a dirty non-leech at the same level")
            continue
        if not leq(d[x[0], h[0]], 24.0 * 5.0 ** x[1]):
            add(9, x, f"host {h} is not a 24-friend")
        if hs.S != s.S:
            add(9, x, "leech surrogates differ from host's")
        px, ph = t.parent.get(x), t.parent.get(h)
        if px is not None and ph is not None and not d[px[0], ph[0]] < 24.0 * 5.0 ** (x[1] + 1) * (1 + 1e-12):
            add(9, x, f"parent {px} not within 24*5^{x[1] + 1} of host parent {ph}")
    # 10: no re-appointment
    for p in np.nonzero(table.appoint_count > 1)[0]:
        add(10, int(p), f"appointed {int(table.appoint_count[p])} times")
    appointed = {}
    for x, s in st.items():
        if s.how == "appointed":
            for p in s.S:
                if p in appointed and appointed[p] != x:
                    add(10, x, f"point {p} already appointed by {appointed[p]}")
                appointed[p] = x
    return out


# ------------------------------------------------------------- greedy oracle


def _dijkstra(adj: list[dict[int, float]], src: int, dst: int, banned: set[int], bound: float):
    """Shortest src-dst path avoiding ``banned``, pruned beyond ``bound``; (weight, path)."""
    dist = {src: 0.0}
    prev: dict[int, int] = {}
    heap = [(0.0, src)]
    while heap:
        du, u = heapq.heappop(heap)
        if du > dist.get(u, math.inf):
            continue
        if u == dst:
            path = [u]
            while path[-1] != src:
                path.append(prev[path[-1]])
            return du, path[::-1]
        for v, w in adj[u].items():
            if v in banned:
                continue
            nd = du + w
            if nd <= bound and nd < dist.get(v, math.inf):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    return math.inf, None


def _flow_disjoint_paths(adj, d, x: int, y: int, bound: float) -> int:
    """Max number of internally vertex-disjoint x-y paths inside the ellipse of ``bound``."""
    n = len(adj)
    ball = [v for v in range(n) if d[x, v] + d[v, y] <= bound]
    pos = {v: i for i, v in enumerate(ball)}
    # node v -> (in = 2i, out = 2i+1)
    rows, cols, caps = [], [], []
    big = n + 1
    for v in ball:
        i = pos[v]
        rows.append(2 * i)
        cols.append(2 * i + 1)
        caps.append(big if v in (x, y) else 1)
        for u, _ in adj[v].items():
            if u in pos:
                rows.append(2 * i + 1)
                cols.append(2 * pos[u])
                caps.append(1)
    size = 2 * len(ball)
    g = csr_matrix((np.array(caps, dtype=np.int32), (rows, cols)), shape=(size, size))
    g.sum_duplicates()
    return int(maximum_flow(g, 2 * pos[x] + 1, 2 * pos[y]).flow_value)


def _needs_edge(adj, x: int, y: int, bound: float, k: int, banned: set[int]) -> bool:
    w, path = _dijkstra(adj, x, y, banned, bound * (1.0 + WEIGHT_TOL))
    if path is None:
        return True
    if len(banned) >= k:
        return False
    for v in path[1:-1]:
        banned.add(v)
        hit = _needs_edge(adj, x, y, bound, k, banned)
        banned.discard(v)
        if hit:
            return True
    return False


def greedy_ft_oracle(m: Metric, t: float, k: int) -> FtSpanner:
    """Greedy k-fault-tolerant t-spanner.

    Pairs are scanned by increasing distance; (x, y) is added unless every
    fault set of at most k other points leaves an x-y path of weight at most
    t * d(x, y).  A unit-capacity vertex-split max-flow on the ellipse around
    x and y gives a quick yes (fewer than k+1 disjoint candidate paths); the
    exact decision branches on the interior vertices of the current shortest
    path, which any blocking fault set must hit.
    """
    n = m.n
    d = m.dist
    sp = FtSpanner(n=n)
    adj: list[dict[int, float]] = [dict() for _ in range(n)]
    iu, ju = np.triu_indices(n, k=1)
    order = np.lexsort((ju, iu, d[iu, ju]))
    for e in order:
        x, y = int(iu[e]), int(ju[e])
        bound = t * d[x, y]
        need = False
        if k + 1 > _flow_disjoint_paths(adj, d, x, y, bound * (1.0 + WEIGHT_TOL)):
            need = True
        else:
            need = _needs_edge(adj, x, y, bound, k, set())
        if need:
            sp.add(x, y, d[x, y], "greedy", 0)
            adj[x][y] = d[x, y]
            adj[y][x] = d[x, y]
    return sp
