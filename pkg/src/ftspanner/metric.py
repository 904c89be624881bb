"""Finite metrics: loading, normalization, diameter and MST weight."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .kernels import pairwise_distances, prim_mst_weight

# Relative slack used for every "<= c * 5**i" style comparison.
REL_TOL = 1e-9


class MetricError(ValueError):
    """Input does not describe a valid finite metric."""


def leq(a: float, b: float) -> bool:
    """``a <= b`` up to the library-wide relative tolerance."""
    return a <= b * (1.0 + REL_TOL) + REL_TOL * 1e-3


@dataclass(frozen=True, eq=False)
class Metric:
    """An n-point metric backed by a dense distance matrix.

    ``coords`` is kept for Euclidean inputs so outputs can be plotted or
    re-scaled; every algorithm reads ``dist`` only.  ``scale`` is the factor
    the original distances were divided by.
    """

    dist: np.ndarray
    coords: np.ndarray | None = None
    scale: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return int(self.dist.shape[0])

    @property
    def points(self) -> range:
        return range(self.n)

    def __call__(self, a: int, b: int) -> float:
        return float(self.dist[a, b])

    def diameter(self) -> float:
        return metric_diameter(self)

    def mst_weight(self) -> float:
        return mst_weight(self)


def _check_matrix(mat: np.ndarray) -> None:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise MetricError(f"distance matrix must be square, got shape {mat.shape}")
    if np.isnan(mat).any():
        i, j = np.argwhere(np.isnan(mat))[0]
        raise MetricError(f"NaN distance at ({i}, {j})")
    if (mat < 0).any():
        i, j = np.argwhere(mat < 0)[0]
        raise MetricError(f"negative distance {mat[i, j]} at ({i}, {j})")
    if np.any(np.diag(mat) != 0):
        i = int(np.nonzero(np.diag(mat))[0][0])
        raise MetricError(f"nonzero diagonal entry at ({i}, {i})")
    asym = np.abs(mat - mat.T)
    if asym.max(initial=0.0) > 1e-12 * max(1.0, float(mat.max(initial=0.0))):
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise MetricError(
            f"asymmetric matrix: d({i},{j})={mat[i, j]} but d({j},{i})={mat[j, i]}"
        )
    off = mat + np.eye(len(mat))
    if len(mat) > 1 and (off <= 0).any():
        i, j = np.argwhere(off <= 0)[0]
        raise MetricError(f"distinct points {i} and {j} at distance 0")


def from_coords(coords) -> Metric:
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    if not np.isfinite(coords).all():
        raise MetricError("non-finite coordinate")
    dist = pairwise_distances(coords)
    if len(coords) > 1:
        off = dist + np.eye(len(coords))
        if (off <= 0).any():
            i, j = np.argwhere(off <= 0)[0]
            raise MetricError(f"duplicate points {i} and {j}")
    return Metric(dist=dist, coords=coords)


def from_matrix(mat) -> Metric:
    mat = np.array(mat, dtype=np.float64)
    _check_matrix(mat)
    mat = 0.5 * (mat + mat.T)
    return Metric(dist=mat)


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _parse_row(lineno: int, line: str) -> list[float]:
    parts = line.replace(",", " ").split()
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise MetricError(f"line {lineno}: cannot parse {line!r}") from exc


def load_points(source, mode: str = "euclidean") -> Metric:
    """Read a point file (``euclidean``) or a distance-matrix file (``matrix``)."""
    text = Path(source).read_text()
    rows = list(_data_lines(text))
    if mode == "euclidean":
        if not rows:
            raise MetricError("no points in input")
        coords = [_parse_row(ln, line) for ln, line in rows]
        dims = {len(c) for c in coords}
        if len(dims) != 1:
            raise MetricError(f"inconsistent coordinate dimensions {sorted(dims)}")
        return from_coords(coords)
    if mode == "matrix":
        if not rows:
            raise MetricError("empty matrix file")
        ln, head = rows[0]
        try:
            n = int(head.split()[0])
        except ValueError as exc:
            raise MetricError(f"line {ln}: expected point count, got {head!r}") from exc
        body = [_parse_row(ln, line) for ln, line in rows[1:]]
        if len(body) != n or any(len(r) != n for r in body):
            raise MetricError(f"expected {n} rows of {n} values")
        return from_matrix(body)
    raise MetricError(f"unknown mode {mode!r}")


def normalize(m: Metric) -> Metric:
    """Rescale so the minimum inter-point distance is exactly 1."""
    if m.n < 2:
        return replace(m, scale=1.0, _cache={})
    off = m.dist[~np.eye(m.n, dtype=bool)]
    dmin = float(off.min())
    if dmin == 1.0:
        return replace(m, _cache={})
    dist = m.dist / dmin
    coords = None if m.coords is None else m.coords / dmin
    return Metric(dist=dist, coords=coords, scale=m.scale * dmin)


def metric_diameter(m: Metric) -> float:
    if "diameter" not in m._cache:
        m._cache["diameter"] = float(m.dist.max(initial=0.0))
    return m._cache["diameter"]


def mst_weight(m: Metric) -> float:
    if "mst" not in m._cache:
        m._cache["mst"] = prim_mst_weight(m.dist)
    return m._cache["mst"]


def min_distance(m: Metric) -> float:
    if m.n < 2:
        return 0.0
    return float(m.dist[~np.eye(m.n, dtype=bool)].min())


def triangle_violations(m: Metric, samples: int | None = None, seed: int = 0):
    """Triples (a, b, c) with d(a,c) > d(a,b) + d(b,c) beyond roundoff.

    Exhaustive for n <= 64, otherwise ``samples`` (default 10n) random triples.
    """
    d = m.dist
    tol = 1e-9 * max(1.0, float(d.max(initial=0.0)))
    if m.n <= 64:
        # d[a, c] > d[a, b] + d[b, c] for any b
        via = d[:, :, None] + d[None, :, :]  # [a, b, c]
        bad = d[:, None, :] > via + tol
        return [tuple(map(int, t)) for t in np.argwhere(bad)]
    rng = np.random.default_rng(seed)
    k = samples if samples is not None else 10 * m.n
    t = rng.integers(0, m.n, size=(k, 3))
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    bad = d[a, c] > d[a, b] + d[b, c] + tol
    return [tuple(map(int, row)) for row in t[bad]]


def log5_ceil(x: float) -> int:
    """Smallest integer i with 5**i >= x (x > 0), robust to roundoff."""
    if x <= 1.0:
        return 0
    i = max(0, int(math.floor(math.log(x, 5))) - 1)
    while 5.0**i < x * (1.0 - 1e-12):
        i += 1
    return i


def pairs(n: int):
    return itertools.combinations(range(n), 2)
