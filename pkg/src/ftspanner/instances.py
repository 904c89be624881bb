"""Seeded instance generators for tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .metric import Metric, from_coords, from_matrix, normalize


def uniform_points(n: int, seed: int = 0, dim: int = 2) -> Metric:
    """Uniform points in the unit cube, rescaled to minimum distance 1."""
    rng = np.random.default_rng(seed)
    return normalize(from_coords(rng.random((n, dim))))


def multiscale_points(n: int, seed: int = 0, branching: int = 6, ratio: float = 4000.0, dim: int = 2) -> Metric:
    """Recursively clustered points: each cluster holds ``branching`` sub-clusters.

    Sub-cluster centres are spread over a disc ``ratio`` times wider than the
    sub-clusters themselves, so the point set looks sparse at every scale.
    """
    rng = np.random.default_rng(seed)
    depth = 1
    while branching**depth < n:
        depth += 1
    centres = np.zeros((1, dim))
    scale = 1.0
    for _ in range(depth):
        off = rng.normal(size=(len(centres), branching, dim))
        off *= scale / np.linalg.norm(off, axis=2, keepdims=True).clip(1e-12)
        off *= rng.uniform(0.3, 1.0, size=(len(centres), branching, 1))
        centres = (centres[:, None, :] + off).reshape(-1, dim)
        scale /= ratio
    pick = rng.choice(len(centres), size=n, replace=False)
    return normalize(from_coords(centres[np.sort(pick)]))


def perturbed_matrix(n: int, seed: int = 0, noise: float = 0.3) -> Metric:
    """Planar distances scaled by random factors in [1, 1+noise], then metric-closed.

    The shortest-path closure restores the triangle inequality; the result
    stays within a factor 1+noise of a planar metric, hence doubling.
    """
    rng = np.random.default_rng(seed)
    base = from_coords(rng.random((n, 2))).dist
    f = rng.uniform(1.0, 1.0 + noise, size=(n, n))
    f = np.triu(f, 1)
    mat = base * (f + f.T + np.eye(n))
    for k in range(n):
        np.minimum(mat, mat[:, k, None] + mat[None, k, :], out=mat)
    np.fill_diagonal(mat, 0.0)
    return normalize(from_matrix(mat))


def dense_line(n: int, seed: int = 0, jitter: float = 0.25) -> Metric:
    """Nearly equally spaced points on a line (spacing 1 +- jitter)."""
    rng = np.random.default_rng(seed)
    steps = 1.0 + rng.uniform(-jitter, jitter, size=n - 1) if n > 1 else np.zeros(0)
    xs = np.concatenate([[0.0], np.cumsum(steps)])
    return normalize(from_coords(xs[:, None]))


FAMILIES = {
    "uniform": uniform_points,
    "multiscale": multiscale_points,
    "matrix": perturbed_matrix,
    "line": dense_line,
}


def make_instance(family: str, n: int, seed: int = 0) -> Metric:
    try:
        gen = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown instance family {family!r}; choose from {sorted(FAMILIES)}") from None
    return gen(n, seed)
