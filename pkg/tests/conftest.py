import numpy as np
import pytest

from ftspanner import build_net_tree, from_coords, normalize
from ftspanner.construct import DerivedParams, compute_sets


@pytest.fixture
def four_points():
    """1-D points 0, 1, 7, 30 (already at minimum distance 1)."""
    return normalize(from_coords([0.0, 1.0, 7.0, 30.0]))


@pytest.fixture
def four_point_table(four_points):
    t = build_net_tree(four_points, 400.0)
    params = DerivedParams.derive(t, 1, 0.5)
    return t, compute_sets(t, params)


def rng_points(n, seed=0, dim=2):
    return normalize(from_coords(np.random.default_rng(seed).random((n, dim))))
