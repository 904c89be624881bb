"""Fault-tolerant (1+eps)-spanners for finite doubling metrics."""
from .metric import Metric, MetricError, from_coords, from_matrix, load_points, normalize
from .nettree import NetTree, build_net_tree, default_gamma
from .construct import (
    ConstructionError,
    DerivedParams,
    FtSpanner,
    assemble_spanner,
    build_spanner,
    compute_sets,
)

__all__ = [
    "Metric",
    "MetricError",
    "from_coords",
    "from_matrix",
    "load_points",
    "normalize",
    "NetTree",
    "build_net_tree",
    "default_gamma",
    "ConstructionError",
    "DerivedParams",
    "FtSpanner",
    "assemble_spanner",
    "build_spanner",
    "compute_sets",
]
__version__ = "0.1.0"
