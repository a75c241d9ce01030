"""Shortest paths in weighted unit-disk graphs via half-plane additively weighted
Voronoi diagrams, linear-time diagram merging and insertion-only nearest neighbours."""
from .geom_core import WeightedSite, weighted_distance, classify_bisector
from .vdplus import HalfPlaneVD, build_vdplus, build_locator, locate, nearest_site_bruteforce
from .vdmerge import merge_vdplus
from .awnn import DynamicNN, LogMethodNN, OfflineTreeNN, offline_solve
from .sssp import dijkstra_baseline, sssp_grid

__all__ = [
    "WeightedSite",
    "weighted_distance",
    "classify_bisector",
    "HalfPlaneVD",
    "build_vdplus",
    "build_locator",
    "locate",
    "nearest_site_bruteforce",
    "merge_vdplus",
    "DynamicNN",
    "LogMethodNN",
    "OfflineTreeNN",
    "offline_solve",
    "sssp_grid",
    "dijkstra_baseline",
]
__version__ = "0.1.0"
