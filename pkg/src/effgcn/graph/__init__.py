"""Skeleton graph structure: joints, hop distances, and adjacency partitions."""

from .skeleton import SkeletonGraph, chain_graph, hop_distances, load_graph, ntu_graph
from .partitions import (
    DEGREE_EPS,
    PartitionedAdjacency,
    build_partitions,
    normalize_partition,
    row_normalize_partition,
)

__all__ = [
    "SkeletonGraph",
    "chain_graph",
    "hop_distances",
    "load_graph",
    "ntu_graph",
    "DEGREE_EPS",
    "PartitionedAdjacency",
    "build_partitions",
    "normalize_partition",
    "row_normalize_partition",
]
