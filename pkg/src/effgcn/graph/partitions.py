"""Distance-based adjacency partitions and their normalization."""

from dataclasses import dataclass

import numpy as np

from ..core.errors import ArgumentError
from .skeleton import SkeletonGraph, hop_distances


DEGREE_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class PartitionedAdjacency:
    """Binary distance partitions A_0..A_D and their normalized forms.

    Attributes:
        max_distance: D, the largest hop distance with its own partition.
        partitions: Array (D+1, V, V); partitions[d][i][j] = 1 iff d(i, j) = d.
        normalized: Array (D+1, V, V) holding Λ^-1/2 A_d Λ^-1/2.
    """

    max_distance: int
    partitions: np.ndarray
    normalized: np.ndarray

    @property
    def num_partitions(self) -> int:
        return self.max_distance + 1

    @property
    def num_joints(self) -> int:
        return self.partitions.shape[-1]

    def row_normalized(self) -> np.ndarray:
        """Partitions divided by the exact neighbour-subset size (graph-conv oracle form)."""
        return np.stack([row_normalize_partition(a) for a in self.partitions])


def build_partitions(graph: SkeletonGraph, max_distance: int) -> PartitionedAdjacency:
    """Split joint pairs by hop distance into D+1 binary matrices.

    Args:
        graph: Skeleton graph.
        max_distance: D >= 0. Pairs farther apart than D appear in no partition.

    Returns:
        PartitionedAdjacency with raw and symmetric-normalized partitions.
    """
    if max_distance < 0:
        raise ArgumentError(f"max_distance must be non-negative, got {max_distance}")
    dist = hop_distances(graph)
    partitions = np.stack([(dist == d).astype(np.float64) for d in range(max_distance + 1)])
    normalized = np.stack([normalize_partition(a) for a in partitions])
    partitions.setflags(write=False)
    normalized.setflags(write=False)
    return PartitionedAdjacency(
        max_distance=max_distance, partitions=partitions, normalized=normalized)


def _check_square(adjacency: np.ndarray) -> np.ndarray:
    adjacency = np.asarray(adjacency, dtype=np.float64)
    if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
        raise ArgumentError(f"Adjacency must be square, got shape {adjacency.shape}")
    return adjacency


def normalize_partition(adjacency: np.ndarray) -> np.ndarray:
    """Symmetric normalization Λ^-1/2 A Λ^-1/2 with a regularized degree.

    Λ_ii = Σ_j A[i][j] + DEGREE_EPS, so all-zero rows stay all-zero.
    """
    adjacency = _check_square(adjacency)
    inv_sqrt = 1.0 / np.sqrt(adjacency.sum(axis=1) + DEGREE_EPS)
    return inv_sqrt[:, None] * adjacency * inv_sqrt[None, :]


def row_normalize_partition(adjacency: np.ndarray) -> np.ndarray:
    """Normalize so that feature aggregation x @ A averages each joint's subset.

    Column w of the result is A[w, :] / |subset(w)|, which matches the per-joint
    sum with Z = neighbour-subset size. Empty subsets stay zero.
    """
    adjacency = _check_square(adjacency)
    degree = adjacency.sum(axis=1)
    inv = np.divide(1.0, degree, out=np.zeros_like(degree), where=degree > 0)
    return adjacency.T * inv[None, :]
