"""Spatial graph convolution over distance-partitioned adjacency."""

from typing import Optional, Sequence

import numpy as np

from ..core.errors import ArgumentError
from ..graph.partitions import PartitionedAdjacency
from ..tensor import ops
from ..tensor.engine import Tensor, as_tensor
from ..tensor.layers import BatchNorm, PointwiseConv
from ..tensor.module import Module, Parameter, xavier_uniform


def _adjacency_array(adjacency: "PartitionedAdjacency | np.ndarray") -> np.ndarray:
    if isinstance(adjacency, PartitionedAdjacency):
        return adjacency.normalized
    adjacency = np.asarray(adjacency)
    if adjacency.ndim != 3 or adjacency.shape[1] != adjacency.shape[2]:
        raise ArgumentError(f"Adjacency stack must be (K, V, V), got {adjacency.shape}")
    return adjacency


def graph_conv(
    x: Tensor,
    weight: Tensor,
    adjacency: np.ndarray,
    edge_importance: Tensor,
    bias: Optional[Tensor] = None,
) -> Tensor:
    """Σ_d W_d · x · (A_d ⊙ M_d) for stacked partition weights.

    Args:
        x: Input (N, C_in, T, V).
        weight: Stacked W_d of shape (K * C_out, C_in), partition-major.
        adjacency: Normalized partitions (K, V, V).
        edge_importance: M_d stacked as (K, V, V).
        bias: Optional (K * C_out,) bias of the stacked pointwise conv.
    """
    num_partitions = adjacency.shape[0]
    if weight.shape[0] % num_partitions:
        raise ArgumentError(
            f"Stacked weight rows {weight.shape[0]} not divisible by {num_partitions} partitions")
    if edge_importance.shape != adjacency.shape:
        raise ArgumentError(
            f"Edge importance {edge_importance.shape} does not match adjacency {adjacency.shape}")
    if x.shape[3] != adjacency.shape[1]:
        raise ArgumentError(
            f"Input has {x.shape[3]} joints, adjacency has {adjacency.shape[1]}")
    n, _, frames, joints = x.shape
    c_out = weight.shape[0] // num_partitions
    h = ops.pointwise_conv(x, weight)
    if bias is not None:
        h = h + bias.reshape(1, -1, 1, 1)
    h = h.reshape(n, num_partitions, c_out, frames, joints)
    masked = edge_importance * as_tensor(adjacency, like=h)
    return ops.graph_aggregate(h, masked)


def sgc_forward(
    x: Tensor,
    adjacency: "PartitionedAdjacency | np.ndarray",
    weights: Sequence[Tensor],
    edge_importance: Sequence[Tensor],
    residual: Optional[Tensor] = None,
) -> Tensor:
    """Functional spatial graph convolution with an optional residual term.

    Args:
        x: Input (N, C_in, T, V).
        adjacency: Partitions whose ``normalized`` stack is used, or an
            explicit (K, V, V) stack.
        weights: One (C_out, C_in) pointwise weight per partition.
        edge_importance: One (V, V) mask per partition.
        residual: Added to the aggregated output when given.

    Raises:
        ArgumentError: If the weight or mask count differs from the partition count.
    """
    stack = _adjacency_array(adjacency)
    k = stack.shape[0]
    if len(weights) != k or len(edge_importance) != k:
        raise ArgumentError(
            f"Expected {k} weights and masks, got {len(weights)} and {len(edge_importance)}")
    weight = ops.concat(list(weights), axis=0)
    masks = ops.concat([m.reshape(1, *m.shape) for m in edge_importance], axis=0)
    out = graph_conv(x, weight, stack, masks)
    return out if residual is None else out + residual


class SpatialGraphLayer(Module):
    """SGC layer: graph conv, BN, residual link, Swish.

    The residual is the identity when widths match, otherwise a pointwise
    projection followed by BN.
    """

    def __init__(
        self,
        c_in: int,
        c_out: int,
        adjacency: PartitionedAdjacency,
        rng: np.random.Generator,
    ):
        super().__init__()
        self.c_in, self.c_out = c_in, c_out
        self.adjacency = adjacency.normalized
        k, v = adjacency.num_partitions, adjacency.num_joints
        self.weight = Parameter(xavier_uniform((k * c_out, c_in), rng))
        self.bias = Parameter(np.zeros(k * c_out), decay=False)
        self.edge_importance = Parameter(np.ones((k, v, v)), decay=False)
        self.bn = BatchNorm(c_out)
        if c_in != c_out:
            self.residual_conv = PointwiseConv(c_in, c_out, rng)
            self.residual_bn = BatchNorm(c_out)
        else:
            self.residual_conv = None
            self.residual_bn = None

    def forward(self, x: Tensor) -> Tensor:
        out = self.bn(graph_conv(x, self.weight, self.adjacency, self.edge_importance, self.bias))
        res = x if self.residual_conv is None else self.residual_bn(self.residual_conv(x))
        return ops.swish(out + res)
