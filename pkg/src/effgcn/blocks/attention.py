"""ST-JointAtt and SE-style channel/frame/joint attention."""

from typing import Optional

import numpy as np

from ..core.errors import ArgumentError
from ..core.models import SE_REDUCTION, AttentionKind, parse_attention_kind
from ..tensor import ops
from ..tensor.engine import Tensor
from ..tensor.layers import BatchNorm, Linear, PointwiseConv
from ..tensor.module import Module
from .temporal import reduced_channels


class STJointAttention(Module):
    """Weights of the spatial-temporal joint attention.

    Attributes:
        fcn: W, compacting C channels to C/r over the pooled frame+joint axis.
        bn_inner: BN over the compacted features.
        conv_t: W_t, frame scores.
        conv_v: W_v, joint scores.
    """

    def __init__(self, channels: int, rng: np.random.Generator, ratio: float = SE_REDUCTION):
        super().__init__()
        self.channels = channels
        self.inner = reduced_channels(channels, ratio)
        self.fcn = PointwiseConv(channels, self.inner, rng)
        self.bn_inner = BatchNorm(self.inner)
        self.conv_t = PointwiseConv(self.inner, channels, rng)
        self.conv_v = PointwiseConv(self.inner, channels, rng)

    def forward(self, x: Tensor) -> Tensor:
        return st_joint_att(x, self)


def st_joint_att(x: Tensor, weights: STJointAttention) -> Tensor:
    """Scale x by the per-channel outer product of frame and joint scores."""
    if x.ndim != 4 or x.shape[1] != weights.channels:
        raise ArgumentError(
            f"ST-JointAtt expects (N, {weights.channels}, T, V), got {x.shape}")
    n, c, frames, joints = x.shape
    pool_t = ops.mean_over_axes(x, (3,))
    pool_v = ops.mean_over_axes(x, (2,))
    pooled = ops.concat([pool_t, pool_v], axis=2).reshape(n, c, frames + joints, 1)
    inner = ops.hardswish(weights.bn_inner(weights.fcn(pooled)))
    inner_t = inner[:, :, :frames]
    inner_v = inner[:, :, frames:]
    score_t = ops.sigmoid(weights.conv_t(inner_t))
    score_v = ops.sigmoid(weights.conv_v(inner_v)).transpose(0, 1, 3, 2)
    return x * score_t * score_v


_SE_AXES = {
    AttentionKind.CHANNEL: (1, (2, 3)),
    AttentionKind.FRAME: (2, (1, 3)),
    AttentionKind.JOINT: (3, (1, 2)),
}


class SEAttention(Module):
    """Squeeze-excitation scores along one axis of (N, C, T, V)."""

    def __init__(
        self,
        kind: "AttentionKind | str",
        size: int,
        rng: np.random.Generator,
        ratio: float = SE_REDUCTION,
    ):
        super().__init__()
        self.kind = parse_attention_kind(kind)
        if self.kind not in _SE_AXES:
            raise ArgumentError(f"SE attention kind must be channel, frame or joint, got {kind}")
        self.size = size
        self.inner = reduced_channels(size, ratio)
        self.fc1 = Linear(size, self.inner, rng)
        self.fc2 = Linear(self.inner, size, rng)

    def forward(self, x: Tensor) -> Tensor:
        return se_attention(x, self.kind, self)


def se_attention(x: Tensor, kind: "AttentionKind | str", weights: SEAttention) -> Tensor:
    """Pool away the two other axes, excite through two FC layers, rescale."""
    kind = parse_attention_kind(kind)
    if kind not in _SE_AXES:
        raise ArgumentError(f"SE attention kind must be channel, frame or joint, got {kind}")
    axis, pooled_axes = _SE_AXES[kind]
    if x.ndim != 4 or x.shape[axis] != weights.size:
        raise ArgumentError(
            f"{kind.value} attention expects size {weights.size} on axis {axis}, got {x.shape}")
    squeezed = ops.mean_over_axes(x, pooled_axes)
    scores = ops.sigmoid(weights.fc2(ops.relu(weights.fc1(squeezed))))
    shape = [x.shape[0], 1, 1, 1]
    shape[axis] = weights.size
    return x * scores.reshape(*shape)


class AttentionLayer(Module):
    """Residual wrapper: Swish(BN(att(x)) + x)."""

    def __init__(self, attention: Module, channels: int):
        super().__init__()
        self.att = attention
        self.bn = BatchNorm(channels)

    def forward(self, x: Tensor) -> Tensor:
        return ops.swish(self.bn(self.att(x)) + x)


def make_attention(
    kind: "AttentionKind | str",
    channels: int,
    frames: int,
    joints: int,
    rng: np.random.Generator,
    ratio: float = SE_REDUCTION,
) -> Optional[AttentionLayer]:
    """Wrapped attention module for a block output of shape (C, T, V)."""
    kind = parse_attention_kind(kind)
    if kind == AttentionKind.NONE:
        return None
    if kind == AttentionKind.ST_JOINT:
        module: Module = STJointAttention(channels, rng, ratio=ratio)
    else:
        size = {AttentionKind.CHANNEL: channels,
                AttentionKind.FRAME: frames,
                AttentionKind.JOINT: joints}[kind]
        module = SEAttention(kind, size, rng, ratio=ratio)
    return AttentionLayer(module, channels)
