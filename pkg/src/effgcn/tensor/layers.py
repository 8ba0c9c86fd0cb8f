"""Parameterized layers wrapping the primitives in ``ops``."""

from typing import Optional

import numpy as np

from ..core.errors import ArgumentError
from .engine import Tensor, get_default_dtype
from .module import Module, Parameter, xavier_uniform
from . import ops


class PointwiseConv(Module):
    """1x1 convolution with bias, optionally sampling every ``stride``-th frame first."""

    def __init__(self, c_in: int, c_out: int, rng: np.random.Generator, stride: int = 1):
        super().__init__()
        self.c_in, self.c_out, self.stride = c_in, c_out, stride
        self.weight = Parameter(xavier_uniform((c_out, c_in), rng))
        self.bias = Parameter(np.zeros(c_out), decay=False)

    def forward(self, x: Tensor) -> Tensor:
        x = ops.temporal_pool_stride(x, self.stride)
        out = ops.pointwise_conv(x, self.weight)
        return out + self.bias.reshape(1, self.c_out, 1, 1)


class TemporalConv(Module):
    """Lx1 convolution with bias; ``groups == c_in`` makes it depth-wise."""

    def __init__(
        self,
        c_in: int,
        c_out: int,
        kernel: int,
        rng: np.random.Generator,
        stride: int = 1,
        groups: int = 1,
    ):
        super().__init__()
        self.c_in, self.c_out = c_in, c_out
        self.kernel, self.stride, self.groups = kernel, stride, groups
        self.weight = Parameter(xavier_uniform((c_out, c_in // groups, kernel, 1), rng))
        self.bias = Parameter(np.zeros(c_out), decay=False)

    def forward(self, x: Tensor) -> Tensor:
        out = ops.temporal_conv(x, self.weight, stride=self.stride, groups=self.groups)
        return out + self.bias.reshape(1, self.c_out, 1, 1)


class BatchNorm(Module):
    """Per-channel batch normalization with running statistics as buffers."""

    def __init__(self, channels: int):
        super().__init__()
        self.channels = channels
        self.gamma = Parameter(np.ones(channels), decay=False)
        self.beta = Parameter(np.zeros(channels), decay=False)
        dtype = get_default_dtype()
        self.register_buffer("running_mean", np.zeros(channels, dtype=dtype))
        self.register_buffer("running_var", np.ones(channels, dtype=dtype))

    def forward(self, x: Tensor) -> Tensor:
        return ops.batch_norm(
            x, self.gamma, self.beta, self.running_mean, self.running_var, self.training)


class Linear(Module):
    """Fully connected layer ``x @ W.T + b``."""

    def __init__(self, c_in: int, c_out: int, rng: np.random.Generator, bias: bool = True):
        super().__init__()
        self.c_in, self.c_out = c_in, c_out
        self.weight = Parameter(xavier_uniform((c_out, c_in), rng))
        self.bias: Optional[Parameter] = Parameter(np.zeros(c_out), decay=False) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        return ops.fully_connected(x, self.weight, self.bias)


class Dropout(Module):
    """Inverted dropout drawing its masks from a dedicated generator."""

    def __init__(self, p: float, rng: Optional[np.random.Generator] = None):
        super().__init__()
        if not 0 <= p < 1:
            raise ArgumentError(f"Dropout probability must lie in [0, 1), got {p}")
        self.p = p
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def forward(self, x: Tensor) -> Tensor:
        return ops.dropout(x, self.p, self.training, self.rng)
