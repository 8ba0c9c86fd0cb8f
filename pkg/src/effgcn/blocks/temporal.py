"""Temporal convolution layer zoo: basic, bottle, sep, epsep and sg.

Every sub-layer is conv -> BN, with Swish between sub-layers. The layer's
residual (identity, or a strided pointwise projection + BN when the stride
or width changes) is added before the final Swish.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.errors import ArgumentError
from ..core.models import LayerKind, parse_layer_kind
from ..tensor import ops
from ..tensor.engine import Tensor
from ..tensor.layers import BatchNorm, PointwiseConv, TemporalConv
from ..tensor.module import Module, ModuleList


def reduced_channels(channels: int, ratio: float) -> int:
    """channels / ratio rounded down, never below 1."""
    return max(1, int(channels // ratio))


def expanded_channels(channels: int, ratio: float) -> int:
    """channels * ratio rounded down, never below 1."""
    return max(1, int(channels * ratio))


@dataclass(frozen=True)
class LayerSpec:
    """Shape of one TC layer.

    Attributes:
        kind: Layer family.
        channels_in: Input width.
        channels_out: Output width.
        kernel: Temporal window L (odd).
        stride: 1 or 2.
        ratio: r_rd for bottle/sg, r_ep for epsep; ignored otherwise.
    """

    kind: LayerKind
    channels_in: int
    channels_out: int
    kernel: int = 5
    stride: int = 1
    ratio: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", parse_layer_kind(self.kind))

    def validate(self) -> "LayerSpec":
        if self.channels_in < 1 or self.channels_out < 1:
            raise ArgumentError(
                f"Layer widths must be positive, got {self.channels_in}->{self.channels_out}")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ArgumentError(f"Temporal kernel must be a positive odd integer, got {self.kernel}")
        if self.stride not in (1, 2):
            raise ArgumentError(f"Stride must be 1 or 2, got {self.stride}")
        if self.ratio < 1:
            raise ArgumentError(f"Layer ratio must be >= 1, got {self.ratio}")
        return self

    @property
    def needs_projection(self) -> bool:
        return self.stride != 1 or self.channels_in != self.channels_out


class ConvBN(Module):
    """A convolution followed by batch normalization."""

    def __init__(self, conv: Module, channels: int):
        super().__init__()
        self.conv = conv
        self.bn = BatchNorm(channels)

    def forward(self, x: Tensor) -> Tensor:
        return self.bn(self.conv(x))


class TemporalLayer(Module):
    """Sequential conv-BN units joined by Swish, plus the residual link."""

    def __init__(self, spec: LayerSpec, units: list[ConvBN], rng: np.random.Generator):
        super().__init__()
        self.spec = spec
        self.units = ModuleList(units)
        if spec.needs_projection:
            self.residual = ConvBN(
                PointwiseConv(spec.channels_in, spec.channels_out, rng, stride=spec.stride),
                spec.channels_out)
        else:
            self.residual: Optional[ConvBN] = None

    def forward(self, x: Tensor) -> Tensor:
        out = x
        last = len(self.units) - 1
        for i, unit in enumerate(self.units):
            out = unit(out)
            if i < last:
                out = ops.swish(out)
        res = x if self.residual is None else self.residual(x)
        return ops.swish(out + res)


def _temporal(c_in, c_out, spec, rng, stride=1, depthwise=False) -> ConvBN:
    groups = c_in if depthwise else 1
    return ConvBN(TemporalConv(c_in, c_out, spec.kernel, rng, stride=stride, groups=groups), c_out)


def _pointwise(c_in, c_out, rng) -> ConvBN:
    return ConvBN(PointwiseConv(c_in, c_out, rng), c_out)


def make_tc_layer(spec: LayerSpec, rng: np.random.Generator) -> TemporalLayer:
    """Build one TC layer of the given family.

    basic: Lx1 full conv.
    bottle: pointwise reduce by r, Lx1 full conv, pointwise to C_out.
    sep: Lx1 depth-wise, pointwise to C_out.
    epsep: pointwise expand by r, Lx1 depth-wise, pointwise to C_out.
    sg: Lx1 depth-wise, pointwise reduce by r, pointwise to C_out, Lx1 depth-wise.

    The stride sits on the (first) temporal conv, except for sg where it
    sits on the trailing depth-wise conv.
    """
    spec.validate()
    c_in, c_out, s = spec.channels_in, spec.channels_out, spec.stride
    if spec.kind == LayerKind.BASIC:
        units = [_temporal(c_in, c_out, spec, rng, stride=s)]
    elif spec.kind == LayerKind.BOTTLE:
        inner = reduced_channels(c_in, spec.ratio)
        units = [
            _pointwise(c_in, inner, rng),
            _temporal(inner, inner, spec, rng, stride=s),
            _pointwise(inner, c_out, rng),
        ]
    elif spec.kind == LayerKind.SEP:
        units = [
            _temporal(c_in, c_in, spec, rng, stride=s, depthwise=True),
            _pointwise(c_in, c_out, rng),
        ]
    elif spec.kind == LayerKind.EPSEP:
        inner = expanded_channels(c_in, spec.ratio)
        units = [
            _pointwise(c_in, inner, rng),
            _temporal(inner, inner, spec, rng, stride=s, depthwise=True),
            _pointwise(inner, c_out, rng),
        ]
    elif spec.kind == LayerKind.SG:
        inner = reduced_channels(c_in, spec.ratio)
        units = [
            _temporal(c_in, c_in, spec, rng, depthwise=True),
            _pointwise(c_in, inner, rng),
            _pointwise(inner, c_out, rng),
            _temporal(c_out, c_out, spec, rng, stride=s, depthwise=True),
        ]
    else:
        raise ArgumentError(f"Unknown layer kind: {spec.kind}")
    return TemporalLayer(spec, units, rng)
