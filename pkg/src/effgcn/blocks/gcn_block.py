"""GCN block: SGC layer, a stack of TC layers and an attention layer."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.errors import ArgumentError
from ..core.models import SE_REDUCTION, AttentionKind, LayerKind, parse_attention_kind
from ..graph.partitions import PartitionedAdjacency
from ..tensor.engine import Tensor
from ..tensor.module import Module, ModuleList
from .attention import make_attention
from .graph_conv import SpatialGraphLayer
from .temporal import LayerSpec, make_tc_layer


@dataclass(frozen=True)
class BlockSpec:
    """Shape of one GCN block.

    Attributes:
        channels_in: Input width of the SGC layer.
        channels_out: Width of the SGC layer and all TC layers.
        depth: Number of TC layers; 0 means SGC + attention only.
        stride: Temporal stride of the first TC layer.
        attention: Attention module appended after the TC layers.
        layer_kind: TC layer family.
        kernel: Temporal window L.
        ratio: TC layer ratio.
        attention_ratio: Reduction ratio of the attention module.
    """

    channels_in: int
    channels_out: int
    depth: int
    stride: int = 1
    attention: AttentionKind = AttentionKind.ST_JOINT
    layer_kind: LayerKind = LayerKind.SG
    kernel: int = 5
    ratio: float = 2.0
    attention_ratio: float = SE_REDUCTION

    def __post_init__(self):
        object.__setattr__(self, "attention", parse_attention_kind(self.attention))

    def validate(self) -> "BlockSpec":
        if self.depth < 0:
            raise ArgumentError(f"Block depth must be >= 0, got {self.depth}")
        if self.channels_in < 1 or self.channels_out < 1:
            raise ArgumentError("Block widths must be positive")
        return self

    def layer_specs(self) -> list[LayerSpec]:
        return [
            LayerSpec(
                kind=self.layer_kind,
                channels_in=self.channels_out,
                channels_out=self.channels_out,
                kernel=self.kernel,
                stride=self.stride if i == 0 else 1,
                ratio=self.ratio,
            )
            for i in range(self.depth)
        ]

    def output_frames(self, frames: int) -> int:
        """Frames after this block (the stride only applies when depth > 0)."""
        if self.depth == 0 or self.stride == 1:
            return frames
        return (frames - 1) // self.stride + 1


class GCNBlock(Module):
    """SGC layer -> ``depth`` TC layers -> optional attention layer."""

    def __init__(
        self,
        spec: BlockSpec,
        adjacency: PartitionedAdjacency,
        frames: int,
        rng: np.random.Generator,
    ):
        super().__init__()
        spec.validate()
        self.spec = spec
        self.sgc = SpatialGraphLayer(spec.channels_in, spec.channels_out, adjacency, rng)
        self.tcn = ModuleList(make_tc_layer(s, rng) for s in spec.layer_specs())
        self.attention = make_attention(
            spec.attention,
            spec.channels_out,
            spec.output_frames(frames),
            adjacency.num_joints,
            rng,
            ratio=spec.attention_ratio,
        )

    def forward(self, x: Tensor) -> Tensor:
        out = self.sgc(x)
        for layer in self.tcn:
            out = layer(out)
        if self.attention is not None:
            out = self.attention(out)
        return out


def gcn_block(
    x: Tensor,
    spec: BlockSpec,
    adjacency: PartitionedAdjacency,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """Build a freshly initialized block for ``x`` and apply it."""
    block = GCNBlock(spec, adjacency, x.shape[2], rng or np.random.default_rng(0))
    return block(x)
