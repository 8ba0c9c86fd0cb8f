"""The multi-input-branch network assembled from an ArchPlan."""

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from ..core.errors import ArgumentError
from ..core.models import ArchPlan, AttentionKind, LayerKind
from ..graph.partitions import PartitionedAdjacency, build_partitions
from ..graph.skeleton import SkeletonGraph
from ..tensor import ops
from ..tensor.engine import Tensor, get_default_dtype
from ..tensor.layers import BatchNorm, Dropout, Linear
from ..tensor.module import Module, ModuleDict
from .gcn_block import BlockSpec, GCNBlock


DEFAULT_DROPOUT = 0.25


@dataclass(frozen=True)
class BlockLayout:
    """Where a block sits in the network and what it sees.

    Attributes:
        name: Module name relative to its branch (per-branch blocks) or to ``main``.
        spec: Block shape.
        frames_in: Input frame count T at this block.
        per_branch: True for blocks replicated in every input branch.
    """

    name: str
    spec: BlockSpec
    frames_in: int
    per_branch: bool


def plan_blocks(plan: ArchPlan, frames: int) -> list[BlockLayout]:
    """Block sequence of a plan: the init block, then stage1..stageN.

    The init block is a basic-layer block without attention. Stages before
    ``plan.fusion_stage`` are per-branch; later stages see the concatenated
    branch widths.
    """
    if frames < 1:
        raise ArgumentError(f"frames must be positive, got {frames}")
    plan.validate()
    layouts = [BlockLayout(
        name="init_block",
        spec=BlockSpec(
            channels_in=plan.input_channels,
            channels_out=plan.init_channels,
            depth=1,
            stride=1,
            attention=AttentionKind.NONE,
            layer_kind=LayerKind.BASIC,
            kernel=plan.kernel,
        ),
        frames_in=frames,
        per_branch=True,
    )]
    width = plan.init_channels
    t = frames
    att_ratio = plan.effective_attention_ratio
    for i, (c_out, depth, stride) in enumerate(
            zip(plan.stage_channels, plan.stage_depths, plan.stage_strides)):
        per_branch = i < plan.fusion_stage
        c_in = width if per_branch or i != plan.fusion_stage else width * plan.num_branches
        spec = BlockSpec(
            channels_in=c_in,
            channels_out=c_out,
            depth=depth,
            stride=stride,
            attention=plan.attention,
            layer_kind=plan.layer_kind,
            kernel=plan.kernel,
            ratio=plan.ratio,
            attention_ratio=att_ratio,
        )
        layouts.append(BlockLayout(f"stage{i + 1}", spec, t, per_branch))
        width = c_out
        t = spec.output_frames(t)
    return layouts


def fused_width(plan: ArchPlan) -> int:
    """Channel width right after the branch concatenation."""
    if plan.fusion_stage == 0:
        return plan.init_channels * plan.num_branches
    return plan.stage_channels[plan.fusion_stage - 1] * plan.num_branches


class BranchStream(Module):
    """Input BN, init block and the per-branch stages of one input branch."""

    def __init__(
        self,
        layouts: list[BlockLayout],
        input_channels: int,
        adjacency: PartitionedAdjacency,
        rng: np.random.Generator,
    ):
        super().__init__()
        self.input_bn = BatchNorm(input_channels)
        self.block_names: list[str] = []
        for layout in layouts:
            setattr(self, layout.name, GCNBlock(layout.spec, adjacency, layout.frames_in, rng))
            self.block_names.append(layout.name)

    def forward(self, x: Tensor) -> Tensor:
        out = self.input_bn(x)
        for name in self.block_names:
            out = getattr(self, name)(out)
        return out


class EfficientGCN(Module):
    """Branch streams -> channel concat -> main stream -> GAP -> dropout -> FC.

    Inputs are arrays (N, B, C_in, T, V) with the branches in ``plan.branches``
    order; ``forward_bodies`` accepts (N, M, B, C_in, T, V) and averages the
    logits of the non-empty bodies.
    """

    def __init__(
        self,
        plan: ArchPlan,
        graph: SkeletonGraph,
        frames: int,
        rng: np.random.Generator,
        dropout_rng: Optional[np.random.Generator] = None,
        dropout: float = DEFAULT_DROPOUT,
    ):
        super().__init__()
        if plan.num_stages == 0:
            raise ArgumentError("Cannot build a network from a plan without stages")
        self.plan = plan
        self.frames = frames
        self.graph = graph
        self.num_joints = graph.num_joints
        self.dtype = get_default_dtype()
        self.partitions = build_partitions(graph, plan.max_distance)

        layouts = plan_blocks(plan, frames)
        branch_layouts = [l for l in layouts if l.per_branch]
        main_layouts = [l for l in layouts if not l.per_branch]
        self.branch_names = list(plan.branches)
        self.branches = ModuleDict({
            name: BranchStream(branch_layouts, plan.input_channels, self.partitions, rng)
            for name in self.branch_names
        })
        self.main = ModuleDict({
            l.name: GCNBlock(l.spec, self.partitions, l.frames_in, rng) for l in main_layouts
        })
        self.out_channels = plan.stage_channels[-1] if main_layouts else fused_width(plan)
        self.out_frames = layouts[-1].spec.output_frames(layouts[-1].frames_in)
        self.dropout = Dropout(dropout, dropout_rng or np.random.default_rng(0))
        self.fc = Linear(self.out_channels, plan.num_classes, rng)
        self.parameter_registry()

    def _as_input(self, x: Any, ndim: int) -> Tensor:
        x = x if isinstance(x, Tensor) else Tensor(np.asarray(x), dtype=self.dtype)
        if x.ndim != ndim:
            raise ArgumentError(f"Expected a {ndim}-d input, got shape {x.shape}")
        expected = (len(self.branch_names), self.plan.input_channels)
        if tuple(x.shape[-4:-2]) != expected:
            raise ArgumentError(
                f"Expected (branches, channels) = {expected}, got {tuple(x.shape[-4:-2])}")
        if x.shape[-1] != self.num_joints:
            raise ArgumentError(
                f"Input has {x.shape[-1]} joints, graph has {self.num_joints}")
        return x

    def forward_features(self, x: Any) -> Tensor:
        """Last feature map (N, C, T', V) before global pooling."""
        x = self._as_input(x, 5)
        streams = [self.branches[name](x[:, i]) for i, name in enumerate(self.branch_names)]
        out = streams[0] if len(streams) == 1 else ops.concat(streams, axis=1)
        for _, block in self.main.items():
            out = block(out)
        return out

    def forward(self, x: Any) -> Tensor:
        features = self.forward_features(x)
        pooled = ops.mean_over_axes(features, (2, 3))
        return self.fc(self.dropout(pooled))

    def forward_bodies(self, x: Any, body_mask: Optional[np.ndarray] = None) -> Tensor:
        """Sequence logits as the mean over non-empty bodies.

        Args:
            x: Array (N, M, B, C_in, T, V).
            body_mask: (N, M) booleans; derived from nonzero content when omitted.
        """
        x = self._as_input(x, 6)
        n, m = x.shape[:2]
        if body_mask is None:
            body_mask = np.any(x.data.reshape(n, m, -1) != 0, axis=2)
            body_mask[:, 0] |= ~body_mask.any(axis=1)
        weights = np.asarray(body_mask, dtype=self.dtype)
        weights = weights / weights.sum(axis=1, keepdims=True)
        logits = self.forward(x.reshape(n * m, *x.shape[2:]))
        logits = logits.reshape(n, m, -1) * Tensor(weights[:, :, None], dtype=self.dtype)
        return logits.sum(axis=1)


def build_network(
    plan: ArchPlan,
    graph: SkeletonGraph,
    num_classes: Optional[int] = None,
    frames: int = 300,
    seed: int = 0,
    dropout: float = DEFAULT_DROPOUT,
) -> EfficientGCN:
    """Construct and initialize a network for ``plan`` on ``graph``.

    Init weights and dropout masks draw from independent streams spawned
    from ``seed``, so runs with the same seed are identical.
    """
    if num_classes is not None and num_classes != plan.num_classes:
        raise ArgumentError(
            f"Plan is for {plan.num_classes} classes but {num_classes} were requested")
    init_seed, dropout_seed = np.random.SeedSequence(seed).spawn(2)
    return EfficientGCN(
        plan,
        graph,
        frames,
        rng=np.random.default_rng(init_seed),
        dropout_rng=np.random.default_rng(dropout_seed),
        dropout=dropout,
    )
