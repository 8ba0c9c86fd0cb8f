"""Data models shared by the architecture, profiler and training code."""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Optional

import numpy as np

from .errors import ArgumentError


class LayerKind(str, Enum):
    """Temporal convolution layer family."""

    BASIC = "basic"
    BOTTLE = "bottle"
    SEP = "sep"
    EPSEP = "epsep"
    SG = "sg"


class AttentionKind(str, Enum):
    """Attention module appended to every GCN block."""

    ST_JOINT = "st_joint"
    CHANNEL = "channel"
    FRAME = "frame"
    JOINT = "joint"
    NONE = "none"


BRANCH_NAMES = ("joint", "velocity", "bone")

# Ratio used when the CLI or a caller does not pass one.
DEFAULT_LAYER_RATIO = {
    LayerKind.BASIC: 1.0,
    LayerKind.BOTTLE: 4.0,
    LayerKind.SEP: 1.0,
    LayerKind.EPSEP: 2.0,
    LayerKind.SG: 2.0,
}

SE_REDUCTION = 4.0

FLOPS_CONVENTION = "1 MAC = 1 FLOP for conv/FC/adjacency matmuls; BN, activations and pooling excluded"


def parse_layer_kind(value: "LayerKind | str") -> LayerKind:
    try:
        return LayerKind(value)
    except ValueError:
        raise ArgumentError(
            f"Unknown layer kind '{value}'; expected one of "
            f"{', '.join(k.value for k in LayerKind)}") from None


def parse_attention_kind(value: "AttentionKind | str") -> AttentionKind:
    try:
        return AttentionKind(value)
    except ValueError:
        raise ArgumentError(
            f"Unknown attention kind '{value}'; expected one of "
            f"{', '.join(k.value for k in AttentionKind)}") from None


@dataclass(frozen=True)
class ScalingConfig:
    """Compound scaling inputs.

    Attributes:
        alpha: Width multiplier base (α ≥ 1).
        beta: Depth multiplier base (β ≥ 1).
        phi: Compound coefficient (φ ≥ 0).
        base_channels: Per-stage channel widths before scaling.
        base_depths: Per-stage TC-layer depths before scaling.
    """

    alpha: float = 1.2
    beta: float = 1.35
    phi: int = 0
    base_channels: tuple[int, ...] = (48, 24, 64, 128)
    base_depths: tuple[float, ...] = (0.5, 0.5, 1.0, 1.0)

    def validate(self) -> "ScalingConfig":
        if self.alpha < 1 or self.beta < 1:
            raise ArgumentError(
                f"alpha and beta must be >= 1, got alpha={self.alpha}, beta={self.beta}")
        if self.phi < 0:
            raise ArgumentError(f"phi must be non-negative, got {self.phi}")
        if len(self.base_channels) != len(self.base_depths):
            raise ArgumentError("base_channels and base_depths must have equal length")
        return self

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "phi": self.phi,
            "base_channels": list(self.base_channels),
            "base_depths": list(self.base_depths),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScalingConfig":
        return cls(
            alpha=float(data.get("alpha", 1.2)),
            beta=float(data.get("beta", 1.35)),
            phi=int(data.get("phi", 0)),
            base_channels=tuple(int(c) for c in data.get("base_channels", (48, 24, 64, 128))),
            base_depths=tuple(float(d) for d in data.get("base_depths", (0.5, 0.5, 1.0, 1.0))),
        )


@dataclass(frozen=True)
class ArchPlan:
    """A concrete network architecture produced by compound scaling.

    Stages ``0 .. fusion_stage-1`` run once per input branch; the remaining
    stages form the main stream after channel concatenation.

    Attributes:
        phi: Compound coefficient the plan was generated with.
        alpha: Width multiplier base.
        beta: Depth multiplier base.
        layer_kind: TC layer family used in every block.
        ratio: r_rd for bottle/sg, r_ep for epsep, unused otherwise.
        max_distance: D, the largest graph distance with its own partition.
        kernel: L, the temporal window size (odd).
        stage_channels: Output width of each stage.
        stage_depths: Number of TC layers in each stage.
        num_classes: Classifier width Q.
        input_channels: Channels per input branch.
        init_channels: Width of the fixed per-branch init block.
        attention: Attention module appended to every stage block.
        attention_ratio: Explicit reduction ratio for ST-JointAtt; derived when None.
        fusion_stage: Number of per-branch stages before concatenation.
        branches: Input branches in use, in canonical order.
        stage_strides: Temporal stride of the first TC layer of each stage.
        channel_divisor: Every stage width must be a multiple of this.
    """

    phi: int
    alpha: float
    beta: float
    layer_kind: LayerKind
    ratio: float
    max_distance: int
    kernel: int
    stage_channels: tuple[int, ...]
    stage_depths: tuple[int, ...]
    num_classes: int = 60
    input_channels: int = 6
    init_channels: int = 64
    attention: AttentionKind = AttentionKind.ST_JOINT
    attention_ratio: Optional[float] = None
    fusion_stage: int = 2
    branches: tuple[str, ...] = BRANCH_NAMES
    stage_strides: tuple[int, ...] = (1, 1, 2, 2)
    channel_divisor: int = 16

    def __post_init__(self):
        object.__setattr__(self, "layer_kind", parse_layer_kind(self.layer_kind))
        object.__setattr__(self, "attention", parse_attention_kind(self.attention))
        object.__setattr__(self, "stage_channels", tuple(int(c) for c in self.stage_channels))
        object.__setattr__(self, "stage_depths", tuple(int(d) for d in self.stage_depths))
        object.__setattr__(self, "stage_strides", tuple(int(s) for s in self.stage_strides))
        object.__setattr__(self, "branches", tuple(self.branches))

    @property
    def num_stages(self) -> int:
        return len(self.stage_channels)

    @property
    def num_branches(self) -> int:
        return len(self.branches)

    @property
    def effective_attention_ratio(self) -> float:
        """Reduction ratio for the attention module of every block."""
        if self.attention != AttentionKind.ST_JOINT:
            return SE_REDUCTION
        if self.attention_ratio is not None:
            return float(self.attention_ratio)
        if self.layer_kind in (LayerKind.SG, LayerKind.BOTTLE):
            return float(self.ratio)
        return SE_REDUCTION

    def validate(self) -> "ArchPlan":
        """Check structural invariants.

        Raises:
            ArgumentError: On any inconsistent field.
        """
        n = self.num_stages
        if len(self.stage_depths) != n or len(self.stage_strides) != n:
            raise ArgumentError(
                "stage_channels, stage_depths and stage_strides must have equal length")
        if self.channel_divisor < 1:
            raise ArgumentError(f"channel_divisor must be positive, got {self.channel_divisor}")
        for i, c in enumerate(self.stage_channels):
            if c <= 0 or c % self.channel_divisor:
                raise ArgumentError(
                    f"Stage {i + 1} width {c} is not a positive multiple of {self.channel_divisor}")
        for i, d in enumerate(self.stage_depths):
            if d < 0:
                raise ArgumentError(f"Stage {i + 1} depth must be >= 0, got {d}")
        for i, s in enumerate(self.stage_strides):
            if s not in (1, 2):
                raise ArgumentError(f"Stage {i + 1} stride must be 1 or 2, got {s}")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ArgumentError(f"Temporal kernel must be a positive odd integer, got {self.kernel}")
        if self.max_distance < 0:
            raise ArgumentError(f"max_distance must be >= 0, got {self.max_distance}")
        if self.ratio < 1:
            raise ArgumentError(f"Layer ratio must be >= 1, got {self.ratio}")
        if self.attention_ratio is not None and self.attention_ratio < 1:
            raise ArgumentError(f"Attention ratio must be >= 1, got {self.attention_ratio}")
        if self.num_classes < 1:
            raise ArgumentError(f"num_classes must be positive, got {self.num_classes}")
        if self.input_channels < 1 or self.init_channels < 1:
            raise ArgumentError("input_channels and init_channels must be positive")
        if n and not 0 <= self.fusion_stage <= n:
            raise ArgumentError(f"fusion_stage must lie in [0, {n}], got {self.fusion_stage}")
        if not self.branches:
            raise ArgumentError("At least one input branch is required")
        unknown = [b for b in self.branches if b not in BRANCH_NAMES]
        if unknown:
            raise ArgumentError(f"Unknown input branches: {', '.join(unknown)}")
        if len(set(self.branches)) != len(self.branches):
            raise ArgumentError("Input branches must be distinct")
        return self

    def with_branches(self, branches: "tuple[str, ...] | list[str]") -> "ArchPlan":
        """Copy of the plan using the given branches in canonical order."""
        ordered = tuple(b for b in BRANCH_NAMES if b in set(branches))
        extra = set(branches) - set(BRANCH_NAMES)
        if extra:
            raise ArgumentError(f"Unknown input branches: {', '.join(sorted(extra))}")
        return replace(self, branches=ordered).validate()

    def shrink(self, factor: int = 2) -> "ArchPlan":
        """Copy with every width divided by ``factor`` (the desk-scale mini plan)."""
        if factor < 1:
            raise ArgumentError(f"Shrink factor must be >= 1, got {factor}")
        if self.channel_divisor % factor or self.init_channels % factor:
            raise ArgumentError(
                f"Cannot shrink widths divisible by {self.channel_divisor} by {factor}")
        return replace(
            self,
            stage_channels=tuple(c // factor for c in self.stage_channels),
            init_channels=self.init_channels // factor,
            channel_divisor=self.channel_divisor // factor,
        ).validate()

    def to_dict(self) -> dict[str, Any]:
        """Convert to the plan.json layout."""
        return {
            "phi": self.phi,
            "alpha": self.alpha,
            "beta": self.beta,
            "layer_kind": self.layer_kind.value,
            "ratio": self.ratio,
            "D": self.max_distance,
            "L": self.kernel,
            "stage_channels": list(self.stage_channels),
            "stage_depths": list(self.stage_depths),
            "num_classes": self.num_classes,
            "input_channels": self.input_channels,
            "init_channels": self.init_channels,
            "attention": self.attention.value,
            "attention_ratio": self.attention_ratio,
            "fusion_stage": self.fusion_stage,
            "branches": list(self.branches),
            "stage_strides": list(self.stage_strides),
            "channel_divisor": self.channel_divisor,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ArchPlan":
        """Create a validated plan from the plan.json layout.

        Only the keys of the original plan schema are required; the
        remaining ones fall back to their defaults.
        """
        try:
            att_ratio = data.get("attention_ratio")
            plan = cls(
                phi=int(data["phi"]),
                alpha=float(data["alpha"]),
                beta=float(data["beta"]),
                layer_kind=data["layer_kind"],
                ratio=float(data["ratio"]),
                max_distance=int(data["D"]),
                kernel=int(data["L"]),
                stage_channels=tuple(data["stage_channels"]),
                stage_depths=tuple(data["stage_depths"]),
                num_classes=int(data["num_classes"]),
                input_channels=int(data.get("input_channels", 6)),
                init_channels=int(data.get("init_channels", 64)),
                attention=data.get("attention", AttentionKind.ST_JOINT.value),
                attention_ratio=None if att_ratio is None else float(att_ratio),
                fusion_stage=int(data.get("fusion_stage", 2)),
                branches=tuple(data.get("branches", BRANCH_NAMES)),
                stage_strides=tuple(data.get("stage_strides", (1, 1, 2, 2))),
                channel_divisor=int(data.get("channel_divisor", 16)),
            )
        except KeyError as e:
            raise ArgumentError(f"Plan is missing key {e}") from e
        except (TypeError, ValueError) as e:
            if isinstance(e, ArgumentError):
                raise
            raise ArgumentError(f"Malformed plan: {e}") from e
        return plan.validate()


@dataclass
class BlockCost:
    """Parameter and FLOP count of one named network part."""

    name: str
    params: int
    flops: int

    def to_dict(self) -> dict[str, Any]:
        return {"block": self.name, "params": self.params, "flops": self.flops}


@dataclass
class ComplexityReport:
    """Analytic complexity of one network plan.

    Attributes:
        entries: Per-block breakdown; totals are always their sums.
        frames: T the FLOPs were counted at.
        joints: V the FLOPs were counted at.
        bodies: Number of bodies one forward pass processes.
        convention: Human-readable FLOPs counting convention.
    """

    entries: list[BlockCost] = field(default_factory=list)
    frames: int = 0
    joints: int = 0
    bodies: int = 1
    convention: str = FLOPS_CONVENTION

    @property
    def total_params(self) -> int:
        return sum(e.params for e in self.entries)

    @property
    def total_flops(self) -> int:
        return sum(e.flops for e in self.entries)

    def header(self) -> str:
        return f"{self.convention}; T={self.frames}, V={self.joints}, bodies={self.bodies}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "total_params": self.total_params,
            "total_flops": self.total_flops,
            "frames": self.frames,
            "joints": self.joints,
            "bodies": self.bodies,
            "convention": self.convention,
            "per_block": [e.to_dict() for e in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ComplexityReport":
        return cls(
            entries=[BlockCost(e["block"], int(e["params"]), int(e["flops"]))
                     for e in data.get("per_block", [])],
            frames=int(data.get("frames", 0)),
            joints=int(data.get("joints", 0)),
            bodies=int(data.get("bodies", 1)),
            convention=data.get("convention", FLOPS_CONVENTION),
        )


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer, schedule and loader settings for one training run."""

    epochs: int = 70
    base_lr: float = 0.1
    warmup_epochs: int = 10
    momentum: float = 0.9
    weight_decay: float = 1e-4
    dropout: float = 0.25
    batch_size: int = 16
    seed: int = 0
    exclude_norm_decay: bool = True

    def validate(self) -> "TrainConfig":
        if self.epochs < 1:
            raise ArgumentError(f"epochs must be positive, got {self.epochs}")
        if not 0 <= self.warmup_epochs < self.epochs:
            raise ArgumentError(
                f"warmup_epochs must lie in [0, epochs), got {self.warmup_epochs} "
                f"for {self.epochs} epochs")
        if not 0 <= self.dropout < 1:
            raise ArgumentError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.batch_size < 1:
            raise ArgumentError(f"batch_size must be positive, got {self.batch_size}")
        if self.seed < 0:
            raise ArgumentError(f"seed must be non-negative, got {self.seed}")
        if self.base_lr < 0 or self.momentum < 0 or self.weight_decay < 0:
            raise ArgumentError("base_lr, momentum and weight_decay must be non-negative")
        return self

    def to_dict(self) -> dict[str, Any]:
        return {
            "epochs": self.epochs,
            "base_lr": self.base_lr,
            "warmup_epochs": self.warmup_epochs,
            "momentum": self.momentum,
            "weight_decay": self.weight_decay,
            "dropout": self.dropout,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "exclude_norm_decay": self.exclude_norm_decay,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainConfig":
        defaults = cls()
        return cls(
            epochs=int(data.get("epochs", defaults.epochs)),
            base_lr=float(data.get("base_lr", defaults.base_lr)),
            warmup_epochs=int(data.get("warmup_epochs", defaults.warmup_epochs)),
            momentum=float(data.get("momentum", defaults.momentum)),
            weight_decay=float(data.get("weight_decay", defaults.weight_decay)),
            dropout=float(data.get("dropout", defaults.dropout)),
            batch_size=int(data.get("batch_size", defaults.batch_size)),
            seed=int(data.get("seed", defaults.seed)),
            exclude_norm_decay=bool(data.get("exclude_norm_decay", defaults.exclude_norm_decay)),
        )


@dataclass
class Metrics:
    """Classification quality of one evaluation pass.

    Attributes:
        loss: Mean cross-entropy over the evaluated samples.
        top1_accuracy: trace(confusion) / total.
        confusion: Q x Q counts; rows are truth, columns are prediction.
    """

    loss: float
    top1_accuracy: float
    confusion: np.ndarray

    @classmethod
    def from_confusion(cls, confusion: np.ndarray, loss: float = float("nan")) -> "Metrics":
        confusion = np.asarray(confusion, dtype=np.int64)
        total = int(confusion.sum())
        accuracy = float(np.trace(confusion)) / total if total else 0.0
        return cls(loss=float(loss), top1_accuracy=accuracy, confusion=confusion)

    @property
    def num_samples(self) -> int:
        return int(self.confusion.sum())

    def to_dict(self) -> dict[str, Any]:
        return {
            "loss": self.loss,
            "top1_accuracy": self.top1_accuracy,
            "num_samples": self.num_samples,
            "confusion": self.confusion.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Metrics":
        return cls(
            loss=float(data["loss"]),
            top1_accuracy=float(data["top1_accuracy"]),
            confusion=np.asarray(data["confusion"], dtype=np.int64),
        )
