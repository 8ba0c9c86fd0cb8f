"""Compound width/depth scaling and architecture plan generation."""

import math
from dataclasses import dataclass
from typing import Any, Optional

from ..core.errors import ArgumentError, ScalingConstraintError
from ..core.models import (
    BRANCH_NAMES,
    DEFAULT_LAYER_RATIO,
    ArchPlan,
    AttentionKind,
    LayerKind,
    ScalingConfig,
    parse_layer_kind,
)


CHANNEL_STEP = 16
CONSTRAINT_TARGET = 2.0
CONSTRAINT_TOLERANCE = 0.1

DEFAULT_LAYER = LayerKind.SG
DEFAULT_MAX_DISTANCE = 2
DEFAULT_KERNEL = 5
DEFAULT_NUM_CLASSES = 60


def step_round(x: float) -> int:
    """Round to the nearest integer with exact halves rounding down.

    Raises:
        ArgumentError: If x is negative.
    """
    if x < 0:
        raise ArgumentError(f"step_round needs a non-negative input, got {x}")
    floor = math.floor(x)
    return floor + 1 if x - floor > 0.5 else floor


def scale_channels(base: int, alpha: float, phi: int, step: int = CHANNEL_STEP) -> int:
    """Scaled stage width, a positive multiple of ``step``."""
    if base <= 0:
        raise ArgumentError(f"Base channels must be positive, got {base}")
    return max(step_round(base / step * alpha ** phi), 1) * step


def scale_depth(base: float, beta: float, phi: int) -> int:
    """Scaled number of TC layers; may round to 0."""
    if base < 0:
        raise ArgumentError(f"Base depth must be non-negative, got {base}")
    return step_round(base * beta ** phi)


@dataclass(frozen=True)
class ScalingCheck:
    """Outcome of the α²β ≈ 2 check."""

    alpha: float
    beta: float
    product: float
    residual: float
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "product": self.product,
            "residual": self.residual,
            "passed": self.passed,
        }


def check_scaling_constraint(
    alpha: float,
    beta: float,
    tolerance: float = CONSTRAINT_TOLERANCE,
) -> ScalingCheck:
    """Residual |α²β - 2| and whether it is within ``tolerance``."""
    if alpha < 1 or beta < 1:
        raise ArgumentError(f"alpha and beta must be >= 1, got alpha={alpha}, beta={beta}")
    product = alpha * alpha * beta
    residual = abs(product - CONSTRAINT_TARGET)
    return ScalingCheck(alpha, beta, product, residual, residual <= tolerance)


def make_arch(
    config: ScalingConfig,
    layer_kind: "LayerKind | str" = DEFAULT_LAYER,
    max_distance: int = DEFAULT_MAX_DISTANCE,
    kernel: int = DEFAULT_KERNEL,
    ratio: Optional[float] = None,
    num_classes: int = DEFAULT_NUM_CLASSES,
    attention: "AttentionKind | str" = AttentionKind.ST_JOINT,
    attention_ratio: Optional[float] = None,
    fusion_stage: int = 2,
    branches: tuple[str, ...] = BRANCH_NAMES,
    allow_unconstrained: bool = False,
) -> ArchPlan:
    """Scale the base widths and depths by α^φ and β^φ into a plan.

    Args:
        config: Scaling inputs.
        layer_kind: TC layer family (default sg).
        max_distance: D.
        kernel: L.
        ratio: Layer ratio; the family default when None (sg uses 2).
        num_classes: Classifier width Q.
        attention: Attention kind for every stage block.
        attention_ratio: Explicit ST-JointAtt reduction ratio.
        fusion_stage: Per-branch stage count before concatenation.
        branches: Input branches in use.
        allow_unconstrained: Accept α, β violating the α²β ≈ 2 constraint.

    Raises:
        ScalingConstraintError: If the constraint fails and is not overridden.
    """
    config.validate()
    check = check_scaling_constraint(config.alpha, config.beta)
    if not check.passed and not allow_unconstrained:
        raise ScalingConstraintError(
            f"alpha^2 * beta = {check.product:.4f} is {check.residual:.4f} away from "
            f"{CONSTRAINT_TARGET} (tolerance {CONSTRAINT_TOLERANCE}); "
            "pass allow_unconstrained to override")
    kind = parse_layer_kind(layer_kind)
    unknown = sorted(set(branches) - set(BRANCH_NAMES))
    if unknown:
        raise ArgumentError(f"Unknown input branches: {', '.join(unknown)}")
    plan = ArchPlan(
        phi=config.phi,
        alpha=config.alpha,
        beta=config.beta,
        layer_kind=kind,
        ratio=float(DEFAULT_LAYER_RATIO[kind] if ratio is None else ratio),
        max_distance=max_distance,
        kernel=kernel,
        stage_channels=tuple(scale_channels(c, config.alpha, config.phi)
                             for c in config.base_channels),
        stage_depths=tuple(scale_depth(d, config.beta, config.phi) for d in config.base_depths),
        num_classes=num_classes,
        attention=attention,
        attention_ratio=attention_ratio,
        fusion_stage=min(fusion_stage, len(config.base_channels)),
        branches=tuple(b for b in BRANCH_NAMES if b in set(branches)),
        stage_strides=tuple((1, 1, 2, 2)[i] if i < 4 else 2
                            for i in range(len(config.base_channels))),
    )
    return plan.validate()
