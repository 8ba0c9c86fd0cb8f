"""Core module containing shared data models, errors and the tensor container."""

from .errors import (
    ArgumentError,
    BackwardStateError,
    DataError,
    EffGCNError,
    FormatError,
    GraphStructureError,
    ScalingConstraintError,
    TrainingDivergedError,
)
from .models import (
    ArchPlan,
    AttentionKind,
    BlockCost,
    ComplexityReport,
    LayerKind,
    Metrics,
    ScalingConfig,
    TrainConfig,
)

__all__ = [
    "ArchPlan",
    "ArgumentError",
    "AttentionKind",
    "BackwardStateError",
    "BlockCost",
    "ComplexityReport",
    "DataError",
    "EffGCNError",
    "FormatError",
    "GraphStructureError",
    "LayerKind",
    "Metrics",
    "ScalingConfig",
    "ScalingConstraintError",
    "TrainConfig",
    "TrainingDivergedError",
]
