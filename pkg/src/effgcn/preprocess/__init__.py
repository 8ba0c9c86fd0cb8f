"""Skeleton preprocessing: input branches and sequence files."""

from .features import (
    BranchInput,
    RawSequence,
    assemble_branches,
    bone_features,
    infer_valid_frames,
    motion_velocities,
    pad_frames,
    relative_positions,
    stack_branches,
)
from .sequence_io import SEQUENCE_SUFFIX, load_sequence, save_sequence, sidecar_path

__all__ = [
    "BranchInput",
    "RawSequence",
    "SEQUENCE_SUFFIX",
    "assemble_branches",
    "bone_features",
    "infer_valid_frames",
    "load_sequence",
    "motion_velocities",
    "pad_frames",
    "relative_positions",
    "save_sequence",
    "sidecar_path",
    "stack_branches",
]
