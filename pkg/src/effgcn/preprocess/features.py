"""Joint, velocity and bone input branches computed from raw coordinates.

Every function accepts coordinates shaped ``(3, T, V)`` or ``(3, T, V, M)``;
the optional trailing body axis is carried through untouched, so bodies are
processed independently.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.errors import ArgumentError
from ..core.models import BRANCH_NAMES
from ..graph.skeleton import SkeletonGraph


DEGENERATE_BONE_EPS = 1e-8


@dataclass
class RawSequence:
    """3D joint coordinates of one action sample.

    Attributes:
        coords: Array (3, T, V, M) in sensor length units.
        label: Class index when known.
        valid_frames: Frames at index >= valid_frames are zero padding.
    """

    coords: np.ndarray
    label: Optional[int] = None
    valid_frames: Optional[int] = None

    def __post_init__(self):
        coords = np.asarray(self.coords)
        if coords.ndim == 3:
            coords = coords[..., None]
        if coords.ndim != 4:
            raise ArgumentError(f"Sequence must have shape (3, T, V, M), got {coords.shape}")
        if coords.shape[0] != 3:
            raise ArgumentError(f"Sequence must carry 3 coordinates, got {coords.shape[0]}")
        if coords.shape[3] < 1:
            raise ArgumentError("Sequence must contain at least one body")
        self.coords = coords
        if self.valid_frames is None:
            self.valid_frames = infer_valid_frames(coords)
        if not 0 <= self.valid_frames <= self.num_frames:
            raise ArgumentError(
                f"valid_frames {self.valid_frames} outside [0, {self.num_frames}]")
        if np.any(coords[:, self.valid_frames:]):
            raise ArgumentError(
                f"Frames from {self.valid_frames} on must be zero padding")

    @property
    def num_frames(self) -> int:
        return self.coords.shape[1]

    @property
    def num_joints(self) -> int:
        return self.coords.shape[2]

    @property
    def num_bodies(self) -> int:
        return self.coords.shape[3]

    def body(self, index: int) -> np.ndarray:
        """Coordinates (3, T, V) of one body."""
        return self.coords[..., index]

    def active_bodies(self) -> list[int]:
        """Indices of bodies with any nonzero coordinate (at least body 0)."""
        active = [m for m in range(self.num_bodies) if np.any(self.coords[..., m])]
        return active or [0]


@dataclass
class BranchInput:
    """The three 6-channel input branches of one body.

    Attributes:
        joint: Absolute xyz followed by xyz relative to the center joint.
        velocity: Fast (2-frame) xyz followed by slow (1-frame) xyz motion.
        bone: Bone vector xyz followed by its direction angles in radians.
    """

    joint: np.ndarray
    velocity: np.ndarray
    bone: np.ndarray

    def __post_init__(self):
        shapes = {self.joint.shape, self.velocity.shape, self.bone.shape}
        if len(shapes) != 1:
            raise ArgumentError(f"Branch shapes differ: {sorted(shapes)}")
        if self.joint.shape[0] != 6:
            raise ArgumentError(f"Each branch must have 6 channels, got {self.joint.shape[0]}")

    def select(self, branches: tuple[str, ...] = BRANCH_NAMES) -> np.ndarray:
        """Stack the requested branches into an array (B, 6, T, V)."""
        try:
            return np.stack([getattr(self, name) for name in branches])
        except AttributeError as e:
            raise ArgumentError(f"Unknown branch: {e.name}") from e


def infer_valid_frames(coords: np.ndarray) -> int:
    """One past the last frame with any nonzero coordinate (0 for all-zero input)."""
    coords = np.asarray(coords)
    moving_axes = tuple(i for i in range(coords.ndim) if i != 1)
    nonzero = np.flatnonzero(np.any(coords != 0, axis=moving_axes))
    return int(nonzero[-1]) + 1 if nonzero.size else 0


def _coords(seq: "RawSequence | np.ndarray") -> np.ndarray:
    coords = seq.coords if isinstance(seq, RawSequence) else np.asarray(seq)
    if coords.ndim not in (3, 4) or coords.shape[0] != 3:
        raise ArgumentError(f"Expected coordinates (3, T, V[, M]), got {coords.shape}")
    return coords.astype(np.float64, copy=False)


def relative_positions(seq: "RawSequence | np.ndarray", center: int) -> np.ndarray:
    """Joint coordinates relative to the center joint."""
    coords = _coords(seq)
    num_joints = coords.shape[2]
    if not 0 <= center < num_joints:
        raise ArgumentError(f"Center joint {center} out of range for {num_joints} joints")
    return coords - coords[:, :, center:center + 1]


def motion_velocities(seq: "RawSequence | np.ndarray") -> np.ndarray:
    """Fast and slow frame differences, zero-filled at the sequence tail.

    Returns:
        Array (6, T, V[, M]): channels 0..2 hold x[t+2] - x[t] and channels
        3..5 hold x[t+1] - x[t].
    """
    coords = _coords(seq)
    if coords.shape[1] < 3:
        raise ArgumentError(f"Velocities need at least 3 frames, got {coords.shape[1]}")
    fast = np.zeros_like(coords)
    slow = np.zeros_like(coords)
    fast[:, :-2] = coords[:, 2:] - coords[:, :-2]
    slow[:, :-1] = coords[:, 1:] - coords[:, :-1]
    return np.concatenate([fast, slow], axis=0)


def bone_features(seq: "RawSequence | np.ndarray", graph: SkeletonGraph) -> np.ndarray:
    """Bone vectors toward each joint's parent and their direction angles.

    Bones shorter than DEGENERATE_BONE_EPS (including the center joint's
    self-bone) get direction cosines of 0, i.e. angles of π/2.

    Returns:
        Array (6, T, V[, M]): bone xyz followed by angles in [0, π].
    """
    coords = _coords(seq)
    if coords.shape[2] != graph.num_joints:
        raise ArgumentError(
            f"Sequence has {coords.shape[2]} joints but graph has {graph.num_joints}")
    parents = np.asarray(graph.parents)
    bones = coords - coords[:, :, parents]
    norm = np.sqrt(np.sum(bones * bones, axis=0, keepdims=True))
    degenerate = norm < DEGENERATE_BONE_EPS
    safe_norm = np.where(degenerate, 1.0, norm)
    cosines = np.where(degenerate, 0.0, bones / safe_norm)
    angles = np.arccos(np.clip(cosines, -1.0, 1.0))
    return np.concatenate([bones, angles], axis=0)


def assemble_branches(seq: RawSequence, graph: SkeletonGraph) -> list[BranchInput]:
    """Compute the three input branches for every body of a sequence."""
    if seq.num_joints != graph.num_joints:
        raise ArgumentError(
            f"Sequence has {seq.num_joints} joints but graph has {graph.num_joints}")
    coords = _coords(seq)
    joint = np.concatenate([coords, relative_positions(coords, graph.center)], axis=0)
    velocity = motion_velocities(coords)
    bone = bone_features(coords, graph)
    return [
        BranchInput(joint=joint[..., m], velocity=velocity[..., m], bone=bone[..., m])
        for m in range(seq.num_bodies)
    ]


def stack_branches(
    seq: RawSequence,
    graph: SkeletonGraph,
    branches: tuple[str, ...] = BRANCH_NAMES,
) -> np.ndarray:
    """Branch array (M, B, 6, T, V) for all bodies of a sequence."""
    return np.stack([b.select(branches) for b in assemble_branches(seq, graph)])


def pad_frames(seq: RawSequence, frames: int) -> RawSequence:
    """Zero-pad a sequence at the end to exactly ``frames`` frames.

    Raises:
        ArgumentError: If the sequence is already longer than ``frames``.
    """
    if seq.num_frames > frames:
        raise ArgumentError(
            f"Sequence has {seq.num_frames} frames, more than the configured {frames}")
    if seq.num_frames == frames:
        return seq
    pad = np.zeros((3, frames - seq.num_frames) + seq.coords.shape[2:], dtype=seq.coords.dtype)
    return RawSequence(
        coords=np.concatenate([seq.coords, pad], axis=1),
        label=seq.label,
        valid_frames=seq.valid_frames,
    )
