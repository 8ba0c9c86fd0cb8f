"""Synthetic oscillating-joint actions for desk-scale runs."""

from typing import Union

import numpy as np

from ..core.errors import ArgumentError
from ..preprocess.features import RawSequence
from .dataset import SkeletonDataset


JOINTS_PER_CLASS = 5
AMPLITUDE = 0.3
BASE_FREQUENCY = 1.0
FREQUENCY_STEP = 0.5
PHASE_JITTER = 0.05
NOISE_STD = 0.005

# The rest pose is fixed so every split and seed shares it.
_REST_POSE_SEED = 20210512

SeedLike = Union[int, np.random.SeedSequence]


def rest_pose(joints: int) -> np.ndarray:
    """Shared (3, V) rest coordinates, roughly a 1.8 m tall body."""
    rng = np.random.default_rng(_REST_POSE_SEED)
    pose = rng.uniform(-0.4, 0.4, size=(3, joints))
    pose[1] = np.linspace(-0.9, 0.9, joints)
    pose[2] += 3.0
    return pose


def class_joints(label: int, joints: int) -> np.ndarray:
    """The block of joints class ``label`` moves."""
    start = (label * JOINTS_PER_CLASS) % joints
    return (start + np.arange(min(JOINTS_PER_CLASS, joints))) % joints


def class_frequency(label: int) -> float:
    """Oscillations per clip for class ``label``."""
    return BASE_FREQUENCY + FREQUENCY_STEP * label


def synth_sequence(label: int, frames: int, joints: int, rng: np.random.Generator) -> RawSequence:
    """One single-body clip of class ``label``."""
    coords = np.repeat(rest_pose(joints)[:, None, :], frames, axis=1)
    t = np.arange(frames) / frames
    phase = rng.normal(0.0, PHASE_JITTER)
    wave = AMPLITUDE * np.sin(2 * np.pi * class_frequency(label) * t + phase)
    axis = label % 3
    coords[axis][:, class_joints(label, joints)] += wave[:, None]
    coords += rng.normal(0.0, NOISE_STD, size=coords.shape)
    return RawSequence(coords=coords[..., None], label=label, valid_frames=frames)


def synth_dataset(
    num_classes: int,
    samples_per_class: int,
    frames: int,
    joints: int,
    seed: SeedLike = 0,
) -> SkeletonDataset:
    """Balanced labelled dataset, identical for identical arguments.

    Class k displaces joints ``class_joints(k)`` along axis k mod 3 by a sine
    of amplitude 0.3 and ``1 + 0.5 k`` cycles per clip, with jittered phase
    and Gaussian coordinate noise on top of the shared rest pose.

    Raises:
        ArgumentError: If num_classes < 2 or any size is not positive.
    """
    if num_classes < 2:
        raise ArgumentError(f"num_classes must be at least 2, got {num_classes}")
    if samples_per_class < 1 or frames < 3 or joints < 1:
        raise ArgumentError(
            "samples_per_class and joints must be positive and frames at least 3, got "
            f"{samples_per_class}, {joints}, {frames}")
    rng = np.random.default_rng(seed)
    sequences, ids = [], []
    for label in range(num_classes):
        for i in range(samples_per_class):
            sequences.append(synth_sequence(label, frames, joints, rng))
            ids.append(f"c{label:03d}_{i:05d}")
    return SkeletonDataset(sequences=sequences, sample_ids=ids)


def synth_splits(
    num_classes: int,
    samples_per_class: int,
    frames: int,
    joints: int,
    seed: int = 0,
    eval_samples_per_class: int | None = None,
) -> dict[str, SkeletonDataset]:
    """Independent ``train`` and ``eval`` datasets spawned from one seed."""
    train_seed, eval_seed = np.random.SeedSequence(seed).spawn(2)
    eval_count = eval_samples_per_class or max(1, samples_per_class // 4)
    return {
        "train": synth_dataset(num_classes, samples_per_class, frames, joints, train_seed),
        "eval": synth_dataset(num_classes, eval_count, frames, joints, eval_seed),
    }
