"""Class activation maps over frames and joints."""

import csv
from pathlib import Path

import numpy as np

from ..blocks.network import EfficientGCN
from ..core.errors import ArgumentError
from ..preprocess.features import RawSequence, pad_frames, stack_branches
from ..tensor.engine import no_grad


def class_activation_map(network: EfficientGCN, sequence: RawSequence, class_index: int) -> np.ndarray:
    """Non-negative (T', V) saliency of ``class_index`` for one sequence.

    The last feature map of every active body is weighted by the FC row of
    the class and summed over channels; bodies are averaged, negatives are
    clipped and the map is scaled so its maximum is 1 (an all-zero map
    stays zero).

    Raises:
        ArgumentError: If class_index is outside [0, Q).
    """
    num_classes = network.plan.num_classes
    if not 0 <= class_index < num_classes:
        raise ArgumentError(f"class_index {class_index} outside [0, {num_classes})")
    seq = pad_frames(sequence, network.frames)
    active = seq.active_bodies()
    inputs = stack_branches(seq, network.graph, network.plan.branches)[active]

    was_training = network.training
    network.eval()
    try:
        with no_grad():
            features = network.forward_features(inputs.astype(network.dtype)).data
    finally:
        network.train(was_training)

    weights = network.fc.weight.data[class_index].astype(np.float64)
    saliency = np.einsum("c,mctv->tv", weights, features.astype(np.float64)) / len(active)
    saliency = np.maximum(saliency, 0.0)
    peak = saliency.max()
    return saliency / peak if peak > 0 else saliency


def write_cam_csv(path: Path | str, saliency: np.ndarray) -> Path:
    """Rows ``frame,joint,saliency`` for every cell of the map."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["frame", "joint", "saliency"])
        for t, v in np.ndindex(*saliency.shape):
            writer.writerow([t, v, repr(float(saliency[t, v]))])
    return path
