"""Loss, optimization, datasets, training and evaluation."""

from .cam import class_activation_map, write_cam_csv
from .dataset import Batch, BatchLoader, SkeletonDataset
from .loop import (
    EpochRecord,
    TrainResult,
    confusion_matrix,
    evaluate,
    read_train_log,
    restore_network,
    train,
    write_plan_file,
)
from .loss import cross_entropy, softmax, softmax_cross_entropy
from .optim import SGD, lr_at_epoch, sgd_nesterov_step
from .synth import synth_dataset, synth_splits

__all__ = [
    "Batch",
    "BatchLoader",
    "EpochRecord",
    "SGD",
    "SkeletonDataset",
    "TrainResult",
    "class_activation_map",
    "confusion_matrix",
    "cross_entropy",
    "evaluate",
    "lr_at_epoch",
    "read_train_log",
    "restore_network",
    "sgd_nesterov_step",
    "softmax",
    "softmax_cross_entropy",
    "synth_dataset",
    "synth_splits",
    "train",
    "write_cam_csv",
    "write_plan_file",
]
