"""Training and evaluation loops."""

import csv
import json
import math
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..blocks.network import EfficientGCN, build_network
from ..core.errors import ArgumentError, DataError, FormatError, TrainingDivergedError
from ..core.models import ArchPlan, Metrics, TrainConfig
from ..graph.skeleton import SkeletonGraph
from ..telemetry.audit_logger import AuditLogger, get_audit_logger
from ..telemetry.otel_emitter import OTelEmitter, get_emitter
from ..tensor.checkpoint import load_checkpoint, save_checkpoint
from ..tensor.engine import default_dtype, no_grad
from .dataset import BatchLoader, SkeletonDataset
from .loss import cross_entropy, softmax_cross_entropy
from .optim import SGD, lr_at_epoch


CHECKPOINT_NAME = "checkpoint.skck"
PLAN_NAME = "plan.json"
LOG_NAME = "train_log.csv"
LOG_COLUMNS = ("epoch", "lr", "train_loss", "train_acc", "eval_acc")

# Stream index after the init-weight and dropout streams of build_network.
_SHUFFLE_STREAM = 2


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    train_acc: float
    eval_acc: Optional[float] = None

    def to_row(self) -> list:
        eval_acc = "" if self.eval_acc is None else repr(self.eval_acc)
        return [self.epoch, repr(self.lr), repr(self.train_loss), repr(self.train_acc), eval_acc]

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "lr": self.lr,
            "train_loss": self.train_loss,
            "train_acc": self.train_acc,
            "eval_acc": self.eval_acc,
        }


@dataclass
class TrainResult:
    """Outcome of :func:`train`.

    Attributes:
        history: One record per epoch.
        run_id: Id used for this run's audit entries.
        checkpoint_path: Final checkpoint, when an output directory was given.
        log_path: CSV log, when an output directory was given.
    """

    history: list[EpochRecord] = field(default_factory=list)
    run_id: str = ""
    checkpoint_path: Optional[Path] = None
    log_path: Optional[Path] = None

    @property
    def final(self) -> EpochRecord:
        return self.history[-1]


def confusion_matrix(truth: np.ndarray, predicted: np.ndarray, num_classes: int) -> np.ndarray:
    """Q x Q counts with rows indexed by truth and columns by prediction."""
    truth = np.asarray(truth, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if truth.shape != predicted.shape:
        raise ArgumentError(f"truth {truth.shape} and predictions {predicted.shape} differ")
    for name, values in (("truth", truth), ("prediction", predicted)):
        if values.size and (values.min() < 0 or values.max() >= num_classes):
            raise DataError(f"A {name} class index is outside [0, {num_classes})")
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (truth, predicted), 1)
    return matrix


def shuffle_generator(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(_SHUFFLE_STREAM + 1)[-1])


def evaluate(
    network: EfficientGCN,
    dataset: SkeletonDataset,
    batch_size: int = 16,
) -> Metrics:
    """Eval-mode pass: argmax of the body-averaged logits, confusion and mean loss.

    The network is returned to the mode it was in.

    Raises:
        DataError: If a sample's class does not exist in the classifier.
    """
    if len(dataset) == 0:
        raise ArgumentError("Dataset is empty")
    num_classes = network.plan.num_classes
    dataset.check_labels(num_classes)
    was_training = network.training
    network.eval()
    loader = BatchLoader(dataset, network.graph, batch_size, network.frames,
                         network.plan.branches, dtype=network.dtype)
    truth, predicted, losses = [], [], []
    try:
        with no_grad():
            for batch in loader:
                logits = network.forward_bodies(batch.inputs, batch.body_mask).data
                loss, _ = softmax_cross_entropy(logits.astype(np.float64), batch.labels)
                losses.append(loss * len(batch.labels))
                truth.append(batch.labels)
                predicted.append(np.argmax(logits, axis=1))
    finally:
        network.train(was_training)
    confusion = confusion_matrix(np.concatenate(truth), np.concatenate(predicted), num_classes)
    return Metrics.from_confusion(confusion, loss=sum(losses) / len(dataset))


def write_plan_file(path: Path, network: EfficientGCN, config: TrainConfig) -> Path:
    """Everything needed to rebuild the network around a checkpoint."""
    path.write_text(json.dumps({
        "plan": network.plan.to_dict(),
        "frames": network.frames,
        "dtype": np.dtype(network.dtype).name,
        "graph": network.graph.to_dict(),
        "train": config.to_dict(),
    }, indent=2))
    return path


def restore_network(checkpoint_path: Path | str) -> EfficientGCN:
    """Rebuild a trained network from a checkpoint and the plan.json beside it.

    Raises:
        DataError: If plan.json is missing.
        FormatError: If either file is malformed.
    """
    checkpoint_path = Path(checkpoint_path)
    plan_path = checkpoint_path.parent / PLAN_NAME
    if not plan_path.exists():
        raise DataError(f"No {PLAN_NAME} next to {checkpoint_path}")
    try:
        meta = json.loads(plan_path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{plan_path.name} is not valid JSON: {e}", offset=e.pos) from e
    missing = [key for key in ("plan", "graph", "frames") if key not in meta]
    if missing:
        raise FormatError(f"{plan_path.name} lacks {', '.join(missing)}")
    plan = ArchPlan.from_dict(meta["plan"])
    graph = SkeletonGraph.from_dict(meta["graph"])
    config = TrainConfig.from_dict(meta.get("train", {}))
    state = load_checkpoint(checkpoint_path)
    with default_dtype(meta.get("dtype", "float32")):
        network = build_network(plan, graph, frames=int(meta["frames"]), seed=config.seed,
                                dropout=config.dropout)
    network.load_state_dict(state)
    return network.eval()


def train(
    network: EfficientGCN,
    dataset: SkeletonDataset,
    config: TrainConfig,
    out_dir: Optional[Path | str] = None,
    eval_dataset: Optional[SkeletonDataset] = None,
    audit_logger: Optional[AuditLogger] = None,
    emitter: Optional[OTelEmitter] = None,
) -> TrainResult:
    """Train ``network`` in place with warmup-cosine SGD.

    Every epoch appends a row to ``train_log.csv`` and rewrites
    ``checkpoint.skck`` and ``plan.json`` under ``out_dir`` when given.
    Shuffling draws from a stream derived from ``config.seed``; init and
    dropout come from the seed the network was built with.

    Raises:
        ArgumentError: If the dataset is empty or the config invalid.
        DataError: If a label does not fit the classifier.
        TrainingDivergedError: On a non-finite loss.
    """
    config.validate()
    if len(dataset) == 0:
        raise ArgumentError("Cannot train on an empty dataset")
    dataset.check_labels(network.plan.num_classes)
    if eval_dataset is not None:
        eval_dataset.check_labels(network.plan.num_classes)
    audit_logger = audit_logger or get_audit_logger()
    emitter = emitter or get_emitter()

    result = TrainResult(run_id=uuid.uuid4().hex)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        result.checkpoint_path = out_dir / CHECKPOINT_NAME
        result.log_path = out_dir / LOG_NAME
        with open(result.log_path, "w", newline="") as f:
            csv.writer(f).writerow(LOG_COLUMNS)
        write_plan_file(out_dir / PLAN_NAME, network, config)

    optimizer = SGD.from_config(network.parameter_registry(), config)
    loader = BatchLoader(
        dataset,
        network.graph,
        config.batch_size,
        network.frames,
        network.plan.branches,
        shuffle=True,
        rng=shuffle_generator(config.seed),
        dtype=network.dtype,
    )

    for epoch in range(config.epochs):
        lr = lr_at_epoch(epoch, config)
        started = time.perf_counter()
        with emitter.trace_operation("train.epoch", epoch=epoch) as span:
            network.train()
            total_loss, correct, seen = 0.0, 0, 0
            for batch_index, batch in enumerate(loader):
                logits = network.forward_bodies(batch.inputs, batch.body_mask)
                loss = cross_entropy(logits, batch.labels)
                value = loss.item()
                if not math.isfinite(value):
                    raise TrainingDivergedError(epoch=epoch, batch_index=batch_index, lr=lr, loss=value)
                optimizer.zero_grad()
                loss.backward()
                optimizer.step(lr)
                n = len(batch.labels)
                total_loss += value * n
                correct += int(np.sum(np.argmax(logits.data, axis=1) == batch.labels))
                seen += n

            record = EpochRecord(epoch, lr, total_loss / seen, correct / seen)
            if eval_dataset is not None:
                record.eval_acc = evaluate(network, eval_dataset, config.batch_size).top1_accuracy
            emitter.record_epoch(span, epoch, lr, record.train_loss, record.train_acc)

        result.history.append(record)
        if out_dir is not None:
            with open(result.log_path, "a", newline="") as f:
                csv.writer(f).writerow(record.to_row())
            save_checkpoint(result.checkpoint_path, network.state_dict())
        audit_logger.log_epoch(
            run_id=result.run_id,
            epoch=epoch,
            lr=lr,
            loss=record.train_loss,
            accuracy=record.train_acc,
            eval_accuracy=record.eval_acc,
            duration_ms=int((time.perf_counter() - started) * 1000),
        )
    return result


def read_train_log(path: Path | str) -> list[EpochRecord]:
    """Parse a ``train_log.csv`` written by :func:`train`."""
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return [
        EpochRecord(
            epoch=int(row["epoch"]),
            lr=float(row["lr"]),
            train_loss=float(row["train_loss"]),
            train_acc=float(row["train_acc"]),
            eval_acc=float(row["eval_acc"]) if row["eval_acc"] else None,
        )
        for row in rows
    ]
