"""Labelled sequence collections, their directory layout, and batching."""

import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from ..core.errors import ArgumentError, DataError
from ..core.models import BRANCH_NAMES
from ..graph.skeleton import SkeletonGraph
from ..preprocess.features import RawSequence, pad_frames, stack_branches
from ..preprocess.sequence_io import SEQUENCE_SUFFIX, load_sequence, save_sequence


PREFETCH_DEPTH = 2


@dataclass
class Batch:
    """One mini-batch ready for ``EfficientGCN.forward_bodies``.

    Attributes:
        inputs: Array (N, M, B, 6, T, V).
        body_mask: (N, M) booleans, True for bodies present in the sample.
        labels: (N,) class indices.
        sample_ids: Identifiers of the samples in batch order.
    """

    inputs: np.ndarray
    body_mask: np.ndarray
    labels: np.ndarray
    sample_ids: list[str]


@dataclass
class SkeletonDataset:
    """Labelled sequences addressed by sample id."""

    sequences: list[RawSequence]
    sample_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.sample_ids:
            self.sample_ids = [f"s{i:05d}" for i in range(len(self.sequences))]
        if len(self.sample_ids) != len(self.sequences):
            raise ArgumentError(
                f"{len(self.sample_ids)} sample ids for {len(self.sequences)} sequences")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ArgumentError("Sample ids must be unique")
        self._cache: dict[tuple, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.sequences)

    def __getitem__(self, index: int) -> RawSequence:
        return self.sequences[index]

    def index_of(self, sample_id: str) -> int:
        try:
            return self.sample_ids.index(sample_id)
        except ValueError:
            raise ArgumentError(f"Unknown sample id: {sample_id}") from None

    @property
    def labels(self) -> np.ndarray:
        """Class index per sample.

        Raises:
            DataError: If any sample is unlabelled.
        """
        missing = [sid for sid, s in zip(self.sample_ids, self.sequences) if s.label is None]
        if missing:
            raise DataError(f"{len(missing)} samples have no label (first: {missing[0]})")
        return np.array([s.label for s in self.sequences], dtype=np.int64)

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self) else 0

    @property
    def max_frames(self) -> int:
        return max((s.num_frames for s in self.sequences), default=0)

    @property
    def max_bodies(self) -> int:
        return max((s.num_bodies for s in self.sequences), default=0)

    def check_labels(self, num_classes: int) -> None:
        """Raises DataError when any label does not fit a ``num_classes`` classifier."""
        labels = self.labels
        bad = np.flatnonzero(labels >= num_classes)
        if bad.size:
            i = int(bad[0])
            raise DataError(
                f"Sample {self.sample_ids[i]} has class {labels[i]}, "
                f"but the model has {num_classes} classes")

    def features(
        self,
        index: int,
        graph: SkeletonGraph,
        frames: int,
        branches: tuple[str, ...] = BRANCH_NAMES,
        bodies: Optional[int] = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Branch array (M, B, 6, T, V) and body mask of one sample, cached.

        Sequences are zero-padded to ``frames`` frames and ``bodies`` bodies.
        """
        bodies = bodies or self.max_bodies
        key = (index, frames, tuple(branches), bodies, graph.num_joints)
        if key not in self._cache:
            seq = pad_frames(self.sequences[index], frames)
            if seq.num_bodies > bodies:
                raise ArgumentError(
                    f"Sample {self.sample_ids[index]} has {seq.num_bodies} bodies, "
                    f"more than {bodies}")
            stacked = stack_branches(seq, graph, branches)
            out = np.zeros((bodies,) + stacked.shape[1:], dtype=stacked.dtype)
            out[:seq.num_bodies] = stacked
            self._cache[key] = out
        mask = np.zeros(bodies, dtype=bool)
        mask[self.sequences[index].active_bodies()] = True
        return self._cache[key], mask

    # Directory layout: <root>/<split>/<sample_id>.sktn + <sample_id>.meta.json

    def save(self, root: Path | str, split: str) -> Path:
        directory = Path(root) / split
        directory.mkdir(parents=True, exist_ok=True)
        for sample_id, seq in zip(self.sample_ids, self.sequences):
            save_sequence(directory / f"{sample_id}{SEQUENCE_SUFFIX}", seq)
        return directory

    @classmethod
    def load(cls, root: Path | str, split: str) -> "SkeletonDataset":
        """Read every sequence of a split, ordered by sample id.

        Raises:
            DataError: If the split directory is missing or empty.
        """
        directory = Path(root) / split
        if not directory.is_dir():
            raise DataError(f"Dataset split not found: {directory}")
        files = sorted(directory.glob(f"*{SEQUENCE_SUFFIX}"))
        files = [f for f in files if not f.name.endswith(f".branches{SEQUENCE_SUFFIX}")]
        if not files:
            raise DataError(f"No {SEQUENCE_SUFFIX} sequences in {directory}")
        return cls(
            sequences=[load_sequence(f) for f in files],
            sample_ids=[f.name[:-len(SEQUENCE_SUFFIX)] for f in files],
        )


class BatchLoader:
    """Iterates mini-batches, assembling them on a worker thread.

    The sample order is drawn from ``rng`` when iteration starts, before the
    worker is spawned, so it does not depend on thread timing. At most
    ``PREFETCH_DEPTH`` batches wait in the queue.
    """

    def __init__(
        self,
        dataset: SkeletonDataset,
        graph: SkeletonGraph,
        batch_size: int,
        frames: int,
        branches: tuple[str, ...] = BRANCH_NAMES,
        shuffle: bool = False,
        rng: Optional[np.random.Generator] = None,
        dtype: "np.dtype | str" = np.float32,
        prefetch: bool = True,
    ):
        if len(dataset) == 0:
            raise ArgumentError("Dataset is empty")
        if batch_size < 1:
            raise ArgumentError(f"batch_size must be positive, got {batch_size}")
        if shuffle and rng is None:
            raise ArgumentError("Shuffling needs a random generator")
        self.dataset = dataset
        self.graph = graph
        self.batch_size = batch_size
        self.frames = frames
        self.branches = tuple(branches)
        self.shuffle = shuffle
        self.rng = rng
        self.dtype = np.dtype(dtype)
        self.prefetch = prefetch
        self.bodies = dataset.max_bodies

    def __len__(self) -> int:
        return -(-len(self.dataset) // self.batch_size)

    def _order(self) -> np.ndarray:
        if self.shuffle:
            return self.rng.permutation(len(self.dataset))
        return np.arange(len(self.dataset))

    def _assemble(self, indices: np.ndarray) -> Batch:
        inputs, masks = zip(*(
            self.dataset.features(int(i), self.graph, self.frames, self.branches, self.bodies)
            for i in indices))
        return Batch(
            inputs=np.stack(inputs).astype(self.dtype, copy=False),
            body_mask=np.stack(masks),
            labels=np.array([self.dataset[int(i)].label for i in indices], dtype=np.int64),
            sample_ids=[self.dataset.sample_ids[int(i)] for i in indices],
        )

    def __iter__(self) -> Iterator[Batch]:
        order = self._order()
        chunks = [order[i:i + self.batch_size] for i in range(0, len(order), self.batch_size)]
        if not self.prefetch:
            for chunk in chunks:
                yield self._assemble(chunk)
            return

        batches: "queue.Queue[object]" = queue.Queue(maxsize=PREFETCH_DEPTH)
        stop = threading.Event()
        done = object()

        def worker():
            try:
                for chunk in chunks:
                    if stop.is_set():
                        return
                    batches.put(self._assemble(chunk))
            except Exception as e:  # re-raised on the consumer side
                batches.put(e)
                return
            batches.put(done)

        thread = threading.Thread(target=worker, name="effgcn-prefetch", daemon=True)
        thread.start()
        try:
            while True:
                item = batches.get()
                if item is done:
                    break
                if isinstance(item, Exception):
                    raise item
                yield item
        finally:
            stop.set()
            while thread.is_alive():
                try:
                    batches.get_nowait()
                except queue.Empty:
                    thread.join(timeout=0.05)
