"""Exception hierarchy shared by every effgcn module."""

from typing import Optional


class EffGCNError(Exception):
    """Base exception for effgcn errors."""
    pass


class ArgumentError(EffGCNError, ValueError):
    """Raised when an argument value or tensor shape is invalid."""
    pass


class GraphStructureError(EffGCNError):
    """Raised when a skeleton graph violates its structural invariants."""
    pass


class FormatError(EffGCNError):
    """Raised when a binary container or sidecar cannot be decoded.

    Attributes:
        offset: Byte offset at which decoding failed, when known.
    """

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class BackwardStateError(EffGCNError, RuntimeError):
    """Raised when the autodiff tape is used out of order."""
    pass


class ScalingConstraintError(EffGCNError):
    """Raised when alpha and beta violate the compound scaling constraint."""
    pass


class DataError(EffGCNError):
    """Raised when dataset contents are inconsistent with the model."""
    pass


class TrainingDivergedError(EffGCNError):
    """Raised when the training loss stops being finite."""

    def __init__(self, epoch: int, batch_index: int, lr: float, loss: float):
        self.epoch = epoch
        self.batch_index = batch_index
        self.lr = lr
        self.loss = loss
        super().__init__(
            f"Non-finite loss {loss} at epoch {epoch}, batch {batch_index} (lr={lr:.6g})"
        )
