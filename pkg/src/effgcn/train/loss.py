"""Softmax cross-entropy, as an array function and as a tape op."""

from typing import Any

import numpy as np

from ..core.errors import ArgumentError
from ..tensor.engine import Tensor


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    """Class probabilities with the row max subtracted before exponentiation."""
    z = np.asarray(logits)
    shifted = z - z.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def _check_targets(targets: Any, batch: int, num_classes: int) -> np.ndarray:
    targets = np.atleast_1d(np.asarray(targets))
    if not np.issubdtype(targets.dtype, np.integer):
        raise ArgumentError(f"Targets must be integer class indices, got dtype {targets.dtype}")
    if targets.shape != (batch,):
        raise ArgumentError(f"Expected {batch} targets, got shape {targets.shape}")
    bad = targets[(targets < 0) | (targets >= num_classes)]
    if bad.size:
        raise ArgumentError(f"Target {int(bad[0])} out of range for {num_classes} classes")
    return targets.astype(np.int64)


def softmax_cross_entropy(logits: np.ndarray, targets: Any) -> tuple[float, np.ndarray]:
    """Loss and its gradient with respect to the logits.

    A vector of Q logits with one target gives ``-log p[target]`` and
    ``p - onehot``. A batch (N, Q) with N targets gives the mean loss and
    ``(p - onehot) / N``.

    Raises:
        ArgumentError: If a target is not in [0, Q).
    """
    z = np.asarray(logits)
    if z.ndim not in (1, 2):
        raise ArgumentError(f"Logits must be (Q,) or (N, Q), got shape {z.shape}")
    single = z.ndim == 1
    z2 = z[None, :] if single else z
    n, q = z2.shape
    t = _check_targets(targets, n, q)

    shifted = z2 - z2.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    losses = log_norm - shifted[np.arange(n), t]
    grad = np.exp(shifted - log_norm[:, None])
    grad[np.arange(n), t] -= 1.0
    grad /= n
    if single:
        return float(losses[0]), grad[0]
    return float(losses.mean()), grad


def cross_entropy(logits: Tensor, targets: Any) -> Tensor:
    """Batch-mean cross-entropy of a (N, Q) logits tensor, recorded on the tape."""
    if logits.ndim != 2:
        raise ArgumentError(f"Logits must be (N, Q), got shape {logits.shape}")
    loss, grad = softmax_cross_entropy(logits.data, targets)
    out = np.asarray(loss, dtype=logits.dtype)
    return Tensor.from_op(out, (logits,), lambda g: (g * grad,))
