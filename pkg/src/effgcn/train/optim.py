"""Learning-rate schedule and SGD with Nesterov momentum."""

import math
from collections import OrderedDict
from typing import Optional, Sequence

import numpy as np

from ..core.errors import ArgumentError
from ..core.models import TrainConfig
from ..tensor.module import Parameter


def lr_at_epoch(epoch: int, config: TrainConfig) -> float:
    """Linear warmup from 0, then cosine decay to 0 over the remaining epochs.

    Raises:
        ArgumentError: If epoch is outside [0, epochs).
    """
    if not 0 <= epoch < config.epochs:
        raise ArgumentError(f"epoch must lie in [0, {config.epochs}), got {epoch}")
    if epoch < config.warmup_epochs:
        return config.base_lr * epoch / config.warmup_epochs
    progress = (epoch - config.warmup_epochs) / (config.epochs - config.warmup_epochs)
    return config.base_lr * 0.5 * (1.0 + math.cos(math.pi * progress))


def sgd_nesterov_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    velocity: Sequence[np.ndarray],
    lr: float,
    momentum: float,
    weight_decay: float,
    decay_mask: Optional[Sequence[bool]] = None,
) -> Sequence[np.ndarray]:
    """One in-place Nesterov update of ``params`` and ``velocity``.

    For every parameter: g = grad + wd * p, v = m * v + g, p -= lr * (g + m * v).
    Entries with a False ``decay_mask`` skip the weight-decay term.

    Raises:
        ArgumentError: If the lists differ in length or any shapes disagree.
    """
    if not len(params) == len(grads) == len(velocity):
        raise ArgumentError(
            f"params, grads and velocity differ in length: "
            f"{len(params)}, {len(grads)}, {len(velocity)}")
    if decay_mask is None:
        decay_mask = [True] * len(params)
    elif len(decay_mask) != len(params):
        raise ArgumentError("decay_mask length does not match params")
    for i, (p, grad, v) in enumerate(zip(params, grads, velocity)):
        if np.shape(grad) != p.shape or v.shape != p.shape:
            raise ArgumentError(
                f"Shape mismatch at index {i}: param {p.shape}, grad {np.shape(grad)}, "
                f"velocity {v.shape}")
        g = grad + weight_decay * p if decay_mask[i] and weight_decay else np.asarray(grad)
        v *= momentum
        v += g
        p -= lr * (g + momentum * v)
    return params


class SGD:
    """SGD with Nesterov momentum over a named parameter registry.

    Velocity buffers persist across steps. Parameters tagged ``decay=False``
    (BN affine terms, biases, edge-importance masks) skip weight decay when
    ``exclude_norm_decay`` is set.
    """

    def __init__(
        self,
        parameters: "dict[str, Parameter]",
        momentum: float = 0.9,
        weight_decay: float = 1e-4,
        exclude_norm_decay: bool = True,
    ):
        if not parameters:
            raise ArgumentError("SGD needs at least one parameter")
        self.parameters = OrderedDict(parameters)
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.exclude_norm_decay = exclude_norm_decay
        self.velocity = OrderedDict(
            (name, np.zeros_like(p.data)) for name, p in self.parameters.items())

    @classmethod
    def from_config(cls, parameters: "dict[str, Parameter]", config: TrainConfig) -> "SGD":
        return cls(parameters, config.momentum, config.weight_decay, config.exclude_norm_decay)

    def decays(self, name: str) -> bool:
        return self.parameters[name].decay or not self.exclude_norm_decay

    def step(self, lr: float) -> None:
        """Update every parameter holding a gradient; the rest are left alone."""
        names = [n for n, p in self.parameters.items() if p.grad is not None]
        sgd_nesterov_step(
            [self.parameters[n].data for n in names],
            [self.parameters[n].grad for n in names],
            [self.velocity[n] for n in names],
            lr=lr,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            decay_mask=[self.decays(n) for n in names],
        )

    def zero_grad(self) -> None:
        for p in self.parameters.values():
            p.zero_grad()
