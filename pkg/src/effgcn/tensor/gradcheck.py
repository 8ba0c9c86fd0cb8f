"""Finite-difference verification of tape gradients."""

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from ..core.errors import ArgumentError
from .engine import Tensor, as_tensor, no_grad
from .layers import Dropout
from .module import Module, Parameter


DEFAULT_TOLERANCE = 1e-5
DEFAULT_STEP = 1e-5
DEFAULT_SAMPLES = 32

# Below this gradient magnitude the absolute difference is reported instead.
_SCALE_FLOOR = 1e-8


@dataclass
class GradCheckEntry:
    """Comparison result for one parameter."""

    name: str
    max_rel_error: float
    checked: int
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "max_rel_error": self.max_rel_error,
            "checked": self.checked,
            "passed": self.passed,
        }


@dataclass
class GradCheckReport:
    tolerance: float
    entries: list[GradCheckEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def max_rel_error(self) -> float:
        return max((e.max_rel_error for e in self.entries), default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tolerance": self.tolerance,
            "passed": self.passed,
            "max_rel_error": self.max_rel_error,
            "entries": [e.to_dict() for e in self.entries],
        }


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """max|a - n| / max(max|a|, max|n|), absolute when both are ~0."""
    diff = float(np.max(np.abs(analytic - numeric))) if analytic.size else 0.0
    scale = max(float(np.max(np.abs(analytic), initial=0.0)),
                float(np.max(np.abs(numeric), initial=0.0)))
    return diff if scale < _SCALE_FLOOR else diff / scale


def grad_check(
    module: Module,
    inputs: Any,
    tolerance: float = DEFAULT_TOLERANCE,
    samples: int = DEFAULT_SAMPLES,
    step: float = DEFAULT_STEP,
    seed: int = 0,
    forward: Optional[Callable[[Module, Any], Tensor]] = None,
) -> GradCheckReport:
    """Compare backward gradients to central differences for every parameter.

    The scalar probed is ``sum(output * R)`` for a fixed random projection R.
    The module runs in training mode (batch-statistics BN) with dropout
    disabled so repeated forwards are deterministic. Buffers and every
    module's mode are restored on return.

    Args:
        module: Module whose parameters are float64.
        inputs: Passed to ``forward(module, inputs)``; by default ``module(inputs)``.
        tolerance: Maximum accepted relative error per parameter.
        samples: Coordinates sampled per parameter (all of them if fewer exist).
        step: Central-difference step h.
        seed: Seeds the projection and coordinate sampling.
        forward: Custom forward callable.

    Returns:
        GradCheckReport with one entry per named parameter.
    """
    registry = module.parameter_registry()
    for name, param in registry.items():
        if param.dtype != np.float64:
            raise ArgumentError(f"grad_check requires float64 parameters; {name} is {param.dtype}")
    run = forward or (lambda m, x: m(x))

    buffers = OrderedDict((name, buf.copy()) for name, buf in module.named_buffers())
    modes = [(sub, sub.training) for _, sub in module.named_modules()]
    module.train()
    for _, sub in module.named_modules():
        if isinstance(sub, Dropout):
            sub.eval()
    try:
        return _compare(module, inputs, registry, run, tolerance, samples, step, seed)
    finally:
        module.load_state_dict(buffers, strict=False)
        for sub, mode in modes:
            object.__setattr__(sub, "training", mode)


def _compare(
    module: Module,
    inputs: Any,
    registry: "OrderedDict[str, Parameter]",
    run: Callable[[Module, Any], Tensor],
    tolerance: float,
    samples: int,
    step: float,
    seed: int,
) -> GradCheckReport:
    rng = np.random.default_rng(seed)
    with no_grad():
        probe = run(module, inputs)
    projection = rng.standard_normal(probe.shape)

    def objective() -> float:
        with no_grad():
            out = run(module, inputs)
        return float(np.sum(out.data * projection))

    module.zero_grad()
    out = run(module, inputs)
    (out * as_tensor(projection, like=out)).sum().backward()

    report = GradCheckReport(tolerance=tolerance)
    for name, param in registry.items():
        analytic_full = np.zeros_like(param.data) if param.grad is None else param.grad
        flat = param.data.reshape(-1)
        count = min(samples, flat.size)
        coords = np.sort(rng.choice(flat.size, size=count, replace=False))
        analytic = analytic_full.reshape(-1)[coords]
        numeric = np.empty(count)
        for i, idx in enumerate(coords):
            original = flat[idx]
            flat[idx] = original + step
            f_plus = objective()
            flat[idx] = original - step
            f_minus = objective()
            flat[idx] = original
            numeric[i] = (f_plus - f_minus) / (2 * step)
        error = relative_error(analytic, numeric)
        report.entries.append(GradCheckEntry(
            name=name, max_rel_error=error, checked=count, passed=error <= tolerance))
    module.zero_grad()
    return report
