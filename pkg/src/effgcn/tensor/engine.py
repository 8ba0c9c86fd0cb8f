"""Dense tensor with a dynamic reverse-mode tape.

Every differentiable operation creates its output through ``Tensor.from_op``,
recording the parent tensors and a closure mapping the output gradient to one
gradient per parent. ``Tensor.backward`` walks the recorded graph in reverse
topological order, accumulates gradients into leaf tensors and then releases
the graph.
"""

import threading
from contextlib import contextmanager
from typing import Any, Callable, Iterator, Optional, Sequence

import numpy as np

from ..core.errors import ArgumentError, BackwardStateError


DTYPES = {"f32": np.dtype(np.float32), "f64": np.dtype(np.float64)}

GradFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class _EngineState(threading.local):
    def __init__(self):
        self.grad_enabled = True
        self.default_dtype = DTYPES["f32"]


_state = _EngineState()


def resolve_dtype(dtype: Any) -> np.dtype:
    """Map ``"f32"``/``"f64"`` or a numpy float dtype to a numpy dtype."""
    if isinstance(dtype, str) and dtype in DTYPES:
        return DTYPES[dtype]
    try:
        resolved = np.dtype(dtype)
    except TypeError:
        resolved = None
    if resolved not in DTYPES.values():
        raise ArgumentError(f"Unsupported dtype {dtype!r}; expected f32 or f64")
    return resolved


def get_default_dtype() -> np.dtype:
    return _state.default_dtype


def set_default_dtype(dtype: Any) -> None:
    _state.default_dtype = resolve_dtype(dtype)


@contextmanager
def default_dtype(dtype: Any) -> Iterator[np.dtype]:
    """Temporarily switch the dtype new parameters and inputs are created in."""
    previous = _state.default_dtype
    _state.default_dtype = resolve_dtype(dtype)
    try:
        yield _state.default_dtype
    finally:
        _state.default_dtype = previous


def is_grad_enabled() -> bool:
    return _state.grad_enabled


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording inside the block."""
    previous = _state.grad_enabled
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _as_array(data: Any, dtype: Optional[np.dtype]) -> np.ndarray:
    if dtype is not None:
        return np.asarray(data, dtype=dtype)
    if isinstance(data, np.ndarray) and data.dtype in DTYPES.values():
        return data
    return np.asarray(data, dtype=_state.default_dtype)


class Tensor:
    """N-dimensional float array with an optional gradient.

    Attributes:
        data: The values (float32 or float64 ndarray).
        grad: Accumulated gradient of a leaf tensor after ``backward``.
        requires_grad: Whether operations on this tensor are recorded.
        name: Optional label, set for registered parameters.
    """

    __array_priority__ = 100

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        dtype: Any = None,
        name: Optional[str] = None,
    ):
        self.data = _as_array(data, None if dtype is None else resolve_dtype(dtype))
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple["Tensor", ...] = ()
        self._grad_fn: Optional[GradFn] = None
        self._released = False

    @classmethod
    def from_op(cls, data: np.ndarray, parents: Sequence["Tensor"], grad_fn: GradFn) -> "Tensor":
        """Create an operation output, recording it when any parent needs a gradient."""
        out = cls(data)
        if _state.grad_enabled and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._grad_fn = grad_fn
        return out

    # Properties

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self._grad_fn is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label})"

    # Backward

    def backward(self) -> None:
        """Populate ``grad`` on every leaf reachable from this scalar.

        Raises:
            ArgumentError: If this tensor is not a scalar.
            BackwardStateError: If the graph was already consumed by an
                earlier backward, or nothing upstream requires a gradient.
        """
        if self.data.size != 1:
            raise ArgumentError(f"backward needs a scalar loss, got shape {self.shape}")
        if self._released:
            raise BackwardStateError(
                "backward called twice on the same graph; run a new forward pass first")
        if not self.requires_grad:
            raise BackwardStateError("Loss does not depend on any tensor that requires grad")

        order = _topological_order(self)
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            grad = grads.pop(id(node), None)
            if grad is None:
                continue
            if node._grad_fn is None:
                grad = grad.astype(node.dtype, copy=False)
                node.grad = grad.copy() if node.grad is None else node.grad + grad
                continue
            for parent, parent_grad in zip(node._parents, node._grad_fn(grad)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = parent_grad if key not in grads else grads[key] + parent_grad

        for node in order:
            if node._grad_fn is not None:
                node._parents = ()
                node._grad_fn = None
                node._released = True

    # Arithmetic

    def __add__(self, other: Any) -> "Tensor":
        other = as_tensor(other, like=self)
        a_shape, b_shape = self.shape, other.shape
        return Tensor.from_op(
            self.data + other.data, (self, other),
            lambda g: (unbroadcast(g, a_shape), unbroadcast(g, b_shape)))

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return Tensor.from_op(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other: Any) -> "Tensor":
        return self + (-as_tensor(other, like=self))

    def __rsub__(self, other: Any) -> "Tensor":
        return as_tensor(other, like=self) + (-self)

    def __mul__(self, other: Any) -> "Tensor":
        other = as_tensor(other, like=self)
        a, b = self.data, other.data
        return Tensor.from_op(
            a * b, (self, other),
            lambda g: (unbroadcast(g * b, a.shape), unbroadcast(g * a, b.shape)))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Tensor":
        other = as_tensor(other, like=self)
        a, b = self.data, other.data
        return Tensor.from_op(
            a / b, (self, other),
            lambda g: (unbroadcast(g / b, a.shape), unbroadcast(-g * a / (b * b), b.shape)))

    def __rtruediv__(self, other: Any) -> "Tensor":
        return as_tensor(other, like=self) / self

    # Shape manipulation

    def reshape(self, *shape: Any) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        original = self.shape
        return Tensor.from_op(
            self.data.reshape(shape), (self,), lambda g: (g.reshape(original),))

    def transpose(self, *axes: int) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        axes = axes or tuple(reversed(range(self.ndim)))
        inverse = tuple(np.argsort(axes))
        return Tensor.from_op(
            self.data.transpose(axes), (self,), lambda g: (g.transpose(inverse),))

    def __getitem__(self, index: Any) -> "Tensor":
        shape, dtype = self.shape, self.dtype
        parts = index if isinstance(index, tuple) else (index,)
        basic = all(isinstance(p, (slice, int, np.integer)) or p is Ellipsis for p in parts)

        def grad_fn(g: np.ndarray):
            full = np.zeros(shape, dtype=dtype)
            if basic:
                full[index] = g
            else:
                np.add.at(full, index, g)
            return (full,)

        return Tensor.from_op(self.data[index], (self,), grad_fn)

    # Reductions

    def sum(self, axis: Any = None, keepdims: bool = False) -> "Tensor":
        shape = self.shape
        axes = _normalize_axes(axis, self.ndim)

        def grad_fn(g: np.ndarray):
            if not keepdims:
                g = np.expand_dims(g, axes)
            return (np.broadcast_to(g, shape).copy(),)

        return Tensor.from_op(self.data.sum(axis=axes, keepdims=keepdims), (self,), grad_fn)

    def mean(self, axis: Any = None, keepdims: bool = False) -> "Tensor":
        axes = _normalize_axes(axis, self.ndim)
        count = int(np.prod([self.shape[a] for a in axes])) if axes else 1
        return self.sum(axis=axes, keepdims=keepdims) * (1.0 / count)


def _normalize_axes(axis: Any, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, (int, np.integer)) else tuple(axis)
    normalized = []
    for a in axes:
        if not -ndim <= a < ndim:
            raise ArgumentError(f"Axis {a} out of range for {ndim} dimensions")
        normalized.append(int(a) % ndim)
    if len(set(normalized)) != len(normalized):
        raise ArgumentError(f"Repeated axis in {tuple(axes)}")
    return tuple(sorted(normalized))


def as_tensor(value: Any, like: Optional[Tensor] = None) -> Tensor:
    """Wrap constants as non-differentiable tensors in ``like``'s dtype."""
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(value), dtype=dtype)


def _topological_order(root: Tensor) -> list[Tensor]:
    """Recorded nodes upstream of ``root``, parents before children."""
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order
