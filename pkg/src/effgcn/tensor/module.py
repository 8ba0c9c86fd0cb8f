"""Module/Parameter registry used by every network layer."""

from collections import OrderedDict
from typing import Any, Iterable, Iterator, Optional

import numpy as np

from ..core.errors import ArgumentError
from .engine import Tensor, get_default_dtype


class Parameter(Tensor):
    """A trainable tensor.

    Attributes:
        decay: Whether weight decay applies (False for BN affine terms and biases).
    """

    def __init__(self, data: Any, decay: bool = True, name: Optional[str] = None):
        super().__init__(np.array(data, dtype=get_default_dtype()), requires_grad=True, name=name)
        self.decay = decay

    def __repr__(self) -> str:
        return f"Parameter(name={self.name!r}, shape={self.shape}, decay={self.decay})"


class Module:
    """Base class: tracks parameters, buffers and child modules by attribute name."""

    def __init__(self):
        object.__setattr__(self, "_parameters", OrderedDict())
        object.__setattr__(self, "_buffers", OrderedDict())
        object.__setattr__(self, "_modules", OrderedDict())
        object.__setattr__(self, "training", True)

    def __setattr__(self, name: str, value: Any) -> None:
        if "_parameters" not in self.__dict__:
            raise AttributeError("Module.__init__() must run before assigning attributes")
        for registry in (self._parameters, self._modules, self._buffers):
            registry.pop(name, None)
        if isinstance(value, Parameter):
            self._parameters[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    def register_buffer(self, name: str, value: np.ndarray) -> None:
        """Track a non-trainable array that belongs in checkpoints."""
        object.__setattr__(self, name, value)
        self._buffers[name] = value

    def _set_buffer(self, name: str, value: np.ndarray) -> None:
        current = self._buffers[name]
        current[...] = value

    def forward(self, *args: Any, **kwargs: Any) -> Any:
        raise NotImplementedError

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.forward(*args, **kwargs)

    # Traversal

    def children(self) -> Iterator["Module"]:
        return iter(self._modules.values())

    def named_modules(self, prefix: str = "") -> Iterator[tuple[str, "Module"]]:
        yield prefix, self
        for name, child in self._modules.items():
            yield from child.named_modules(f"{prefix}.{name}" if prefix else name)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for module_name, module in self.named_modules(prefix):
            for name, param in module._parameters.items():
                yield (f"{module_name}.{name}" if module_name else name), param

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def named_buffers(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        for module_name, module in self.named_modules(prefix):
            for name, buf in module._buffers.items():
                yield (f"{module_name}.{name}" if module_name else name), buf

    def parameter_registry(self) -> "OrderedDict[str, Parameter]":
        """Dotted name -> Parameter, naming each parameter in place.

        Raises:
            ArgumentError: If one parameter object is reachable under two names.
        """
        registry: OrderedDict[str, Parameter] = OrderedDict()
        seen: dict[int, str] = {}
        for name, param in self.named_parameters():
            if id(param) in seen:
                raise ArgumentError(f"Parameter registered twice: {seen[id(param)]} and {name}")
            seen[id(param)] = name
            param.name = name
            registry[name] = param
        return registry

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    # Modes

    def train(self, mode: bool = True) -> "Module":
        for _, module in self.named_modules():
            object.__setattr__(module, "training", mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    # State

    def state_dict(self) -> "OrderedDict[str, np.ndarray]":
        """Copies of every parameter and buffer under dotted names."""
        state: OrderedDict[str, np.ndarray] = OrderedDict()
        for name, param in self.named_parameters():
            state[name] = param.data.copy()
        for name, buf in self.named_buffers():
            state[name] = buf.copy()
        return state

    def load_state_dict(self, state: dict[str, np.ndarray], strict: bool = True) -> None:
        """Copy values into existing parameters and buffers.

        Raises:
            ArgumentError: On missing/unexpected names (strict) or shape mismatch.
        """
        targets: dict[str, tuple[Module, str, bool]] = {}
        for module_name, module in self.named_modules():
            for name in module._parameters:
                targets[f"{module_name}.{name}" if module_name else name] = (module, name, True)
            for name in module._buffers:
                targets[f"{module_name}.{name}" if module_name else name] = (module, name, False)

        if strict:
            missing = sorted(set(targets) - set(state))
            unexpected = sorted(set(state) - set(targets))
            if missing or unexpected:
                raise ArgumentError(
                    f"State mismatch: missing {missing[:5]}, unexpected {unexpected[:5]}")

        for key, value in state.items():
            if key not in targets:
                continue
            module, name, is_param = targets[key]
            current = module._parameters[name].data if is_param else module._buffers[name]
            if current.shape != np.shape(value):
                raise ArgumentError(
                    f"Shape mismatch for {key}: expected {current.shape}, got {np.shape(value)}")
            if is_param:
                module._parameters[name].data = np.array(value, dtype=current.dtype)
            else:
                module._set_buffer(name, value)


class ModuleList(Module):
    """Ordered container of modules registered as ``0``, ``1``, ..."""

    def __init__(self, modules: Iterable[Module] = ()):
        super().__init__()
        for module in modules:
            self.append(module)

    def append(self, module: Module) -> None:
        setattr(self, str(len(self._modules)), module)

    def __iter__(self) -> Iterator[Module]:
        return iter(self._modules.values())

    def __len__(self) -> int:
        return len(self._modules)

    def __getitem__(self, index: int) -> Module:
        return list(self._modules.values())[index]


class ModuleDict(Module):
    """String-keyed container of modules, iterated in insertion order."""

    def __init__(self, modules: Optional[dict[str, Module]] = None):
        super().__init__()
        for key, module in (modules or {}).items():
            setattr(self, key, module)

    def __getitem__(self, key: str) -> Module:
        return self._modules[key]

    def __contains__(self, key: str) -> bool:
        return key in self._modules

    def keys(self) -> list[str]:
        return list(self._modules)

    def items(self) -> list[tuple[str, Module]]:
        return list(self._modules.items())


def xavier_uniform(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Zero-mean uniform init with bound sqrt(6 / (fan_in + fan_out)).

    fan_in = shape[1] * receptive field and fan_out = shape[0] * receptive
    field, where the receptive field is the product of the trailing dims.
    """
    if len(shape) < 2:
        raise ArgumentError(f"xavier_uniform needs at least 2 dims, got {shape}")
    receptive = int(np.prod(shape[2:])) if len(shape) > 2 else 1
    fan_in, fan_out = shape[1] * receptive, shape[0] * receptive
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)
