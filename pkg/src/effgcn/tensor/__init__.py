"""numpy-backed tensor engine with reverse-mode differentiation."""

from .checkpoint import load_checkpoint, save_checkpoint
from .engine import (
    Tensor,
    as_tensor,
    default_dtype,
    get_default_dtype,
    is_grad_enabled,
    no_grad,
    resolve_dtype,
    set_default_dtype,
)
from .gradcheck import GradCheckEntry, GradCheckReport, grad_check
from .layers import BatchNorm, Dropout, Linear, PointwiseConv, TemporalConv
from .module import Module, ModuleDict, ModuleList, Parameter, xavier_uniform
from .ops import (
    activation,
    batch_norm,
    concat,
    dropout,
    fully_connected,
    graph_aggregate,
    hardswish,
    mean_over_axes,
    pointwise_conv,
    relu,
    sigmoid,
    swish,
    temporal_conv,
)

__all__ = [
    "BatchNorm",
    "Dropout",
    "GradCheckEntry",
    "GradCheckReport",
    "Linear",
    "Module",
    "ModuleDict",
    "ModuleList",
    "Parameter",
    "PointwiseConv",
    "TemporalConv",
    "Tensor",
    "activation",
    "as_tensor",
    "batch_norm",
    "concat",
    "default_dtype",
    "dropout",
    "fully_connected",
    "get_default_dtype",
    "grad_check",
    "graph_aggregate",
    "hardswish",
    "is_grad_enabled",
    "load_checkpoint",
    "mean_over_axes",
    "no_grad",
    "pointwise_conv",
    "relu",
    "resolve_dtype",
    "save_checkpoint",
    "set_default_dtype",
    "sigmoid",
    "swish",
    "temporal_conv",
    "xavier_uniform",
]
