"""Differentiable primitives the network blocks are built from.

Feature maps are batched and laid out as (N, C, T, V). Every primitive
returns a Tensor recorded on the tape when an input requires a gradient.
"""

from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..core.errors import ArgumentError
from .engine import Tensor, _normalize_axes, as_tensor


BN_EPS = 1e-5
BN_MOMENTUM = 0.1

ACTIVATIONS = ("swish", "hardswish", "sigmoid", "relu")


def _check_ndim(x: Tensor, ndim: int, what: str) -> None:
    if x.ndim != ndim:
        raise ArgumentError(f"{what} expects a {ndim}-d input, got shape {x.shape}")


# Convolutions

def pointwise_conv(x: Tensor, weight: Tensor) -> Tensor:
    """1x1 convolution: per-position matrix multiply over channels.

    Args:
        x: Input (N, C_in, T, V).
        weight: Weight (C_out, C_in).
    """
    _check_ndim(x, 4, "pointwise_conv")
    if weight.ndim != 2 or weight.shape[1] != x.shape[1]:
        raise ArgumentError(
            f"Pointwise weight {weight.shape} does not match {x.shape[1]} input channels")
    xd, wd = x.data, weight.data
    out = np.ascontiguousarray(np.tensordot(wd, xd, axes=([1], [1])).transpose(1, 0, 2, 3))

    def grad_fn(g: np.ndarray):
        gx = np.ascontiguousarray(np.tensordot(wd, g, axes=([0], [1])).transpose(1, 0, 2, 3))
        gw = np.tensordot(g, xd, axes=([0, 2, 3], [0, 2, 3]))
        return gx, gw

    return Tensor.from_op(out, (x, weight), grad_fn)


def temporal_conv(
    x: Tensor,
    weight: Tensor,
    stride: int = 1,
    groups: int = 1,
) -> Tensor:
    """Lx1 convolution along the frame axis with symmetric zero padding.

    Args:
        x: Input (N, C_in, T, V).
        weight: Weight (C_out, C_in / groups, L, 1) with L odd.
        stride: Temporal stride; T maps to ceil(T / stride).
        groups: Channel groups; groups = C_in = C_out is depth-wise.
    """
    _check_ndim(x, 4, "temporal_conv")
    if weight.ndim != 4 or weight.shape[3] != 1:
        raise ArgumentError(f"Temporal weight must be (C_out, C_in/g, L, 1), got {weight.shape}")
    n, c_in, frames, joints = x.shape
    c_out, c_group, kernel, _ = weight.shape
    if kernel % 2 == 0:
        raise ArgumentError(f"Temporal kernel must be odd, got {kernel}")
    if stride < 1:
        raise ArgumentError(f"Stride must be positive, got {stride}")
    if groups < 1 or c_in % groups or c_out % groups:
        raise ArgumentError(f"Channels {c_in}->{c_out} are not divisible into {groups} groups")
    if c_group != c_in // groups:
        raise ArgumentError(
            f"Weight expects {c_group} channels per group, input provides {c_in // groups}")

    if kernel == 1 and stride == 1 and groups == 1:
        return pointwise_conv(x, weight.reshape(c_out, c_in))

    pad = (kernel - 1) // 2
    out_frames = (frames - 1) // stride + 1
    o_group = c_out // groups
    xd = x.data
    padded = np.pad(xd, ((0, 0), (0, 0), (pad, pad), (0, 0)))
    # (N, C_in, T_out, V, L)
    windows = sliding_window_view(padded, kernel, axis=2)[:, :, ::stride][:, :, :out_frames]
    windows = windows.reshape(n, groups, c_group, out_frames, joints, kernel)
    w = weight.data.reshape(groups, o_group, c_group, kernel)
    out = np.einsum("ngctvl,gocl->ngotv", windows, w, optimize=True)
    out = np.ascontiguousarray(out.reshape(n, c_out, out_frames, joints))

    def grad_fn(g: np.ndarray):
        gg = g.reshape(n, groups, o_group, out_frames, joints)
        gw = np.einsum("ngotv,ngctvl->gocl", gg, windows, optimize=True)
        gwin = np.einsum("ngotv,gocl->ngctvl", gg, w, optimize=True)
        gwin = gwin.reshape(n, c_in, out_frames, joints, kernel)
        gpad = np.zeros_like(padded)
        span = stride * (out_frames - 1) + 1
        for k in range(kernel):
            gpad[:, :, k:k + span:stride] += gwin[..., k]
        gx = gpad[:, :, pad:pad + frames]
        return np.ascontiguousarray(gx), gw.reshape(weight.shape)

    return Tensor.from_op(out, (x, weight), grad_fn)


def temporal_pool_stride(x: Tensor, stride: int) -> Tensor:
    """Keep every ``stride``-th frame (the 1x1 strided residual sampling)."""
    if stride == 1:
        return x
    return x[:, :, ::stride]


def graph_aggregate(x: Tensor, adjacency: Tensor) -> Tensor:
    """Sum of per-partition joint aggregations.

    Args:
        x: Partition features (N, K, C, T, V).
        adjacency: Masked normalized adjacency (K, V, V).

    Returns:
        Tensor (N, C, T, V) with out[..., w] = sum_k sum_v x[:, k, ..., v] A[k, v, w].
    """
    _check_ndim(x, 5, "graph_aggregate")
    k, v = x.shape[1], x.shape[4]
    if adjacency.shape != (k, v, v):
        raise ArgumentError(
            f"Adjacency shape {adjacency.shape} does not match {k} partitions of {v} joints")
    xd, ad = x.data, adjacency.data
    out = np.einsum("nkctv,kvw->nctw", xd, ad, optimize=True)

    def grad_fn(g: np.ndarray):
        gx = np.einsum("nctw,kvw->nkctv", g, ad, optimize=True)
        ga = np.einsum("nkctv,nctw->kvw", xd, g, optimize=True)
        return gx, ga

    return Tensor.from_op(out, (x, adjacency), grad_fn)


# Normalization

def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = BN_MOMENTUM,
    eps: float = BN_EPS,
) -> Tensor:
    """Per-channel batch normalization over every axis except axis 1.

    In training mode the batch statistics normalize the input and the
    running statistics are updated in place as
    ``new = (1 - momentum) * old + momentum * batch`` (unbiased batch
    variance). In eval mode the running statistics are used.
    """
    if x.ndim < 2:
        raise ArgumentError(f"batch_norm expects (N, C, ...), got shape {x.shape}")
    channels = x.shape[1]
    if gamma.shape != (channels,) or beta.shape != (channels,):
        raise ArgumentError(
            f"gamma/beta shapes {gamma.shape}/{beta.shape} do not match {channels} channels")
    if x.size == 0:
        raise ArgumentError("batch_norm received an empty batch")

    axes = tuple(i for i in range(x.ndim) if i != 1)
    bshape = (1, channels) + (1,) * (x.ndim - 2)
    xd = x.data
    g_d = gamma.data.reshape(bshape)

    if training:
        count = xd.size // channels
        mean = xd.mean(axis=axes)
        var = xd.var(axis=axes)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mean
        running_var *= 1.0 - momentum
        running_var += momentum * var * (count / max(count - 1, 1))
    else:
        mean, var = running_mean.astype(xd.dtype), running_var.astype(xd.dtype)

    inv_std = (1.0 / np.sqrt(var + eps)).astype(xd.dtype)
    x_hat = (xd - mean.reshape(bshape)) * inv_std.reshape(bshape)
    out = g_d * x_hat + beta.data.reshape(bshape)

    def grad_fn(g: np.ndarray):
        g_gamma = np.sum(g * x_hat, axis=axes)
        g_beta = np.sum(g, axis=axes)
        g_xhat = g * g_d
        if training:
            n = xd.size // channels
            gx = (inv_std.reshape(bshape) / n) * (
                n * g_xhat
                - np.sum(g_xhat, axis=axes).reshape(bshape)
                - x_hat * np.sum(g_xhat * x_hat, axis=axes).reshape(bshape))
        else:
            gx = g_xhat * inv_std.reshape(bshape)
        return gx, g_gamma, g_beta

    return Tensor.from_op(out, (x, gamma, beta), grad_fn)


# Activations

def sigmoid(x: Tensor) -> Tensor:
    s = 0.5 * (1.0 + np.tanh(0.5 * x.data))
    return Tensor.from_op(s, (x,), lambda g: (g * s * (1.0 - s),))


def swish(x: Tensor) -> Tensor:
    xd = x.data
    s = 0.5 * (1.0 + np.tanh(0.5 * xd))
    return Tensor.from_op(xd * s, (x,), lambda g: (g * s * (1.0 + xd * (1.0 - s)),))


def hardswish(x: Tensor) -> Tensor:
    xd = x.data
    out = xd * np.clip(xd + 3.0, 0.0, 6.0) / 6.0

    def grad_fn(g: np.ndarray):
        slope = np.where(xd < -3.0, 0.0, np.where(xd > 3.0, 1.0, (2.0 * xd + 3.0) / 6.0))
        return (g * slope.astype(xd.dtype),)

    return Tensor.from_op(out, (x,), grad_fn)


def relu(x: Tensor) -> Tensor:
    xd = x.data
    return Tensor.from_op(np.maximum(xd, 0), (x,), lambda g: (g * (xd > 0),))


_ACTIVATION_FNS = {"swish": swish, "hardswish": hardswish, "sigmoid": sigmoid, "relu": relu}


def activation(x: Tensor, kind: str) -> Tensor:
    """Apply an elementwise activation by name."""
    try:
        fn = _ACTIVATION_FNS[kind]
    except KeyError:
        raise ArgumentError(
            f"Unknown activation '{kind}'; expected one of {', '.join(ACTIVATIONS)}") from None
    return fn(x)


# Pooling, joining and linear layers

def mean_over_axes(x: Tensor, axes: Sequence[int]) -> Tensor:
    """Arithmetic mean over the given distinct axes, reducing them away."""
    axes = tuple(axes)
    normalized = _normalize_axes(axes, x.ndim)
    return x.mean(axis=normalized)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Concatenate along ``axis``; the gradient is split back per input."""
    if not tensors:
        raise ArgumentError("concat needs at least one tensor")
    axis = axis % tensors[0].ndim
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    return Tensor.from_op(
        out, tuple(tensors), lambda g: tuple(np.split(g, bounds, axis=axis)))


def fully_connected(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """``x @ weight.T + bias`` for x of shape (N, C) and weight (Q, C)."""
    if x.ndim != 2 or weight.ndim != 2 or weight.shape[1] != x.shape[1]:
        raise ArgumentError(
            f"fully_connected shapes do not agree: input {x.shape}, weight {weight.shape}")
    if bias is not None and bias.shape != (weight.shape[0],):
        raise ArgumentError(f"Bias shape {bias.shape} does not match {weight.shape[0]} outputs")
    xd, wd = x.data, weight.data
    out = xd @ wd.T
    if bias is None:
        return Tensor.from_op(out, (x, weight), lambda g: (g @ wd, g.T @ xd))
    out = out + bias.data
    return Tensor.from_op(
        out, (x, weight, bias), lambda g: (g @ wd, g.T @ xd, g.sum(axis=0)))


def dropout(
    x: Tensor,
    p: float,
    training: bool,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """Inverted dropout: zero with probability p, scale survivors by 1/(1-p)."""
    if not 0 <= p < 1:
        raise ArgumentError(f"Dropout probability must lie in [0, 1), got {p}")
    if not training or p == 0:
        return x
    if rng is None:
        raise ArgumentError("Training-mode dropout needs a random generator")
    mask = (rng.random(x.shape) >= p).astype(x.dtype) / (1.0 - p)
    return x * as_tensor(mask, like=x)
