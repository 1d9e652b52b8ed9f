"""Differentiable array ops.

Each op computes its output eagerly with numpy and registers a backward rule
on the active tape when gradients are needed.  Binary elementwise ops follow
numpy broadcasting; gradients are summed back to the operand shapes.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor import Tensor, as_tensor, record, ShapeError


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, (gs, ss) in enumerate(zip(g.shape, shape)):
        if ss == 1 and gs != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _pair(a, b) -> tuple[Tensor, Tensor]:
    """as_tensor both operands; python scalars adopt the other's dtype.

    Without this, a literal like 1/sqrt(d) would become a float64 tensor and
    silently upcast a float32 model's whole forward pass.
    """
    a_scalar = isinstance(a, (int, float))
    b_scalar = isinstance(b, (int, float))
    if a_scalar and not b_scalar:
        b = as_tensor(b)
        return as_tensor(np.asarray(a, dtype=b.data.dtype)), b
    if b_scalar and not a_scalar:
        a = as_tensor(a)
        return a, as_tensor(np.asarray(b, dtype=a.data.dtype))
    return as_tensor(a), as_tensor(b)


def _check_broadcast(op: str, a: Tensor, b: Tensor):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(op, a.shape, b.shape) from None


# ---------------------------------------------------------------- arithmetic

def add(a, b) -> Tensor:
    a, b = _pair(a, b)
    _check_broadcast("add", a, b)
    out = Tensor(a.data + b.data)
    return record("add", out, (a, b), lambda g: (
        _unbroadcast(g, a.shape) if a.requires_grad else None,
        _unbroadcast(g, b.shape) if b.requires_grad else None,
    ))


def sub(a, b) -> Tensor:
    a, b = _pair(a, b)
    _check_broadcast("sub", a, b)
    out = Tensor(a.data - b.data)
    return record("sub", out, (a, b), lambda g: (
        _unbroadcast(g, a.shape) if a.requires_grad else None,
        _unbroadcast(-g, b.shape) if b.requires_grad else None,
    ))


def mul(a, b) -> Tensor:
    a, b = _pair(a, b)
    _check_broadcast("mul", a, b)
    out = Tensor(a.data * b.data)
    return record("mul", out, (a, b), lambda g: (
        _unbroadcast(g * b.data, a.shape) if a.requires_grad else None,
        _unbroadcast(g * a.data, b.shape) if b.requires_grad else None,
    ))


def div(a, b) -> Tensor:
    a, b = _pair(a, b)
    _check_broadcast("div", a, b)
    out = Tensor(a.data / b.data)
    return record("div", out, (a, b), lambda g: (
        _unbroadcast(g / b.data, a.shape) if a.requires_grad else None,
        _unbroadcast(-g * a.data / (b.data * b.data), b.shape) if b.requires_grad else None,
    ))


def neg(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(-a.data)
    return record("neg", out, (a,), lambda g: (-g,))


# ------------------------------------------------------------ linear algebra

def matmul(a, b) -> Tensor:
    """Matrix product; leading dims are stacked (numpy matmul semantics)."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError("matmul", a.shape, b.shape)
    out = Tensor(np.matmul(a.data, b.data))

    def bwd(g):
        ga = gb = None
        if a.requires_grad:
            ga = _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape)
        if b.requires_grad:
            gb = _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape)
        return ga, gb

    return record("matmul", out, (a, b), bwd)


def _conv_padding(L: int, K: int, stride: int, padding) -> tuple[int, int]:
    if padding == "valid":
        return 0, 0
    if padding == "same":
        L_out = -(-L // stride)
        total = max((L_out - 1) * stride + K - L, 0)
        return total // 2, total - total // 2
    return int(padding), int(padding)


def conv1d(x, w, b=None, stride: int = 1, padding="same") -> Tensor:
    """1D convolution (cross-correlation): x (B,Cin,L), w (Cout,Cin,K)."""
    x, w = as_tensor(x), as_tensor(w)
    if x.ndim != 3 or w.ndim != 3 or x.shape[1] != w.shape[1]:
        raise ShapeError("conv1d", x.shape, w.shape)
    B, Cin, L = x.shape
    Cout, _, K = w.shape
    pl, pr = _conv_padding(L, K, stride, padding)
    xp = np.pad(x.data, ((0, 0), (0, 0), (pl, pr)))
    win = sliding_window_view(xp, K, axis=2)[:, :, ::stride]  # (B,Cin,Lout,K)
    Lout = win.shape[2]
    cols = np.ascontiguousarray(win.transpose(0, 2, 1, 3)).reshape(B * Lout, Cin * K)
    wmat = w.data.reshape(Cout, Cin * K)
    y = cols @ wmat.T
    y = y.reshape(B, Lout, Cout).transpose(0, 2, 1)
    if b is not None:
        b = as_tensor(b)
        if b.shape != (Cout,):
            raise ShapeError("conv1d.bias", b.shape, (Cout,))
        y = y + b.data[:, None]
    out = Tensor(y)
    inputs = (x, w) if b is None else (x, w, b)

    def bwd(g):
        gmat = np.ascontiguousarray(g.transpose(0, 2, 1)).reshape(B * Lout, Cout)
        gx = gw = gb = None
        if w.requires_grad:
            gw = (gmat.T @ cols).reshape(Cout, Cin, K)
        if x.requires_grad:
            gcols = (gmat @ wmat).reshape(B, Lout, Cin, K).transpose(0, 2, 1, 3)
            gxp = np.zeros_like(xp)
            for k in range(K):
                gxp[:, :, k:k + stride * Lout:stride] += gcols[:, :, :, k]
            gx = gxp[:, :, pl:pl + L]
        if b is not None and b.requires_grad:
            gb = g.sum(axis=(0, 2))
        return (gx, gw) if b is None else (gx, gw, gb)

    return record("conv1d", out, inputs, bwd)


def upsample1d(x, factor: int) -> Tensor:
    """Nearest-neighbour repeat along the last axis."""
    x = as_tensor(x)
    out = Tensor(np.repeat(x.data, factor, axis=-1))

    def bwd(g):
        return (g.reshape(*x.shape, factor).sum(axis=-1),)

    return record("upsample1d", out, (x,), bwd)


# ------------------------------------------------------------- nonlinearities

def relu(x) -> Tensor:
    x = as_tensor(x)
    out = Tensor(np.maximum(x.data, 0))
    return record("relu", out, (x,), lambda g: (g * (x.data > 0),))


def leaky_relu(x, alpha: float = 0.1) -> Tensor:
    x = as_tensor(x)
    a = x.data.dtype.type(alpha)
    out = Tensor(np.where(x.data > 0, x.data, x.data * a))
    return record("leaky_relu", out, (x,),
                  lambda g: (g * np.where(x.data > 0, g.dtype.type(1), a),))


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    s = 1.0 / (1.0 + np.exp(-x.data))
    out = Tensor(s)
    return record("sigmoid", out, (x,), lambda g: (g * s * (1.0 - s),))


def tanh(x) -> Tensor:
    x = as_tensor(x)
    t = np.tanh(x.data)
    out = Tensor(t)
    return record("tanh", out, (x,), lambda g: (g * (1.0 - t * t),))


def exp(x) -> Tensor:
    x = as_tensor(x)
    e = np.exp(x.data)
    out = Tensor(e)
    return record("exp", out, (x,), lambda g: (g * e,))


def log(x) -> Tensor:
    x = as_tensor(x)
    out = Tensor(np.log(x.data))
    return record("log", out, (x,), lambda g: (g / x.data,))


def clip(x, lo: float, hi: float) -> Tensor:
    """Clamp; gradient flows only through the interior."""
    x = as_tensor(x)
    out = Tensor(np.clip(x.data, lo, hi))
    inside = (x.data > lo) & (x.data < hi)
    return record("clip", out, (x,), lambda g: (g * inside,))


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(s)

    def bwd(g):
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return record("softmax", out, (x,), bwd)


def layer_norm(x, gain, bias, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    D = x.shape[-1]
    if gain.shape != (D,) or bias.shape != (D,):
        raise ShapeError("layer_norm", x.shape, gain.shape, bias.shape)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = Tensor(gain.data * xhat + bias.data)

    def bwd(g):
        gx = ggain = gbias = None
        if gain.requires_grad:
            ggain = (g * xhat).reshape(-1, D).sum(axis=0)
        if bias.requires_grad:
            gbias = g.reshape(-1, D).sum(axis=0)
        if x.requires_grad:
            dxhat = g * gain.data
            gx = inv / D * (D * dxhat - dxhat.sum(axis=-1, keepdims=True)
                            - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True))
        return gx, ggain, gbias

    return record("layer_norm", out, (x, gain, bias), bwd)


def dropout(x, keep: float, stream: np.random.Generator | None, training: bool) -> Tensor:
    """Inverted dropout with keep probability ``keep``; identity in eval mode."""
    x = as_tensor(x)
    if not training or keep >= 1.0:
        out = Tensor(x.data)
        return record("dropout", out, (x,), lambda g: (g,))
    if stream is None:
        raise ValueError("dropout: training mode needs an RNG stream")
    mask = (stream.random(x.shape) < keep).astype(x.data.dtype) / keep
    out = Tensor(x.data * mask)
    return record("dropout", out, (x,), lambda g: (g * mask,))


# ------------------------------------------------------------- shape surgery

def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    out = Tensor(x.data.reshape(shape))
    return record("reshape", out, (x,), lambda g: (g.reshape(x.shape),))


def transpose(x, axes) -> Tensor:
    x = as_tensor(x)
    out = Tensor(x.data.transpose(axes))
    inverse = np.argsort(axes)
    return record("transpose", out, (x,), lambda g: (g.transpose(inverse),))


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        return tuple(np.split(g, splits, axis=axis))

    return record("concat", out, tuple(tensors), bwd)


def narrow(x, axis: int, start: int, length: int) -> Tensor:
    """Slice ``length`` entries from ``start`` along ``axis``."""
    x = as_tensor(x)
    idx = [slice(None)] * x.ndim
    idx[axis] = slice(start, start + length)
    idx = tuple(idx)
    out = Tensor(x.data[idx])

    def bwd(g):
        gx = np.zeros_like(x.data)
        gx[idx] = g
        return (gx,)

    return record("slice", out, (x,), bwd)


# ---------------------------------------------------------------- reductions

def sum_(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    out = Tensor(x.data.sum(axis=axis, keepdims=keepdims))

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g, x.shape).copy(),)
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return record("sum", out, (x,), bwd)


def mean(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    out = Tensor(x.data.mean(axis=axis, keepdims=keepdims))
    if axis is None:
        n = x.size
    else:
        n = x.shape[axis] if isinstance(axis, int) else math.prod(x.shape[a] for a in axis)

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g / n, x.shape).copy(),)
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / n, x.shape).copy(),)

    return record("mean", out, (x,), bwd)
