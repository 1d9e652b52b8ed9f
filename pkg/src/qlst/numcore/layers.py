"""Network building blocks on top of the tape ops."""

from __future__ import annotations

import math

import numpy as np

from . import ops
from .tensor import Tensor


class Module:
    """Minimal container: tracks parameters and train/eval mode.

    Parameters are discovered by attribute scan, so construction order fixes
    parameter order (which checkpointing relies on).
    """

    def __init__(self):
        self.training = True

    def parameters(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for name, value in vars(self).items():
            if isinstance(value, Tensor):
                out[name] = value
            elif isinstance(value, Module):
                for sub, p in value.parameters().items():
                    out[f"{name}.{sub}"] = p
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        for sub, p in item.parameters().items():
                            out[f"{name}.{i}.{sub}"] = p
        return out

    def train(self, mode: bool = True):
        self.training = mode
        for value in vars(self).values():
            if isinstance(value, Module):
                value.train(mode)
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        item.train(mode)
        return self

    def eval(self):
        return self.train(False)

    def zero_grad(self):
        for p in self.parameters().values():
            p.grad = None


def _param(rng: np.random.Generator, shape, fan_in: int) -> Tensor:
    scale = math.sqrt(2.0 / fan_in)
    return Tensor(rng.normal(0.0, scale, size=shape).astype(np.float32),
                  requires_grad=True)


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator):
        super().__init__()
        self.w = _param(rng, (d_in, d_out), d_in)
        self.b = Tensor(np.zeros(d_out, dtype=np.float32), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.add(ops.matmul(x, self.w), self.b)


class Conv1d(Module):
    def __init__(self, c_in: int, c_out: int, k: int, rng: np.random.Generator,
                 stride: int = 1, padding="same"):
        super().__init__()
        self.stride = stride
        self.padding = padding
        self.w = _param(rng, (c_out, c_in, k), c_in * k)
        self.b = Tensor(np.zeros(c_out, dtype=np.float32), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv1d(x, self.w, self.b, stride=self.stride, padding=self.padding)


class LayerNorm(Module):
    def __init__(self, dim: int):
        super().__init__()
        self.gain = Tensor(np.ones(dim, dtype=np.float32), requires_grad=True)
        self.bias = Tensor(np.zeros(dim, dtype=np.float32), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.gain, self.bias)


class MultiHeadAttention(Module):
    """Scaled dot-product self-attention over a token sequence (B, T, D).

    Dropout is applied to the post-softmax attention weights and to the
    output projection, both with the same probability.
    """

    def __init__(self, dim: int, heads: int, rng: np.random.Generator,
                 dropout_p: float = 0.1):
        super().__init__()
        if dim % heads != 0:
            raise ValueError(f"attention: model dim {dim} not divisible by {heads} heads")
        self.dim = dim
        self.heads = heads
        self.d_head = dim // heads
        self.keep = 1.0 - dropout_p
        self.wq = Linear(dim, dim, rng)
        self.wk = Linear(dim, dim, rng)
        self.wv = Linear(dim, dim, rng)
        self.wo = Linear(dim, dim, rng)

    def _split(self, x: Tensor, B: int, T: int) -> Tensor:
        x = ops.reshape(x, (B, T, self.heads, self.d_head))
        return ops.transpose(x, (0, 2, 1, 3))  # (B, h, T, dh)

    def __call__(self, x: Tensor, dropout_rng: np.random.Generator | None = None) -> Tensor:
        B, T, _ = x.shape
        q = self._split(self.wq(x), B, T)
        k = self._split(self.wk(x), B, T)
        v = self._split(self.wv(x), B, T)
        scores = ops.mul(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))),
                         1.0 / math.sqrt(self.d_head))
        weights = ops.softmax(scores, axis=-1)
        weights = ops.dropout(weights, self.keep, dropout_rng, self.training)
        ctx = ops.matmul(weights, v)  # (B, h, T, dh)
        ctx = ops.reshape(ops.transpose(ctx, (0, 2, 1, 3)), (B, T, self.dim))
        out = self.wo(ctx)
        return ops.dropout(out, self.keep, dropout_rng, self.training)

    def attention_weights(self, x: Tensor) -> np.ndarray:
        """Pre-dropout attention weights, for inspection/tests."""
        B, T, _ = x.shape
        q = self._split(self.wq(x), B, T)
        k = self._split(self.wk(x), B, T)
        scores = ops.mul(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))),
                         1.0 / math.sqrt(self.d_head))
        return ops.softmax(scores, axis=-1).data
