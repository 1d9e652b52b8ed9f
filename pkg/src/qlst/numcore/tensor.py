"""Tensors and the gradient tape.

A ``Tensor`` wraps a row-major numpy array (float32 by default).  Ops from
:mod:`qlst.numcore.ops` record themselves on the active ``Tape`` whenever an
input requires gradients; ``backward`` then replays the tape once, in
reverse, accumulating gradients into ``.grad`` buffers.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np


class ShapeError(ValueError):
    """Input shapes do not conform to an op's shape rule."""

    def __init__(self, op: str, *shapes):
        self.op = op
        self.shapes = tuple(tuple(s) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {self.shapes}")


class NonFiniteError(ArithmeticError):
    """A buffer that must be finite contains NaN or Inf."""


class Tensor:
    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            arr = np.asarray(data)
            # float64 stays float64 (the gradcheck harness relies on it);
            # anything non-floating becomes the training dtype, float32
            if not np.issubdtype(arr.dtype, np.floating):
                arr = arr.astype(np.float32)
            self.data = arr
        else:
            self.data = np.asarray(data, dtype=dtype)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = bool(requires_grad)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def check_finite(self, name: str = "tensor") -> "Tensor":
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteError(f"{name} contains NaN or Inf")
        return self

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def as_tensor(x, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(x, dtype=dtype)


class TapeOp:
    """One recorded op: output node, input nodes, and its backward rule.

    ``backward(g_out)`` returns one gradient array (or None) per input, in
    input order.
    """

    __slots__ = ("name", "out", "inputs", "backward")

    def __init__(self, name: str, out: Tensor, inputs: Sequence[Tensor],
                 backward: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]):
        self.name = name
        self.out = out
        self.inputs = tuple(inputs)
        self.backward = backward


class Tape:
    """Ordered op record; inputs of every op precede it (recording order)."""

    def __init__(self):
        self.ops: list[TapeOp] = []

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc):
        popped = _TAPE_STACK.pop()
        assert popped is self
        return False

    def __len__(self):
        return len(self.ops)


_TAPE_STACK: list[Tape] = []


def active_tape() -> Optional[Tape]:
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def record(name: str, out: Tensor, inputs: Sequence[Tensor], backward) -> Tensor:
    """Mark ``out`` as requiring grad and tape the op, if appropriate."""
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.ops.append(TapeOp(name, out, inputs, backward))
    return out


def backward(tape: Tape, loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into ``.grad`` of every grad-requiring leaf.

    Visits each taped op exactly once, in reverse recording order.
    """
    if loss.size != 1:
        raise ShapeError("backward", loss.shape)
    if not tape.ops:
        raise ValueError("backward: empty tape")
    loss.grad = np.ones_like(loss.data)
    for op in reversed(tape.ops):
        g_out = op.out.grad
        if g_out is None:
            continue
        grads = op.backward(g_out)
        for inp, g in zip(op.inputs, grads):
            if g is None or not inp.requires_grad:
                continue
            g = np.asarray(g, dtype=inp.data.dtype)
            if inp.grad is None:
                inp.grad = g
            else:
                inp.grad = inp.grad + g
