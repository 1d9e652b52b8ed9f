"""Dense numerical core: tensors, reverse-mode autodiff, layers, Adam."""

from . import ops
from .layers import Conv1d, LayerNorm, Linear, Module, MultiHeadAttention
from .optim import Adam
from .rng import named_stream
from .tensor import (NonFiniteError, ShapeError, Tape, Tensor, active_tape,
                     as_tensor, backward)

__all__ = [
    "ops", "Tensor", "Tape", "backward", "active_tape", "as_tensor",
    "ShapeError", "NonFiniteError", "Module", "Linear", "Conv1d", "LayerNorm",
    "MultiHeadAttention", "Adam", "named_stream",
]
