"""Black-box multi-label classifiers: an MLP and a small residual conv net."""

from __future__ import annotations

import numpy as np

from ..numcore import ops
from ..numcore.layers import Conv1d, Linear, Module
from ..numcore.rng import named_stream
from ..numcore.tensor import Tensor
from ..synthecg import LABELS, N_LEADS, N_SAMPLES

from .vae import ResBlock1d

N_CLASSES = len(LABELS)
ARCHITECTURES = ("mlp", "resnet_small")


def _check_signal(x: Tensor):
    if x.shape[-2:] != (N_LEADS, N_SAMPLES):
        raise ValueError(f"classifier: expected (*, {N_LEADS}, {N_SAMPLES}), "
                         f"got {x.shape}")


class MlpClassifier(Module):
    """Flattened-signal MLP with 8 per-class sigmoid outputs."""

    KIND = "classifier"
    ARCH = "mlp"

    def __init__(self, hidden: int = 64, seed: int = 0):
        super().__init__()
        self.hidden = hidden
        rng = named_stream(seed, "models/clf/mlp/init")
        self.l1 = Linear(N_LEADS * N_SAMPLES, hidden, rng)
        self.l2 = Linear(hidden, hidden, rng)
        self.l3 = Linear(hidden, N_CLASSES, rng)

    def config(self) -> dict:
        return {"architecture": self.ARCH, "hidden": self.hidden}

    def logits(self, x: Tensor) -> Tensor:
        _check_signal(x)
        h = ops.reshape(x, (x.shape[0], N_LEADS * N_SAMPLES))
        h = ops.relu(self.l1(h))
        h = ops.relu(self.l2(h))
        return self.l3(h)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.sigmoid(self.logits(x))


class ResnetClassifier(Module):
    """Four residual conv blocks with stride-2 stages, ~100k parameters."""

    KIND = "classifier"
    ARCH = "resnet_small"
    CHANNELS = (24, 32, 48, 64)

    def __init__(self, seed: int = 0):
        super().__init__()
        rng = named_stream(seed, "models/clf/resnet/init")
        c1, c2, c3, c4 = self.CHANNELS
        self.stem = Conv1d(N_LEADS, c1, 7, rng, stride=2)   # 600 -> 300
        self.block1 = ResBlock1d(c1, rng)
        self.down1 = Conv1d(c1, c2, 5, rng, stride=2)       # -> 150
        self.block2 = ResBlock1d(c2, rng)
        self.down2 = Conv1d(c2, c3, 5, rng, stride=2)       # -> 75
        self.block3 = ResBlock1d(c3, rng)
        self.down3 = Conv1d(c3, c4, 5, rng, stride=2)       # -> 38
        self.block4 = ResBlock1d(c4, rng)
        self.head = Linear(c4, N_CLASSES, rng)

    def config(self) -> dict:
        return {"architecture": self.ARCH}

    def logits(self, x: Tensor) -> Tensor:
        _check_signal(x)
        h = ops.relu(self.stem(x))
        h = self.block1(h)
        h = ops.relu(self.down1(h))
        h = self.block2(h)
        h = ops.relu(self.down2(h))
        h = self.block3(h)
        h = ops.relu(self.down3(h))
        h = self.block4(h)
        return self.head(ops.mean(h, axis=2))  # global average pool

    def __call__(self, x: Tensor) -> Tensor:
        return ops.sigmoid(self.logits(x))


def make_classifier(architecture: str, seed: int = 0, **kwargs) -> Module:
    if architecture == "mlp":
        return MlpClassifier(seed=seed, **kwargs)
    if architecture == "resnet_small":
        return ResnetClassifier(seed=seed, **kwargs)
    raise ValueError(f"unknown classifier architecture {architecture!r}; "
                     f"expected one of {ARCHITECTURES}")


def param_count(model: Module) -> int:
    return int(sum(np.prod(p.shape) for p in model.parameters().values()))
