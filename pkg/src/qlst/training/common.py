"""Helpers shared by the three training stages."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..numcore.rng import named_stream
from ..numcore.tensor import Tensor


class TrainingError(Exception):
    """Structured abort: divergence, empty splits, frozen-weight violations."""


def require_split(dataset, split: str, max_samples: int = 0):
    sub = dataset.subset(split)
    if len(sub) == 0:
        raise TrainingError(f"dataset has an empty {split!r} split")
    if max_samples and len(sub) > max_samples:
        from ..synthecg import Dataset
        sub = Dataset(sub.signals[:max_samples], sub.labels[:max_samples],
                      sub.splits[:max_samples], sub.params[:max_samples])
    return sub


def epoch_batches(n: int, batch_size: int, seed: int, name: str):
    """Deterministic shuffled batch index arrays for one epoch."""
    order = named_stream(seed, name).permutation(n)
    for lo in range(0, n, batch_size):
        yield order[lo:lo + batch_size]


def class_weights(label_freq: np.ndarray, lo: float = 1.0, hi: float = 10.0) -> np.ndarray:
    """Inverse-frequency class weights, mean-referenced and clipped to [1, 10].

    A perfectly balanced dataset (all frequencies equal) yields all-ones.
    """
    freq = np.maximum(np.asarray(label_freq, dtype=np.float64), 1e-6)
    return np.clip(freq.mean() / freq, lo, hi)


def check_divergence(value: float, stage: str):
    if not np.isfinite(value):
        raise TrainingError(f"{stage}: loss diverged (non-finite)")


def predict_proba(model, signals: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Tape-free batched classifier probabilities on an (n, 8, 600) array."""
    was_training = model.training
    model.eval()
    out = []
    for lo in range(0, len(signals), batch_size):
        out.append(model(Tensor(signals[lo:lo + batch_size])).data)
    model.train(was_training)
    return np.concatenate(out, axis=0)


def encode_mean(vae, signals: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Tape-free batched latent means on an (n, 8, 600) array."""
    was_training = vae.training
    vae.eval()
    out = []
    for lo in range(0, len(signals), batch_size):
        out.append(vae.encode(Tensor(signals[lo:lo + batch_size]), "mean").data)
    vae.train(was_training)
    return np.concatenate(out, axis=0)


def write_metrics_csv(path, rows: list[dict]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        return
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def freeze(model):
    """Mark every parameter as gradient-free; returns the model."""
    for p in model.parameters().values():
        p.requires_grad = False
        p.grad = None
    return model.eval()


def assert_frozen(model, what: str):
    for name, p in model.parameters().items():
        if p.requires_grad or p.grad is not None:
            raise TrainingError(f"{what} parameter {name!r} is not frozen")
