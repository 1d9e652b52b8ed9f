"""Stage 1: multi-label classifier training."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter1d
from sklearn.metrics import roc_auc_score

from ..models.classifier import make_classifier
from ..numcore import Tape, backward, ops
from ..numcore.optim import Adam
from ..numcore.rng import named_stream
from ..numcore.tensor import Tensor
from ..synthecg import LABELS
from .common import (TrainingError, check_divergence, class_weights,
                     epoch_batches, predict_proba, require_split)
from .config import StageConfig

EPS = 1e-7
BLUR_SIGMA_MAX = 2.0   # samples (2 ms each): up to ~4 ms temporal smearing


def augment_batch(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random temporal Gaussian blur + small gain jitter, per sample.

    Decoded signals downstream are systematically smoother than raw ones
    (generative reconstructions smear narrow waves and shave their peaks);
    a classifier trained only on sharp signals reads that smearing as
    "wave absent".  Blur augmentation makes it score decoded signals the
    way it scores raw ones.  Labels are blur-invariant: wave onsets/offsets
    and rate do not move, only peak sharpness.
    """
    out = np.empty_like(x)
    sigmas = rng.uniform(0.0, BLUR_SIGMA_MAX, size=len(x))
    gains = rng.uniform(0.95, 1.05, size=len(x)).astype(x.dtype)
    for i, (s, g) in enumerate(zip(sigmas, gains)):
        xi = gaussian_filter1d(x[i], s, axis=-1) if s > 0.1 else x[i]
        out[i] = xi * g
    return out


def bce_loss(probs: Tensor, targets: np.ndarray, pos_weight: np.ndarray) -> Tensor:
    """Weighted multi-label BCE; the positive term carries the class weight."""
    p = ops.clip(probs, EPS, 1.0 - EPS)
    y = targets.astype(np.float32)
    w = pos_weight.astype(np.float32)
    pos = ops.mul(ops.mul(ops.log(p), y), w)
    neg = ops.mul(ops.log(ops.sub(1.0, p)), 1.0 - y)
    return ops.neg(ops.mean(ops.add(pos, neg)))


def auroc_per_class(labels: np.ndarray, probs: np.ndarray) -> list[float]:
    out = []
    for j in range(labels.shape[1]):
        col = labels[:, j]
        if col.all() or not col.any():
            out.append(float("nan"))  # undefined with one class present
        else:
            out.append(float(roc_auc_score(col, probs[:, j])))
    return out


def train_classifier(config: StageConfig, dataset):
    """Train a classifier per the stage config; returns (model, metrics)."""
    if config.stage != "classifier":
        raise ValueError("train_classifier needs a 'classifier' stage config")
    train = require_split(dataset, "train", config.max_train_samples)
    val = require_split(dataset, "val")
    weights = class_weights(train.label_frequencies())

    model = make_classifier(config.architecture, seed=config.seed)
    opt = Adam(model.parameters(), lr=config.learning_rate)
    metrics = []
    aug_rng = named_stream(config.seed, "train/clf/augment")
    for epoch in range(config.epochs):
        opt.lr = config.epoch_lr(epoch)
        model.train()
        total, nb = 0.0, 0
        for idx in epoch_batches(len(train), config.batch_size, config.seed,
                                 f"train/clf/epoch/{epoch}"):
            x = Tensor(augment_batch(train.signals[idx], aug_rng))
            with Tape() as tape:
                loss = bce_loss(model(x), train.labels[idx], weights)
                backward(tape, loss)
            check_divergence(float(loss.data), "classifier")
            opt.step()
            model.zero_grad()
            total += float(loss.data)
            nb += 1
        probs = predict_proba(model, val.signals)
        aucs = auroc_per_class(val.labels, probs)
        row = {"epoch": epoch, "train_loss": total / nb}
        row.update({f"val_auroc_{name}": auc for name, auc in zip(LABELS, aucs)})
        metrics.append(row)
    return model.eval(), metrics
