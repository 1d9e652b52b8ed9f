"""Stage 3: per-class qLST training against frozen classifier and VAE."""

from __future__ import annotations

import numpy as np

from ..models.qlst import QlstModel
from ..numcore import Tape, backward, ops
from ..numcore.optim import Adam
from ..numcore.rng import named_stream
from ..numcore.tensor import Tensor
from .common import (assert_frozen, check_divergence, encode_mean,
                     epoch_batches, freeze, predict_proba, require_split)
from .config import StageConfig

EPS = 1e-7
ALPHA_BASE = 25.0


def alpha_schedule(q: np.ndarray, y_hat_class: np.ndarray) -> np.ndarray:
    """alpha = 25 * (1 - |q - y_hat_class|), elementwise in [0, 25]."""
    return ALPHA_BASE * (1.0 - np.abs(np.asarray(q) - np.asarray(y_hat_class)))


def compute_loss(q: np.ndarray, y_lst: Tensor, x_hat: Tensor, x_lst: Tensor,
                 y_hat_class: np.ndarray):
    """Traversal loss: BCE(q, y_lst) + alpha * MSE(x_hat, x_lst).

    Returns (total, bce_value, mse_value); the scalar components are for
    logging only, the Tensor total carries the gradient.
    """
    if x_hat.shape != x_lst.shape:
        raise ValueError(f"compute_loss: x_hat {x_hat.shape} vs "
                         f"x_lst {x_lst.shape}")
    q32 = np.asarray(q, dtype=np.float32)
    alpha = alpha_schedule(q32, y_hat_class).astype(np.float32)

    p = ops.clip(y_lst, EPS, 1.0 - EPS)
    bce_each = ops.neg(ops.add(ops.mul(ops.log(p), q32),
                               ops.mul(ops.log(ops.sub(1.0, p)), 1.0 - q32)))
    bce = ops.mean(bce_each)

    err = ops.sub(x_lst, x_hat)
    mse_each = ops.mean(ops.mul(err, err), axis=(1, 2))
    weighted_mse = ops.mean(ops.mul(mse_each, alpha))

    total = ops.add(bce, weighted_mse)
    return total, float(bce.data), float(weighted_mse.data)


def train_qlst(config: StageConfig, dataset, frozen_clf, frozen_vae,
               class_id: int | None = None):
    """Train one per-class qLST model; returns (model, metrics).

    The classifier and VAE are frozen in place: their parameters get
    requires_grad=False and any gradient appearing on them aborts the run.
    """
    if config.stage != "qlst":
        raise ValueError("train_qlst needs a 'qlst' stage config")
    class_id = config.class_id if class_id is None else class_id
    train = require_split(dataset, "train", config.max_train_samples)

    freeze(frozen_clf)
    freeze(frozen_vae)

    model = QlstModel(class_id=class_id, latent_dim=config.latent_dim,
                      seed=config.seed)
    opt = Adam(model.parameters(), lr=config.learning_rate)

    # frozen-path constants, computed once per run: the latent codes, the
    # classifier's current probabilities, and the plain reconstructions
    # x_hat (the MSE target never changes, so never re-decode it)
    z_all = encode_mean(frozen_vae, train.signals)
    y_hat_all = predict_proba(frozen_clf, train.signals)[:, class_id]
    x_hat_all = np.concatenate(
        [frozen_vae.decode(Tensor(z_all[i:i + 256])).data
         for i in range(0, len(z_all), 256)], axis=0)

    metrics = []
    q_rng = named_stream(config.seed, f"train/qlst/{class_id}/queries")
    drop_rng = named_stream(config.seed, f"train/qlst/{class_id}/dropout")
    for epoch in range(config.epochs):
        opt.lr = config.epoch_lr(epoch)
        model.train()
        tot, tot_bce, tot_mse, nb = 0.0, 0.0, 0.0, 0
        for idx in epoch_batches(len(train), config.batch_size, config.seed,
                                 f"train/qlst/{class_id}/epoch/{epoch}"):
            z = Tensor(z_all[idx])
            q = q_rng.uniform(0.0, 1.0, size=len(idx)).astype(np.float32)
            x_hat = Tensor(x_hat_all[idx])
            with Tape() as tape:
                dz = model(z, q, dropout_rng=drop_rng)
                x_lst = frozen_vae.decode(ops.add(z, dz))
                y_lst = ops.narrow(frozen_clf(x_lst), 1, class_id, 1)
                y_lst = ops.reshape(y_lst, (len(idx),))
                loss, bce, mse = compute_loss(q, y_lst, x_hat, x_lst,
                                              y_hat_all[idx])
                backward(tape, loss)
            check_divergence(float(loss.data), "qlst")
            opt.step()
            model.zero_grad()
            tot += float(loss.data)
            tot_bce += bce
            tot_mse += mse
            nb += 1
        assert_frozen(frozen_clf, "classifier")
        assert_frozen(frozen_vae, "vae")
        metrics.append({"epoch": epoch, "loss": tot / nb, "bce": tot_bce / nb,
                        "alpha_mse": tot_mse / nb})
    return model.eval(), metrics
