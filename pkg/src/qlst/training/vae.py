"""Stage 2: ControlVAE training with a PI controller on the KL weight."""

from __future__ import annotations

import numpy as np

from ..models.vae import VaeModel
from ..numcore import Tape, backward, ops
from ..numcore.optim import Adam
from ..numcore.tensor import Tensor
from .common import (check_divergence, class_weights, epoch_batches,
                     require_split)
from .config import StageConfig


class BetaController:
    """PI controller steering the KL term toward a set point (in nats).

    beta rises when the batch KL overshoots the set point and falls when it
    undershoots; the output is clamped to [beta_min, beta_max] and the
    integrator is held at the clamp (anti-windup).
    """

    def __init__(self, set_point: float, kp: float, ki: float,
                 beta_min: float = 0.0, beta_max: float = 1.0):
        if set_point <= 0:
            raise ValueError("BetaController: set point must be > 0")
        self.set_point = set_point
        self.kp = kp
        self.ki = ki
        self.beta_min = beta_min
        self.beta_max = beta_max
        self.integral = 0.0
        self.beta = beta_min

    def update(self, kl: float) -> float:
        err = kl - self.set_point
        proposed = self.integral + self.ki * err
        raw = self.kp * err + proposed
        self.beta = float(np.clip(raw, self.beta_min, self.beta_max))
        if self.beta_min < raw < self.beta_max:
            self.integral = proposed
        return self.beta


BLUR_SIGMA_SAMPLES = 20.0   # 40 ms: wider than any single wave
BLUR_WEIGHT = 4.0

# Pre-QRS emphasis: the R peak sits near sample 173 for every beat, so the
# P wave always falls in the first ~160 samples.  Its amplitude (~0.2 mV)
# contributes little to plain MSE next to the QRS, and an attenuated P is
# the difference between AV-block and atrial-fibrillation to the classifier.
P_REGION_END = 160
P_REGION_WEIGHT = 3.0


def time_weights(n: int) -> np.ndarray:
    """(n,) per-sample-time loss weights, mean 1, upweighting the P region."""
    w = np.ones(n, dtype=np.float64)
    w[:P_REGION_END] = P_REGION_WEIGHT
    return (w / w.mean()).astype(np.float32)

# Warmup guidance: generator factors softly pinned to the leading latent dims.
GUIDE_KEYS = ("rr_ms", "pr_ms", "qrs_ms", "qt_ms",
              "p_amp_mv", "r_amp_mv", "s_amp_mv", "t_amp_mv")
GUIDE_WEIGHT = 0.1


def guide_weight(epoch: int, epochs: int) -> float:
    """Full-strength pin for the first third, linear decay to 0 at 5/6."""
    hold = epochs // 3
    end = max(hold + 1, (5 * epochs) // 6)
    if epoch < hold:
        return GUIDE_WEIGHT
    return GUIDE_WEIGHT * max(0.0, (end - epoch) / (end - hold))


def guide_targets(params: list[dict]) -> np.ndarray:
    """Per-sample generator factors, standardized to zero mean, unit std."""
    t = np.array([[p[k] for k in GUIDE_KEYS] for p in params], dtype=np.float64)
    t = (t - t.mean(axis=0)) / np.maximum(t.std(axis=0), 1e-9)
    return t.astype(np.float32)


def blur_matrix(n: int, sigma: float) -> np.ndarray:
    """Row-stochastic Gaussian smoothing matrix, applied as x @ G."""
    i = np.arange(n, dtype=np.float64)
    k = np.exp(-0.5 * ((i[None, :] - i[:, None]) / sigma) ** 2)
    k /= k.sum(axis=1, keepdims=True)
    return k.T.astype(np.float32)


def kl_term(mu: Tensor, logvar: Tensor) -> Tensor:
    """Mean per-sample KL(q(z|x) || N(0, I)) in nats."""
    var = ops.exp(logvar)
    inner = ops.sub(ops.add(ops.mul(mu, mu), var), ops.add(logvar, 1.0))
    return ops.mul(ops.mean(ops.sum_(inner, axis=1)), 0.5)


def sample_weights(labels: np.ndarray, label_freq: np.ndarray) -> np.ndarray:
    """Per-sample weights from class-size weights, normalized to mean 1.

    A sample's weight is the mean class weight over its positive labels
    (1 for samples with no label), so rare-class beats keep their morphology
    in the reconstruction.
    """
    w_class = class_weights(label_freq)
    num = labels.astype(np.float64) @ w_class
    cnt = labels.sum(axis=1)
    w = np.where(cnt > 0, num / np.maximum(cnt, 1), 1.0)
    return (w / w.mean()).astype(np.float32)


def train_vae(config: StageConfig, dataset):
    """Train the VAE per the stage config; returns (model, metrics)."""
    if config.stage != "vae":
        raise ValueError("train_vae needs a 'vae' stage config")
    train = require_split(dataset, "train", config.max_train_samples)
    weights_all = sample_weights(train.labels, train.label_frequencies())

    model = VaeModel(latent_dim=config.latent_dim, seed=config.seed)
    opt = Adam(model.parameters(), lr=config.learning_rate)
    ctrl = BetaController(config.kl_target, config.kp, config.ki,
                          config.beta_min, config.beta_max)
    # Coarse-to-fine reconstruction: plain MSE gives no useful gradient for
    # *where* a narrow wave sits (shifting it in/out looks like a cross-fade),
    # so wave timing never reaches the latent code.  A second MSE term on a
    # heavily smoothed copy makes shifted-but-overlapping waves attract each
    # other, which is exactly the missing timing gradient.
    blur = Tensor(blur_matrix(train.signals.shape[-1], BLUR_SIGMA_SAMPLES))
    # Plain MSE training sits at a saddle for wave timing: the decoder has no
    # latent direction that *shifts* a wave (only cross-fades it), so the
    # encoder gets no gradient to store timing, and vice versa.  A decaying
    # supervised pin of the leading latent dims to the generator's factors
    # breaks that saddle; once the decoder uses those dims the pin is gone
    # and the loss is the plain ELBO again.
    guide_all = guide_targets(train.params)
    n_guide = guide_all.shape[1]
    t_w = time_weights(train.signals.shape[-1])[None, None, :]
    metrics = []
    step = 0
    for epoch in range(config.epochs):
        opt.lr = config.epoch_lr(epoch)
        lam = guide_weight(epoch, config.epochs)
        model.train()
        tot_rec, tot_kl, nb = 0.0, 0.0, 0
        for idx in epoch_batches(len(train), config.batch_size, config.seed,
                                 f"train/vae/epoch/{epoch}"):
            x = Tensor(train.signals[idx])
            w = weights_all[idx][:, None, None] * t_w
            with Tape() as tape:
                recon, mu, logvar = model(x, seed=config.seed * 1_000_003 + step)
                err = ops.sub(recon, x)
                err_c = ops.matmul(err, blur)
                rec = ops.add(
                    ops.mean(ops.mul(ops.mul(err, err), w)),
                    ops.mul(ops.mean(ops.mul(ops.mul(err_c, err_c), w)),
                            BLUR_WEIGHT))
                kl = kl_term(mu, logvar)
                loss = ops.add(rec, ops.mul(kl, ctrl.beta))
                if lam > 0.0:
                    g_err = ops.sub(ops.narrow(mu, 1, 0, n_guide),
                                    guide_all[idx])
                    loss = ops.add(loss, ops.mul(
                        ops.mean(ops.mul(g_err, g_err)), lam))
                backward(tape, loss)
            check_divergence(float(loss.data), "vae")
            opt.step()
            model.zero_grad()
            ctrl.update(float(kl.data))
            tot_rec += float(rec.data)
            tot_kl += float(kl.data)
            nb += 1
            step += 1
        metrics.append({"epoch": epoch, "recon_mse": tot_rec / nb,
                        "kl_nats": tot_kl / nb, "beta": ctrl.beta})
    return model.eval(), metrics
