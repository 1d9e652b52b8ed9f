"""Three-stage training: classifier, ControlVAE, and per-class qLST."""

from .classifier import auroc_per_class, bce_loss, train_classifier
from .common import (TrainingError, class_weights, encode_mean, freeze,
                     predict_proba, write_metrics_csv)
from .config import StageConfig
from .qlst import ALPHA_BASE, alpha_schedule, compute_loss, train_qlst
from .vae import BetaController, kl_term, sample_weights, train_vae

__all__ = [
    "StageConfig", "TrainingError", "train_classifier", "train_vae",
    "train_qlst", "compute_loss", "alpha_schedule", "ALPHA_BASE",
    "BetaController", "kl_term", "sample_weights", "bce_loss",
    "auroc_per_class", "class_weights", "predict_proba", "encode_mean",
    "freeze", "write_metrics_csv",
]
