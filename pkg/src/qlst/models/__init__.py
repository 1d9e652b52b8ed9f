"""Model families: VAE, black-box classifiers, and qLST attention modules."""

from .checkpoint import (FORMAT, CheckpointError, load_checkpoint,
                         load_manifest, save_checkpoint)
from .classifier import (ARCHITECTURES, N_CLASSES, MlpClassifier,
                         ResnetClassifier, make_classifier, param_count)
from .qlst import QlstModel
from .vae import VaeModel

__all__ = [
    "VaeModel", "MlpClassifier", "ResnetClassifier", "make_classifier",
    "QlstModel", "save_checkpoint", "load_checkpoint", "load_manifest",
    "CheckpointError", "FORMAT", "ARCHITECTURES", "N_CLASSES", "param_count",
]
