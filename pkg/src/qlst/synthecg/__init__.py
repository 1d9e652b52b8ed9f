"""Synthetic median-beat ECGs with ground-truth morphology."""

from .dataset import (DEFAULT_BALANCE, RANGES, Dataset, build_dataset,
                      load_dataset, sample_params)
from .generate import LEAD_MIX, MEASURE_LEAD, RSR_LEAD, generate
from .measure import MorphEstimate, measure_morphology
from .params import (LABELS, N_LEADS, N_SAMPLES, SAMPLE_RATE_HZ, LabelVector,
                     MorphParams, derive_labels)

__all__ = [
    "MorphParams", "LabelVector", "LABELS", "derive_labels", "generate",
    "measure_morphology", "MorphEstimate", "build_dataset", "load_dataset",
    "sample_params", "Dataset", "LEAD_MIX", "MEASURE_LEAD", "RSR_LEAD",
    "N_LEADS", "N_SAMPLES", "SAMPLE_RATE_HZ", "DEFAULT_BALANCE", "RANGES",
]
