"""Calibration of attained class probabilities against queried values."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..numcore import ops
from ..numcore.tensor import Tensor
from ..synthecg import LABELS
from ..training.common import TrainingError, encode_mean
from .traversal import DEFAULT_GRID, validate_grid

SUMMARY_FIELDS = ("min", "q1", "median", "q3", "max", "mean")


def _summary(values: np.ndarray) -> dict:
    lo, q1, med, q3, hi = np.percentile(values, [0, 25, 50, 75, 100])
    return {"min": float(lo), "q1": float(q1), "median": float(med),
            "q3": float(q3), "max": float(hi), "mean": float(values.mean()),
            "n": int(len(values))}


@dataclass
class CalibrationReport:
    """Boxplot-ready y_LST summaries: one row per (class, q)."""

    grid: tuple
    per_class: dict = field(default_factory=dict)
    # per_class[class_name] = [{"q", "min", "q1", "median", "q3", "max",
    #                           "mean", "n"}, ...] in grid order

    def rows(self) -> list[dict]:
        out = []
        for name, entries in self.per_class.items():
            for entry in entries:
                out.append({"class": name, **entry})
        return out

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        rows = self.rows()
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)

    def mean_curve(self, class_name: str) -> np.ndarray:
        return np.array([e["mean"] for e in self.per_class[class_name]])

    def mean_abs_error(self, class_name: str) -> float:
        return float(np.mean(np.abs(self.mean_curve(class_name)
                                    - np.asarray(self.grid))))


def attained_probabilities(signals: np.ndarray, qlst, vae, clf,
                           grid=DEFAULT_GRID, batch_size: int = 128) -> np.ndarray:
    """y_LST[class] for every (sample, q); shape (n, len(grid)).

    Batched over samples per grid value; the traversal semantics match
    explain.traverse exactly (mean encode, non-cumulative delta-z).
    """
    grid = validate_grid(grid)
    qlst.eval()
    vae.eval()
    clf.eval()
    z_all = encode_mean(vae, signals, batch_size)
    n = len(signals)
    out = np.empty((n, len(grid)), dtype=np.float64)
    for j, q in enumerate(grid):
        for lo in range(0, n, batch_size):
            z = Tensor(z_all[lo:lo + batch_size])
            dz = qlst(z, np.full(z.shape[0], q, dtype=np.float32))
            probs = clf(vae.decode(ops.add(z, dz)))
            out[lo:lo + batch_size, j] = probs.data[:, qlst.class_id]
    return out


def eval_calibration(dataset, qlst_models: dict, vae, clf, grid=DEFAULT_GRID,
                     split: str = "test", max_samples: int = 0) -> CalibrationReport:
    """Fig.-2-style report over a dataset split for every provided class."""
    grid = validate_grid(grid)
    sub = dataset.subset(split)
    if len(sub) == 0:
        raise TrainingError(f"dataset has an empty {split!r} split")
    signals = sub.signals[:max_samples] if max_samples else sub.signals
    report = CalibrationReport(grid=grid)
    for class_id in sorted(qlst_models):
        y = attained_probabilities(signals, qlst_models[class_id], vae, clf,
                                   grid)
        report.per_class[LABELS[class_id]] = [
            {"q": q, **_summary(y[:, j])} for j, q in enumerate(grid)]
    return report
