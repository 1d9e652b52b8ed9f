"""Dataset sampling and JSONL file IO.

One record per line: {"id", "split", "signal" (4800 floats, lead-major),
"params", "labels"}.  A sidecar manifest records the sampling ranges, the
lead-mixing matrix, and per-label frequencies.  Generation is deterministic:
sample i draws from a stream keyed by (seed, i), so parallel and serial
generation agree bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..numcore.rng import named_stream
from .generate import LEAD_MIX, generate
from .params import LABELS, LabelVector, MorphParams, derive_labels

FORMAT = "qlst-dataset/1"

# default per-label target prevalence; SB/ST ride on a categorical rate class
DEFAULT_BALANCE = {
    "LBBB": 0.10, "RBBB": 0.10, "SB": 0.15, "ST": 0.15,
    "AF": 0.15, "AV1": 0.15, "LQV": 0.12, "LQT": 0.12,
}

RANGES = {
    "rr_normal": (650.0, 950.0), "rr_brady": (1050.0, 1400.0), "rr_tachy": (420.0, 580.0),
    "pr_normal": (120.0, 190.0), "pr_long": (210.0, 280.0),
    "qrs_normal": (70.0, 110.0), "qrs_wide": (125.0, 160.0),
    "qt_normal": (330.0, 450.0), "qt_long": (470.0, 540.0),
    "p_amp": (0.15, 0.28), "r_amp": (0.80, 2.00), "r_amp_low": (0.20, 0.45),
    "s_scale": (0.15, 0.35), "t_scale": (0.30, 0.50),
}

QT_QRS_MARGIN = 210.0   # keeps the T wave clear of the QRS for measurement
QT_RR_MARGIN = 60.0


def sample_params(rng: np.random.Generator,
                  balance: dict[str, float] | None = None,
                  noise_sd_mv: float = 0.01) -> MorphParams:
    """Draw one parameter set; label prevalences follow ``balance``."""
    b = dict(DEFAULT_BALANCE)
    if balance:
        b.update(balance)

    def u(key):
        lo, hi = RANGES[key]
        return float(rng.uniform(lo, hi))

    # rate class first: SB and ST are mutually exclusive by construction
    rate = rng.random()
    if rate < b["SB"]:
        rr = u("rr_brady")
    elif rate < b["SB"] + b["ST"]:
        rr = u("rr_tachy")
    else:
        rr = u("rr_normal")
    tachy = rr < 600.0

    pr = u("pr_long") if rng.random() < b["AV1"] else u("pr_normal")

    p_wide = b["LBBB"] + b["RBBB"]
    wide = rng.random() < p_wide
    qrs = u("qrs_wide") if wide else u("qrs_normal")
    rsr = rng.random() < (b["RBBB"] / p_wide if wide else 0.2)

    # long QT cannot fit a tachycardic beat (qt < rr must hold)
    want_lqt = (not tachy) and rng.random() < b["LQT"] / max(1.0 - b["ST"], 1e-9)
    if want_lqt:
        qt = u("qt_long")
    else:
        qt = u("qt_normal")
    qt = float(np.clip(qt, qrs + QT_QRS_MARGIN, rr - QT_RR_MARGIN))

    r_amp = u("r_amp_low") if rng.random() < b["LQV"] else u("r_amp")
    # S/T/P amplitudes scale with R so the R peak stays the global max and
    # every wave stays measurable at low voltage
    s_amp = -max(0.15, u("s_scale") * r_amp)
    t_amp = max(0.10, u("t_scale") * r_amp)
    p_amp = min(u("p_amp"), 0.5 * r_amp)
    return MorphParams(
        rr_ms=rr, pr_ms=pr, qrs_ms=qrs, qt_ms=qt,
        p_amp_mv=p_amp, r_amp_mv=r_amp, s_amp_mv=s_amp,
        t_amp_mv=t_amp,
        p_present=rng.random() >= b["AF"],
        rsr_present=rsr,
        noise_sd_mv=noise_sd_mv,
    ).validate()


def _sample_stream(seed: int, index: int) -> np.random.Generator:
    return named_stream(seed, f"synthecg/sample/{index}")


def _split_of(index: int, n: int) -> str:
    if index < int(0.8 * n):
        return "train"
    if index < int(0.9 * n):
        return "val"
    return "test"


def _fmt_signal(signal: np.ndarray) -> str:
    vals = np.round(signal.astype(np.float64), 4).reshape(-1).tolist()
    return "[" + ",".join(repr(v) for v in vals) + "]"


def build_dataset(n: int, seed: int, out_path, balance=None,
                  noise_sd_mv: float = 0.01) -> dict:
    """Generate n samples, write JSONL + sidecar manifest; returns manifest."""
    if n <= 0:
        raise ValueError("build_dataset: n must be > 0")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    counts = {k: 0 for k in LABELS}
    split_counts = {"train": 0, "val": 0, "test": 0}
    with open(out_path, "w") as f:
        for i in range(n):
            rng = _sample_stream(seed, i)
            params = sample_params(rng, balance, noise_sd_mv)
            labels = derive_labels(params)
            signal = generate(params, seed=int(rng.integers(2**31)))
            split = _split_of(i, n)
            split_counts[split] += 1
            for k in LABELS:
                counts[k] += bool(getattr(labels, k))
            f.write('{"id": %d, "split": "%s", "signal": %s, "params": %s, "labels": %s}\n'
                    % (i, split, _fmt_signal(signal),
                       json.dumps(params.to_dict()),
                       json.dumps(labels.to_dict())))
    manifest = {
        "format": FORMAT,
        "n": n,
        "seed": seed,
        "noise_sd_mv": noise_sd_mv,
        "balance": dict(DEFAULT_BALANCE, **(balance or {})),
        "ranges": {k: list(v) for k, v in RANGES.items()},
        "lead_mix": LEAD_MIX.tolist(),
        "label_counts": counts,
        "label_frequencies": {k: counts[k] / n for k in LABELS},
        "split_counts": split_counts,
    }
    with open(str(out_path) + ".manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    return manifest


@dataclass
class Dataset:
    signals: np.ndarray          # (n, 8, 600) float32
    labels: np.ndarray           # (n, 8) bool, LABELS order
    splits: np.ndarray           # (n,) of {"train","val","test"}
    params: list = field(repr=False, default_factory=list)

    def subset(self, split: str) -> "Dataset":
        m = self.splits == split
        return Dataset(self.signals[m], self.labels[m], self.splits[m],
                       [p for p, keep in zip(self.params, m) if keep])

    def __len__(self):
        return len(self.signals)

    def label_frequencies(self) -> np.ndarray:
        return self.labels.mean(axis=0)


def _file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 22), b""):
            h.update(chunk)
    return h.hexdigest()


def load_dataset(path, cache: bool = True) -> Dataset:
    """Parse a JSONL dataset; keeps an .npy cache keyed by content digest."""
    path = Path(path)
    digest = _file_digest(path)
    cache_dir = Path(str(path) + ".cache")
    meta = cache_dir / "meta.json"
    if cache and meta.exists():
        try:
            if json.loads(meta.read_text())["digest"] == digest:
                return Dataset(
                    signals=np.load(cache_dir / "signals.npy"),
                    labels=np.load(cache_dir / "labels.npy"),
                    splits=np.load(cache_dir / "splits.npy"),
                    params=json.loads((cache_dir / "params.json").read_text()),
                )
        except Exception:
            pass
    signals, labels, splits, params = [], [], [], []
    with open(path) as f:
        for line in f:
            rec = json.loads(line)
            signals.append(np.asarray(rec["signal"], dtype=np.float32).reshape(8, 600))
            labels.append([rec["labels"][k] for k in LABELS])
            splits.append(rec["split"])
            params.append(rec["params"])
    ds = Dataset(np.stack(signals), np.array(labels, dtype=bool),
                 np.array(splits), params)
    if cache:
        cache_dir.mkdir(exist_ok=True)
        np.save(cache_dir / "signals.npy", ds.signals)
        np.save(cache_dir / "labels.npy", ds.labels)
        np.save(cache_dir / "splits.npy", ds.splits)
        (cache_dir / "params.json").write_text(json.dumps(ds.params))
        meta.write_text(json.dumps({"digest": digest}))
    return ds
