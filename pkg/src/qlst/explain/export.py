"""Bundle serialization: full-precision JSON and flat CSV."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .traversal import TraversalBundle

FORMATS = ("json", "csv")


def export_bundle(bundle: TraversalBundle, path, format: str = "json") -> Path:
    """Write a bundle to disk; JSON round-trips every float bit-exactly."""
    if format not in FORMATS:
        raise ValueError(f"export format must be one of {FORMATS}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if format == "json":
        # json emits shortest-round-trip reprs, so parsing restores bits
        path.write_text(json.dumps(bundle.to_dict()))
    else:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["q", "lead", "sample_index", "value"])
            for r in bundle.records:
                sig = r["signal"]
                for lead in range(sig.shape[0]):
                    for k in range(sig.shape[1]):
                        writer.writerow([r["q"], lead, k, repr(float(sig[lead, k]))])
    return path


def load_bundle(path) -> TraversalBundle:
    return TraversalBundle.from_dict(json.loads(Path(path).read_text()))
