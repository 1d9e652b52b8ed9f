"""Versioned checkpoint directories: manifest.json + weights.bin."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FORMAT = "qlst-ckpt/1"


class CheckpointError(Exception):
    """Raised for any malformed, truncated, or mismatched checkpoint."""


def save_checkpoint(model, path) -> dict:
    """Write a model to a checkpoint directory; returns the manifest.

    weights.bin holds every parameter as little-endian float32,
    concatenated in manifest index order (construction order).
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    params = model.parameters()
    index = []
    offset = 0
    with open(path / "weights.bin", "wb") as f:
        for name, p in params.items():
            data = np.ascontiguousarray(p.data, dtype="<f4")
            index.append({"name": name, "shape": list(p.shape),
                          "offset": offset})
            f.write(data.tobytes())
            offset += data.nbytes
    manifest = {
        "format": FORMAT,
        "kind": model.KIND,
        "config": model.config(),
        "tensors": index,
        "total_bytes": offset,
    }
    with open(path / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    return manifest


def _build(kind: str, config: dict):
    # imported here to avoid a module cycle
    from .classifier import make_classifier
    from .qlst import QlstModel
    from .vae import VaeModel

    if kind == "vae":
        return VaeModel(latent_dim=config["latent_dim"])
    if kind == "classifier":
        cfg = {k: v for k, v in config.items() if k != "architecture"}
        return make_classifier(config["architecture"], **cfg)
    if kind == "qlst":
        return QlstModel(class_id=config["class_id"],
                         latent_dim=config["latent_dim"],
                         model_dim=config["model_dim"],
                         heads=config["heads"])
    raise CheckpointError(f"unknown checkpoint kind {kind!r}")


def load_manifest(path) -> dict:
    path = Path(path)
    try:
        manifest = json.loads((path / "manifest.json").read_text())
    except FileNotFoundError:
        raise CheckpointError(f"no manifest.json under {path}")
    except json.JSONDecodeError as e:
        raise CheckpointError(f"malformed manifest under {path}: {e}")
    if manifest.get("format") != FORMAT:
        raise CheckpointError(f"checkpoint format {manifest.get('format')!r} "
                              f"is not {FORMAT!r}")
    return manifest


def load_checkpoint(path):
    """Rebuild a model from a checkpoint directory; eval mode."""
    path = Path(path)
    manifest = load_manifest(path)
    try:
        blob = (path / "weights.bin").read_bytes()
    except FileNotFoundError:
        raise CheckpointError(f"no weights.bin under {path}")
    model = _build(manifest["kind"], manifest["config"])
    params = model.parameters()
    expected = sum(int(np.prod(t["shape"])) * 4 for t in manifest["tensors"])
    if len(blob) != expected:
        raise CheckpointError(f"weights.bin is {len(blob)} bytes, "
                              f"manifest expects {expected}")
    seen = set()
    for entry in manifest["tensors"]:
        name, shape, offset = entry["name"], tuple(entry["shape"]), entry["offset"]
        if name not in params:
            raise CheckpointError(f"manifest tensor {name!r} has no parameter "
                                  f"in a {manifest['kind']} model")
        p = params[name]
        if p.shape != shape:
            raise CheckpointError(f"tensor {name!r}: manifest shape {shape} "
                                  f"vs model shape {p.shape}")
        n = int(np.prod(shape)) * 4
        arr = np.frombuffer(blob[offset:offset + n], dtype="<f4")
        p.data = arr.astype(np.float32).reshape(shape)
        seen.add(name)
    missing = set(params) - seen
    if missing:
        raise CheckpointError(f"checkpoint is missing tensors: {sorted(missing)}")
    return model.eval()
