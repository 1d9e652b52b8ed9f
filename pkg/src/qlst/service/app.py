"""JSON-over-HTTP inference service for the explorer UI and scripts."""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from ..explain import traverse
from ..numcore.tensor import Tensor
from ..synthecg import LABELS, N_LEADS, N_SAMPLES
from .registry import ModelRegistry

SIGNAL_LEN = N_LEADS * N_SAMPLES


def _bad(msg: str):
    raise HTTPException(status_code=400, detail=msg)


def _float_array(body: dict, key: str, expected_len: int | None = None) -> np.ndarray:
    value = body.get(key)
    if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool)
            for v in value):
        _bad(f"field '{key}' must be a list of numbers")
    if expected_len is not None and len(value) != expected_len:
        _bad(f"field '{key}' must have length {expected_len}, got {len(value)}")
    return np.asarray(value, dtype=np.float32)


def create_app(models_dir) -> FastAPI:
    registry = ModelRegistry(models_dir)
    app = FastAPI(title="qlst-service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    def lookup(model_id, kind: str):
        if not isinstance(model_id, str):
            _bad(f"field '{kind}_id' must be a string model id")
        try:
            return registry.get(model_id, kind)
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e))

    @app.get("/models")
    def models():
        return {"models": registry.listing()}

    @app.post("/decode")
    def decode(body: dict):
        entry = lookup(body.get("vae_id"), "vae")
        z = _float_array(body, "z", entry.config["latent_dim"])
        signal = entry.model.decode(Tensor(z[None, :])).data[0]
        return {"signal": signal.astype(np.float64).reshape(-1).tolist()}

    @app.post("/classify")
    def classify(body: dict):
        entry = lookup(body.get("clf_id"), "classifier")
        sig = _float_array(body, "signal", SIGNAL_LEN)
        probs = entry.model(Tensor(sig.reshape(1, N_LEADS, N_SAMPLES))).data[0]
        return {"probs": {name: float(p) for name, p in zip(LABELS, probs)}}

    @app.post("/traverse")
    def traverse_endpoint(body: dict):
        entry = lookup(body.get("qlst_id"), "qlst")
        try:
            vae, clf = registry.resolve_deps(entry)
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e))

        queries = body.get("queries")
        if (not isinstance(queries, list) or not queries or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool)
                for v in queries)):
            _bad("field 'queries' must be a non-empty list of floats")

        origin = body.get("origin")
        if not isinstance(origin, dict):
            _bad("field 'origin' must be an object")
        if origin.get("zero") is True:
            z0 = np.zeros(vae.latent_dim, dtype=np.float32)
            tag = "global_zero"
        elif "z" in origin:
            z0 = _float_array(origin, "z", vae.latent_dim)
            tag = "custom"
        elif "signal" in origin:
            sig = _float_array(origin, "signal", SIGNAL_LEN)
            z0 = vae.eval().encode(
                Tensor(sig.reshape(1, N_LEADS, N_SAMPLES)), "mean").data[0]
            tag = "local_sample(request)"
        else:
            _bad("origin must be {'zero': true}, {'z': [...]}, or "
                 "{'signal': [...]}")

        try:
            bundle = traverse(z0, entry.model, vae, clf, grid=queries,
                              origin=tag)
        except ValueError as e:
            _bad(str(e))
        return bundle.to_dict()

    return app
