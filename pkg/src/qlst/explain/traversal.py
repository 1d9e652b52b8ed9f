"""Latent traversal inference: local and global explanation bundles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numcore import ops
from ..numcore.tensor import Tensor
from ..synthecg import LABELS, measure_morphology

DEFAULT_GRID = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def validate_grid(grid) -> tuple[float, ...]:
    grid = tuple(float(q) for q in grid)
    if not grid:
        raise ValueError("query grid must be non-empty")
    if any(q < 0.0 or q > 1.0 for q in grid):
        raise ValueError("query grid values must lie in [0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("query grid must be strictly increasing")
    return grid


@dataclass
class TraversalBundle:
    """One traversal: per-query records from a single latent origin."""

    origin: str                    # "global_zero" or "local_sample(<id>)"
    class_id: int
    grid: tuple
    records: list = field(default_factory=list)
    # each record: {"q", "delta_z", "signal", "probs", "morphology"}

    def __post_init__(self):
        self.grid = validate_grid(self.grid)
        if len(self.records) != len(self.grid):
            raise ValueError(f"bundle needs one record per grid value "
                             f"({len(self.grid)}), got {len(self.records)}")

    @property
    def class_name(self) -> str:
        return LABELS[self.class_id]

    def to_dict(self) -> dict:
        return {
            "origin": self.origin,
            "class": self.class_name,
            "grid": list(self.grid),
            "records": [
                {
                    "q": r["q"],
                    "delta_z": np.asarray(r["delta_z"], dtype=np.float64).tolist(),
                    "signal": np.asarray(r["signal"], dtype=np.float64)
                    .reshape(-1).tolist(),
                    "probs": r["probs"],
                    "morphology": r["morphology"],
                }
                for r in self.records
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TraversalBundle":
        records = []
        for r in d["records"]:
            records.append({
                "q": r["q"],
                "delta_z": np.asarray(r["delta_z"], dtype=np.float64),
                "signal": np.asarray(r["signal"], dtype=np.float64)
                .reshape(8, 600),
                "probs": r["probs"],
                "morphology": r["morphology"],
            })
        return cls(origin=d["origin"], class_id=LABELS.index(d["class"]),
                   grid=tuple(d["grid"]), records=records)


def traverse(z0: np.ndarray, qlst, vae, clf, grid=DEFAULT_GRID,
             origin: str = "custom") -> TraversalBundle:
    """Independent traversal of each grid query from the same origin z0.

    Every delta-z is applied to the original z0 (non-cumulative); all models
    run in eval mode so repeated calls are bit-identical.
    """
    grid = validate_grid(grid)
    z0 = np.asarray(z0, dtype=np.float32).reshape(-1)
    if z0.shape[0] != qlst.latent_dim or z0.shape[0] != vae.latent_dim:
        raise ValueError(f"traverse: z0 dim {z0.shape[0]} does not match "
                         f"model latent dim {qlst.latent_dim}")
    qlst.eval()
    vae.eval()
    clf.eval()
    records = []
    z1 = Tensor(z0[None, :])
    # one query per forward pass: BLAS kernels round differently across
    # batch sizes, and grid subsets must reproduce bit-identical records
    for q in grid:
        dz = qlst(z1, np.asarray([q], dtype=np.float32))
        x_lst = vae.decode(ops.add(z1, dz))
        probs = clf(x_lst)
        sig = x_lst.data[0]
        records.append({
            "q": q,
            "delta_z": dz.data[0].copy(),
            "signal": sig.copy(),
            "probs": {name: float(p) for name, p in zip(LABELS, probs.data[0])},
            "morphology": measure_morphology(sig).to_dict(),
        })
    return TraversalBundle(origin=origin, class_id=qlst.class_id,
                           grid=grid, records=records)


def explain_local(x: np.ndarray, qlst, vae, clf, grid=DEFAULT_GRID,
                  direction: str = "increase",
                  sample_id=None) -> TraversalBundle:
    """Traversal from an encoded input signal.

    "decrease" uses the same mechanism: the low-q end of the grid drives the
    class probability down from the classifier's original estimate.
    """
    if direction not in ("increase", "decrease"):
        raise ValueError("direction must be 'increase' or 'decrease'")
    x = np.asarray(x, dtype=np.float32).reshape(1, 8, 600)
    vae.eval()
    z0 = vae.encode(Tensor(x), mode="mean").data[0]
    tag = f"local_sample({sample_id if sample_id is not None else 'adhoc'})"
    return traverse(z0, qlst, vae, clf, grid, origin=tag)


def traverse_global(qlst, vae, clf, grid=DEFAULT_GRID) -> TraversalBundle:
    """Traversal from the zero latent vector (the global baseline)."""
    z0 = np.zeros(vae.latent_dim, dtype=np.float32)
    return traverse(z0, qlst, vae, clf, grid, origin="global_zero")
