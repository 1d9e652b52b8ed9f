"""The qLST attention module: (z, q) -> delta-z."""

from __future__ import annotations

import numpy as np

from ..numcore import ops
from ..numcore.layers import Module, MultiHeadAttention
from ..numcore.rng import named_stream
from ..numcore.tensor import Tensor
from ..synthecg import LABELS


class QlstModel(Module):
    """Per-class latent traversal model.

    Each latent coordinate becomes one token via a learned per-position
    affine embedding, the query q is appended as one extra token, a single
    5-head attention module processes the sequence, and per-coordinate
    outputs are projected back to scalars forming delta-z.  model_dim is 30
    (not 32) so it divides evenly over the 5 heads.
    """

    KIND = "qlst"

    def __init__(self, class_id: int, latent_dim: int = 16,
                 model_dim: int = 30, heads: int = 5, seed: int = 0):
        super().__init__()
        if not 0 <= class_id < len(LABELS):
            raise ValueError(f"qlst: class_id {class_id} outside 0..{len(LABELS) - 1}")
        self.class_id = class_id
        self.latent_dim = latent_dim
        self.model_dim = model_dim
        rng = named_stream(seed, f"models/qlst/{class_id}/init")
        scale = 1.0 / np.sqrt(model_dim)

        def p(shape):
            return Tensor(rng.normal(0.0, scale, size=shape).astype(np.float32),
                          requires_grad=True)

        self.coord_w = p((latent_dim, model_dim))
        self.coord_b = p((latent_dim, model_dim))
        self.query_w = p((model_dim,))
        self.query_b = p((model_dim,))
        self.attn = MultiHeadAttention(model_dim, heads, rng, dropout_p=0.1)
        self.out_w = p((latent_dim, model_dim))
        self.out_b = Tensor(np.zeros(latent_dim, dtype=np.float32),
                            requires_grad=True)

    def config(self) -> dict:
        return {"class_id": self.class_id, "class_name": LABELS[self.class_id],
                "latent_dim": self.latent_dim, "model_dim": self.model_dim,
                "heads": self.attn.heads}

    def __call__(self, z: Tensor, q, dropout_rng: np.random.Generator | None = None) -> Tensor:
        """delta-z of shape (B, latent_dim) for z (B, latent_dim), q in [0,1].

        q may be a scalar (shared across the batch) or a (B,) array of
        per-sample queries.
        """
        if z.shape[-1] != self.latent_dim:
            raise ValueError(f"qlst: expected latent dim {self.latent_dim}, "
                             f"got {z.shape}")
        B = z.shape[0]
        qv = np.asarray(q if isinstance(q, (np.ndarray, list)) else [q] * B,
                        dtype=np.float32)
        if qv.shape != (B,):
            raise ValueError(f"qlst: query shape {qv.shape} does not match batch {B}")
        if np.any(qv < 0.0) or np.any(qv > 1.0):
            raise ValueError("qlst: query must lie in [0, 1]")

        # (B, latent_dim, model_dim) coordinate tokens + one query token
        z3 = ops.reshape(z, (B, self.latent_dim, 1))
        tokens = ops.add(ops.mul(z3, self.coord_w), self.coord_b)
        q3 = ops.reshape(Tensor(qv), (B, 1, 1))
        q_tok = ops.add(ops.mul(q3, self.query_w), self.query_b)
        seq = ops.concat([tokens, ops.reshape(q_tok, (B, 1, self.model_dim))],
                         axis=1)
        out = self.attn(seq, dropout_rng=dropout_rng)
        out = ops.narrow(out, 1, 0, self.latent_dim)  # drop the q token
        return ops.add(ops.sum_(ops.mul(out, self.out_w), axis=2), self.out_b)
