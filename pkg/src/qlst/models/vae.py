"""Convolutional VAE over (8, 600) median-beat signals."""

from __future__ import annotations

import numpy as np

from ..numcore import ops
from ..numcore.layers import Conv1d, LayerNorm, Linear, Module
from ..numcore.rng import named_stream
from ..numcore.tensor import Tensor
from ..synthecg import N_LEADS, N_SAMPLES

LOGVAR_CLAMP = 8.0


def _positional_channels(n: int) -> np.ndarray:
    """(5, n) fixed position features: a ramp plus two sin/cos pairs.

    Concatenated with the tiled latent code, they let each decoder position
    compute wave amplitudes as a local function of (code, position).
    """
    t = np.linspace(-1.0, 1.0, n, dtype=np.float32)
    rows = [t]
    for freq in (1.0, 3.0):
        rows.append(np.sin(np.pi * freq * t))
        rows.append(np.cos(np.pi * freq * t))
    return np.stack(rows).astype(np.float32)


def channel_norm(x: Tensor, norm: "LayerNorm") -> Tensor:
    """LayerNorm over the channel axis of a (B, C, L) feature map."""
    h = ops.transpose(x, (0, 2, 1))
    return ops.transpose(norm(h), (0, 2, 1))


class ResBlock1d(Module):
    """conv -> norm -> act -> conv -> norm, plus identity skip.

    Per-position channel normalization keeps activation scale fixed through
    the stack; without it the unnormalized magnitudes drift until most units
    die and reconstruction stalls above the dataset-mean baseline.
    """

    def __init__(self, channels: int, rng: np.random.Generator, k: int = 5):
        super().__init__()
        self.c1 = Conv1d(channels, channels, k, rng)
        self.n1 = LayerNorm(channels)
        self.c2 = Conv1d(channels, channels, k, rng)
        self.n2 = LayerNorm(channels)

    def __call__(self, x: Tensor) -> Tensor:
        h = ops.leaky_relu(channel_norm(self.c1(x), self.n1))
        h = channel_norm(self.c2(h), self.n2)
        return ops.leaky_relu(ops.add(h, x))


class VaeModel(Module):
    """Encoder conv/residual stack to (mu, logvar); spatial-broadcast decoder.

    The encoder downsamples 600 -> 75 over three stride-2 stages; the decoder
    tiles the code over all 600 positions and refines at full resolution, so
    decode(encode_mean(x)) has Signal shape.
    """

    KIND = "vae"

    def __init__(self, latent_dim: int = 16, seed: int = 0):
        super().__init__()
        self.latent_dim = latent_dim
        rng = named_stream(seed, "models/vae/init")
        # encoder: 600 -> 300 -> 150 -> 75
        self.e_stem = Conv1d(N_LEADS, 16, 7, rng, stride=2)
        self.e_stem_n = LayerNorm(16)
        self.e_res1 = ResBlock1d(16, rng)
        self.e_down1 = Conv1d(16, 32, 5, rng, stride=2)
        self.e_down1_n = LayerNorm(32)
        self.e_res2 = ResBlock1d(32, rng)
        self.e_down2 = Conv1d(32, 32, 5, rng, stride=2)
        self.e_down2_n = LayerNorm(32)
        self.e_head = Linear(32 * 75, 2 * latent_dim, rng)
        # start the posterior tight (sigma ~ 0.13) so early reparameterization
        # noise cannot drown the latent signal and collapse the posterior
        self.e_head.b.data[latent_dim:] = -4.0
        # direct linear paths signal<->latent: the beat family is close to
        # linear in 16 dims, so these capture the bulk of the structure (and
        # the precise wave timings) while the conv stacks refine residuals.
        # Zero-initialized: the skips start as no-ops, otherwise their
        # random output scale dwarfs the signal and dominates early training.
        self.e_lin = Linear(N_LEADS * N_SAMPLES, 2 * latent_dim, rng)
        self.e_lin.w.data[:] = 0.0
        # decoder: spatial broadcast -- z is tiled over all 600 positions and
        # concatenated with fixed positional channels, then refined by a
        # stride-1 conv residual stack.  Rendering "a wave centered where
        # dim k says" is then a local computation at every position, which
        # an upsampling-from-code decoder cannot express for narrow waves.
        self._pos = _positional_channels(N_SAMPLES)
        n_pos = self._pos.shape[0]
        self.d_in = Conv1d(latent_dim + n_pos, 32, 7, rng)
        self.d_in_n = LayerNorm(32)
        self.d_res1 = ResBlock1d(32, rng)
        self.d_mid = Conv1d(32, 24, 5, rng)
        self.d_mid_n = LayerNorm(24)
        self.d_res2 = ResBlock1d(24, rng)
        self.d_out = Conv1d(24, N_LEADS, 7, rng)
        self.d_lin = Linear(latent_dim, N_LEADS * N_SAMPLES, rng)
        self.d_lin.w.data[:] = 0.0
        # latent standardization, folded in after training: the controller
        # only loosely matches the aggregate posterior to N(0, I), so the
        # raw code of the "average" beat is not the origin.  Re-expressing
        # codes as (mu - shift) / scale makes z = 0 the mean training code,
        # which global traversals start from.  Identity until train_vae
        # fills the buffers; saved with the checkpoint.
        self.z_shift = Tensor(np.zeros(latent_dim, dtype=np.float32))
        self.z_scale = Tensor(np.ones(latent_dim, dtype=np.float32))

    def config(self) -> dict:
        return {"latent_dim": self.latent_dim}

    # -------------------------------------------------------------- encoder

    def encode_params(self, x: Tensor) -> tuple[Tensor, Tensor]:
        """(mu, logvar) for a (B, 8, 600) batch; logvar clamped to +/-8."""
        if x.shape[-2:] != (N_LEADS, N_SAMPLES):
            raise ValueError(f"vae.encode: expected (*, {N_LEADS}, {N_SAMPLES}), "
                             f"got {x.shape}")
        h = ops.leaky_relu(channel_norm(self.e_stem(x), self.e_stem_n))
        h = self.e_res1(h)
        h = ops.leaky_relu(channel_norm(self.e_down1(h), self.e_down1_n))
        h = self.e_res2(h)
        h = ops.leaky_relu(channel_norm(self.e_down2(h), self.e_down2_n))
        h = self.e_head(ops.reshape(h, (x.shape[0], 32 * 75)))
        h = ops.add(h, self.e_lin(ops.reshape(x, (x.shape[0],
                                                  N_LEADS * N_SAMPLES))))
        mu = ops.narrow(h, 1, 0, self.latent_dim)
        logvar = ops.clip(ops.narrow(h, 1, self.latent_dim, self.latent_dim),
                          -LOGVAR_CLAMP, LOGVAR_CLAMP)
        mu = ops.div(ops.sub(mu, self.z_shift), self.z_scale)
        logvar = ops.sub(logvar, ops.mul(ops.log(self.z_scale), 2.0))
        return mu, logvar

    def encode(self, x: Tensor, mode: str = "mean", seed: int = 0) -> Tensor:
        """Latent code for x; "sample" mode draws eps from a named stream."""
        mu, logvar = self.encode_params(x)
        if mode == "mean":
            return mu
        if mode == "sample":
            eps = named_stream(seed, "models/vae/encode").normal(
                0.0, 1.0, size=mu.shape).astype(np.float32)
            sigma = ops.exp(ops.mul(logvar, 0.5))
            return ops.add(mu, ops.mul(sigma, Tensor(eps)))
        raise ValueError(f"vae.encode: unknown mode {mode!r}")

    # -------------------------------------------------------------- decoder

    def decode(self, z: Tensor) -> Tensor:
        """Deterministic (B, 8, 600) reconstruction of latent codes."""
        if z.shape[-1] != self.latent_dim:
            raise ValueError(f"vae.decode: expected latent dim {self.latent_dim}, "
                             f"got {z.shape}")
        batch = z.shape[0]
        z = ops.add(ops.mul(z, self.z_scale), self.z_shift)
        tiled = ops.mul(ops.reshape(z, (batch, self.latent_dim, 1)),
                        Tensor(np.ones((1, 1, N_SAMPLES), dtype=np.float32)))
        pos = Tensor(np.broadcast_to(self._pos[None],
                                     (batch, *self._pos.shape)).copy())
        h = ops.concat([tiled, pos], axis=1)
        h = ops.leaky_relu(channel_norm(self.d_in(h), self.d_in_n))
        h = self.d_res1(h)
        h = ops.leaky_relu(channel_norm(self.d_mid(h), self.d_mid_n))
        h = self.d_res2(h)
        lin = ops.reshape(self.d_lin(z), (z.shape[0], N_LEADS, N_SAMPLES))
        return ops.add(self.d_out(h), lin)

    def __call__(self, x: Tensor, seed: int = 0) -> tuple[Tensor, Tensor, Tensor]:
        """(reconstruction, mu, logvar) with sampled z during training."""
        mu, logvar = self.encode_params(x)
        if self.training:
            eps = named_stream(seed, "models/vae/reparam").normal(
                0.0, 1.0, size=mu.shape).astype(np.float32)
            z = ops.add(mu, ops.mul(ops.exp(ops.mul(logvar, 0.5)), Tensor(eps)))
        else:
            z = mu
        return self.decode(z), mu, logvar
