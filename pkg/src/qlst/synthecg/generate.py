"""Gaussian-bump median-beat generator.

Each beat is a sum of Gaussian deflections (P, Q, R, S, T, optional R')
placed on a 1200 ms / 500 Hz grid, rendered into 8 source channels and mixed
into 8 leads by a fixed full-rank matrix.  Wave widths are tied to the
timing parameters so the 10%-of-peak landmarks used by the morphology
estimator sit at the nominal onsets/offsets by construction.
"""

from __future__ import annotations

import math

import numpy as np

from ..numcore.rng import named_stream
from .params import MS_PER_SAMPLE, N_LEADS, N_SAMPLES, MorphParams

# QRS onset of the primary beat, fixed anchor inside the window
QRS_ONSET_MS = 300.0

P_DUR_MS = 90.0
T_DUR_MS = 160.0

# distance (in sigmas) at which a Gaussian falls to 10% of its peak
K10 = math.sqrt(2.0 * math.log(10.0))

# source channels
SRC_P, SRC_Q, SRC_R, SRC_S, SRC_T, SRC_RP, SRC_NP, SRC_NQRS = range(8)

# lead x source mixing; lead 0 is the measurement lead (unit weights, no R'),
# lead 6 is the V1-analogue carrying the R' bump.  Full rank by construction
# (asserted in tests).
LEAD_MIX = np.array([
    #  P     Q     R     S     T     R'  nextP nextQRS
    [1.00, 1.00, 1.00, 1.00, 1.00, 0.00, 1.00, 1.00],   # I-analogue (measured)
    [0.80, 0.90, 1.10, 0.70, 0.90, 0.05, 0.70, 0.95],   # II
    [-0.30, 0.40, 0.50, 0.30, 0.40, 0.10, -0.20, 0.45],  # III
    [0.55, 0.65, -0.85, 0.95, -0.60, 0.15, 0.65, -0.75],  # aVR-like
    [0.70, 0.75, 0.90, 0.85, 0.75, 0.20, 0.60, 0.85],   # aVL-like
    [0.45, 0.55, 0.70, 0.60, 0.60, 0.30, 0.55, 0.65],   # aVF-like
    [0.40, 0.30, 0.45, 0.15, 0.50, 1.00, 0.30, 0.55],   # V1-analogue
    [0.90, 0.85, 1.20, 0.75, 1.05, 0.10, 0.80, 1.10],   # V5-like
], dtype=np.float64)

MEASURE_LEAD = 0
RSR_LEAD = 6

_T_MS = np.arange(N_SAMPLES, dtype=np.float64) * MS_PER_SAMPLE


def _gauss(center_ms: float, sigma_ms: float, amp: float) -> np.ndarray:
    if sigma_ms <= 0:
        return np.zeros(N_SAMPLES)
    # skip bumps entirely outside the window
    if center_ms + 6 * sigma_ms < 0 or center_ms - 6 * sigma_ms > _T_MS[-1]:
        return np.zeros(N_SAMPLES)
    return amp * np.exp(-0.5 * ((_T_MS - center_ms) / sigma_ms) ** 2)


def _beat_sources(p: MorphParams, onset_ms: float, sources: np.ndarray,
                  p_chan: int, qrs_chan_map: bool, render_p: bool = True):
    """Render one beat with QRS onset at ``onset_ms`` into ``sources``.

    ``qrs_chan_map`` True routes Q/R/S/T to their own channels (primary
    beat); False collapses them into the next-beat QRS channel.

    Wave widths put the 10%-of-R-peak envelope crossings at the nominal
    QRS onset/offset: the Q bump (amp 0.18 R) crosses 0.1 R exactly at the
    onset, the S bump's width is solved so it crosses 0.1 R at the offset,
    and the narrow R bump stays clear of both edges.
    """
    qrs = p.qrs_ms
    r_abs = abs(p.r_amp_mv)
    sigma_r = qrs / 10.0

    q_amp = -0.18 * r_abs
    # 0.18R falls to 0.1R at sqrt(2 ln 1.8) sigma = 0.12 qrs left of center;
    # the deeper bump keeps the Q-R cancellation dip above the 0.1R envelope
    # threshold even at the low end of the R amplitude range
    sigma_q = 0.12 * qrs / math.sqrt(2.0 * math.log(1.8))

    ratio_s = max(abs(p.s_amp_mv) / max(0.1 * r_abs, 1e-6), 1.2)
    sigma_s = (0.15 * qrs) / math.sqrt(2.0 * math.log(ratio_s))

    def chan(primary):
        return primary if qrs_chan_map else SRC_NQRS

    sources[chan(SRC_Q)] += _gauss(onset_ms + 0.12 * qrs, sigma_q, q_amp)
    sources[chan(SRC_R)] += _gauss(onset_ms + qrs / 2.0, sigma_r, p.r_amp_mv)
    sources[chan(SRC_S)] += _gauss(onset_ms + 0.85 * qrs, sigma_s, p.s_amp_mv)
    if p.rsr_present:
        sources[chan(SRC_RP)] += _gauss(onset_ms + 0.75 * qrs, qrs / 16.0,
                                        0.6 * r_abs)
    if p.p_present and render_p:
        sources[p_chan] += _gauss(onset_ms - p.pr_ms + P_DUR_MS / 2.0,
                                  (P_DUR_MS / 2.0) / K10, p.p_amp_mv)
    sources[chan(SRC_T)] += _gauss(onset_ms + p.qt_ms - T_DUR_MS / 2.0,
                                   (T_DUR_MS / 2.0) / K10, p.t_amp_mv)


def generate(params: MorphParams, seed: int = 0) -> np.ndarray:
    """Synthesize one (8, 600) float32 median-beat signal, in mV.

    Deterministic given (params, seed).  The next beat's onset appears at
    t = rr_ms after the primary beat while it falls inside the window.
    """
    params.validate()
    sources = np.zeros((8, N_SAMPLES), dtype=np.float64)
    _beat_sources(params, QRS_ONSET_MS, sources, SRC_P, qrs_chan_map=True)
    k = 1
    while QRS_ONSET_MS + k * params.rr_ms - params.pr_ms < _T_MS[-1]:
        next_onset = QRS_ONSET_MS + k * params.rr_ms
        # a P that would ride on the previous T is hidden in it (as in real
        # tachycardia); the next QRS onset still encodes the RR interval
        p_clear = (next_onset - params.pr_ms
                   > QRS_ONSET_MS + (k - 1) * params.rr_ms + params.qt_ms + 30.0)
        _beat_sources(params, next_onset, sources, SRC_NP,
                      qrs_chan_map=False, render_p=p_clear)
        k += 1
    signal = LEAD_MIX @ sources
    if params.noise_sd_mv > 0:
        noise_rng = named_stream(seed, "synthecg/noise")
        signal = signal + noise_rng.normal(0.0, params.noise_sd_mv,
                                           size=(N_LEADS, N_SAMPLES))
    return signal.astype(np.float32)
