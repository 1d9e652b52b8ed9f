"""Rule-based morphology estimation (the acceptance oracle for signals).

Landmarks are found on the QRS-dominant lead (lead 0): the R peak is the
global maximum, wave onsets/offsets are crossings of 10% of the local peak
amplitude, and PR/QRS/QT are derived from those landmarks.  All estimates
are in the same units as MorphParams (ms, mV).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.signal import find_peaks

from .generate import MEASURE_LEAD, RSR_LEAD
from .params import MS_PER_SAMPLE, N_LEADS, N_SAMPLES

MIN_R_MV = 0.1          # below this there is no detectable R peak
P_PRESENT_MV = 0.05
SMOOTH_WIDTH = 5        # samples
ENV_HALF_WIDTH = 8      # samples, for the 10%-crossing envelope


@dataclass
class MorphEstimate:
    """Estimated parameters; ``measurable`` False means no usable R peak."""

    measurable: bool = False
    pr_ms: Optional[float] = None
    qrs_ms: Optional[float] = None
    qt_ms: Optional[float] = None
    rr_ms: Optional[float] = None
    p_amp_mv: Optional[float] = None
    r_amp_mv: Optional[float] = None
    s_amp_mv: Optional[float] = None
    t_amp_mv: Optional[float] = None
    p_present: Optional[bool] = None
    rsr_present: Optional[bool] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _smooth(x: np.ndarray, width: int = SMOOTH_WIDTH) -> np.ndarray:
    kernel = np.ones(width) / width
    return np.convolve(x, kernel, mode="same")


def _envelope(x: np.ndarray, half: int = ENV_HALF_WIDTH) -> np.ndarray:
    """Moving max of |x|; bridges the zero crossings inside the QRS."""
    ax = np.abs(x)
    n = len(ax)
    out = np.empty(n)
    for i in range(n):
        out[i] = ax[max(0, i - half):i + half + 1].max()
    return out


def _vertex_value(x: np.ndarray, idx: int) -> float:
    """Peak value from a least-squares parabola over 5 samples around idx."""
    lo, hi = idx - 2, idx + 3
    if lo < 0 or hi > len(x):
        return float(x[idx])
    k = np.arange(-2.0, 3.0)
    c2, c1, c0 = np.polyfit(k, x[lo:hi], 2)
    if abs(c2) < 1e-12:
        return float(c0)
    kv = float(np.clip(-c1 / (2.0 * c2), -2.0, 2.0))
    return float(c2 * kv * kv + c1 * kv + c0)


def _walk_left(env: np.ndarray, start: int, threshold: float) -> int:
    i = start
    while i > 0 and env[i] >= threshold:
        i -= 1
    return i + 1 if env[i] < threshold else i


def _walk_right(env: np.ndarray, start: int, threshold: float) -> int:
    i = start
    n = len(env)
    while i < n - 1 and env[i] >= threshold:
        i += 1
    return i - 1 if env[i] < threshold else i


def measure_morphology(signal: np.ndarray) -> MorphEstimate:
    """Estimate MorphParams from an (8, 600) signal; never raises on bad input."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.shape != (N_LEADS, N_SAMPLES) or not np.all(np.isfinite(signal)):
        return MorphEstimate(measurable=False)

    raw = signal[MEASURE_LEAD]
    x = _smooth(raw)
    r_max = x.max()
    if r_max < MIN_R_MV:
        return MorphEstimate(measurable=False)

    # QRS peaks: prominent maxima at least 300 ms apart; earliest of the
    # near-maximal ones is the primary beat's R
    peaks, _ = find_peaks(x, height=0.6 * r_max, distance=150)
    if len(peaks) == 0:
        return MorphEstimate(measurable=False)
    big = peaks[x[peaks] >= 0.80 * r_max]
    r_idx = int(big[0]) if len(big) else int(peaks[0])
    r_amp = float(raw[max(0, r_idx - 2):r_idx + 3].max())

    # the moving-max envelope widens every crossing by its half width;
    # compensate so landmarks sit at the underlying 10% crossings
    env = _envelope(x)
    thr = 0.1 * r_amp
    onset = min(_walk_left(env, r_idx, thr) + ENV_HALF_WIDTH, r_idx)
    offset = max(_walk_right(env, r_idx, thr) - ENV_HALF_WIDTH, r_idx)
    qrs_ms = (offset - onset) * MS_PER_SAMPLE

    # next beat, if visible, gives RR and bounds the T search
    later = peaks[(peaks > r_idx + 100) & (x[peaks] >= 0.7 * r_amp)]
    rr_ms = None
    t_limit = N_SAMPLES - 1
    if len(later):
        r2 = int(later[0])
        rr_ms = (r2 - r_idx) * MS_PER_SAMPLE
        next_onset = _walk_left(env, r2, 0.1 * x[r2]) + ENV_HALF_WIDTH
        t_limit = max(offset + 12, next_onset - 12)
    # never search past the longest physiologic QT (a partially visible
    # next beat at the window edge must not masquerade as the T wave)
    t_limit = min(t_limit, onset + 285)

    # P wave: maximum in the pre-QRS search window
    p_lo = max(0, onset - 140)
    p_hi = max(p_lo + 1, onset - 4)
    p_seg = x[p_lo:p_hi]
    p_rel = int(np.argmax(p_seg))
    p_amp = float(p_seg[p_rel])
    p_present = p_amp > P_PRESENT_MV
    pr_ms = None
    if p_present:
        p_idx = p_lo + p_rel
        p_onset = _walk_left(env, p_idx, 0.1 * p_amp) + ENV_HALF_WIDTH
        pr_ms = (onset - p_onset) * MS_PER_SAMPLE

    # T wave: first prominent deflection after the QRS, end at its 10%
    # crossing.  Taking the first peak rather than the largest keeps the
    # next beat's P wave (which can be taller than a small T) out of it.
    qt_ms = None
    t_amp = None
    t_lo = min(offset + 10, t_limit)
    t_seg = x[t_lo:t_limit]
    if len(t_seg) > 2:
        t_peaks, _ = find_peaks(np.abs(t_seg), height=0.05, prominence=0.03)
        if len(t_peaks):
            t_rel = int(t_peaks[0])
        else:
            t_rel = int(np.argmax(np.abs(t_seg)))
        t_idx = t_lo + t_rel
        t_amp = float(x[t_idx])
        if abs(t_amp) > 0.04:
            t_end = _walk_right(np.abs(x), t_idx, 0.1 * abs(t_amp))
            qt_ms = (t_end - onset) * MS_PER_SAMPLE
        else:
            t_amp = None

    # S amplitude: most negative point between the R peak and the QRS
    # offset (the Q trough sits left of R); a quadratic vertex fit at the
    # trough recovers the narrow S bump's peak without a flattening bias
    # and averages down the sample noise
    s_amp = None
    if offset > r_idx:
        s_rel = int(np.argmin(raw[r_idx:offset + 1]))
        s_idx = r_idx + s_rel
        s_amp = _vertex_value(raw, s_idx)

    # R' detection on the V1-analogue lead: >= 2 prominent peaks in the QRS
    v = _smooth(signal[RSR_LEAD])
    seg = v[onset:offset + 1]
    rsr = False
    if len(seg) > 4 and seg.max() > 0.05:
        vpeaks, _ = find_peaks(seg, prominence=max(0.12 * seg.max(), 0.03))
        rsr = len(vpeaks) >= 2

    return MorphEstimate(
        measurable=True,
        pr_ms=pr_ms,
        qrs_ms=qrs_ms,
        qt_ms=qt_ms,
        rr_ms=rr_ms,
        p_amp_mv=p_amp,
        r_amp_mv=r_amp,
        s_amp_mv=s_amp,
        t_amp_mv=t_amp,
        p_present=p_present,
        rsr_present=rsr,
    )
