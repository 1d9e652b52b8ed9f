"""Ground-truth morphology parameters and threshold-derived labels."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

LABELS = ("LBBB", "RBBB", "SB", "ST", "AF", "AV1", "LQV", "LQT")

# fixed acquisition geometry of every signal
N_LEADS = 8
N_SAMPLES = 600
SAMPLE_RATE_HZ = 500
MS_PER_SAMPLE = 1000.0 / SAMPLE_RATE_HZ  # 2 ms
WINDOW_MS = N_SAMPLES * MS_PER_SAMPLE    # 1200 ms


@dataclass
class MorphParams:
    """Generative beat parameters; durations in ms, amplitudes in mV."""

    rr_ms: float = 800.0
    pr_ms: float = 160.0
    qrs_ms: float = 90.0
    qt_ms: float = 380.0
    p_amp_mv: float = 0.2
    r_amp_mv: float = 1.2
    s_amp_mv: float = -0.3
    t_amp_mv: float = 0.35
    p_present: bool = True
    rsr_present: bool = False
    noise_sd_mv: float = 0.01

    def validate(self):
        for name in ("rr_ms", "pr_ms", "qrs_ms", "qt_ms"):
            if getattr(self, name) <= 0:
                raise ValueError(f"MorphParams.{name} must be > 0")
        if not self.pr_ms < self.rr_ms:
            raise ValueError("MorphParams: pr_ms must be < rr_ms")
        if not self.qrs_ms < self.qt_ms < self.rr_ms:
            raise ValueError("MorphParams: need qrs_ms < qt_ms < rr_ms")
        for name in ("p_amp_mv", "r_amp_mv", "s_amp_mv", "t_amp_mv"):
            if not -5.0 <= getattr(self, name) <= 5.0:
                raise ValueError(f"MorphParams.{name} outside [-5, 5] mV")
        if self.noise_sd_mv < 0:
            raise ValueError("MorphParams.noise_sd_mv must be >= 0")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MorphParams":
        return cls(**d)


@dataclass
class LabelVector:
    LBBB: bool = False
    RBBB: bool = False
    SB: bool = False
    ST: bool = False
    AF: bool = False
    AV1: bool = False
    LQV: bool = False
    LQT: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    def as_array(self):
        import numpy as np
        return np.array([getattr(self, k) for k in LABELS], dtype=bool)

    @classmethod
    def from_dict(cls, d: dict) -> "LabelVector":
        return cls(**d)


# diagnostic thresholds; PR > 200 ms is the defining cutoff for AV1, the
# rest encode standard clinical definitions
PR_AV1_MS = 200.0
QRS_WIDE_MS = 120.0
RR_BRADY_MS = 1000.0
RR_TACHY_MS = 600.0
R_LOW_VOLTAGE_MV = 0.5
QT_LONG_MS = 460.0


def derive_labels(params: MorphParams) -> LabelVector:
    """Deterministic threshold labels from ground-truth parameters."""
    wide = params.qrs_ms > QRS_WIDE_MS
    return LabelVector(
        LBBB=wide and not params.rsr_present,
        RBBB=wide and params.rsr_present,
        SB=params.rr_ms > RR_BRADY_MS,
        ST=params.rr_ms < RR_TACHY_MS,
        AF=not params.p_present,
        AV1=params.pr_ms > PR_AV1_MS,
        LQV=params.r_amp_mv < R_LOW_VOLTAGE_MV,
        LQT=params.qt_ms > QT_LONG_MS,
    )
