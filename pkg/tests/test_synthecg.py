"""Generator, morphology estimator, labels, and dataset round trips."""

import dataclasses
import json

import numpy as np
import pytest

from qlst.numcore.rng import named_stream
from qlst.synthecg import (DEFAULT_BALANCE, LABELS, LEAD_MIX, MEASURE_LEAD,
                           N_LEADS, N_SAMPLES, Dataset, MorphParams,
                           build_dataset, derive_labels, generate,
                           load_dataset, measure_morphology, sample_params)

LOW_NOISE_MV = 0.005


def draw(i, noise_sd_mv=LOW_NOISE_MV):
    p = sample_params(named_stream(123, f"pilot/{i}"))
    return dataclasses.replace(p, noise_sd_mv=noise_sd_mv)


# ---------------------------------------------------------------- generator

def test_generate_shape_dtype_finite():
    sig = generate(MorphParams(), seed=0)
    assert sig.shape == (N_LEADS, N_SAMPLES)
    assert sig.dtype == np.float32
    assert np.isfinite(sig).all()


def test_generate_deterministic():
    p = MorphParams()
    a = generate(p, seed=7)
    b = generate(p, seed=7)
    assert a.tobytes() == b.tobytes()


def test_generate_seed_changes_noise_only():
    p = MorphParams(noise_sd_mv=0.01)
    a = generate(p, seed=1)
    b = generate(p, seed=2)
    assert not np.array_equal(a, b)
    # the underlying clean waveform is identical
    clean = dataclasses.replace(p, noise_sd_mv=0.0)
    assert np.array_equal(generate(clean, seed=1), generate(clean, seed=2))


def test_generate_noise_scale():
    p = MorphParams(noise_sd_mv=0.01)
    clean = dataclasses.replace(p, noise_sd_mv=0.0)
    resid = generate(p, seed=3).astype(np.float64) - generate(clean, seed=3)
    assert abs(resid.std() - 0.01) < 0.002


def test_validate_rejects_bad_params():
    with pytest.raises(ValueError):
        MorphParams(rr_ms=-1).validate()
    with pytest.raises(ValueError):
        MorphParams(pr_ms=900.0, rr_ms=800.0).validate()
    with pytest.raises(ValueError):
        MorphParams(qt_ms=50.0, qrs_ms=90.0).validate()
    with pytest.raises(ValueError):
        MorphParams(r_amp_mv=9.0).validate()


def test_lead_mix_full_rank():
    assert np.linalg.matrix_rank(LEAD_MIX) == N_LEADS


def test_next_beat_visible_when_rr_short():
    p = MorphParams(rr_ms=650.0, qt_ms=400.0, noise_sd_mv=0.0)
    sig = generate(p, seed=0)
    # second R peak expected near (300 + rr) ms
    second = slice(int((300 + 650 - 40) / 2), int((300 + 650 + 40) / 2))
    assert sig[MEASURE_LEAD][second].max() > 0.5 * p.r_amp_mv


# ------------------------------------------------------------------ labels

def test_derive_labels_thresholds():
    base = dict(rr_ms=800, pr_ms=160, qrs_ms=90, qt_ms=380)
    lab = derive_labels(MorphParams(**base))
    assert not any(lab.as_array())
    assert derive_labels(MorphParams(**{**base, "pr_ms": 220})).AV1
    assert not derive_labels(MorphParams(**{**base, "pr_ms": 200})).AV1
    assert derive_labels(MorphParams(**{**base, "rr_ms": 1100})).SB
    assert derive_labels(MorphParams(**{**base, "rr_ms": 550})).ST
    assert derive_labels(MorphParams(**{**base, "p_present": False})).AF
    assert derive_labels(MorphParams(**{**base, "r_amp_mv": 0.4})).LQV
    assert derive_labels(
        MorphParams(**{**base, "qt_ms": 470, "rr_ms": 900})).LQT
    wide = MorphParams(**{**base, "qrs_ms": 130})
    assert derive_labels(wide).LBBB and not derive_labels(wide).RBBB
    wide_rsr = dataclasses.replace(wide, rsr_present=True)
    assert derive_labels(wide_rsr).RBBB and not derive_labels(wide_rsr).LBBB


def test_sb_st_mutually_exclusive():
    for i in range(200):
        lab = derive_labels(sample_params(named_stream(9, f"x/{i}")))
        assert not (lab.SB and lab.ST)


def test_sampler_params_valid_and_balanced():
    counts = np.zeros(len(LABELS))
    n = 3000
    for i in range(n):
        p = sample_params(named_stream(42, f"bal/{i}")).validate()
        counts += derive_labels(p).as_array()
    freq = counts / n
    for j, name in enumerate(LABELS):
        assert abs(freq[j] - DEFAULT_BALANCE[name]) < 0.03, (name, freq[j])


# ------------------------------------------------------------- measurement

def test_measure_flat_signal_unmeasurable():
    m = measure_morphology(np.zeros((N_LEADS, N_SAMPLES), dtype=np.float32))
    assert not m.measurable


def test_measure_rejects_bad_input():
    assert not measure_morphology(np.zeros((3, 10))).measurable
    bad = np.full((N_LEADS, N_SAMPLES), np.nan, dtype=np.float32)
    assert not measure_morphology(bad).measurable


def test_measure_default_beat():
    p = MorphParams(noise_sd_mv=LOW_NOISE_MV)
    m = measure_morphology(generate(p, seed=0))
    assert m.measurable
    assert abs(m.pr_ms - p.pr_ms) <= 10
    assert abs(m.qrs_ms - p.qrs_ms) <= 10
    assert abs(m.qt_ms - p.qt_ms) <= 20
    assert abs(m.r_amp_mv - p.r_amp_mv) <= 0.1 * p.r_amp_mv
    assert m.p_present and not m.rsr_present


def test_round_trip_sampled_draws():
    """Low-noise generator -> estimator round trip on 200 sampled beats."""
    n, ok = 200, 0
    for i in range(n):
        p = draw(i)
        m = measure_morphology(generate(p, seed=i))
        good = (m.measurable
                and abs(m.qrs_ms - p.qrs_ms) <= 10
                and abs(m.r_amp_mv - p.r_amp_mv) <= 0.1 * abs(p.r_amp_mv)
                and abs(m.s_amp_mv - p.s_amp_mv) <= 0.1 * abs(p.s_amp_mv)
                and abs(m.t_amp_mv - p.t_amp_mv) <= 0.1 * abs(p.t_amp_mv))
        if good and p.p_present:
            good = (m.p_present
                    and abs(m.pr_ms - p.pr_ms) <= 10
                    and abs(m.p_amp_mv - p.p_amp_mv) <= 0.1 * p.p_amp_mv)
        ok += bool(good)
    assert ok / n >= 0.95, f"round trip pass rate {ok / n:.3f}"


# ---------------------------------------------------------------- dataset

def test_build_and_load_dataset(tmp_path):
    path = tmp_path / "ds.jsonl"
    manifest = build_dataset(60, seed=5, out_path=path)
    assert manifest["format"] == "qlst-dataset/1"
    assert manifest["n"] == 60
    assert manifest["split_counts"] == {"train": 48, "val": 6, "test": 6}
    sidecar = json.loads((tmp_path / "ds.jsonl.manifest.json").read_text())
    assert sidecar == manifest

    ds = load_dataset(path)
    assert isinstance(ds, Dataset)
    assert ds.signals.shape == (60, N_LEADS, N_SAMPLES)
    assert ds.signals.dtype == np.float32
    assert ds.labels.shape == (60, len(LABELS))
    assert len(ds.subset("train")) == 48
    assert len(ds.subset("val")) == 6
    assert len(ds.subset("test")) == 6


def test_dataset_rebuild_byte_identical(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    build_dataset(20, seed=11, out_path=a)
    build_dataset(20, seed=11, out_path=b)
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.jsonl.manifest.json").read_bytes() == \
        (tmp_path / "b.jsonl.manifest.json").read_bytes()


def test_dataset_cache_round_trip(tmp_path):
    path = tmp_path / "ds.jsonl"
    build_dataset(20, seed=3, out_path=path)
    fresh = load_dataset(path, cache=True)
    assert (tmp_path / "ds.jsonl.cache" / "meta.json").exists()
    cached = load_dataset(path, cache=True)
    assert np.array_equal(fresh.signals, cached.signals)
    assert np.array_equal(fresh.labels, cached.labels)
    assert list(fresh.splits) == list(cached.splits)


def test_dataset_labels_match_params(tmp_path):
    path = tmp_path / "ds.jsonl"
    build_dataset(30, seed=8, out_path=path)
    ds = load_dataset(path, cache=False)
    for i in range(len(ds)):
        expect = derive_labels(MorphParams.from_dict(ds.params[i]))
        assert np.array_equal(ds.labels[i], expect.as_array())
