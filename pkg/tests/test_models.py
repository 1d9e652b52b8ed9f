"""VAE/classifier/qLST shape contracts and checkpoint round trips."""

import json

import numpy as np
import pytest

from qlst.models import (CheckpointError, MlpClassifier, QlstModel,
                         ResnetClassifier, VaeModel, load_checkpoint,
                         make_classifier, param_count, save_checkpoint)
from qlst.numcore import Tape, backward, ops
from qlst.numcore.rng import named_stream
from qlst.numcore.tensor import Tensor
from qlst.synthecg import LABELS, MorphParams, generate


def batch(n=3, seed=0):
    rng = np.random.default_rng(seed)
    return Tensor(rng.normal(0, 0.3, size=(n, 8, 600)).astype(np.float32))


# --------------------------------------------------------------------- VAE

def test_vae_shapes():
    v = VaeModel().eval()
    x = batch()
    recon, mu, logvar = v(x)
    assert recon.shape == (3, 8, 600)
    assert mu.shape == (3, 16)
    assert logvar.shape == (3, 16)
    assert np.all(np.abs(logvar.data) <= 8.0)


def test_vae_encode_modes():
    v = VaeModel().eval()
    x = batch()
    mu = v.encode(x, mode="mean")
    s1 = v.encode(x, mode="sample", seed=1)
    s2 = v.encode(x, mode="sample", seed=1)
    s3 = v.encode(x, mode="sample", seed=2)
    assert np.array_equal(s1.data, s2.data)
    assert not np.array_equal(s1.data, s3.data)
    with pytest.raises(ValueError):
        v.encode(x, mode="argmax")
    with pytest.raises(ValueError):
        v.encode(Tensor(np.zeros((2, 3, 4), dtype=np.float32)))
    # reparameterization identity: E[sample] centers on the mean
    draws = np.stack([v.encode(x, "sample", seed=s).data for s in range(30)])
    sigma = np.exp(0.5 * v.encode_params(x)[1].data)
    assert np.all(np.abs(draws.mean(axis=0) - mu.data) < sigma)


def test_vae_decode_deterministic():
    v = VaeModel().eval()
    z = Tensor(np.zeros((1, 16), dtype=np.float32))
    a, b = v.decode(z), v.decode(z)
    assert a.data.tobytes() == b.data.tobytes()
    assert a.shape == (1, 8, 600)
    with pytest.raises(ValueError):
        v.decode(Tensor(np.zeros((1, 7), dtype=np.float32)))


def test_vae_custom_latent_dim():
    v = VaeModel(latent_dim=8).eval()
    assert v.encode(batch()).shape == (3, 8)


def test_vae_backward_reaches_all_parameters():
    v = VaeModel()
    x = batch(2)
    with Tape() as tape:
        recon, mu, logvar = v(x)
        loss = ops.mean(ops.mul(recon, recon))
        loss = ops.add(loss, ops.mean(ops.mul(mu, mu)))
        loss = ops.add(loss, ops.mean(ops.mul(logvar, logvar)))
        backward(tape, loss)
    for name, p in v.parameters().items():
        assert p.grad is not None, name


# -------------------------------------------------------------- classifiers

def test_classifier_outputs_are_probabilities():
    for arch in ("mlp", "resnet_small"):
        m = make_classifier(arch).eval()
        y = m(batch())
        assert y.shape == (3, len(LABELS))
        assert np.all((y.data > 0) & (y.data < 1))


def test_classifier_rejects_bad_shape():
    m = MlpClassifier().eval()
    with pytest.raises(ValueError):
        m(Tensor(np.zeros((2, 8, 599), dtype=np.float32)))
    with pytest.raises(ValueError):
        make_classifier("transformer")


def test_resnet_small_parameter_budget():
    n = param_count(ResnetClassifier())
    assert 60_000 <= n <= 150_000, n


def test_classifier_deterministic():
    m = ResnetClassifier().eval()
    x = batch()
    assert m(x).data.tobytes() == m(x).data.tobytes()


# -------------------------------------------------------------------- qLST

def test_qlst_output_shape_for_query_grid():
    m = QlstModel(class_id=0).eval()
    z = Tensor(np.random.default_rng(1).normal(size=(4, 16)).astype(np.float32))
    for q in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        assert m(z, q).shape == (4, 16)


def test_qlst_validates_inputs():
    m = QlstModel(class_id=3).eval()
    z = Tensor(np.zeros((2, 16), dtype=np.float32))
    with pytest.raises(ValueError):
        m(z, -0.1)
    with pytest.raises(ValueError):
        m(z, 1.0001)
    with pytest.raises(ValueError):
        m(Tensor(np.zeros((2, 9), dtype=np.float32)), 0.5)
    with pytest.raises(ValueError):
        m(z, np.array([0.5, 0.5, 0.5]))
    with pytest.raises(ValueError):
        QlstModel(class_id=8)


def test_qlst_single_attention_module_dims():
    m = QlstModel(class_id=1)
    assert m.attn.heads == 5
    assert m.attn.dim == 30
    assert m.attn.d_head == 6


def test_qlst_query_changes_output():
    m = QlstModel(class_id=0).eval()
    z = Tensor(np.random.default_rng(2).normal(size=(1, 16)).astype(np.float32))
    assert not np.array_equal(m(z, 0.0).data, m(z, 1.0).data)


def test_qlst_attention_rows_normalized():
    m = QlstModel(class_id=0).eval()
    z = Tensor(np.random.default_rng(3).normal(size=(2, 16)).astype(np.float32))
    z3 = ops.reshape(z, (2, 16, 1))
    tokens = ops.add(ops.mul(z3, m.coord_w), m.coord_b)
    w = m.attn.attention_weights(tokens)
    assert np.allclose(w.sum(axis=-1), 1.0, atol=1e-6)


# -------------------------------------------------------------- checkpoints

CASES = [
    lambda: VaeModel(latent_dim=16, seed=4),
    lambda: MlpClassifier(seed=4),
    lambda: ResnetClassifier(seed=4),
    lambda: QlstModel(class_id=5, seed=4),
]


@pytest.mark.parametrize("make", CASES, ids=["vae", "mlp", "resnet", "qlst"])
def test_checkpoint_round_trip_bit_exact(make, tmp_path):
    model = make().eval()
    save_checkpoint(model, tmp_path / "ckpt")
    clone = load_checkpoint(tmp_path / "ckpt")
    assert not clone.training
    for name, p in model.parameters().items():
        assert clone.parameters()[name].data.tobytes() == p.data.tobytes(), name
    x = batch(2, seed=9)
    if isinstance(model, VaeModel):
        a, b = model.encode(x), clone.encode(x)
    elif isinstance(model, QlstModel):
        z = Tensor(np.random.default_rng(5).normal(size=(2, 16)).astype(np.float32))
        a, b = model(z, 0.6), clone(z, 0.6)
    else:
        a, b = model(x), clone(x)
    assert a.data.tobytes() == b.data.tobytes()


def test_checkpoint_manifest_contents(tmp_path):
    m = QlstModel(class_id=2)
    manifest = save_checkpoint(m, tmp_path / "ckpt")
    assert manifest["format"] == "qlst-ckpt/1"
    assert manifest["kind"] == "qlst"
    assert manifest["config"]["class_id"] == 2
    assert manifest["config"]["class_name"] == LABELS[2]
    on_disk = json.loads((tmp_path / "ckpt" / "manifest.json").read_text())
    assert on_disk == manifest
    size = (tmp_path / "ckpt" / "weights.bin").stat().st_size
    assert size == sum(int(np.prod(t["shape"])) * 4 for t in manifest["tensors"])


def test_checkpoint_version_mismatch(tmp_path):
    save_checkpoint(MlpClassifier(), tmp_path / "ckpt")
    mpath = tmp_path / "ckpt" / "manifest.json"
    doc = json.loads(mpath.read_text())
    doc["format"] = "qlst-ckpt/9"
    mpath.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="format"):
        load_checkpoint(tmp_path / "ckpt")


def test_checkpoint_truncated_blob(tmp_path):
    save_checkpoint(MlpClassifier(), tmp_path / "ckpt")
    blob = (tmp_path / "ckpt" / "weights.bin").read_bytes()
    (tmp_path / "ckpt" / "weights.bin").write_bytes(blob[:-16])
    with pytest.raises(CheckpointError, match="bytes"):
        load_checkpoint(tmp_path / "ckpt")


def test_checkpoint_shape_disagreement(tmp_path):
    save_checkpoint(MlpClassifier(), tmp_path / "ckpt")
    mpath = tmp_path / "ckpt" / "manifest.json"
    doc = json.loads(mpath.read_text())
    doc["tensors"][0]["shape"] = [1, 2]
    mpath.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "ckpt")


def test_checkpoint_missing_files(tmp_path):
    with pytest.raises(CheckpointError, match="manifest"):
        load_checkpoint(tmp_path / "nowhere")
    save_checkpoint(MlpClassifier(), tmp_path / "ckpt")
    (tmp_path / "ckpt" / "weights.bin").unlink()
    with pytest.raises(CheckpointError, match="weights"):
        load_checkpoint(tmp_path / "ckpt")


def test_checkpoint_on_real_signal_probe(tmp_path):
    """A VAE checkpoint reproduces encode/decode on a generated beat."""
    sig = generate(MorphParams(), seed=0)
    x = Tensor(sig[None, ...])
    v = VaeModel(seed=7).eval()
    save_checkpoint(v, tmp_path / "vae")
    clone = load_checkpoint(tmp_path / "vae")
    z = v.encode(x)
    assert clone.encode(x).data.tobytes() == z.data.tobytes()
    assert clone.decode(z).data.tobytes() == v.decode(z).data.tobytes()
