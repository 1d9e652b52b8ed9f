"""Analytic gradients vs the central finite-difference oracle.

Every differentiable op is checked on randomized shapes and seeds, at 64-bit
precision, relative error <= 1e-4.
"""

import numpy as np
import pytest

from qlst.numcore import Tensor, ops

from gradcheck import check_grads, leaf

SEEDS = range(20)


def rng_for(seed):
    return np.random.default_rng(1000 + seed)


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("op", [ops.add, ops.sub, ops.mul, ops.div])
def test_binary_elementwise(op, seed):
    rng = rng_for(seed)
    shape = tuple(rng.integers(1, 5, size=rng.integers(1, 4)))
    a = leaf(rng, shape)
    b = leaf(rng, shape)
    b.data += 3.0  # keep div well-conditioned
    check_grads(lambda a, b: ops.sum_(op(a, b)), [a, b])


@pytest.mark.parametrize("seed", SEEDS)
def test_binary_broadcast(seed):
    rng = rng_for(seed)
    a = leaf(rng, (3, 4, 5))
    b = leaf(rng, (5,))
    check_grads(lambda a, b: ops.sum_(ops.mul(a, b)), [a, b])


@pytest.mark.parametrize("seed", SEEDS)
def test_matmul(seed):
    rng = rng_for(seed)
    n, k, m = rng.integers(2, 6, size=3)
    a = leaf(rng, (int(n), int(k)))
    b = leaf(rng, (int(k), int(m)))
    check_grads(lambda a, b: ops.sum_(ops.matmul(a, b)), [a, b])


@pytest.mark.parametrize("seed", SEEDS)
def test_matmul_batched(seed):
    rng = rng_for(seed)
    a = leaf(rng, (2, 3, 4, 5))
    b = leaf(rng, (2, 3, 5, 4))
    check_grads(lambda a, b: ops.sum_(ops.matmul(a, b)), [a, b])


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("stride,padding", [(1, "same"), (2, "same"), (1, "valid"), (3, "same")])
def test_conv1d(seed, stride, padding):
    rng = rng_for(seed)
    x = leaf(rng, (2, 3, 17))
    w = leaf(rng, (4, 3, 5))
    b = leaf(rng, (4,))
    check_grads(
        lambda x, w, b: ops.sum_(ops.conv1d(x, w, b, stride=stride, padding=padding)),
        [x, w, b])


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("op", [ops.sigmoid, ops.tanh, ops.exp, ops.neg])
def test_unary(op, seed):
    rng = rng_for(seed)
    x = leaf(rng, (4, 6), scale=0.8)
    check_grads(lambda x: ops.sum_(op(x)), [x])


@pytest.mark.parametrize("seed", SEEDS)
def test_relu(seed):
    rng = rng_for(seed)
    x = leaf(rng, (5, 5))
    x.data += np.where(np.abs(x.data) < 1e-3, 0.1, 0.0)  # stay off the kink
    check_grads(lambda x: ops.sum_(ops.relu(x)), [x])


@pytest.mark.parametrize("seed", SEEDS)
def test_leaky_relu(seed):
    rng = rng_for(seed)
    x = leaf(rng, (5, 5))
    x.data += np.where(np.abs(x.data) < 1e-3, 0.1, 0.0)  # stay off the kink
    check_grads(lambda x: ops.sum_(ops.leaky_relu(x, 0.1)), [x])


@pytest.mark.parametrize("seed", SEEDS)
def test_log(seed):
    rng = rng_for(seed)
    x = leaf(rng, (3, 4))
    x.data = np.abs(x.data) + 0.5
    check_grads(lambda x: ops.sum_(ops.log(x)), [x])


@pytest.mark.parametrize("seed", SEEDS)
def test_clip(seed):
    rng = rng_for(seed)
    x = leaf(rng, (6, 6), scale=2.0)
    # keep samples away from the clamp boundaries where FD is undefined
    x.data += np.where(np.abs(np.abs(x.data) - 1.5) < 1e-3, 0.1, 0.0)
    check_grads(lambda x: ops.sum_(ops.clip(x, -1.5, 1.5)), [x])


@pytest.mark.parametrize("seed", SEEDS)
def test_softmax(seed):
    rng = rng_for(seed)
    x = leaf(rng, (3, 7))
    w = Tensor(rng.normal(size=(3, 7)), dtype=np.float64)
    check_grads(lambda x: ops.sum_(ops.mul(ops.softmax(x, axis=-1), w)), [x])


@pytest.mark.parametrize("seed", SEEDS)
def test_layer_norm(seed):
    rng = rng_for(seed)
    x = leaf(rng, (4, 6))
    gain = leaf(rng, (6,))
    bias = leaf(rng, (6,))
    probe = Tensor(rng.normal(size=(4, 6)), dtype=np.float64)
    check_grads(
        lambda x, g, b: ops.sum_(ops.mul(ops.layer_norm(x, g, b), probe)),
        [x, gain, bias])


@pytest.mark.parametrize("seed", SEEDS)
def test_reductions_and_shape_ops(seed):
    rng = rng_for(seed)
    x = leaf(rng, (3, 4, 5))
    check_grads(lambda x: ops.sum_(ops.mean(x, axis=1)), [x])
    check_grads(lambda x: ops.mean(ops.sum_(x, axis=(0, 2))), [x])
    check_grads(lambda x: ops.sum_(ops.reshape(x, (12, 5))), [x])
    check_grads(lambda x: ops.sum_(ops.mul(ops.transpose(x, (2, 0, 1)),
                                           ops.transpose(x, (2, 0, 1)))), [x])


@pytest.mark.parametrize("seed", SEEDS)
def test_concat_slice_upsample(seed):
    rng = rng_for(seed)
    a = leaf(rng, (2, 3))
    b = leaf(rng, (2, 4))
    probe = Tensor(rng.normal(size=(2, 7)), dtype=np.float64)
    check_grads(lambda a, b: ops.sum_(ops.mul(ops.concat([a, b], axis=1), probe)), [a, b])
    x = leaf(rng, (2, 3, 8))
    check_grads(lambda x: ops.sum_(ops.mul(ops.narrow(x, 2, 2, 4),
                                           ops.narrow(x, 2, 1, 4))), [x])
    check_grads(lambda x: ops.sum_(ops.mul(ops.upsample1d(x, 3),
                                           ops.upsample1d(x, 3))), [x])


@pytest.mark.parametrize("seed", SEEDS)
def test_multi_head_attention(seed):
    from qlst.numcore import MultiHeadAttention
    rng = rng_for(seed)
    mha = MultiHeadAttention(dim=8, heads=2, rng=rng, dropout_p=0.0).eval()
    params = list(mha.parameters().values())
    for p in params:
        p.data = p.data.astype(np.float64)
    x = leaf(rng, (2, 4, 8), scale=0.5)
    probe = Tensor(rng.normal(size=(2, 4, 8)), dtype=np.float64)
    check_grads(lambda x, *ps: ops.sum_(ops.mul(mha(x), probe)), [x] + params)


def test_dropout_train_mode_grad():
    # with a fixed mask, dropout is linear: grad equals mask/keep
    rng = np.random.default_rng(7)
    x = Tensor(rng.normal(size=(50,)), requires_grad=True, dtype=np.float64)
    from qlst.numcore import Tape, backward
    with Tape() as tape:
        y = ops.sum_(ops.dropout(x, keep=0.8, stream=np.random.default_rng(3), training=True))
    backward(tape, y)
    mask = ops.dropout(Tensor(np.ones(50), dtype=np.float64), keep=0.8,
                       stream=np.random.default_rng(3), training=True).data
    assert np.allclose(x.grad, mask)
