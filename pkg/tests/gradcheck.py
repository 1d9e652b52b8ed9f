"""Central finite-difference gradient oracle.

Independent of the tape: it evaluates a forward-only function at perturbed
inputs in float64 and compares against the analytic gradients produced by
``backward``.  Perturbation 1e-5, relative error tolerance 1e-4.
"""

import numpy as np

from qlst.numcore import Tape, Tensor, backward

EPS = 1e-5
RTOL = 1e-4


def numeric_grad(fn, tensors, index, eps=EPS):
    """d(scalar fn)/d(tensors[index]) by central differences."""
    t = tensors[index]
    base = t.data.copy()
    g = np.zeros_like(base, dtype=np.float64)
    flat = base.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        t.data = base
        hi = float(fn(*tensors).data)
        flat[i] = orig - eps
        lo = float(fn(*tensors).data)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * eps)
    return g


def check_grads(fn, tensors, rtol=RTOL):
    """Assert analytic grads of scalar ``fn`` match central differences.

    ``tensors`` must be float64 leaves with requires_grad set.
    """
    for t in tensors:
        t.grad = None
    with Tape() as tape:
        loss = fn(*tensors)
    backward(tape, loss)
    for i, t in enumerate(tensors):
        if not t.requires_grad:
            continue
        num = numeric_grad(fn, tensors, i)
        ana = np.asarray(t.grad, dtype=np.float64)
        denom = np.maximum(np.abs(num), np.abs(ana))
        err = np.abs(ana - num) / np.maximum(denom, 1e-6)
        # below the central-difference noise floor both are numerically zero
        err[denom < 1e-7] = 0.0
        assert np.max(err) <= rtol, (
            f"gradient mismatch on input {i}: max rel err {np.max(err):.3e}"
        )


def leaf(rng, shape, scale=1.0, requires_grad=True):
    return Tensor(rng.normal(0.0, scale, size=shape), requires_grad=requires_grad,
                  dtype=np.float64)
