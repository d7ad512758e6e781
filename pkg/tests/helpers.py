"""Test-side oracles: finite-difference gradient checks in 64-bit."""

import numpy as np


def numeric_grad(f, x, eps=1e-6):
    """Central-difference gradient of scalar f at x, elementwise."""
    g = np.zeros_like(x, dtype=np.float64)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + eps
        hi = f()
        flat[i] = keep - eps
        lo = f()
        flat[i] = keep
        gf[i] = (hi - lo) / (2 * eps)
    return g


def rel_error(a, b, floor=1e-8):
    """Max relative disagreement with an absolute floor for tiny entries."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.abs(a) + np.abs(b), floor)
    return float((np.abs(a - b) / denom).max())


def check_layer_gradients(layer, x, *, eps=1e-6, seed=0):
    """Compare a layer's analytic gradients to finite differences.

    Drives the layer with a fixed random cotangent so the scalar
    objective sum(out * r) exercises every output; returns the worst
    relative error over the input gradient and every parameter gradient.
    """
    rng = np.random.default_rng(seed)
    out = layer.forward(x)
    r = rng.standard_normal(out.shape)

    def objective():
        return float((layer.forward(x) * r).sum())

    analytic_dx = layer.backward(r)
    worst = rel_error(analytic_dx, numeric_grad(objective, x, eps))
    for p in layer.params():
        layer.forward(x)
        layer.backward(r)
        analytic = p.grad.copy()
        numeric = numeric_grad(objective, p.value, eps)
        worst = max(worst, rel_error(analytic, numeric))
    return worst
