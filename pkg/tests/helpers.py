"""Shared test oracles: naive transforms and finite-difference checking.

Everything here is deliberately slow and direct. The naive DFT is the
correctness reference for the fast transforms; the finite-difference
machinery is the reference for every hand-derived gradient.
"""

import numpy as np


def naive_dft2(img):
    """O(n^2)-per-axis double-loop forward DFT, unnormalized."""
    img = np.asarray(img, dtype=np.complex128)
    h_n, w_n = img.shape
    out = np.zeros((h_n, w_n), np.complex128)
    for u in range(h_n):
        for v in range(w_n):
            acc = 0.0 + 0.0j
            for y in range(h_n):
                for x in range(w_n):
                    acc += img[y, x] * np.exp(-2j * np.pi
                                              * (u * y / h_n + v * x / w_n))
            out[u, v] = acc
    return out


def naive_idft2(k):
    """Inverse with 1/(H*W), by direct summation."""
    k = np.asarray(k, dtype=np.complex128)
    h_n, w_n = k.shape
    out = np.zeros((h_n, w_n), np.complex128)
    for y in range(h_n):
        for x in range(w_n):
            acc = 0.0 + 0.0j
            for u in range(h_n):
                for v in range(w_n):
                    acc += k[u, v] * np.exp(2j * np.pi
                                            * (u * y / h_n + v * x / w_n))
            out[y, x] = acc / (h_n * w_n)
    return out


def naive_conv2d_bchw(x, w, b):
    """Direct sliding-window cross-correlation, zero same padding."""
    batch, c_in, h, width = x.shape
    c_out, _, k, _ = w.shape
    p = k // 2
    out = np.zeros((batch, c_out, h, width))
    for n in range(batch):
        for o in range(c_out):
            for y in range(h):
                for xx in range(width):
                    acc = b[o]
                    for i in range(c_in):
                        for dy in range(k):
                            for dx in range(k):
                                yy, xc = y + dy - p, xx + dx - p
                                if 0 <= yy < h and 0 <= xc < width:
                                    acc += x[n, i, yy, xc] * w[o, i, dy, dx]
                    out[n, o, y, xx] = acc
    return out


def mann_whitney_auc(scores, positive):
    """Pairwise-comparison AUC: (wins + ties/2) / (n_pos * n_neg)."""
    scores = np.asarray(scores, np.float64)
    positive = np.asarray(positive, bool)
    pos = scores[positive]
    neg = scores[~positive]
    wins = ties = 0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1
            elif p == n:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def spread_values(rng, shape, low=-1.0, high=1.0):
    """Random array whose values are pairwise distinct with a wide margin.

    Keeps max-pool and relu finite-difference checks away from ties and
    kinks: values sit on a shuffled linear grid, so the smallest gap is
    (high-low)/size >> the difference step.
    """
    n = int(np.prod(shape))
    return rng.permutation(np.linspace(low, high, n)).reshape(shape)


def _inner(g, out):
    """Real test functional <g, out>: works for real and complex arrays."""
    return float(np.sum(g.real * out.real) + np.sum(g.imag * out.imag))


def layer_loss(layer, x, g, training=False, rng_seed=None):
    if rng_seed is not None:
        layer.rng = np.random.default_rng(rng_seed)
    out = layer.forward(x.copy(), training=training)
    return _inner(g, out)


def _fd_array(f, arr, eps):
    """Central differences of scalar f w.r.t. every real component of arr."""
    grad = np.zeros_like(arr)
    flat = arr.ravel()
    gflat = grad.ravel()
    steps = [eps] if not np.iscomplexobj(arr) else [eps, eps * 1j]
    for idx in range(flat.size):
        total = 0.0 + 0.0j
        for step in steps:
            orig = flat[idx]
            flat[idx] = orig + step
            up = f()
            flat[idx] = orig - step
            down = f()
            flat[idx] = orig
            d = (up - down) / (2 * eps)
            total += d * (1 if step == eps else 1j)
        gflat[idx] = total if np.iscomplexobj(arr) else total.real
    return grad


def rel_error(analytic, fd):
    scale = max(np.abs(analytic).max(initial=0.0),
                np.abs(fd).max(initial=0.0), 1e-6)
    return float(np.abs(analytic - fd).max(initial=0.0) / scale)


def check_layer_gradients(layer, x, rng, eps=1e-6, tol=1e-4, training=False,
                          rng_seed=None, check_input=True):
    """Compare analytic backward against central finite differences.

    Uses the scalar functional L = <g, out> with a fixed random upstream
    g. Asserts a normalized max-abs relative error below tol for the
    input gradient and every parameter gradient. Arrays must be float64
    or complex128 for the step size to make sense.
    """
    if rng_seed is not None:
        layer.rng = np.random.default_rng(rng_seed)
    out = layer.forward(x.copy(), training=training)
    if np.iscomplexobj(out):
        g = (rng.normal(size=out.shape)
             + 1j * rng.normal(size=out.shape)).astype(out.dtype)
    else:
        g = rng.normal(size=out.shape).astype(out.dtype)
    layer.zero_grads()
    dx = layer.backward(g.copy())
    analytic_params = [p.copy() for p in layer.grads]

    if check_input:
        fd_x = _fd_array(
            lambda: layer_loss(layer, x, g, training, rng_seed), x, eps)
        err = rel_error(dx, fd_x)
        assert err < tol, f"input gradient mismatch: rel err {err:.3e}"
    for p, ga in zip(layer.params, analytic_params):
        fd_p = _fd_array(
            lambda: layer_loss(layer, x, g, training, rng_seed), p, eps)
        err = rel_error(ga, fd_p)
        assert err < tol, (
            f"parameter gradient mismatch ({p.shape}): rel err {err:.3e}")
