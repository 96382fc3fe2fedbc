"""Finite-difference validation of every trainable layer's backward pass.

All checks run in double precision with central differences (step 1e-6)
and a 1e-4 normalized relative-error bound.
"""

import numpy as np
import pytest

from kspaceqa import nn

from helpers import check_layer_gradients, spread_values

EPS = 1e-6
TOL = 1e-4


@pytest.mark.parametrize("seed,b,ci,co,h,w,k", [
    (0, 2, 1, 3, 5, 5, 3),
    (1, 1, 3, 2, 6, 4, 3),
    (2, 2, 2, 2, 4, 7, 5),
    (3, 1, 4, 1, 3, 3, 3),
    (4, 3, 2, 4, 5, 6, 3),
    (5, 1, 1, 1, 8, 8, 3),
])
def test_conv2d_gradients(seed, b, ci, co, h, w, k):
    rng = np.random.default_rng(seed)
    layer = nn.Conv2D(ci, co, k, rng=rng, dtype=np.float64)
    x = rng.normal(size=(b, h, w, ci))
    check_layer_gradients(layer, x, rng, eps=EPS, tol=TOL)


@pytest.mark.parametrize("seed,b,ni,no", [
    (0, 3, 7, 4), (1, 1, 12, 3), (2, 5, 4, 9), (3, 2, 20, 2),
])
def test_dense_gradients(seed, b, ni, no):
    rng = np.random.default_rng(seed)
    layer = nn.Dense(ni, no, rng=rng, dtype=np.float64)
    x = rng.normal(size=(b, ni))
    check_layer_gradients(layer, x, rng, eps=EPS, tol=TOL)


@pytest.mark.parametrize("seed,shape", [
    (0, (2, 6, 6, 3)), (1, (1, 8, 4, 2)), (2, (3, 5, 7, 1)),
])
def test_maxpool_gradients(seed, shape):
    rng = np.random.default_rng(seed)
    layer = nn.MaxPool2()
    x = spread_values(rng, shape)   # distinct values: no ties near the step
    check_layer_gradients(layer, x, rng, eps=EPS, tol=TOL)


@pytest.mark.parametrize("seed,shape", [
    (0, (2, 5, 5, 3)), (1, (4, 30)), (2, (1, 3, 8, 2)),
])
def test_relu_gradients(seed, shape):
    rng = np.random.default_rng(seed)
    layer = nn.ReLU()
    x = spread_values(rng, shape)
    x = np.where(np.abs(x) < 1e-3, 0.5, x)   # keep away from the kink
    check_layer_gradients(layer, x, rng, eps=EPS, tol=TOL)


@pytest.mark.parametrize("seed,p", [(0, 0.3), (1, 0.5)])
def test_dropout_gradients_training(seed, p):
    rng = np.random.default_rng(seed)
    layer = nn.Dropout(p)
    x = rng.normal(size=(3, 6, 6, 2))
    check_layer_gradients(layer, x, rng, eps=EPS, tol=TOL,
                          training=True, rng_seed=seed + 100)


@pytest.mark.parametrize("seed,b,ci,co,h,w", [
    (0, 2, 1, 3, 4, 4), (1, 1, 3, 3, 3, 5), (2, 2, 2, 1, 5, 3),
    (3, 1, 2, 2, 1, 1),   # 1x1 spatial: reduces to the scalar product rule
])
def test_complex_pointwise_gradients(seed, b, ci, co, h, w):
    rng = np.random.default_rng(seed)
    layer = nn.ComplexPointwise(ci, co, h, w, rng=rng, dtype=np.complex128)
    x = (rng.normal(size=(b, h, w, ci))
         + 1j * rng.normal(size=(b, h, w, ci)))
    check_layer_gradients(layer, x, rng, eps=EPS, tol=TOL)


@pytest.mark.parametrize("seed,shape", [
    (0, (2, 4, 4, 2)), (1, (1, 5, 3, 3)), (2, (3, 2, 2, 1)),
])
def test_modrelu_gradients(seed, shape):
    rng = np.random.default_rng(seed)
    layer = nn.ModReLU(shape[-1], dtype=np.complex128)
    layer.b[...] = rng.uniform(-0.5, 0.5, shape[-1])
    # magnitudes well away from both the threshold and zero
    mag = rng.uniform(0.8, 1.6, shape)
    phase = rng.uniform(0, 2 * np.pi, shape)
    x = mag * np.exp(1j * phase)
    check_layer_gradients(layer, x, rng, eps=EPS, tol=TOL)


def test_modrelu_gradients_below_eps_floor():
    # exercise the bounded-gain branch where |z| < eps
    rng = np.random.default_rng(9)
    layer = nn.ModReLU(2, dtype=np.complex128, eps=10.0)
    layer.b[...] = [0.4, 0.9]
    mag = rng.uniform(0.5, 1.5, (2, 3, 3, 2))
    phase = rng.uniform(0, 2 * np.pi, (2, 3, 3, 2))
    x = mag * np.exp(1j * phase)
    check_layer_gradients(layer, x, rng, eps=EPS, tol=TOL)


@pytest.mark.parametrize("seed,shape,crop", [
    (0, (2, 6, 6, 2), (4, 4)), (1, (1, 7, 5, 3), (3, 3)),
    (2, (2, 4, 8, 1), (4, 6)),
])
def test_spectral_pool_gradients(seed, shape, crop):
    rng = np.random.default_rng(seed)
    layer = nn.SpectralPool(*crop)
    x = (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    check_layer_gradients(layer, x, rng, eps=EPS, tol=TOL)


@pytest.mark.parametrize("seed,shape", [(0, (2, 3, 3, 2)), (1, (3, 4, 2, 1))])
def test_complex_to_real_gradients(seed, shape):
    rng = np.random.default_rng(seed)
    layer = nn.ComplexToReal()
    x = (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    check_layer_gradients(layer, x, rng, eps=EPS, tol=TOL)


@pytest.mark.parametrize("seed,b,k", [(0, 4, 5), (1, 2, 3), (2, 7, 5)])
def test_softmax_cross_entropy_gradient(seed, b, k):
    rng = np.random.default_rng(seed)
    logits = rng.normal(size=(b, k))
    labels = rng.integers(0, k, b)
    _, grad = nn.softmax_cross_entropy(logits, labels)
    fd = np.zeros_like(logits)
    for idx in np.ndindex(*logits.shape):
        delta = np.zeros_like(logits)
        delta[idx] = EPS
        up, _ = nn.softmax_cross_entropy(logits + delta, labels)
        down, _ = nn.softmax_cross_entropy(logits - delta, labels)
        fd[idx] = (up - down) / (2 * EPS)
    scale = max(np.abs(grad).max(), np.abs(fd).max(), 1e-6)
    assert np.abs(grad - fd).max() / scale < TOL


@pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
def test_grl_exact(lam):
    rng = np.random.default_rng(int(lam * 10))
    layer = nn.GradientReversal(lam)
    x = rng.normal(size=(3, 512)).astype(np.float32)
    out = layer.forward(x)
    assert out is x                       # bit-identical by construction
    g = rng.normal(size=x.shape).astype(np.float32)
    back = layer.backward(g)
    assert np.array_equal(back, -lam * g)  # exact, no tolerance


def test_grl_zero_lambda_kills_gradient():
    layer = nn.GradientReversal(0.0)
    g = np.ones((4, 8))
    assert np.all(layer.backward(g) == 0)
