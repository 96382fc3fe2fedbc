"""Trainable layers with explicit forward/backward passes.

Activations are channels-last ``(batch, height, width, channels)`` float
arrays; dense activations are ``(batch, features)``. Every layer keeps
its parameters in ``params`` and accumulates matching ``grads`` on
``backward``. Layers are single-owner during training (caches live on
the layer); inference through a shared trained model is safe because
``forward(training=False)`` on parameter-free paths never mutates
parameters.

Ownership: activation and gradient arrays passed through the pipeline
belong to it. Memory-bound layers (ReLU, Dropout) update them in place,
so callers keeping an array across a forward/backward call must pass a
copy.

The convolution runs as cache-blocked im2col GEMMs: the patch matrix is
built for a few images at a time so it stays resident in cache, which on
bandwidth-starved hosts is several times faster than one huge buffer.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

# target size for one im2col chunk; keeps the patch matrix cache-resident
_COL_BYTES = 6 << 20


class Layer:
    """Base layer: no parameters, identity shapes."""

    needs_input_grad = True

    def __init__(self):
        self.params = []
        self.grads = []

    def zero_grads(self):
        for g in self.grads:
            g[...] = 0

    def forward(self, x, training=False):
        raise NotImplementedError

    def backward(self, g):
        raise NotImplementedError


class Conv2D(Layer):
    """2D cross-correlation, stride 1, zero 'same' padding, odd kernel."""

    def __init__(self, c_in, c_out, ksize=3, rng=None, dtype=np.float32):
        super().__init__()
        if ksize % 2 != 1:
            raise ValueError("kernel size must be odd for same padding")
        rng = np.random.default_rng() if rng is None else rng
        self.c_in, self.c_out, self.ksize = c_in, c_out, ksize
        scale = np.sqrt(2.0 / (ksize * ksize * c_in))
        self.w = (rng.normal(0.0, scale, (ksize, ksize, c_in, c_out))
                  .astype(dtype))
        self.b = np.zeros(c_out, dtype)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self.params = [self.w, self.b]
        self.grads = [self.gw, self.gb]
        self._x = None

    def _chunk(self, h, w, itemsize):
        per_image = h * w * self.ksize * self.ksize * self.c_in * itemsize
        return max(1, _COL_BYTES // max(per_image, 1))

    def _cols(self, xp, n, h, w):
        k = self.ksize
        view = sliding_window_view(xp[:n], (k, k), axis=(1, 2))
        return (view.transpose(0, 1, 2, 4, 5, 3)
                .reshape(n * h * w, k * k * self.c_in))

    def forward(self, x, training=False):
        if x.ndim != 4 or x.shape[3] != self.c_in:
            raise ValueError(
                f"expected (B,H,W,{self.c_in}) input, got {x.shape}")
        batch, h, w, _ = x.shape
        k, p = self.ksize, self.ksize // 2
        wmat = self.w.reshape(k * k * self.c_in, self.c_out)
        out = np.empty((batch, h, w, self.c_out), x.dtype)
        chunk = self._chunk(h, w, x.itemsize)
        xp = np.zeros((min(chunk, batch), h + 2 * p, w + 2 * p, self.c_in),
                      x.dtype)
        for s in range(0, batch, chunk):
            n = min(chunk, batch - s)
            xp[:n, p:p + h, p:p + w, :] = x[s:s + n]
            np.matmul(self._cols(xp, n, h, w), wmat,
                      out=out[s:s + n].reshape(n * h * w, self.c_out))
        out += self.b
        self._x = x
        return out

    def backward(self, g):
        x = self._x
        batch, h, w, _ = x.shape
        k, p = self.ksize, self.ksize // 2
        wmat = self.w.reshape(k * k * self.c_in, self.c_out)
        gwmat = self.gw.reshape(k * k * self.c_in, self.c_out)
        self.gb += g.sum(axis=(0, 1, 2))
        dx = np.empty_like(x) if self.needs_input_grad else None
        chunk = self._chunk(h, w, x.itemsize)
        pad_shape = (min(chunk, batch), h + 2 * p, w + 2 * p, self.c_in)
        xp = np.zeros(pad_shape, x.dtype)
        dxp = np.empty(pad_shape, x.dtype) if dx is not None else None
        for s in range(0, batch, chunk):
            n = min(chunk, batch - s)
            gflat = g[s:s + n].reshape(n * h * w, self.c_out)
            xp[:n, p:p + h, p:p + w, :] = x[s:s + n]
            gwmat += self._cols(xp, n, h, w).T @ gflat
            if dx is None:
                continue
            dcols = (gflat @ wmat.T).reshape(n, h, w, k, k, self.c_in)
            dxp[:n] = 0
            for di in range(k):
                for dj in range(k):
                    dxp[:n, di:di + h, dj:dj + w, :] += dcols[:, :, :, di, dj, :]
            dx[s:s + n] = dxp[:n, p:p + h, p:p + w, :]
        self._x = None
        return dx


class Dense(Layer):
    def __init__(self, n_in, n_out, rng=None, dtype=np.float32):
        super().__init__()
        rng = np.random.default_rng() if rng is None else rng
        self.w = rng.normal(0.0, np.sqrt(2.0 / n_in), (n_in, n_out)).astype(dtype)
        self.b = np.zeros(n_out, dtype)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self.params = [self.w, self.b]
        self.grads = [self.gw, self.gb]
        self._x = None

    def forward(self, x, training=False):
        if x.ndim != 2 or x.shape[1] != self.w.shape[0]:
            raise ValueError(
                f"expected (B,{self.w.shape[0]}) input, got {x.shape}")
        self._x = x
        return x @ self.w + self.b

    def backward(self, g):
        self.gw += self._x.T @ g
        self.gb += g.sum(axis=0)
        dx = g @ self.w.T if self.needs_input_grad else None
        self._x = None
        return dx


class MaxPool2(Layer):
    """2x2 max pooling, stride 2; odd trailing rows/columns are dropped."""

    def forward(self, x, training=False):
        batch, h, w, c = x.shape
        h2, w2 = h // 2, w // 2
        if h2 == 0 or w2 == 0:
            raise ValueError(f"input {x.shape} too small for 2x2 pooling")
        t = x[:, :h2 * 2, :w2 * 2, :]
        slices = (t[:, 0::2, 0::2, :], t[:, 0::2, 1::2, :],
                  t[:, 1::2, 0::2, :], t[:, 1::2, 1::2, :])
        out = np.maximum(np.maximum(slices[0], slices[1]),
                         np.maximum(slices[2], slices[3]))
        self._shape = x.shape
        self._slices = slices
        self._out = out
        return out

    def backward(self, g):
        dx = np.zeros(self._shape, g.dtype)
        targets = (dx[:, 0::2, 0::2, :], dx[:, 0::2, 1::2, :],
                   dx[:, 1::2, 0::2, :], dx[:, 1::2, 1::2, :])
        h2, w2 = self._out.shape[1], self._out.shape[2]
        claimed = np.zeros(self._out.shape, bool)
        for src, dst in zip(self._slices, targets):
            hit = (src == self._out) & ~claimed
            dst[:, :h2, :w2, :][hit] = g[hit]
            claimed |= hit
        self._slices = self._out = None
        return dx


class ReLU(Layer):
    def forward(self, x, training=False):
        out = np.maximum(x, 0, out=x)
        self._out = out
        return out

    def backward(self, g):
        np.multiply(g, self._out > 0, out=g)
        self._out = None
        return g


class Dropout(Layer):
    """Inverted dropout: scales by 1/(1-p) in training, identity at inference.

    Works on real or complex activations (complex elements drop as units).
    """

    def __init__(self, p, rng=None):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise ValueError("dropout probability must be in [0, 1)")
        self.p = p
        self.rng = np.random.default_rng() if rng is None else rng
        self._mask = None

    def forward(self, x, training=False):
        if not training or self.p == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.p
        draw = self.rng.random(x.shape, dtype=np.float32)
        self._mask = (draw < keep) / np.asarray(keep, dtype=x.real.dtype)
        return x * self._mask

    def backward(self, g):
        if self._mask is None:
            return g
        np.multiply(g, self._mask, out=g)
        self._mask = None
        return g


class Flatten(Layer):
    def forward(self, x, training=False):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, g):
        return g.reshape(self._shape)


class GradientReversal(Layer):
    """Identity forward; backward multiplies the gradient by -lambda.

    The forward pass returns its input object unchanged, so it is
    bit-identical by construction. ``lam`` is mutated by the training
    loop when a schedule is active.
    """

    def __init__(self, lam=1.0):
        super().__init__()
        if lam < 0:
            raise ValueError("lambda must be >= 0")
        self.lam = float(lam)

    def forward(self, x, training=False):
        return x

    def backward(self, g):
        return -self.lam * g


def conv2d_forward(x, weights, bias):
    """Functional conv with (B, C, H, W) tensors and (Cout, Cin, k, k) weights.

    Same padding, stride 1; thin wrapper over :class:`Conv2D` for callers
    holding channels-first data.
    """
    x = np.asarray(x)
    weights = np.asarray(weights)
    c_out, c_in, k, k2 = weights.shape
    if k != k2:
        raise ValueError("kernel must be square")
    layer = Conv2D(c_in, c_out, k, dtype=weights.dtype)
    layer.w[...] = weights.transpose(2, 3, 1, 0)
    layer.b[...] = bias
    out = layer.forward(np.ascontiguousarray(x.transpose(0, 2, 3, 1)))
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2))


def conv2d_backward(x, weights, bias, upstream):
    """Gradients of the functional conv; returns (dweights, dbias, dx)."""
    x = np.asarray(x)
    weights = np.asarray(weights)
    c_out, c_in, k, _ = weights.shape
    layer = Conv2D(c_in, c_out, k, dtype=weights.dtype)
    layer.w[...] = weights.transpose(2, 3, 1, 0)
    layer.b[...] = bias
    layer.forward(np.ascontiguousarray(x.transpose(0, 2, 3, 1)))
    dx = layer.backward(np.ascontiguousarray(upstream.transpose(0, 2, 3, 1)))
    dw = layer.gw.transpose(3, 2, 0, 1).copy()
    return dw, layer.gb.copy(), np.ascontiguousarray(dx.transpose(0, 3, 1, 2))
