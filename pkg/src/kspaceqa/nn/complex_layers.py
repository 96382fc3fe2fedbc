"""Frequency-domain layers operating on complex spectra.

Per the convolution theorem, a spatial convolution with an image-sized
kernel is an elementwise complex product in the Fourier domain, so the
feature extractor here never leaves k-space. Gradients treat the real
and imaginary parts of every quantity as independent real variables;
complex gradient arrays encode (dL/d-real) + 1j*(dL/d-imag).
"""

import numpy as np

from .layers import Layer


class ComplexPointwise(Layer):
    """Per-frequency complex filters: out[b,o] = sum_i x[b,i] * f[i,o].

    Filters have the same spatial size as the input. Initialization draws
    real and imaginary parts i.i.d. normal with sigma = 1/sqrt(H*W).
    """

    def __init__(self, c_in, c_out, height, width, rng=None,
                 dtype=np.complex64, sigma=None):
        super().__init__()
        rng = np.random.default_rng() if rng is None else rng
        sigma = 1.0 / np.sqrt(height * width) if sigma is None else sigma
        shape = (height, width, c_in, c_out)
        self.c_in, self.c_out = c_in, c_out
        self.w = (rng.normal(0.0, sigma, shape)
                  + 1j * rng.normal(0.0, sigma, shape)).astype(dtype)
        self.gw = np.zeros_like(self.w)
        self.params = [self.w]
        self.grads = [self.gw]
        self._x = None

    @staticmethod
    def _per_bin(a):
        """(B, H, W, C) -> (H*W, B, C) for per-frequency batched matmul."""
        b, h, w, c = a.shape
        return np.ascontiguousarray(a.transpose(1, 2, 0, 3)).reshape(
            h * w, b, c)

    @staticmethod
    def _per_batch(a, h, w):
        """(H*W, B, C) -> contiguous (B, H, W, C)."""
        p, b, c = a.shape
        return np.ascontiguousarray(
            a.reshape(h, w, b, c).transpose(2, 0, 1, 3))

    def forward(self, x, training=False):
        if x.ndim != 4 or x.shape[1:3] != self.w.shape[:2] \
                or x.shape[3] != self.c_in:
            raise ValueError(
                f"expected (B,{self.w.shape[0]},{self.w.shape[1]},"
                f"{self.c_in}) input, got {x.shape}")
        h, w = self.w.shape[:2]
        xt = self._per_bin(x)
        out = np.matmul(xt, self.w.reshape(h * w, self.c_in, self.c_out))
        self._xt = xt
        return self._per_batch(out, h, w)

    def backward(self, g):
        h, w = self.w.shape[:2]
        xt = self._xt
        gt = self._per_bin(g)
        xh = np.conj(xt).transpose(0, 2, 1)              # (P, Ci, B)
        self.gw += np.matmul(xh, gt).reshape(self.w.shape)
        dx = None
        if self.needs_input_grad:
            wh = np.conj(self.w.reshape(h * w, self.c_in, self.c_out)
                         ).transpose(0, 2, 1)            # (P, Co, Ci)
            dx = self._per_batch(np.matmul(gt, wh), h, w)
        self._xt = None
        return dx


class ModReLU(Layer):
    """Magnitude-thresholding activation preserving phase.

    out = relu(|z| + b) * z / max(|z|, eps) with one learnable real bias
    per channel; zero where the thresholded magnitude is non-positive.
    The eps floor bounds the gain (m + b) / m, which is otherwise
    unbounded on near-zero bins once the bias learns a positive value.
    """

    def __init__(self, channels, dtype=np.complex64, bias_init=0.0,
                 eps=1e-3):
        super().__init__()
        real_dtype = np.zeros(1, dtype).real.dtype
        self.b = np.full(channels, bias_init, real_dtype)
        self.gb = np.zeros_like(self.b)
        self.eps = eps
        self.params = [self.b]
        self.grads = [self.gb]

    def forward(self, x, training=False):
        m = np.abs(x)
        thr = m + self.b
        active = thr > 0
        u = np.maximum(m, np.asarray(self.eps, m.dtype))
        scale = np.where(active, thr / u, 0)
        self._x, self._m, self._u, self._scale = x, m, u, scale
        self._active = active
        return x * scale

    def backward(self, g):
        x, m, u, scale = self._x, self._m, self._u, self._scale
        act = self._active
        dot = (g.real * x.real + g.imag * x.imag)        # Re(conj(g) z)
        # out = s*z/u with s = m + b, u = max(m, eps):
        # dz = (s/u) g + (1/u - (s/u^2)[m > eps]) * (dot/m) * z  on the
        # active set; the z-proportional term vanishes at z = 0 via dot.
        m_safe = np.where(m > 0, m, 1).astype(m.dtype)
        coef = (1.0 / u - (scale / u) * (m > self.eps)) * (dot / m_safe)
        coef = np.where(act, coef, 0)
        dz = g * scale + coef * x
        dbfull = np.where(act, dot / u, 0)
        self.gb += dbfull.sum(axis=tuple(range(dbfull.ndim - 1)))
        self._x = self._m = self._u = self._scale = self._active = None
        return dz


class SpectralPool(Layer):
    """Keep the centered low-frequency block of an unshifted spectrum.

    Equivalent to fftshift -> central (out_h x out_w) crop -> ifftshift,
    implemented as one index gather. DC maps to DC; the adjoint scatters
    gradients back to the kept bins.
    """

    def __init__(self, out_h, out_w):
        super().__init__()
        self.out_h, self.out_w = out_h, out_w
        self._maps = {}

    @staticmethod
    def _index_map(n_in, n_out):
        if n_out > n_in:
            raise ValueError(
                f"output length {n_out} exceeds input length {n_in}")
        start = n_in // 2 - n_out // 2
        j = np.arange(n_out)
        shifted_pos = start + (j + n_out // 2) % n_out
        return (shifted_pos - n_in // 2) % n_in

    def forward(self, x, training=False):
        batch, h, w, c = x.shape
        key = (h, w)
        if key not in self._maps:
            self._maps[key] = (self._index_map(h, self.out_h),
                               self._index_map(w, self.out_w))
        rows, cols = self._maps[key]
        self._in_shape = x.shape
        return x[:, rows[:, None], cols[None, :], :]

    def backward(self, g):
        h, w = self._in_shape[1:3]
        rows, cols = self._maps[(h, w)]
        dx = np.zeros(self._in_shape, g.dtype)
        dx[:, rows[:, None], cols[None, :], :] = g
        return dx


class ComplexToReal(Layer):
    """Flatten a complex activation into [all real parts, all imag parts]."""

    def forward(self, x, training=False):
        self._shape = x.shape
        batch = x.shape[0]
        return np.concatenate(
            [x.real.reshape(batch, -1), x.imag.reshape(batch, -1)], axis=1)

    def backward(self, g):
        n = g.shape[1] // 2
        dz = (g[:, :n] + 1j * g[:, n:]).astype(
            np.result_type(g.dtype, np.complex64))
        return dz.reshape(self._shape)
