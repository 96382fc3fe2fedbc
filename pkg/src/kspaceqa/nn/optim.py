"""Adam optimizer with bias correction.

Complex parameters are updated through a real view, i.e. their real and
imaginary parts are treated as independent real parameters, which
matches how the complex layers report gradients.
"""

import numpy as np


def _real_view(a):
    if np.iscomplexobj(a):
        return a.view(np.zeros(1, a.dtype).real.dtype)
    return a


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = [np.zeros_like(_real_view(p)) for p in self.params]
        self.v = [np.zeros_like(_real_view(p)) for p in self.params]
        self._scratch = [np.empty_like(x) for x in self.m]

    def step(self, grads):
        grads = list(grads)
        if len(grads) != len(self.params):
            raise ValueError("gradient list does not match parameter list")
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        corr1 = 1.0 - b1 ** self.t
        corr2 = 1.0 - b2 ** self.t
        for p, g, m, v, s in zip(self.params, grads, self.m, self.v,
                                 self._scratch):
            p_r, g_r = _real_view(p), _real_view(g)
            if g_r.shape != p_r.shape:
                raise ValueError(
                    f"gradient shape {g_r.shape} != parameter shape {p_r.shape}")
            # m += (1-b1)(g - m); v += (1-b2)(g^2 - v), all in place
            m *= b1
            m += (1.0 - b1) * g_r
            v *= b2
            np.multiply(g_r, g_r, out=s)
            v += (1.0 - b2) * s
            # p -= lr * (m/corr1) / (sqrt(v/corr2) + eps)
            np.sqrt(v, out=s)
            s *= 1.0 / np.sqrt(corr2)
            s += self.eps
            np.divide(m, s, out=s)
            s *= self.lr / corr1
            p_r -= s
