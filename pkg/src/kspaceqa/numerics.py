"""2D Fourier numerics underpinning the k-space manipulations.

Transform convention: forward DFT is unnormalized, the inverse carries the
1/(H*W) factor (numpy's default "backward" norm). The aliasing ghost
identity in :mod:`kspaceqa.artifacts` is derived under this pair, so the
two functions must never be rescaled independently.

All functions are pure and safe to call concurrently.
"""

import numpy as np


def as_real_grid(img):
    """Validate and return a 2D float64 grid.

    Raises ValueError for wrong dimensionality, empty axes, complex input
    or non-finite entries.
    """
    a = np.asarray(img)
    if a.ndim != 2:
        raise ValueError(f"expected a 2D grid, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {a.shape}")
    if np.iscomplexobj(a):
        raise ValueError("expected a real-valued grid, got complex data")
    a = a.astype(np.float64, copy=False)
    if not np.all(np.isfinite(a)):
        raise ValueError("grid contains non-finite values (nan or inf)")
    return a


def as_complex_grid(k):
    """Validate and return a 2D complex128 grid."""
    a = np.asarray(k)
    if a.ndim != 2:
        raise ValueError(f"expected a 2D grid, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {a.shape}")
    a = a.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("grid contains non-finite values (nan or inf)")
    return a


def dft2(img):
    """Forward 2D DFT of a real grid (unnormalized), any H x W >= 1."""
    return np.fft.fft2(as_real_grid(img))


def idft2(k):
    """Inverse 2D DFT with the 1/(H*W) factor.

    Returns the full complex grid; callers reconstructing an image keep
    the real part and may inspect the imaginary residue.
    """
    return np.fft.ifft2(as_complex_grid(k))


def circ_shift(img, dy, dx):
    """Circularly shift a grid: out[y, x] = img[(y - dy) % H, (x - dx) % W]."""
    a = as_real_grid(img)
    return np.roll(a, (int(dy), int(dx)), axis=(0, 1))


def conv2d_circular(img, kernel):
    """Circular (periodic-boundary) 2D convolution by direct summation.

    out[y, x] = sum_{a,b} img[a, b] * kernel[(y - a) % H, (x - b) % W]

    The kernel must already match the image shape (zero-pad smaller
    kernels before calling). Direct summation on purpose: this is the
    spatial-domain reference against which the DFT pointwise-product path
    is checked, so it must not go through any Fourier transform.
    """
    f = as_real_grid(img)
    h = as_real_grid(kernel)
    if f.shape != h.shape:
        raise ValueError(f"kernel shape {h.shape} != image shape {f.shape}")
    out = np.zeros_like(f)
    height, width = f.shape
    for a in range(height):
        for b in range(width):
            v = f[a, b]
            if v != 0.0:
                out += v * np.roll(h, (a, b), axis=(0, 1))
    return out
