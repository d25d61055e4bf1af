"""Image containers and spatial operators every solver builds on.

Planes are 2-D float64 arrays (row-major, intensities nominally in [0, 1]);
tensors are H x W x C stacks with C in {1, 3}. Kernels are odd-sized square
arrays; a normalized kernel is non-negative and sums to 1. All difference
operators use the circular (periodic) boundary so the spatial and Fourier
formulations share a single adjoint pair.
"""

import numpy as np

from .errors import KernelTooLarge

REC601_WEIGHTS = (0.299, 0.587, 0.114)


def gradients(plane):
    """Circular forward differences of a plane, returned as (gx, gy).

    gx[i, j] = plane[i, (j+1) mod W] - plane[i, j], and gy analogously
    along rows, so each row of gx and each column of gy telescopes to zero.
    """
    p = np.asarray(plane, dtype=np.float64)
    gx = np.roll(p, -1, axis=1) - p
    gy = np.roll(p, -1, axis=0) - p
    return gx, gy


def convolve_circular(plane, kernel):
    """Circular convolution with the kernel centered on its middle tap.

    Direct shift-and-accumulate evaluation. The Fourier solvers are tested
    against this routine, so it deliberately stays FFT-free.
    """
    p = np.asarray(plane, dtype=np.float64)
    k = np.asarray(kernel, dtype=np.float64)
    kh, kw = k.shape
    if kh > p.shape[0] or kw > p.shape[1]:
        raise KernelTooLarge(f"kernel {k.shape} exceeds plane {p.shape}")
    ch, cw = kh // 2, kw // 2
    out = np.zeros_like(p)
    for a in range(kh):
        for b in range(kw):
            w = k[a, b]
            if w != 0.0:
                out += w * np.roll(p, (a - ch, b - cw), axis=(0, 1))
    return out


def luminance(image):
    """Rec. 601 luma of an RGB image; grayscale input passes through."""
    t = np.asarray(image, dtype=np.float64)
    if t.ndim == 2:
        return t
    if t.ndim == 3 and t.shape[2] == 1:
        return t[:, :, 0]
    if t.ndim == 3 and t.shape[2] == 3:
        r, g, b = REC601_WEIGHTS
        return r * t[:, :, 0] + g * t[:, :, 1] + b * t[:, :, 2]
    raise ValueError(f"expected HxW or HxWxC image with C in {{1,3}}, got {t.shape}")


def ensure_tensor(image):
    """View a plane or channel stack as H x W x C with C in {1, 3}."""
    a = np.asarray(image, dtype=np.float64)
    if a.ndim == 2:
        return a[:, :, None]
    if a.ndim == 3 and a.shape[2] in (1, 3):
        return a
    raise ValueError(f"expected HxW or HxWxC image with C in {{1,3}}, got {a.shape}")
