"""FFT plumbing: transform sizes, periodic padding, PSF/OTF conversion.

Convention: unnormalized forward transform, 1/(H*W) on the inverse (the
numpy/scipy default). Every module exchanging frequency planes relies on
this; do not mix in orthonormal transforms.
"""

import os

import numpy as np
import scipy.fft

from .errors import KernelTooLarge, PadTooSmall

_SMOOTH_PRIMES = (2, 3, 5, 7)


def fft_workers():
    """Worker count for the transforms; FFTDEBLUR_THREADS caps it (0 = auto)."""
    raw = os.environ.get("FFTDEBLUR_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        return os.cpu_count() or 1
    return n


def fft2(plane):
    """Unnormalized forward 2-D FFT."""
    return scipy.fft.fft2(plane, workers=fft_workers())


def ifft2(freq):
    """Inverse 2-D FFT with 1/(H*W) scaling."""
    return scipy.fft.ifft2(freq, workers=fft_workers())


def _is_smooth(m):
    for p in _SMOOTH_PRIMES:
        while m % p == 0:
            m //= p
    return m == 1


def opt_fft_size(n):
    """Smallest m >= n whose prime factors all lie in {2, 3, 5, 7}."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    m = int(n)
    while not _is_smooth(m):
        m += 1
    return m


def wrap_boundary(plane, padded_h, padded_w):
    """Pad a plane so it becomes close to periodic.

    The original plane occupies the top-left block bit-exactly; the pad
    strips blend linearly between the two opposing image edges (right strip
    row-wise, bottom region column-wise over the already-widened plane), so
    every wrap seam jump is no larger than the jumps inside the strips.
    """
    p = np.asarray(plane, dtype=np.float64)
    h, w = p.shape
    if padded_h < h or padded_w < w:
        raise PadTooSmall(f"padded size ({padded_h}, {padded_w}) < plane ({h}, {w})")
    out = np.empty((padded_h, padded_w), dtype=np.float64)
    out[:h, :w] = p
    pw = padded_w - w
    if pw:
        t = np.arange(1, pw + 1, dtype=np.float64) / (pw + 1)
        out[:h, w:] = p[:, w - 1 : w] + t[None, :] * (p[:, 0:1] - p[:, w - 1 : w])
    ph = padded_h - h
    if ph:
        top = out[h - 1 : h, :]
        bottom = out[0:1, :]
        t = (np.arange(1, ph + 1, dtype=np.float64) / (ph + 1))[:, None]
        out[h:, :] = top + t * (bottom - top)
    return out


def psf2otf(kernel, shape):
    """Zero-pad the kernel to `shape`, shift its center tap to (0, 0), FFT."""
    k = np.asarray(kernel, dtype=np.float64)
    kh, kw = k.shape
    h, w = shape
    if kh > h or kw > w:
        raise KernelTooLarge(f"kernel {k.shape} exceeds transform shape {shape}")
    padded = np.zeros((h, w), dtype=np.float64)
    padded[:kh, :kw] = k
    padded = np.roll(padded, (-(kh // 2), -(kw // 2)), axis=(0, 1))
    return fft2(padded)


def otf2psf(otf, size):
    """Inverse of psf2otf: inverse FFT, undo the center shift, crop size x size."""
    f = np.asarray(otf)
    h, w = f.shape
    if size > h or size > w:
        raise KernelTooLarge(f"crop size {size} exceeds transform shape {(h, w)}")
    if size < 1 or size % 2 == 0:
        raise ValueError(f"size must be odd and >= 1, got {size}")
    spatial = ifft2(f).real
    spatial = np.roll(spatial, (size // 2, size // 2), axis=(0, 1))
    return spatial[:size, :size].copy()


def gradient_otfs(shape):
    """OTFs of the circular forward-difference operators.

    Returns (dx, dy) with shapes (1, W) and (H, 1); they broadcast against
    full frequency planes. fft2(gx) == dx * fft2(plane) exactly for the
    gradients of `core.gradients`.
    """
    h, w = shape
    dx = np.exp(2j * np.pi * np.arange(w) / w) - 1.0
    dy = np.exp(2j * np.pi * np.arange(h) / h) - 1.0
    return dx[None, :], dy[:, None]
