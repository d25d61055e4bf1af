"""Quantitative evaluation: PSNR, SSIM, and shift-invariant kernel similarity."""

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage
import scipy.signal

from .core import luminance
from .errors import DimensionMismatch, ImageTooSmall

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class QualityScore:
    psnr_db: float
    ssim: float


def quality(a, b, peak=1.0):
    """Both quality metrics of an image pair in one call."""
    return QualityScore(psnr_db=psnr(a, b, peak=peak), ssim=ssim(a, b, dynamic_range=peak))


def psnr(a, b, peak=1.0):
    """10 * log10(peak^2 / MSE) in dB; math.inf when the images are identical."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes differ: {x.shape} vs {y.shape}")
    if peak <= 0:
        raise ValueError(f"peak must be > 0, got {peak}")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(n, sigma):
    half = (n - 1) / 2.0
    x = np.arange(n) - half
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def _filter_valid(plane, window):
    r = len(window) // 2
    out = scipy.ndimage.correlate1d(plane, window, axis=0, mode="constant")
    out = scipy.ndimage.correlate1d(out, window, axis=1, mode="constant")
    return out[r:-r, r:-r]


def ssim(a, b, dynamic_range=1.0):
    """Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
    K2 = 0.03. RGB inputs are reduced to luminance first."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes differ: {x.shape} vs {y.shape}")
    x = luminance(x)
    y = luminance(y)
    if min(x.shape) < SSIM_WINDOW:
        raise ImageTooSmall(f"image {x.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    window = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * dynamic_range) ** 2
    c2 = (SSIM_K2 * dynamic_range) ** 2
    mu1 = _filter_valid(x, window)
    mu2 = _filter_valid(y, window)
    var1 = _filter_valid(x * x, window) - mu1 * mu1
    var2 = _filter_valid(y * y, window) - mu2 * mu2
    cov = _filter_valid(x * y, window) - mu1 * mu2
    ssim_map = ((2 * mu1 * mu2 + c1) * (2 * cov + c2)) / (
        (mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2)
    )
    return float(ssim_map.mean())


def kernel_similarity(k1, k2):
    """Maximum normalized cross-correlation over all integer translations.

    Blind deconvolution recovers kernels only up to a shift, so the score is
    1 for identical-up-to-shift kernels and falls toward 0 as the supports
    stop overlapping under every alignment.
    """
    a = np.asarray(k1, dtype=np.float64)
    b = np.asarray(k2, dtype=np.float64)
    denom = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denom == 0.0:
        return 0.0
    corr = scipy.signal.correlate(a, b, mode="full")
    return float(min(max(corr.max() / denom, 0.0), 1.0))
