"""Frequency-domain image deblurring with an FFT-ReLU sparsity prior.

Blind kernel estimation alternates latent-image estimation (FFT-ReLU plus
L0 gradient priors) with Fourier-domain PSF estimation; non-blind
restoration combines anisotropic-TV deconvolution, L0 restoration, and a
bilateral-filtered difference to suppress ringing.
"""

from .bench import BenchCase, BenchReport, SyntheticKernel, degrade, run_benchmark, synth_motion_kernel
from .blind import (
    BlindResult,
    DeblurParams,
    blind_deconvolve,
    estimate_psf,
    normalize_kernel,
    prune_isolated_noise,
    select_gradients,
    uniform_kernel,
)
from .core import convolve_circular, gradients, luminance
from .latent import estimate_latent, rectified_spectrum, threshold_gradients, threshold_spectrum, update_latent
from .metrics import QualityScore, kernel_similarity, psnr, quality, ssim
from .nonblind import RingingConfig, bilateral_filter, deblur_adm_aniso, l0_restoration, remove_ringing
from .spectral import fft2, ifft2, opt_fft_size, otf2psf, psf2otf, wrap_boundary

__version__ = "0.1.0"

__all__ = [
    "BenchCase",
    "BenchReport",
    "BlindResult",
    "DeblurParams",
    "QualityScore",
    "RingingConfig",
    "SyntheticKernel",
    "bilateral_filter",
    "blind_deconvolve",
    "convolve_circular",
    "deblur_adm_aniso",
    "degrade",
    "estimate_latent",
    "estimate_psf",
    "fft2",
    "gradients",
    "ifft2",
    "kernel_similarity",
    "l0_restoration",
    "luminance",
    "normalize_kernel",
    "opt_fft_size",
    "otf2psf",
    "prune_isolated_noise",
    "psf2otf",
    "psnr",
    "quality",
    "rectified_spectrum",
    "remove_ringing",
    "run_benchmark",
    "select_gradients",
    "ssim",
    "synth_motion_kernel",
    "threshold_gradients",
    "threshold_spectrum",
    "uniform_kernel",
    "update_latent",
    "wrap_boundary",
]
