"""Latent sharp-image estimation under the FFT-ReLU sparsity prior.

The estimator couples two half-quadratic auxiliaries: a hard-thresholded
copy of the rectified forward spectrum (the FFT-ReLU prior) and an
L0-thresholded gradient field. Each pass re-solves a frequency-domain
quadratic in closed form while the penalty weights alpha and beta grow by a
factor kappa, so early passes fix coarse structure and late passes detail.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from . import spectral
from .core import gradients
from .errors import NonFiniteState

if TYPE_CHECKING:
    from .blind import DeblurParams

_DENOM_FLOOR = 1e-12


def rectified_spectrum(plane):
    """Non-negative part of the real component of the forward FFT."""
    return np.maximum(spectral.fft2(plane).real, 0.0)


def threshold_spectrum(spec, mu, alpha, weight):
    """Hard threshold of the rectified spectrum: keep bins with mu*s^2 >= weight/alpha."""
    spec = np.asarray(spec, dtype=np.float64)
    keep = mu * spec * spec >= weight / alpha
    return np.where(keep, spec, 0.0)


def threshold_gradients(plane, weight, beta):
    """L0 auxiliary for the gradient field.

    The pair (gx, gy) is kept where gx^2 + gy^2 >= weight / beta and zeroed
    jointly otherwise.
    """
    gx, gy = gradients(plane)
    keep = gx * gx + gy * gy >= weight / beta
    return np.where(keep, gx, 0.0), np.where(keep, gy, 0.0)


def update_latent(blurred, kernel, grads, spec_target, alpha, beta, mu, active=None):
    """Closed-form minimizer of the quadratic surrogate

        |S ox k - B|^2 + beta * |grad S - g|^2
            + (alpha * mu / N) * sum_bins R * (Re F(S) - M)^2

    where M is the thresholded rectified-spectrum target and R marks the
    bins the prior is active on: the positive support of `active` when
    given (the rectified spectrum the target was thresholded from), else of
    M itself. The prior pins only the real part of the spectrum; imaginary
    parts see just the data and gradient terms. Denominators are floored at
    1e-12 against kernels with spectral nulls.
    """
    b = np.asarray(blurred, dtype=np.float64)
    gx, gy = grads
    otf = spectral.psf2otf(kernel, b.shape)
    dx, dy = spectral.gradient_otfs(b.shape)
    num = np.conj(otf) * spectral.fft2(b) + beta * (
        np.conj(dx) * spectral.fft2(gx) + np.conj(dy) * spectral.fft2(gy)
    )
    den = np.abs(otf) ** 2 + beta * (np.abs(dx) ** 2 + np.abs(dy) ** 2)
    support = spec_target if active is None else active
    r = support > 0.0
    den_re = np.maximum(den + alpha * mu * r, _DENOM_FLOOR)
    den_im = np.maximum(den, _DENOM_FLOOR)
    z = (num.real + alpha * mu * spec_target) / den_re + 1j * (num.imag / den_im)
    s = spectral.ifft2(z).real
    if not np.all(np.isfinite(s)):
        raise NonFiniteState("latent update produced non-finite values")
    return s


def estimate_latent(blurred, kernel, lambda_ftr, lambda_grad, kappa, params: "DeblurParams"):
    """One latent-image estimation under the FFT-ReLU and L0 gradient priors.

    Pads the observation to near-periodic 7-smooth dimensions, runs the
    nested continuation (outer loop on alpha for the spectrum prior, inner
    loop on beta for the gradient prior, both growing by kappa), and crops
    back to the original size.
    """
    b = np.asarray(blurred, dtype=np.float64)
    h, w = b.shape
    kh, kw = np.asarray(kernel).shape
    pad_h = spectral.opt_fft_size(h + kh - 1)
    pad_w = spectral.opt_fft_size(w + kw - 1)
    b_pad = spectral.wrap_boundary(b, pad_h, pad_w)
    s = b_pad
    alpha = 2.0 * lambda_ftr
    while alpha < params.alpha_max:
        spec = rectified_spectrum(s)
        target = threshold_spectrum(spec, params.mu, alpha, lambda_ftr)
        beta = 2.0 * lambda_grad
        while beta < params.beta_max:
            g = threshold_gradients(s, lambda_grad, beta)
            s = update_latent(b_pad, kernel, g, target, alpha, beta, params.mu, active=spec)
            beta *= kappa
        alpha *= kappa
    return s[:h, :w].copy()
