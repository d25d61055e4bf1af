"""Independent slow-but-sure oracles shared by the unit and acceptance tests.

Everything here deliberately avoids the package's solver code paths: dense
linear algebra instead of per-bin frequency division, projected-dual prox
evaluations instead of closed-form splitting, double loops instead of
vectorized shifts.
"""

import numpy as np

from fftdeblur.core import convolve_circular, gradients


def dense_psf_oracle(bx, by, sx, sy, reg, size):
    """Explicit circulant least squares for the kernel estimation problem.

    Builds the full N x N normal equations of
    |sx (*) k - bx|^2 + |sy (*) k - by|^2 + reg |k|^2 over a whole-plane
    kernel, solves densely, then applies the same center-shift crop and
    negative clip as the Fourier-domain estimator.
    """
    h, w = sx.shape
    n = h * w
    a1 = np.empty((n, n))
    a2 = np.empty((n, n))
    col = 0
    for p in range(h):
        for q in range(w):
            a1[:, col] = np.roll(sx, (p, q), axis=(0, 1)).ravel()
            a2[:, col] = np.roll(sy, (p, q), axis=(0, 1)).ravel()
            col += 1
    lhs = a1.T @ a1 + a2.T @ a2 + reg * np.eye(n)
    rhs = a1.T @ bx.ravel() + a2.T @ by.ravel()
    full = np.linalg.solve(lhs, rhs).reshape(h, w)
    full = np.roll(full, (size // 2, size // 2), axis=(0, 1))
    return np.maximum(full[:size, :size], 0.0)


def tv_objective_oracle(x, y, kernel, lambda_tv):
    """Anisotropic TV deconvolution objective via the spatial conv path."""
    residual = convolve_circular(x, kernel) - y
    gx, gy = gradients(x)
    return 0.5 * float(np.sum(residual**2)) + lambda_tv * float(
        np.sum(np.abs(gx)) + np.sum(np.abs(gy))
    )


def prox_tv_aniso(v, weight, iters=80, state=None):
    """Prox of weight * (|Dx z|_1 + |Dy z|_1) by projected dual ascent."""
    if state is None:
        px = np.zeros_like(v)
        py = np.zeros_like(v)
    else:
        px, py = state
    step = 1.0 / 8.0
    for _ in range(iters):
        z = v - (np.roll(px, 1, axis=1) - px) - (np.roll(py, 1, axis=0) - py)
        gx, gy = gradients(z)
        px = np.clip(px + step * gx, -weight, weight)
        py = np.clip(py + step * gy, -weight, weight)
    z = v - (np.roll(px, 1, axis=1) - px) - (np.roll(py, 1, axis=0) - py)
    return z, (px, py)


def tv_deconv_oracle(y, kernel, lambda_tv, outer=400, inner=80):
    """Accelerated proximal gradient on the TV deconvolution objective.

    The data gradient is evaluated with numpy's FFT (exact for circular
    convolution); the TV prox runs a warm-started projected dual ascent.
    Slow but provably convergent on this convex objective.
    """
    otf_kernel = np.zeros_like(y)
    kh, kw = kernel.shape
    otf_kernel[:kh, :kw] = kernel
    otf_kernel = np.roll(otf_kernel, (-(kh // 2), -(kw // 2)), axis=(0, 1))
    otf = np.fft.fft2(otf_kernel)
    fy = np.fft.fft2(y)
    lipschitz = float(np.max(np.abs(otf)) ** 2)
    step = 1.0 / max(lipschitz, 1e-12)
    x = y.copy()
    momentum = x.copy()
    t_k = 1.0
    state = None
    for _ in range(outer):
        grad = np.fft.ifft2(np.conj(otf) * (otf * np.fft.fft2(momentum) - fy)).real
        x_next, state = prox_tv_aniso(momentum - step * grad, step * lambda_tv, inner, state)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k)) / 2.0
        momentum = x_next + ((t_k - 1.0) / t_next) * (x_next - x)
        x, t_k = x_next, t_next
    return x
