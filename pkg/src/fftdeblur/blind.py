"""Blind deconvolution: alternating latent-image and kernel estimation.

Each round estimates the latent sharp image under the FFT-ReLU and L0
gradient priors, selects the strong gradients, solves a Tikhonov-regularized
least squares for the kernel in the Fourier domain, prunes isolated kernel
components, renormalizes, and decays the prior weights so later rounds
recover finer detail.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.ndimage

from . import spectral
from .core import gradients
from .errors import AllZeroGradients, DegenerateKernel, EmptyKernel
from .latent import estimate_latent

_THRESHOLD_FLOOR = 1e-6


@dataclass(frozen=True)
class DeblurParams:
    """Every scalar the pipeline consumes. Defaults assume [0, 1] intensities.

    lambda_ftr and lambda_grad are the starting prior weights of the blind
    schedule; dividing them by `decay` each round makes the single-scale
    alternation coarse-to-fine, ending near the fine-detail scale after
    xk_iter rounds. alpha_max and beta_max default to 1e5x their prior
    weights; kappa > 1 and decay > 1 guarantee every loop terminates.
    """

    lambda_ftr: float = 4e-2
    lambda_grad: float = 4e-2
    lambda_tv: float = 4e-3
    lambda_l0: float = 2e-3
    weight_ring: float = 1.0
    kappa: float = 2.0
    xk_iter: int = 5
    threshold: float = 0.1
    kernel_size: int = 15
    psf_reg: float = 1e-1
    alpha_max: float = None
    beta_max: float = None
    mu: float = 1.0
    decay: float = 2.0

    def __post_init__(self):
        if self.alpha_max is None:
            object.__setattr__(self, "alpha_max", 1e5 * self.lambda_ftr)
        if self.beta_max is None:
            object.__setattr__(self, "beta_max", 1e5 * self.lambda_grad)
        self.validate()

    def validate(self):
        """Raise ValueError naming the offending field."""
        for name in ("lambda_ftr", "lambda_grad", "lambda_tv", "lambda_l0",
                     "psf_reg", "mu", "alpha_max", "beta_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.weight_ring < 0:
            raise ValueError(f"weight_ring must be >= 0, got {self.weight_ring}")
        if not self.kappa > 1:
            raise ValueError(f"kappa must be > 1, got {self.kappa}")
        if not self.decay > 1:
            raise ValueError(f"decay must be > 1, got {self.decay}")
        if int(self.xk_iter) != self.xk_iter or self.xk_iter < 0:
            raise ValueError(f"xk_iter must be a non-negative integer, got {self.xk_iter}")
        if self.threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")
        ks = self.kernel_size
        if int(ks) != ks or ks < 1 or ks % 2 == 0:
            raise ValueError(f"kernel_size must be odd and >= 1, got {ks}")


@dataclass
class BlindResult:
    """Outcome of a blind solve: final kernel and latent image, plus the
    per-round data-fit residual and prior-weight schedule for diagnostics."""

    kernel: np.ndarray
    latent: np.ndarray
    iterations_run: int
    per_iteration_residual: list = field(default_factory=list)
    lambda_schedule: list = field(default_factory=list)


def uniform_kernel(size):
    """Flat normalized kernel, the default blind initialization."""
    if size < 1 or size % 2 == 0:
        raise ValueError(f"size must be odd and >= 1, got {size}")
    return np.full((size, size), 1.0 / (size * size))


def select_gradients(latent, kernel_size, threshold):
    """Keep only gradients strong enough to drive PSF estimation.

    Pixels whose magnitude falls below the threshold are zeroed jointly.
    If fewer than 2 * kernel_size^2 pixels survive, the threshold halves
    and selection repeats; once it drops below 1e-6 all gradients are kept.
    Returns ((gx, gy), next_threshold) with next_threshold = final / 1.1.
    """
    gx, gy = gradients(latent)
    mag = np.hypot(gx, gy)
    need = 2 * kernel_size * kernel_size
    t = float(threshold)
    while t >= _THRESHOLD_FLOOR:
        keep = mag >= t
        if np.count_nonzero(keep) >= need:
            return (np.where(keep, gx, 0.0), np.where(keep, gy, 0.0)), t / 1.1
        t /= 2.0
    return (gx, gy), t / 1.1


def estimate_psf(bx, by, sx, sy, reg, size):
    """Tikhonov-regularized least squares for the kernel, solved per frequency bin.

    Minimizes |sx ox k - bx|^2 + |sy ox k - by|^2 + reg * |k|^2 over a
    full-plane kernel, crops the solution to size x size around its center
    tap, and clips negatives. No normalization is applied here.
    """
    sx = np.asarray(sx, dtype=np.float64)
    sy = np.asarray(sy, dtype=np.float64)
    bx = np.asarray(bx, dtype=np.float64)
    by = np.asarray(by, dtype=np.float64)
    if not (sx.shape == sy.shape == bx.shape == by.shape):
        raise ValueError("gradient planes must share dimensions")
    if not (sx.any() or sy.any()):
        raise AllZeroGradients("latent gradients are identically zero")
    fsx = spectral.fft2(sx)
    fsy = spectral.fft2(sy)
    num = np.conj(fsx) * spectral.fft2(bx) + np.conj(fsy) * spectral.fft2(by)
    den = np.abs(fsx) ** 2 + np.abs(fsy) ** 2 + reg
    k = spectral.otf2psf(num / den, size)
    return np.maximum(k, 0.0)


def prune_isolated_noise(kernel):
    """Zero every 8-connected component of the positive support whose mass
    is under 10% of the heaviest component's. Does not normalize."""
    k = np.asarray(kernel, dtype=np.float64)
    positive = k > 0
    if not positive.any():
        raise EmptyKernel("kernel has no positive taps")
    labels, count = scipy.ndimage.label(positive, structure=np.ones((3, 3), dtype=int))
    index = np.arange(1, count + 1)
    masses = scipy.ndimage.sum_labels(k, labels, index=index)
    kept = index[masses >= 0.1 * masses.max()]
    return np.where(np.isin(labels, kept), k, 0.0)


def normalize_kernel(kernel):
    """Clip negatives and rescale to unit mass."""
    k = np.maximum(np.asarray(kernel, dtype=np.float64), 0.0)
    total = k.sum()
    if total <= 0:
        raise EmptyKernel("kernel mass is zero after clipping")
    return k / total


def _data_residual(latent, kernel, blurred):
    otf = spectral.psf2otf(kernel, blurred.shape)
    predicted = spectral.ifft2(spectral.fft2(latent) * otf).real
    return float(np.sqrt(np.mean((predicted - blurred) ** 2)))


def center_kernel(kernel, subpixel=False):
    """Shift the kernel so its center of mass lands on the middle tap.

    Alternating blind estimation only pins the kernel up to a translation;
    re-centering fixes that gauge so the restored image is not shifted
    against the observation. By default the shift is whole taps (lossless
    for compact kernels); with subpixel=True the kernel is bilinearly
    resampled onto the exactly centered grid, which slightly smooths it, so
    it is applied only to the final estimate. Mass pushed past the window
    is dropped and the result renormalized.
    """
    k = np.asarray(kernel, dtype=np.float64)
    total = k.sum()
    if total <= 0:
        raise EmptyKernel("cannot center a kernel without mass")
    h, w = k.shape
    ci = float(np.arange(h) @ k.sum(axis=1)) / total
    cj = float(np.arange(w) @ k.sum(axis=0)) / total
    si = (h - 1) / 2.0 - ci
    sj = (w - 1) / 2.0 - cj
    if not subpixel:
        si, sj = round(si), round(sj)
        if si == 0 and sj == 0:
            return k
        out = np.zeros_like(k)
        out[max(0, si) : min(h, h + si), max(0, sj) : min(w, w + sj)] = k[
            max(0, -si) : min(h, h - si), max(0, -sj) : min(w, w - sj)
        ]
        return normalize_kernel(out)
    ii, jj = np.meshgrid(np.arange(h) - si, np.arange(w) - sj, indexing="ij")
    i0 = np.floor(ii).astype(int)
    j0 = np.floor(jj).astype(int)
    fi = ii - i0
    fj = jj - j0
    out = np.zeros_like(k)
    corners = ((0, 0, (1 - fi) * (1 - fj)), (0, 1, (1 - fi) * fj),
               (1, 0, fi * (1 - fj)), (1, 1, fi * fj))
    for di, dj, weight in corners:
        src_i = i0 + di
        src_j = j0 + dj
        valid = (src_i >= 0) & (src_i < h) & (src_j >= 0) & (src_j < w)
        out[valid] += weight[valid] * k[np.clip(src_i, 0, h - 1), np.clip(src_j, 0, w - 1)][valid]
    return normalize_kernel(out)


def blind_deconvolve(blurred, kernel0, params: DeblurParams):
    """Alternate latent estimation and kernel estimation for xk_iter rounds.

    The blurred-image gradients feeding the kernel solve are taken from the
    wrap-padded image and cropped back, so the circular wrap seam does not
    inject spurious edges. Raises DegenerateKernel when pruning or gradient
    selection leaves nothing to estimate from (retry with a larger psf_reg).
    """
    b = np.asarray(blurred, dtype=np.float64)
    k = np.asarray(kernel0, dtype=np.float64)
    h, w = b.shape
    ks = params.kernel_size
    if k.shape != (ks, ks):
        raise ValueError(f"kernel0 shape {k.shape} does not match kernel_size {ks}")
    padded = spectral.wrap_boundary(
        b, spectral.opt_fft_size(h + ks - 1), spectral.opt_fft_size(w + ks - 1)
    )
    pgx, pgy = gradients(padded)
    bx, by = pgx[:h, :w], pgy[:h, :w]

    lam_ftr = params.lambda_ftr
    lam_grad = params.lambda_grad
    thresh = params.threshold
    latent = b
    residuals = []
    schedule = []
    for _ in range(int(params.xk_iter)):
        schedule.append((lam_ftr, lam_grad))
        latent = estimate_latent(b, k, lam_ftr, lam_grad, params.kappa, params)
        (sx, sy), thresh = select_gradients(latent, ks, thresh)
        try:
            k = estimate_psf(bx, by, sx, sy, params.psf_reg, ks)
            k = prune_isolated_noise(k)
            k = center_kernel(normalize_kernel(k))
        except (EmptyKernel, AllZeroGradients) as exc:
            raise DegenerateKernel(str(exc)) from exc
        residuals.append(_data_residual(latent, k, b))
        lam_ftr /= params.decay
        lam_grad /= params.decay
    if residuals:
        k = center_kernel(k, subpixel=True)
    return BlindResult(
        kernel=k,
        latent=latent,
        iterations_run=len(residuals),
        per_iteration_residual=residuals,
        lambda_schedule=schedule,
    )
