"""Blind estimation: gradient selection, PSF least squares, kernel cleanup,
and the full alternating loop."""

import numpy as np
import pytest
import scipy.ndimage

import fftdeblur.blind as blind_mod
from fftdeblur.blind import (
    DeblurParams,
    blind_deconvolve,
    center_kernel,
    estimate_psf,
    normalize_kernel,
    prune_isolated_noise,
    select_gradients,
    uniform_kernel,
)
from fftdeblur.core import convolve_circular, gradients
from fftdeblur.errors import AllZeroGradients, DegenerateKernel, EmptyKernel
from fftdeblur.metrics import kernel_similarity
from oracle_helpers import dense_psf_oracle


def text_like_image(size=128, seed=11):
    """High-contrast glyph-ish blocks and strokes on a dark background."""
    rng = np.random.default_rng(seed)
    img = np.full((size, size), 0.08)
    for _ in range(40):
        i, j = rng.integers(4, size - 12, size=2)
        h, w = rng.integers(2, 10, size=2)
        img[i : i + h, j : j + w] = rng.uniform(0.7, 1.0)
    for _ in range(12):
        i = rng.integers(4, size - 4)
        j, w = rng.integers(4, size - 24), rng.integers(8, 20)
        img[i, j : j + w] = rng.uniform(0.7, 1.0)
    return img


def test_params_validation_messages():
    with pytest.raises(ValueError, match="kernel_size"):
        DeblurParams(kernel_size=14)
    with pytest.raises(ValueError, match="kappa"):
        DeblurParams(kappa=1.0)
    with pytest.raises(ValueError, match="decay"):
        DeblurParams(decay=0.9)
    with pytest.raises(ValueError, match="lambda_ftr"):
        DeblurParams(lambda_ftr=0.0)
    p = DeblurParams(lambda_ftr=2e-3)
    assert p.alpha_max == pytest.approx(1e5 * 2e-3)


def test_select_gradients_zero_threshold_keeps_everything():
    rng = np.random.default_rng(0)
    plane = rng.random((16, 16))
    gx, gy = gradients(plane)
    (sx, sy), thr = select_gradients(plane, 3, 0.0)
    assert np.array_equal(sx, gx)
    assert np.array_equal(sy, gy)
    assert thr == 0.0


def test_select_gradients_constant_plane_floors_threshold():
    (sx, sy), thr = select_gradients(np.full((12, 12), 0.5), 3, 0.05)
    assert np.all(sx == 0.0)
    assert np.all(sy == 0.0)
    # threshold halves until it undershoots 1e-6, then relaxes by 1.1
    t = 0.05
    while t >= 1e-6:
        t /= 2.0
    assert thr == pytest.approx(t / 1.1)


def test_select_gradients_step_edge():
    plane = np.zeros((16, 16))
    plane[:, 8:] = 1.0
    (sx, sy), thr = select_gradients(plane, 2, 0.5)
    mag = np.hypot(*gradients(plane))
    assert np.count_nonzero(sx) == np.count_nonzero(mag >= 0.5) == 32
    assert set(np.nonzero(sx)[1]) == {7, 15}
    assert thr == pytest.approx(0.5 / 1.1)


def test_select_gradients_halves_until_enough_survive():
    rng = np.random.default_rng(1)
    plane = rng.random((32, 32)) * 0.01  # all gradients well below 0.5
    (sx, sy), thr = select_gradients(plane, 3, 0.5)
    assert np.count_nonzero(np.hypot(sx, sy)) >= 2 * 9
    assert thr < 0.5


def test_estimate_psf_identity_blur():
    rng = np.random.default_rng(2)
    plane = scipy.ndimage.uniform_filter(rng.random((32, 32)), 3, mode="wrap")
    bx, by = gradients(plane)
    k = estimate_psf(bx, by, bx, by, 1e-3, 5)
    k = k / k.sum()
    assert k[2, 2] >= 0.95


def test_estimate_psf_recovers_horizontal_box():
    rng = np.random.default_rng(3)
    plane = scipy.ndimage.uniform_filter(rng.random((32, 32)), 3, mode="wrap")
    truth = np.zeros((3, 3))
    truth[1, :] = 1.0 / 3.0
    blurred = convolve_circular(plane, truth)
    sx, sy = gradients(plane)
    bx, by = gradients(blurred)
    k = estimate_psf(bx, by, sx, sy, 1e-4, 3)
    assert np.sqrt(np.mean((k - truth) ** 2)) <= 1e-2


def test_estimate_psf_rejects_zero_gradients():
    zeros = np.zeros((8, 8))
    with pytest.raises(AllZeroGradients):
        estimate_psf(zeros, zeros, zeros, zeros, 1e-3, 3)


def test_estimate_psf_matches_dense_circulant_oracle():
    rng = np.random.default_rng(4)
    for seed in range(20):
        r = np.random.default_rng(seed)
        sx, sy = r.standard_normal((16, 16)), r.standard_normal((16, 16))
        bx, by = r.standard_normal((16, 16)), r.standard_normal((16, 16))
        reg = 10.0 ** r.uniform(-4, -1)
        got = estimate_psf(bx, by, sx, sy, reg, 3)
        want = dense_psf_oracle(bx, by, sx, sy, reg, 3)
        assert np.sqrt(np.mean((got - want) ** 2)) <= 1e-6


def test_estimate_psf_scale_equivariance():
    rng = np.random.default_rng(5)
    sx, sy = rng.standard_normal((16, 16)), rng.standard_normal((16, 16))
    bx, by = rng.standard_normal((16, 16)), rng.standard_normal((16, 16))
    c = 3.7
    k1 = estimate_psf(bx, by, sx, sy, 1e-3, 5)
    k2 = estimate_psf(c * bx, c * by, c * sx, c * sy, 1e-3 * c * c, 5)
    assert np.max(np.abs(k1 - k2)) <= 1e-10


def label_oracle(kernel):
    """Direct 8-connected component masses by flood fill."""
    positive = kernel > 0
    seen = np.zeros_like(positive, dtype=bool)
    masses = []
    h, w = kernel.shape
    for i in range(h):
        for j in range(w):
            if positive[i, j] and not seen[i, j]:
                stack, mass = [(i, j)], 0.0
                seen[i, j] = True
                while stack:
                    a, b = stack.pop()
                    mass += kernel[a, b]
                    for da in (-1, 0, 1):
                        for db in (-1, 0, 1):
                            na, nb = a + da, b + db
                            if 0 <= na < h and 0 <= nb < w and positive[na, nb] and not seen[na, nb]:
                                seen[na, nb] = True
                                stack.append((na, nb))
                masses.append(mass)
    return masses


def test_prune_keeps_single_blob():
    x = np.arange(7) - 3.0
    blob = np.exp(-np.add.outer(x**2, x**2) / 4.0)
    blob /= blob.sum()
    assert np.array_equal(prune_isolated_noise(blob), blob)


def test_prune_drops_light_corner_tap():
    k = np.zeros((9, 9))
    k[4, 4] = 0.95
    k[0, 0] = 0.05
    masses = sorted(label_oracle(k))
    assert masses == [0.05, 0.95] and 0.05 < 0.1 * 0.95
    out = prune_isolated_noise(k)
    assert out[0, 0] == 0.0
    assert out[4, 4] == 0.95


def test_prune_keeps_two_equal_blobs():
    k = np.zeros((9, 9))
    k[1, 1] = 0.5
    k[7, 7] = 0.5
    assert np.array_equal(prune_isolated_noise(k), k)


def test_prune_rejects_empty():
    with pytest.raises(EmptyKernel):
        prune_isolated_noise(np.zeros((5, 5)))


def test_prune_matches_flood_fill_oracle():
    rng = np.random.default_rng(6)
    for _ in range(20):
        k = np.where(rng.random((11, 11)) < 0.25, rng.random((11, 11)), 0.0)
        if not (k > 0).any():
            continue
        out = prune_isolated_noise(k)
        masses = label_oracle(k)
        biggest = max(masses)
        kept_mass = sum(m for m in masses if m >= 0.1 * biggest)
        assert out.sum() == pytest.approx(kept_mass, abs=1e-12)


def test_normalize_kernel():
    assert np.allclose(normalize_kernel(np.full((3, 3), 2.0)), 1.0 / 9.0)
    out = normalize_kernel(np.array([[4.0, -1.0], [0.0, 0.0]]))
    assert np.allclose(out, [[1.0, 0.0], [0.0, 0.0]])
    rng = np.random.default_rng(7)
    k = rng.random((5, 5))
    assert abs(normalize_kernel(k).sum() - 1.0) <= 1e-12
    with pytest.raises(EmptyKernel):
        normalize_kernel(np.full((3, 3), -1.0))


def test_center_kernel_moves_centroid_to_middle():
    k = np.zeros((7, 7))
    k[1, 2] = 1.0
    out = center_kernel(k)
    assert out[3, 3] == 1.0
    shifted = np.zeros((7, 7))
    shifted[2, 2] = 0.5
    shifted[2, 3] = 0.5
    out = center_kernel(shifted, subpixel=True)
    ci = float(np.arange(7) @ out.sum(axis=1))
    cj = float(np.arange(7) @ out.sum(axis=0))
    assert ci == pytest.approx(3.0, abs=1e-9)
    assert cj == pytest.approx(3.0, abs=1e-9)


def test_blind_deconvolve_zero_iterations_is_identity():
    rng = np.random.default_rng(8)
    b = rng.random((32, 32))
    k0 = uniform_kernel(5)
    result = blind_deconvolve(b, k0, DeblurParams(kernel_size=5, xk_iter=0))
    assert result.iterations_run == 0
    assert result.per_iteration_residual == []
    assert np.array_equal(result.kernel, k0)
    assert np.array_equal(result.latent, b)


def test_blind_deconvolve_sharp_input_yields_near_delta():
    # sharp edge-rich input blurred by a delta: there is no blur to explain
    img = text_like_image(96)
    delta = np.zeros((5, 5))
    delta[2, 2] = 1.0
    blurred = convolve_circular(img, delta)
    params = DeblurParams(kernel_size=5, xk_iter=3)
    result = blind_deconvolve(blurred, delta, params)
    assert result.kernel[2, 2] >= 0.9


def test_blind_deconvolve_recovers_horizontal_line_blur():
    img = text_like_image(192)
    truth = np.zeros((15, 15))
    truth[7, 3:12] = 1.0 / 9.0
    blurred = convolve_circular(img, truth)
    result = blind_deconvolve(blurred, uniform_kernel(15), DeblurParams())
    assert kernel_similarity(result.kernel, truth) >= 0.6


def test_blind_deconvolve_kernel_invariants_every_iteration(monkeypatch):
    seen = []
    original = blind_mod.estimate_latent

    def spy(blurred, kernel, *args, **kwargs):
        seen.append(np.asarray(kernel))
        return original(blurred, kernel, *args, **kwargs)

    monkeypatch.setattr(blind_mod, "estimate_latent", spy)
    img = text_like_image(64)
    blurred = convolve_circular(img, normalize_kernel(uniform_kernel(5) + np.eye(5)))
    params = DeblurParams(kernel_size=5, xk_iter=4)
    result = blind_deconvolve(blurred, uniform_kernel(5), params)
    for k in seen[1:] + [result.kernel]:
        assert np.all(k >= 0.0)
        assert abs(k.sum() - 1.0) <= 1e-12
    assert result.iterations_run == 4
    assert len(result.per_iteration_residual) == 4


def test_blind_deconvolve_lambda_schedule_decays_exactly():
    img = text_like_image(64)
    params = DeblurParams(kernel_size=5, xk_iter=4)
    result = blind_deconvolve(img, uniform_kernel(5), params)
    schedule = result.lambda_schedule
    assert len(schedule) == 4
    assert schedule[0] == (params.lambda_ftr, params.lambda_grad)
    for (f0, g0), (f1, g1) in zip(schedule, schedule[1:]):
        assert f1 == pytest.approx(f0 / params.decay, rel=1e-12)
        assert g1 == pytest.approx(g0 / params.decay, rel=1e-12)
        assert f1 < f0 and g1 < g0


def test_blind_deconvolve_collapse_raises_degenerate():
    # a constant image gives the selector nothing; the PSF solve sees all
    # zero gradients and the collapse surfaces as DegenerateKernel
    b = np.full((32, 32), 0.5)
    with pytest.raises(DegenerateKernel):
        blind_deconvolve(b, uniform_kernel(5), DeblurParams(kernel_size=5, xk_iter=2))
