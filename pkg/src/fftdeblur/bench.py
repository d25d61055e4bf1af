"""Synthetic degradation generator and benchmark harness.

Cases degrade a user-supplied sharp image with a (synthetic or file-backed)
kernel plus seeded Gaussian noise, restore it blind or non-blind, and score
the result. Timing covers the restoration stage only; memory is the process
peak RSS, since this CPU artifact has no device memory to meter.
"""

import csv
import io
import json
import resource
import time
from dataclasses import dataclass, field

import numpy as np

from .blind import DeblurParams, blind_deconvolve, uniform_kernel
from .core import convolve_circular, ensure_tensor, luminance
from .errors import FftDeblurError
from .imgio import atomic_write_bytes, load_image, load_kernel
from .metrics import kernel_similarity, psnr, ssim
from .nonblind import RingingConfig, remove_ringing

CSV_HEADER = [
    "case_id",
    "psnr_blurred",
    "psnr_restored",
    "ssim_blurred",
    "ssim_restored",
    "kernel_sim",
    "wall_seconds",
    "peak_rss_bytes",
]

_AGGREGATE_FIELDS = CSV_HEADER[1:]


@dataclass(frozen=True)
class SyntheticKernel:
    size: int
    steps: int
    seed: int


@dataclass(frozen=True)
class BenchCase:
    """One benchmark unit; identical values produce bit-identical degradations."""

    sharp_path: str
    kernel_spec: object  # SyntheticKernel or a file path
    noise_sigma: float = 0.01
    seed: int = 0
    case_id: str = ""


@dataclass
class BenchRow:
    case_id: str
    psnr_blurred: float = None
    psnr_restored: float = None
    ssim_blurred: float = None
    ssim_restored: float = None
    kernel_sim: float = None
    wall_seconds: float = None
    peak_rss_bytes: int = None
    error: str = None


@dataclass
class BenchReport:
    mode: str
    rows: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)


def synth_motion_kernel(size, steps, seed):
    """Seeded camera-shake kernel: a random-walk trajectory of unit moves,
    rasterized with bilinear sub-pixel splats and normalized.

    The trajectory is recentered on its mean before splatting, so the
    kernel's center of mass sits on the middle tap (bilinear splats
    preserve first moments) and blurring with it causes no net shift.
    """
    if size < 3 or size % 2 == 0:
        raise ValueError(f"size must be odd and >= 3, got {size}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    rng = np.random.default_rng(seed)
    center = (size - 1) / 2.0
    pos = np.array([center, center])
    angle = rng.uniform(0.0, 2.0 * np.pi)
    points = []
    for _ in range(steps):
        points.append(pos.copy())
        angle += rng.normal(0.0, 0.5)
        pos = np.clip(pos + [np.sin(angle), np.cos(angle)], 0.0, size - 1.0)
    points = np.asarray(points)
    points += center - points.mean(axis=0)
    points = np.clip(points, 0.0, size - 1.0)
    k = np.zeros((size, size), dtype=np.float64)
    for pi, pj in points:
        _splat_bilinear(k, pi, pj)
    return k / k.sum()


def _splat_bilinear(k, pos_i, pos_j):
    size = k.shape[0]
    i0 = min(int(pos_i), size - 2) if size > 1 else 0
    j0 = min(int(pos_j), size - 2) if size > 1 else 0
    fi = pos_i - i0
    fj = pos_j - j0
    k[i0, j0] += (1 - fi) * (1 - fj)
    k[i0, j0 + 1] += (1 - fi) * fj
    k[i0 + 1, j0] += fi * (1 - fj)
    k[i0 + 1, j0 + 1] += fi * fj


def degrade(sharp, kernel, noise_sigma, seed):
    """Forward blur model: per-channel circular convolution plus seeded
    Gaussian noise of the given sigma, clipped to [0, 1]."""
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be >= 0, got {noise_sigma}")
    t = ensure_tensor(sharp)
    rng = np.random.default_rng(seed)
    channels = []
    for ci in range(t.shape[2]):
        blurred = convolve_circular(t[:, :, ci], kernel)
        if noise_sigma > 0:
            blurred = blurred + rng.normal(0.0, noise_sigma, blurred.shape)
        channels.append(blurred)
    out = np.clip(np.stack(channels, axis=2), 0.0, 1.0)
    return out if np.asarray(sharp).ndim == 3 else out[:, :, 0]


def _resolve_kernel(spec):
    if isinstance(spec, SyntheticKernel):
        return synth_motion_kernel(spec.size, spec.steps, spec.seed)
    return load_kernel(spec)


def _peak_rss_bytes():
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


def run_benchmark(cases, params: DeblurParams, mode):
    """Degrade, restore, and score every case; failures are recorded in the
    row and the run continues. mode is "blind" (the kernel is estimated from
    luminance first) or "nonblind" (the truth kernel is used directly)."""
    if mode not in ("blind", "nonblind"):
        raise ValueError(f"mode must be 'blind' or 'nonblind', got {mode!r}")
    cfg = RingingConfig(
        lambda_tv=params.lambda_tv,
        lambda_l0=params.lambda_l0,
        weight_ring=params.weight_ring,
    )
    report = BenchReport(mode=mode)
    for index, case in enumerate(cases):
        row = BenchRow(case_id=case.case_id or f"case{index:03d}")
        report.rows.append(row)
        try:
            sharp = load_image(case.sharp_path)
            kernel = _resolve_kernel(case.kernel_spec)
            blurred = degrade(sharp, kernel, case.noise_sigma, case.seed)
        except (OSError, ValueError, FftDeblurError) as exc:
            row.error = str(exc)
            continue
        try:
            start = time.perf_counter()
            if mode == "blind":
                result = blind_deconvolve(
                    luminance(blurred), uniform_kernel(params.kernel_size), params
                )
                restored = remove_ringing(blurred, result.kernel, cfg)
                row.kernel_sim = kernel_similarity(result.kernel, kernel)
            else:
                restored = remove_ringing(blurred, kernel, cfg)
            restored = np.clip(restored, 0.0, 1.0)
            row.wall_seconds = time.perf_counter() - start
            row.psnr_blurred = psnr(sharp, blurred, peak=1.0)
            row.psnr_restored = psnr(sharp, restored, peak=1.0)
            row.ssim_blurred = ssim(sharp, blurred)
            row.ssim_restored = ssim(sharp, restored)
            row.peak_rss_bytes = _peak_rss_bytes()
        except FftDeblurError as exc:
            row.error = str(exc)
            continue
    report.aggregate = _aggregate(report.rows)
    return report


def _aggregate(rows):
    agg = {}
    for name in _AGGREGATE_FIELDS:
        values = [getattr(r, name) for r in rows if getattr(r, name) is not None]
        agg[name] = float(np.mean(values)) if values else 0.0
    return agg


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def write_report_csv(path, report: BenchReport):
    """One row per case under the fixed header; failed cases leave their
    metric cells empty."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in report.rows:
        writer.writerow([_format_cell(getattr(row, name)) for name in CSV_HEADER])
    atomic_write_bytes(path, buf.getvalue().encode("ascii"))


def write_report_json(path, report: BenchReport):
    """JSON mirror of the CSV plus the aggregate object and error messages."""
    payload = {
        "mode": report.mode,
        "rows": [
            {name: getattr(row, name) for name in CSV_HEADER} | {"error": row.error}
            for row in report.rows
        ],
        "aggregate": report.aggregate,
    }
    atomic_write_bytes(path, json.dumps(payload, indent=2).encode("ascii"))
