"""Command-line interface: blind and non-blind deblurring, quality metrics,
and the synthetic benchmark harness.

Exit codes: 0 ok, 1 I/O failure, 2 parameter validation, 3 estimation
collapse, 4 kernel/shape error. An external spatial-domain preprocessor
(any Vision Transformer restorer) composes through the file boundary: point
--preprocessed (or --input) at its output image.
"""

import argparse
import dataclasses
import json
import sys

import numpy as np

from .bench import BenchCase, SyntheticKernel, run_benchmark, write_report_csv, write_report_json
from .blind import DeblurParams, blind_deconvolve, uniform_kernel
from .core import luminance
from .errors import (
    DegenerateKernel,
    DimensionMismatch,
    EmptyKernel,
    ImageTooSmall,
    KernelTooLarge,
    NonFiniteState,
    PadTooSmall,
)
from .imgio import load_image, load_kernel, save_image, save_kernel_png, save_kernel_text
from .metrics import quality
from .nonblind import RingingConfig, remove_ringing

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_COLLAPSE = 3
EXIT_SHAPE = 4

_PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(DeblurParams))
_SHARED_FLAGS = (
    "lambda_ftr",
    "lambda_grad",
    "lambda_tv",
    "lambda_l0",
    "weight_ring",
    "kappa",
    "xk_iter",
    "kernel_size",
    "psf_reg",
)


def _flagify(message):
    for name in _SHARED_FLAGS:
        message = message.replace(name, "--" + name.replace("_", "-"))
    return message


def _params_from_args(args):
    merged = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
        section = data.get("params", data)
        for key, value in section.items():
            if key not in _PARAM_FIELDS:
                raise ValueError(f"unknown parameter in config: {key}")
            merged[key] = value
    for name in _PARAM_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    try:
        return DeblurParams(**merged)
    except (TypeError, ValueError) as exc:
        raise ValueError(_flagify(str(exc))) from exc


def _ringing_config(params):
    return RingingConfig(
        lambda_tv=params.lambda_tv,
        lambda_l0=params.lambda_l0,
        weight_ring=params.weight_ring,
    )


def _kernel_png_path(text_path):
    if text_path.endswith(".txt"):
        return text_path[:-4] + ".png"
    return text_path + ".png"


def cmd_blind(args):
    params = _params_from_args(args)
    source = args.preprocessed or args.input
    image = load_image(source)
    result = blind_deconvolve(luminance(image), uniform_kernel(params.kernel_size), params)
    restored = np.clip(remove_ringing(image, result.kernel, _ringing_config(params)), 0.0, 1.0)
    save_image(args.output, restored)
    kernel_text = args.kernel_out or args.output + ".kernel.txt"
    save_kernel_text(kernel_text, result.kernel)
    save_kernel_png(_kernel_png_path(kernel_text), result.kernel)
    return EXIT_OK


def cmd_nonblind(args):
    params = _params_from_args(args)
    image = load_image(args.input)
    kernel = load_kernel(args.kernel)
    restored = np.clip(remove_ringing(image, kernel, _ringing_config(params)), 0.0, 1.0)
    save_image(args.output, restored)
    return EXIT_OK


def cmd_metrics(args):
    a = load_image(args.image_a)
    b = load_image(args.image_b)
    score = quality(a, b, peak=1.0)
    print(f"psnr_db={score.psnr_db:.4f} ssim={score.ssim:.4f}")
    return EXIT_OK


def _parse_kernel_spec(entry):
    if isinstance(entry, str):
        return entry
    if isinstance(entry, dict) and "file" in entry:
        return entry["file"]
    if isinstance(entry, dict) and "synthetic" in entry:
        spec = entry["synthetic"]
        return SyntheticKernel(
            size=int(spec["size"]), steps=int(spec["steps"]), seed=int(spec.get("seed", 0))
        )
    raise ValueError(f"kernel spec must be a path or {{'synthetic': ...}}, got {entry!r}")


def cmd_bench(args):
    with open(args.config_path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("bench config must be a JSON object")
    try:
        params = DeblurParams(**data.get("params", {}))
    except (TypeError, ValueError) as exc:
        raise ValueError(_flagify(str(exc))) from exc
    mode = data.get("mode", "nonblind")
    cases = []
    for entry in data.get("cases", []):
        cases.append(
            BenchCase(
                sharp_path=entry["sharp"],
                kernel_spec=_parse_kernel_spec(entry["kernel"]),
                noise_sigma=float(entry.get("noise_sigma", 0.01)),
                seed=int(entry.get("seed", 0)),
                case_id=str(entry.get("id", "")),
            )
        )
    report = run_benchmark(cases, params, mode)
    if data.get("csv"):
        write_report_csv(data["csv"], report)
    if data.get("json"):
        write_report_json(data["json"], report)
    for name in ("psnr_blurred", "psnr_restored", "ssim_blurred", "ssim_restored"):
        print(f"mean_{name}={report.aggregate[name]:.4f}")
    return EXIT_OK


def _add_param_flags(parser):
    for name in _SHARED_FLAGS:
        flag = "--" + name.replace("_", "-")
        if name in ("xk_iter", "kernel_size"):
            parser.add_argument(flag, dest=name, type=int, default=None)
        else:
            parser.add_argument(flag, dest=name, type=float, default=None)
    parser.add_argument("--seed", type=int, default=None, help="seed for seeded stages")
    parser.add_argument("--config", default=None, help="JSON file of parameter overrides")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fftdeblur",
        description="Frequency-domain image deblurring with an FFT-ReLU sparsity prior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_blind = sub.add_parser("blind", help="estimate the blur kernel, then restore")
    p_blind.add_argument("--input", required=True, help="blurred image (PNG/JPEG, 8 or 16 bit)")
    p_blind.add_argument("--output", required=True, help="restored image path")
    p_blind.add_argument("--kernel-out", dest="kernel_out", default=None,
                         help="kernel text path (default: <output>.kernel.txt)")
    p_blind.add_argument("--preprocessed", default=None,
                         help="externally preprocessed image to deblur instead of --input")
    _add_param_flags(p_blind)
    p_blind.set_defaults(func=cmd_blind)

    p_nonblind = sub.add_parser("nonblind", help="restore with a known kernel")
    p_nonblind.add_argument("--input", required=True)
    p_nonblind.add_argument("--kernel", required=True,
                            help="kernel text file or grayscale image (renormalized on load)")
    p_nonblind.add_argument("--output", required=True)
    _add_param_flags(p_nonblind)
    p_nonblind.set_defaults(func=cmd_nonblind)

    p_metrics = sub.add_parser("metrics", help="print PSNR/SSIM of two images")
    p_metrics.add_argument("image_a")
    p_metrics.add_argument("image_b")
    p_metrics.set_defaults(func=cmd_metrics)

    p_bench = sub.add_parser("bench", help="run the benchmark harness from a JSON config")
    p_bench.add_argument("config_path")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, DimensionMismatch, ImageTooSmall) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DegenerateKernel as exc:
        print(f"error: estimation collapsed: {exc}", file=sys.stderr)
        return EXIT_COLLAPSE
    except (KernelTooLarge, PadTooSmall, EmptyKernel, NonFiniteState) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE


if __name__ == "__main__":
    sys.exit(main())
