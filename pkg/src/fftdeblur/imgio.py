"""Image and kernel file I/O.

Images live in float64 [0, 1] in memory; quantization to 8/16-bit happens
only here. All writes are atomic (temp file in the target directory, then
rename), so a failed run never leaves partial output behind.
"""

import os
import tempfile

import cv2
import numpy as np

from .blind import normalize_kernel

_KERNEL_IMAGE_EXTS = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}


def load_image(path):
    """Decode a PNG/JPEG (8 or 16 bit) into float64 [0, 1], RGB channel order."""
    data = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if data is None:
        raise OSError(f"cannot read image: {path}")
    if data.dtype == np.uint8:
        out = data.astype(np.float64) / 255.0
    elif data.dtype == np.uint16:
        out = data.astype(np.float64) / 65535.0
    else:
        out = np.clip(data.astype(np.float64), 0.0, 1.0)
    if out.ndim == 3:
        if out.shape[2] == 4:
            out = out[:, :, :3]
        out = out[:, :, ::-1].copy()  # BGR -> RGB
    return out


def atomic_write_bytes(path, blob):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fftdeblur-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_image(path, image):
    """Encode and atomically write an image; PNG gets 16 bits, JPEG 8."""
    arr = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    ext = os.path.splitext(str(path))[1].lower() or ".png"
    if ext == ".png":
        quantized = np.rint(arr * 65535.0).astype(np.uint16)
    else:
        quantized = np.rint(arr * 255.0).astype(np.uint8)
    if quantized.ndim == 3:
        quantized = quantized[:, :, ::-1]  # RGB -> BGR
    ok, blob = cv2.imencode(ext, quantized)
    if not ok:
        raise OSError(f"cannot encode image for: {path}")
    atomic_write_bytes(path, blob.tobytes())


def save_kernel_text(path, kernel):
    """Write a kernel as plain text: one row per line, space-separated decimals."""
    k = np.asarray(kernel, dtype=np.float64)
    lines = [" ".join(f"{v:.17g}" for v in row) for row in k]
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def save_kernel_png(path, kernel):
    """Write a kernel as a small grayscale PNG scaled so the max tap is 255."""
    k = np.asarray(kernel, dtype=np.float64)
    top = k.max()
    scaled = np.zeros_like(k) if top <= 0 else np.clip(k, 0.0, None) / top
    ok, blob = cv2.imencode(".png", np.rint(scaled * 255.0).astype(np.uint8))
    if not ok:
        raise OSError(f"cannot encode kernel image for: {path}")
    atomic_write_bytes(path, blob.tobytes())


def load_kernel(path):
    """Read a kernel from the text format or from a grayscale image.

    Either way the result is renormalized to non-negative unit mass.
    """
    ext = os.path.splitext(str(path))[1].lower()
    if ext in _KERNEL_IMAGE_EXTS:
        data = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
        if data is None:
            raise OSError(f"cannot read kernel image: {path}")
        k = data.astype(np.float64)
    else:
        try:
            k = np.loadtxt(str(path), dtype=np.float64, ndmin=2)
        except (OSError, ValueError) as exc:
            raise OSError(f"cannot read kernel text: {path}: {exc}") from exc
    return normalize_kernel(k)
