"""PFM (lossless HDR) and PNG (8-bit preview) image files."""

import re
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = ["PfmFormatError", "write_pfm", "read_pfm", "encode_pfm", "decode_pfm", "to_srgb8", "write_png"]

GAMMA = 2.2

_HEADER = re.compile(rb"\A(PF|Pf)\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s")


class PfmFormatError(ValueError):
    pass


def encode_pfm(img):
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) image, got shape {img.shape}")
    h, w, _ = img.shape
    header = f"PF\n{w} {h}\n-1.0\n".encode("ascii")
    # PFM stores rows bottom to top
    return header + np.ascontiguousarray(img[::-1], dtype="<f4").tobytes()


def decode_pfm(data):
    m = _HEADER.match(data)
    if m is None:
        raise PfmFormatError("malformed PFM header")
    kind, w, h, scale = m.group(1), int(m.group(2)), int(m.group(3)), m.group(4)
    try:
        scale = float(scale)
    except ValueError:
        raise PfmFormatError(f"bad PFM scale {scale!r}") from None
    if scale == 0.0:
        raise PfmFormatError("PFM scale must be non-zero")
    channels = 3 if kind == b"PF" else 1
    dtype = np.dtype("<f4" if scale < 0 else ">f4")
    body = data[m.end():]
    count = w * h * channels
    if len(body) != count * 4:
        raise PfmFormatError(f"expected {count * 4} bytes of pixel data, got {len(body)}")
    pix = np.frombuffer(body, dtype=dtype).reshape(h, w, channels)[::-1].astype(float)
    if channels == 1:
        pix = np.repeat(pix, 3, axis=2)
    return pix


def write_pfm(img, path):
    Path(path).write_bytes(encode_pfm(img))


def read_pfm(path):
    return decode_pfm(Path(path).read_bytes())


def to_srgb8(img):
    """Clamp to ``[0, 1]``, apply the 1/2.2 display transfer and quantize to bytes."""
    v = np.clip(np.asarray(img, dtype=float), 0.0, 1.0) ** (1.0 / GAMMA)
    return np.round(v * 255.0).astype(np.uint8)


def write_png(img, path):
    Image.fromarray(to_srgb8(img)).save(path, format="PNG")
