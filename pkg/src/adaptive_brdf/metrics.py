"""Image fidelity metrics."""

import numpy as np

__all__ = ["rmse", "psnr", "PSNR_CAP"]

PSNR_CAP = 99.0


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def rmse(a, b):
    """Root mean squared difference over all pixels and channels (linear values)."""
    a, b = _pair(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def psnr(a, b, peak=1.0):
    """PSNR in dB of the images clamped to ``[0, peak]``; identical images give ``PSNR_CAP``."""
    a, b = _pair(a, b)
    err = rmse(np.clip(a, 0.0, peak), np.clip(b, 0.0, peak))
    if err == 0.0:
        return PSNR_CAP
    return float(min(20.0 * np.log10(peak / err), PSNR_CAP))
