"""Spherical geometry helpers.

Directions are plain ``numpy`` arrays whose last axis holds ``(x, y, z)``;
``z`` is the surface normal. Every function broadcasts over leading axes.
"""

from typing import NamedTuple

import numpy as np

__all__ = [
    "DegeneratePairError",
    "Spherical",
    "HalfDiffCoords",
    "normalize",
    "dot",
    "spherical_to_dir",
    "dir_to_spherical",
    "half_vector",
    "reflect_about_half",
    "rotate_z",
    "half_diff_angles",
    "dir_to_half_diff",
    "half_diff_to_dirs",
    "cosine_weighted_thetas",
]

TWO_PI = 2.0 * np.pi


class DegeneratePairError(ValueError):
    """Raised when ``wi + wo`` vanishes and no half vector exists."""


class Spherical(NamedTuple):
    theta: np.ndarray
    phi: np.ndarray


class HalfDiffCoords(NamedTuple):
    theta_h: np.ndarray
    theta_d: np.ndarray
    phi_d: np.ndarray


def dot(a, b):
    return np.sum(np.asarray(a) * np.asarray(b), axis=-1)


def normalize(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def spherical_to_dir(theta, phi=0.0):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack(np.broadcast_arrays(st * np.cos(phi), st * np.sin(phi), np.cos(theta)), axis=-1)


def dir_to_spherical(d):
    """Inverse of :func:`spherical_to_dir`; ``phi`` lies in ``[0, 2*pi)``.

    The azimuth of the pole is defined as 0.
    """
    d = np.asarray(d, dtype=float)
    x, y, z = d[..., 0], d[..., 1], d[..., 2]
    theta = np.arctan2(np.hypot(x, y), z)
    phi = np.arctan2(y, x)
    phi = np.where(phi < 0.0, phi + TWO_PI, phi)
    phi = np.where(phi >= TWO_PI, 0.0, phi)
    return Spherical(theta, phi)


def half_vector(wi, wo):
    s = np.asarray(wi, dtype=float) + np.asarray(wo, dtype=float)
    n = np.linalg.norm(s, axis=-1, keepdims=True)
    if np.any(n < 1e-12):
        raise DegeneratePairError("wi and wo are antipodal; half vector undefined")
    return s / n


def reflect_about_half(wh, wi):
    """Mirror ``wi`` about ``wh``: ``2 (wh . wi) wh - wi``.

    Results below the horizon are returned unchanged.
    """
    wh = np.asarray(wh, dtype=float)
    wi = np.asarray(wi, dtype=float)
    return 2.0 * dot(wh, wi)[..., None] * wh - wi


def rotate_z(v, angle):
    """Rotate ``v`` about the normal axis by ``angle`` (right-handed)."""
    v = np.asarray(v, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    x, y = v[..., 0], v[..., 1]
    return np.stack(np.broadcast_arrays(c * x - s * y, s * x + c * y, v[..., 2]), axis=-1)


def _rotate_y(v, angle):
    c, s = np.cos(angle), np.sin(angle)
    x, z = v[..., 0], v[..., 2]
    return np.stack(np.broadcast_arrays(c * x + s * z, v[..., 1], -s * x + c * z), axis=-1)


def half_diff_angles(wi, wo):
    """Unfolded half/difference angles ``(theta_h, phi_h, theta_d, phi_d)``.

    ``phi_d`` is returned in ``(-pi, pi]``; :func:`dir_to_half_diff` folds it.
    """
    h = half_vector(wi, wo)
    theta_h = np.arccos(np.clip(h[..., 2], -1.0, 1.0))
    phi_h = np.arctan2(h[..., 1], h[..., 0])
    d = _rotate_y(rotate_z(wi, -phi_h), -theta_h)
    theta_d = np.arccos(np.clip(d[..., 2], -1.0, 1.0))
    phi_d = np.arctan2(d[..., 1], d[..., 0])
    return theta_h, phi_h, theta_d, phi_d


def dir_to_half_diff(wi, wo):
    theta_h, _, theta_d, phi_d = half_diff_angles(wi, wo)
    # isotropic reciprocity: phi_d and phi_d + pi address the same cell
    phi_d = np.mod(phi_d, np.pi)
    phi_d = np.where(phi_d >= np.pi, 0.0, phi_d)
    return HalfDiffCoords(theta_h, theta_d, phi_d)


def half_diff_to_dirs(theta_h, phi_h, theta_d, phi_d):
    """Rebuild ``(wi, wo)`` from unfolded half/difference angles."""
    d = spherical_to_dir(theta_d, phi_d)
    wi = rotate_z(_rotate_y(d, theta_h), phi_h)
    h = spherical_to_dir(theta_h, phi_h)
    return wi, reflect_about_half(h, wi)


def cosine_weighted_thetas(n):
    """Polar angles at the stratum midpoints of the cosine-weighted marginal.

    The marginal CDF is ``sin(theta)**2``, so ``theta_k = arcsin(sqrt((k + 0.5) / n))``.
    """
    if n < 1:
        raise ValueError("need at least one incoming angle")
    k = np.arange(n, dtype=float)
    return np.arcsin(np.sqrt((k + 0.5) / n))
