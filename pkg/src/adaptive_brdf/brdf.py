"""Analytic Ward and GGX reflectance models.

Both models expose evaluation, a half-vector importance-sampling warp from
the unit square, the closed-form inverse of that warp, and the half-vector
density of the warp. The warps only cover the specular lobe; the mixture
density :func:`pdf` adds the cosine lobe on top.

All functions are vectorized: directions are ``(..., 3)`` arrays, unit square
points are pairs of broadcastable arrays, and RGB results carry a trailing
axis of length 3.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geom import Spherical, TWO_PI, dot, normalize, reflect_about_half, spherical_to_dir

__all__ = [
    "WardParams",
    "GgxParams",
    "LobeWeights",
    "ward_eval",
    "ggx_eval",
    "ward_sample",
    "ward_inverse",
    "ggx_sample",
    "ggx_inverse",
    "ward_half_pdf",
    "ggx_half_pdf",
    "default_weights",
    "pdf",
    "sample",
    "inverse",
]

U_EPS = 1e-12
THETA_MAX = np.pi / 2 - 1e-6
COS_EPS = 1e-6

WARD_ALPHA_RANGE = (1e-3, 2.0)
GGX_ALPHA_RANGE = (1e-3, 1.0)


def _rgb(value):
    arr = np.broadcast_to(np.asarray(value, dtype=float), (3,))
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class WardParams:
    """Isotropic Ward parameters. The specular weight is ``1 - rho_d``."""

    rho_d: tuple
    alpha: float

    def __post_init__(self):
        rho = tuple(min(max(v, 0.0), 1.0) for v in _rgb(self.rho_d))
        object.__setattr__(self, "rho_d", rho)
        object.__setattr__(self, "alpha", float(np.clip(self.alpha, *WARD_ALPHA_RANGE)))

    @property
    def rho_s(self):
        return tuple(1.0 - v for v in self.rho_d)

    def eval(self, wi, wo):
        return ward_eval(self, wi, wo)


@dataclass(frozen=True)
class GgxParams:
    """Diffuse albedo plus a single GGX roughness; Fresnel is fixed at one."""

    albedo: tuple
    alpha: float

    def __post_init__(self):
        albedo = tuple(min(max(v, 0.0), 1.0) for v in _rgb(self.albedo))
        object.__setattr__(self, "albedo", albedo)
        object.__setattr__(self, "alpha", float(np.clip(self.alpha, *GGX_ALPHA_RANGE)))

    def eval(self, wi, wo):
        return ggx_eval(self, wi, wo)


@dataclass(frozen=True)
class LobeWeights:
    w_d: float
    w_s: float

    def __post_init__(self):
        if self.w_d < 0 or self.w_s < 0 or abs(self.w_d + self.w_s - 1.0) > 1e-12:
            raise ValueError(f"lobe weights must be non-negative and sum to 1, got {self.w_d}, {self.w_s}")

    @classmethod
    def specular(cls, w_s):
        w_s = float(np.clip(w_s, 0.0, 1.0))
        return cls(1.0 - w_s, w_s)


def default_weights(params):
    """Mixture weights used when none are given.

    Ward: ``w_s = mean(rho_s)``. GGX: ``w_s = 1 - mean(albedo)``, floored at
    0.5 for rough lobes (``alpha >= 0.7``).
    """
    if isinstance(params, WardParams):
        return LobeWeights.specular(np.mean(params.rho_s))
    w_s = 1.0 - float(np.mean(params.albedo))
    if params.alpha >= 0.7:
        w_s = max(w_s, 0.5)
    return LobeWeights.specular(w_s)


def _cosines(wi, wo):
    wi = np.asarray(wi, dtype=float)
    wo = np.asarray(wo, dtype=float)
    ci = np.maximum(wi[..., 2], COS_EPS)
    co = np.maximum(wo[..., 2], COS_EPS)
    h = normalize(wi + wo)
    ch = np.clip(h[..., 2], COS_EPS, 1.0)
    return ci, co, ch


def ward_eval(p, wi, wo):
    ci, co, ch = _cosines(wi, wo)
    a2 = p.alpha * p.alpha
    tan2 = (1.0 - ch * ch) / (ch * ch)
    lobe = np.exp(-tan2 / a2) / (4.0 * np.pi * a2 * np.sqrt(ci * co))
    rho_d = np.asarray(p.rho_d)
    return rho_d / np.pi + (1.0 - rho_d) * lobe[..., None]


def _ggx_d(cos_h, alpha):
    a2 = alpha * alpha
    t = (a2 - 1.0) * cos_h * cos_h + 1.0
    return a2 / (np.pi * t * t)


def _smith_lambda(cos_t, alpha):
    tan2 = (1.0 - cos_t * cos_t) / (cos_t * cos_t)
    return 0.5 * (np.sqrt(1.0 + alpha * alpha * tan2) - 1.0)


def ggx_eval(p, wi, wo):
    ci, co, ch = _cosines(wi, wo)
    d = _ggx_d(ch, p.alpha)
    # height-correlated Smith masking-shadowing
    g = 1.0 / (1.0 + _smith_lambda(ci, p.alpha) + _smith_lambda(co, p.alpha))
    spec = d * g / (4.0 * ci * co)
    return np.asarray(p.albedo) / np.pi + spec[..., None]


def ward_sample(p, u1, u2):
    """Half-vector angles for unit-square point ``(u1, u2)``."""
    u1 = np.clip(np.asarray(u1, dtype=float), U_EPS, 1.0)
    theta = np.arctan(p.alpha * np.sqrt(-np.log(u1)))
    return Spherical(theta, TWO_PI * np.asarray(u2, dtype=float))


def ward_inverse(p, theta_h, phi_h):
    t = np.tan(np.minimum(np.asarray(theta_h, dtype=float), THETA_MAX))
    u1 = np.exp(-(t * t) / (p.alpha * p.alpha))
    return u1, np.asarray(phi_h, dtype=float) / TWO_PI


def ggx_sample(p, u1, u2):
    u1 = np.clip(np.asarray(u1, dtype=float), 0.0, 1.0 - U_EPS)
    theta = np.arctan(p.alpha * np.sqrt(u1 / (1.0 - u1)))
    return Spherical(theta, TWO_PI * np.asarray(u2, dtype=float))


def ggx_inverse(p, theta_h, phi_h):
    t = np.tan(np.minimum(np.asarray(theta_h, dtype=float), THETA_MAX))
    t2 = t * t
    return t2 / (p.alpha * p.alpha + t2), np.asarray(phi_h, dtype=float) / TWO_PI


def sample(params, u1, u2):
    if isinstance(params, WardParams):
        return ward_sample(params, u1, u2)
    return ggx_sample(params, u1, u2)


def inverse(params, theta_h, phi_h):
    if isinstance(params, WardParams):
        return ward_inverse(params, theta_h, phi_h)
    return ggx_inverse(params, theta_h, phi_h)


def ward_half_pdf(p, cos_h):
    """Solid-angle density of the Ward warp over half vectors."""
    ch = np.clip(cos_h, COS_EPS, 1.0)
    a2 = p.alpha * p.alpha
    tan2 = (1.0 - ch * ch) / (ch * ch)
    return np.exp(-tan2 / a2) / (np.pi * a2 * ch ** 3)


def ggx_half_pdf(p, cos_h):
    ch = np.clip(cos_h, COS_EPS, 1.0)
    return _ggx_d(ch, p.alpha) * ch


_HORIZON_GRID = 512


@lru_cache(maxsize=256)
def _above_horizon_fraction(params, cos_i):
    # Share of the warped unit square whose reflected direction stays above
    # the surface, by midpoint quadrature (isotropy: depends on theta_i only).
    g = (np.arange(_HORIZON_GRID) + 0.5) / _HORIZON_GRID
    h = sample(params, g[:, None], g[None, :])
    wh = spherical_to_dir(h.theta, h.phi)
    wi = np.array([np.sqrt(max(0.0, 1.0 - cos_i * cos_i)), 0.0, cos_i])
    wo = reflect_about_half(wh, wi)
    return float(np.mean(wo[..., 2] > 0.0))


def pdf(params, weights, wi, wo):
    """Mixture density of outgoing directions for one incoming direction.

    ``w_d * cos(theta_o) / pi + w_s * p_s(wo)``, where ``p_s`` is the warp's
    half-vector density mapped to outgoing solid angle through the
    ``1 / (4 wh . wi)`` Jacobian and restricted to the upper hemisphere
    (renormalized by the share of the lobe that lands above the horizon).
    """
    wi = np.asarray(wi, dtype=float)
    wo = np.asarray(wo, dtype=float)
    if wi.ndim != 1:
        raise ValueError("pdf takes a single incoming direction")
    cos_o = wo[..., 2]
    p_d = np.maximum(cos_o, 0.0) / np.pi
    if weights.w_s == 0.0:
        return weights.w_d * p_d
    h = normalize(wi + wo)
    if isinstance(params, WardParams):
        p_h = ward_half_pdf(params, h[..., 2])
    else:
        p_h = ggx_half_pdf(params, h[..., 2])
    hi = np.maximum(dot(h, wi), COS_EPS)
    frac = _above_horizon_fraction(params, round(float(wi[2]), 12))
    p_s = np.where(cos_o > 0.0, p_h / (4.0 * hi), 0.0) / frac
    return weights.w_d * p_d + weights.w_s * p_s
