"""Deterministic analytic renderer for a unit sphere.

The camera is orthographic and looks down ``-z`` at a unit sphere centred on
the origin, so each covered pixel sees exactly one surface point with normal
equal to its position. Shading happens in a per-pixel local frame whose
``z`` axis is that normal; any isotropic BRDF is insensitive to the choice of
tangent.

Images are ``(height, width, 3)`` float arrays of linear radiance.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "SceneSpec",
    "EnvironmentLight",
    "SphereGeometry",
    "sphere_geometry",
    "render_sphere",
    "render_sphere_env",
    "blank_image",
    "check_image",
]

MIN_RESOLUTION = 16


@dataclass(frozen=True)
class SceneSpec:
    """Orthographic view of the unit sphere lit by one point light."""

    light_position: tuple = (2.0, 2.0, 4.0)
    light_intensity: tuple = (20.0, 20.0, 20.0)
    resolution: int = 128

    def __post_init__(self):
        pos = tuple(float(v) for v in self.light_position)
        inten = tuple(float(v) for v in np.broadcast_to(np.asarray(self.light_intensity, dtype=float), (3,)))
        if len(pos) != 3:
            raise ValueError("light position needs three coordinates")
        if np.linalg.norm(pos) <= 1.0:
            raise ValueError("point light must sit outside the unit sphere")
        if min(inten) <= 0.0:
            raise ValueError("light intensity must be positive in every channel")
        if int(self.resolution) < MIN_RESOLUTION:
            raise ValueError(f"resolution must be at least {MIN_RESOLUTION}")
        object.__setattr__(self, "light_position", pos)
        object.__setattr__(self, "light_intensity", inten)
        object.__setattr__(self, "resolution", int(self.resolution))


@dataclass(frozen=True)
class EnvironmentLight:
    """Vertical gradient dome: radiance blends ``bottom`` to ``top`` with world ``z``."""

    top: tuple = (1.0, 1.0, 1.0)
    bottom: tuple = (0.15, 0.1, 0.05)
    n_samples: int = 64

    def radiance(self, world_dirs):
        t = 0.5 * (np.asarray(world_dirs)[..., 2:3] + 1.0)
        return (1.0 - t) * np.asarray(self.bottom, dtype=float) + t * np.asarray(self.top, dtype=float)


@dataclass(frozen=True, eq=False)
class SphereGeometry:
    """Per-pixel shading inputs for the covered pixels of a scene."""

    mask: np.ndarray  # (res, res) bool
    normal: np.ndarray  # (n, 3) world normals of covered pixels
    tangent: np.ndarray
    bitangent: np.ndarray
    wi: np.ndarray  # (n, 3) local light directions
    wo: np.ndarray  # (n, 3) local view directions
    irradiance: np.ndarray  # (n, 3) intensity * cos(theta_i) / r**2, zero when unlit

    def to_local(self, v):
        return np.stack([np.sum(v * self.tangent, -1), np.sum(v * self.bitangent, -1), np.sum(v * self.normal, -1)], -1)


def _frame(n):
    # branchless orthonormal basis around n (Duff et al. 2017)
    sign = np.where(n[:, 2] >= 0.0, 1.0, -1.0)
    a = -1.0 / (sign + n[:, 2])
    b = n[:, 0] * n[:, 1] * a
    t = np.stack([1.0 + sign * n[:, 0] ** 2 * a, sign * b, -sign * n[:, 0]], -1)
    bt = np.stack([b, sign + n[:, 1] ** 2 * a, -n[:, 1]], -1)
    return t, bt


@lru_cache(maxsize=16)
def sphere_geometry(scene):
    res = scene.resolution
    c = (np.arange(res) + 0.5) / res * 2.0 - 1.0
    x = c[None, :]
    y = -c[:, None]  # row 0 is the top of the image
    r2 = x * x + y * y
    mask = np.broadcast_to(r2 < 1.0, (res, res)).copy()
    xs = np.broadcast_to(x, (res, res))[mask]
    ys = np.broadcast_to(y, (res, res))[mask]
    n = np.stack([xs, ys, np.sqrt(1.0 - xs * xs - ys * ys)], -1)
    t, bt = _frame(n)
    to_light = np.asarray(scene.light_position) - n
    dist2 = np.sum(to_light * to_light, -1)
    l_world = to_light / np.sqrt(dist2)[:, None]
    geo = SphereGeometry(mask, n, t, bt, None, None, None)
    wi = geo.to_local(l_world)
    wo = geo.to_local(np.broadcast_to([0.0, 0.0, 1.0], n.shape))
    cos_i = np.maximum(wi[:, 2], 0.0)
    irr = (cos_i / dist2)[:, None] * np.asarray(scene.light_intensity)
    for arr in (mask, n, t, bt, wi, wo, irr):
        arr.flags.writeable = False
    return SphereGeometry(mask, n, t, bt, wi, wo, irr)


def blank_image(resolution):
    return np.zeros((resolution, resolution, 3))


def check_image(img):
    img = np.asarray(img, dtype=float)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) image, got shape {img.shape}")
    if not np.all(np.isfinite(img)) or np.any(img < 0.0):
        raise ValueError("image channels must be finite and non-negative")
    return img


def _map_chunks(fn, n, chunk_size, workers):
    bounds = [(s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]
    if workers <= 1 or len(bounds) <= 1:
        parts = [fn(s, e) for s, e in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, 3))


def render_sphere(brdf_eval, scene, chunk_size=8192, workers=1):
    """Render ``brdf_eval(wi, wo) -> rgb`` on the sphere under the point light.

    Radiance per covered pixel is ``f(wi, wo) * I * cos(theta_i) / r**2``;
    the background is zero. Output does not depend on ``chunk_size`` or
    ``workers``.
    """
    geo = sphere_geometry(scene)
    lit = geo.wi[:, 2] > 0.0

    def shade(s, e):
        out = np.zeros((e - s, 3))
        sel = lit[s:e]
        if np.any(sel):
            f = np.asarray(brdf_eval(geo.wi[s:e][sel], geo.wo[s:e][sel]), dtype=float)
            out[sel] = f * geo.irradiance[s:e][sel]
        return out

    img = blank_image(scene.resolution)
    img[geo.mask] = _map_chunks(shade, len(geo.normal), chunk_size, workers)
    return img


def _hash_uniform(index, stream):
    # splitmix64 finalizer: decorrelated uniforms in [0, 1) from integer keys
    z = np.asarray(index, dtype=np.uint64) * np.uint64(2) + np.uint64(stream)
    z = z * np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(float) / float(1 << 53)


def _stratified_cosine_dirs(n_samples, pixel_index):
    # Midpoint-stratified cosine-weighted directions, toroidally shifted per
    # pixel so neighbouring pixels do not share one aliasing pattern.
    side = int(round(np.sqrt(n_samples)))
    if side * side != n_samples:
        raise ValueError("environment sample count must be a perfect square")
    g = (np.arange(side) + 0.5) / side
    u1, u2 = np.meshgrid(g, g, indexing="ij")
    u1 = np.mod(u1.ravel()[None, :] + _hash_uniform(pixel_index, 0)[:, None], 1.0)
    u2 = np.mod(u2.ravel()[None, :] + _hash_uniform(pixel_index, 1)[:, None], 1.0)
    r = np.sqrt(u1)
    phi = 2.0 * np.pi * u2
    return np.stack([r * np.cos(phi), r * np.sin(phi), np.sqrt(1.0 - u1)], -1)


def render_sphere_env(brdf_eval, scene, env=None, chunk_size=2048, workers=1):
    """Render under a gradient dome by stratified cosine-weighted quadrature.

    Each pixel averages ``pi * f(wi, wo) * L(wi)`` over ``env.n_samples``
    stratified directions; the point light in ``scene`` is ignored. The
    sample pattern depends only on the pixel index, so output does not depend
    on ``chunk_size`` or ``workers``.
    """
    env = env or EnvironmentLight()
    geo = sphere_geometry(scene)

    def shade(s, e):
        local = _stratified_cosine_dirs(env.n_samples, np.arange(s, e))  # (m, k, 3)
        m, k = local.shape[:2]
        wo = np.broadcast_to(geo.wo[s:e, None, :], (m, k, 3))
        world = (
            local[..., 0:1] * geo.tangent[s:e, None, :]
            + local[..., 1:2] * geo.bitangent[s:e, None, :]
            + local[..., 2:3] * geo.normal[s:e, None, :]
        )
        f = np.asarray(brdf_eval(local.reshape(-1, 3), wo.reshape(-1, 3)), dtype=float).reshape(m, k, 3)
        return np.pi * np.mean(f * env.radiance(world), axis=1)

    img = blank_image(scene.resolution)
    img[geo.mask] = _map_chunks(shade, len(geo.normal), chunk_size, workers)
    return img
