"""Reader, writer and nearest-cell lookup for MERL isotropic BRDF tables.

File layout: three little-endian int32 dimensions ``(90, 90, 180)`` followed
by ``90*90*180*3`` little-endian float64 values, all red first, then green,
then blue. Within a channel the index is
``phi_d + 180 * (theta_d + 90 * theta_h)``.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geom import dir_to_half_diff, half_diff_to_dirs

__all__ = [
    "MerlFormatError",
    "MerlBrdf",
    "DIMS",
    "FILE_SIZE",
    "SCALE",
    "parse_merl",
    "write_merl",
    "read_merl",
    "save_merl",
    "merl_lookup",
    "merl_indices",
    "tabulate",
]

DIMS = (90, 90, 180)
N_CELLS = DIMS[0] * DIMS[1] * DIMS[2]
HEADER_SIZE = 12
FILE_SIZE = HEADER_SIZE + 3 * N_CELLS * 8
SCALE = np.array([1.0 / 1500.0, 1.15 / 1500.0, 1.66 / 1500.0])

_HEADER_DTYPE = np.dtype("<i4")
_DATA_DTYPE = np.dtype("<f8")


class MerlFormatError(ValueError):
    pass


class MerlSizeError(MerlFormatError):
    pass


class MerlHeaderError(MerlFormatError):
    pass


@dataclass(frozen=True, eq=False)
class MerlBrdf:
    """Raw (unscaled) table of shape ``(3, 90, 90, 180)``: channel, theta_h, theta_d, phi_d."""

    samples: np.ndarray

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=float).reshape((3,) + DIMS)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def dims(self):
        return DIMS

    def eval(self, wi, wo):
        return merl_lookup(self, wi, wo)


def parse_merl(data):
    data = bytes(data)
    if len(data) != FILE_SIZE:
        raise MerlSizeError(f"expected {FILE_SIZE} bytes, got {len(data)}")
    dims = tuple(int(v) for v in np.frombuffer(data, _HEADER_DTYPE, count=3))
    if dims != DIMS:
        raise MerlHeaderError(f"expected dimensions {DIMS}, got {dims}")
    return MerlBrdf(np.frombuffer(data, _DATA_DTYPE, offset=HEADER_SIZE).astype(float))


def write_merl(brdf):
    header = np.asarray(DIMS, dtype=_HEADER_DTYPE).tobytes()
    return header + brdf.samples.astype(_DATA_DTYPE).tobytes()


def read_merl(path):
    return parse_merl(Path(path).read_bytes())


def save_merl(brdf, path):
    Path(path).write_bytes(write_merl(brdf))


def merl_indices(wi, wo):
    """Table indices ``(i_theta_h, i_theta_d, i_phi_d)`` addressed by a direction pair."""
    hd = dir_to_half_diff(wi, wo)
    half_pi = np.pi / 2
    n_th, n_td, n_pd = DIMS
    i_th = np.floor(np.sqrt(np.maximum(hd.theta_h, 0.0) / half_pi) * n_th)
    i_td = np.floor(hd.theta_d / half_pi * n_td)
    i_pd = np.floor(hd.phi_d / np.pi * n_pd)
    return (
        np.clip(i_th, 0, n_th - 1).astype(np.intp),
        np.clip(i_td, 0, n_td - 1).astype(np.intp),
        np.clip(i_pd, 0, n_pd - 1).astype(np.intp),
    )


def merl_lookup(brdf, wi, wo):
    i_th, i_td, i_pd = merl_indices(wi, wo)
    raw = brdf.samples[:, i_th, i_td, i_pd]
    rgb = np.moveaxis(raw, 0, -1) * SCALE
    # negative entries mark invalid cells in the published tables
    return np.maximum(rgb, 0.0)


def tabulate(brdf_eval):
    """Build a :class:`MerlBrdf` by evaluating ``brdf_eval`` at every cell centre."""
    n_th, n_td, n_pd = DIMS
    theta_h = ((np.arange(n_th) + 0.5) / n_th) ** 2 * (np.pi / 2)
    theta_d = (np.arange(n_td) + 0.5) / n_td * (np.pi / 2)
    phi_d = (np.arange(n_pd) + 0.5) / n_pd * np.pi
    out = np.empty((3,) + DIMS)
    for i, th in enumerate(theta_h):
        wi, wo = half_diff_to_dirs(th, 0.0, theta_d[:, None], phi_d[None, :])
        rgb = np.asarray(brdf_eval(wi, wo), dtype=float)
        # cells whose directions dip below the surface stay invalid
        below = (wi[..., 2] <= 0.0) | (wo[..., 2] <= 0.0)
        rgb = np.where(below[..., None], -1.0, rgb / SCALE)
        out[:, i] = np.moveaxis(rgb, -1, 0)
    return MerlBrdf(out)
