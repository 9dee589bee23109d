"""Adaptive measurement plans, virtual measurement and reconstruction.

A plan pushes the midpoint lattice ``((i + 0.5) / N, (j + 0.5) / N)`` of the
unit square through the specular warp of an analytic model to obtain half
vectors, and reflects each incoming direction about them to get the
outgoing directions a gonioreflectometer should visit. Incoming directions
all share ``phi = 0`` (the materials are isotropic) and use the stratified
cosine-weighted polar angles.

Reconstruction maps a query pair back to the unit square with the inverse
warp and interpolates the measured lattice: bilinearly inside an incoming
slice, then linearly in ``cos(theta_i)`` between the two nearest slices.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .brdf import GgxParams, WardParams, default_weights, inverse, sample
from .geom import (
    cosine_weighted_thetas,
    dir_to_spherical,
    half_vector,
    reflect_about_half,
    rotate_z,
    spherical_to_dir,
)

__all__ = [
    "MeasurementPlan",
    "MeasurementTable",
    "plan_measurements",
    "measure",
    "reconstruct_eval",
    "brdf_function",
    "plan_records",
    "write_plan",
    "read_plan",
    "write_table",
]

MAX_GRID = 64
_SNAP = 1e-6


@dataclass(frozen=True, eq=False)
class MeasurementPlan:
    params: object
    weights: object
    grid_n: int
    incoming_theta: np.ndarray  # (n_in,)
    u1: np.ndarray  # (N,) lattice coordinates along the first warp axis
    u2: np.ndarray  # (N,)
    wi: np.ndarray  # (n_in, 3)
    wo: np.ndarray  # (n_in, N, N, 3), indexed [slice, i (u1), j (u2)]
    valid: np.ndarray  # (n_in, N, N)

    @property
    def model(self):
        return "ward" if isinstance(self.params, WardParams) else "ggx"

    @property
    def n_entries(self):
        return self.valid.size

    @property
    def n_valid(self):
        return int(np.count_nonzero(self.valid))

    @property
    def incoming(self):
        return dir_to_spherical(self.wi)


@dataclass(frozen=True, eq=False)
class MeasurementTable:
    plan: MeasurementPlan
    values: np.ndarray  # (n_in, N, N, 3); NaN where the entry is invalid
    _filled: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_filled", _fill_invalid(self.values, self.plan.valid))

    def eval(self, wi, wo):
        return reconstruct_eval(self, wi, wo)


def plan_measurements(params, weights=None, n_out=16, n_theta_in=8):
    """Warp the ``n_out x n_out`` midpoint lattice for each incoming angle."""
    if not isinstance(params, (WardParams, GgxParams)):
        raise TypeError("params must be WardParams or GgxParams")
    n = int(n_out)
    if not 1 <= n <= MAX_GRID:
        raise ValueError(f"grid side must be in [1, {MAX_GRID}], got {n_out}")
    weights = weights or default_weights(params)
    thetas = cosine_weighted_thetas(int(n_theta_in))
    lattice = (np.arange(n) + 0.5) / n
    h = sample(params, lattice[:, None], lattice[None, :])
    wh = spherical_to_dir(h.theta, h.phi)  # (N, N, 3)
    wi = spherical_to_dir(thetas, 0.0)  # (n_in, 3)
    wo = reflect_about_half(wh[None], wi[:, None, None, :])
    valid = wo[..., 2] >= 0.0
    for arr in (thetas, lattice, wi, wo, valid):
        arr.flags.writeable = False
    return MeasurementPlan(params, weights, n, thetas, lattice, lattice, wi, wo, valid)


def brdf_function(reference):
    """Adapt a reference (anything with ``eval`` or a plain callable) to ``f(wi, wo)``."""
    if hasattr(reference, "eval"):
        return reference.eval
    if callable(reference):
        return reference
    raise TypeError(f"cannot evaluate reference of type {type(reference).__name__}")


def measure(plan, reference):
    """Virtually measure ``reference`` at every valid plan entry."""
    f = brdf_function(reference)
    wi = np.broadcast_to(plan.wi[:, None, None, :], plan.wo.shape)
    values = np.full(plan.wo.shape, np.nan)
    v = plan.valid
    values[v] = np.asarray(f(wi[v], plan.wo[v]), dtype=float)
    values.flags.writeable = False
    return MeasurementTable(plan, values)


def _fill_invalid(values, valid):
    # Invalid lattice nodes borrow the value of the nearest valid node (index
    # distance, azimuth axis periodic) so interpolation stays inside the data.
    filled = np.where(valid[..., None], values, 0.0)
    n = valid.shape[2]
    for k in range(valid.shape[0]):
        if valid[k].all() or not valid[k].any():
            continue
        tiled = np.concatenate([valid[k]] * 3, axis=1)
        _, (ii, jj) = ndimage.distance_transform_edt(~tiled, return_indices=True)
        ii, jj = ii[:, n:2 * n], jj[:, n:2 * n] % n
        filled[k] = filled[k][ii, jj]
    # a slice with no valid node at all copies the nearest populated slice
    populated = np.flatnonzero(valid.reshape(valid.shape[0], -1).any(axis=1))
    if len(populated):
        for k in np.flatnonzero(~valid.reshape(valid.shape[0], -1).any(axis=1)):
            filled[k] = filled[populated[np.argmin(np.abs(populated - k))]]
    filled.flags.writeable = False
    return filled


def _snap(t):
    t = np.where(np.abs(t) < _SNAP, 0.0, t)
    return np.where(np.abs(t - 1.0) < _SNAP, 1.0, t)


def reconstruct_eval(table, wi, wo):
    """Interpolated reflectance of the measured table at ``(wi, wo)``.

    Along the first warp axis queries outside the lattice use the boundary
    cell (linear extrapolation); the second axis is azimuthal and wraps.
    Incoming angles outside the planned range use the nearest slice.
    """
    plan = table.plan
    wi = np.asarray(wi, dtype=float)
    wo = np.asarray(wo, dtype=float)
    wi, wo = np.broadcast_arrays(wi, wo)
    # isotropy: turn the pair so the incoming direction has phi = 0
    phi_i = np.arctan2(wi[..., 1], wi[..., 0])
    wi = rotate_z(wi, -phi_i)
    wo = rotate_z(wo, -phi_i)
    h = dir_to_spherical(half_vector(wi, wo))
    u1, u2 = inverse(plan.params, h.theta, h.phi)

    n = plan.grid_n
    x = u1 * n - 0.5
    i0 = np.clip(np.floor(x), 0, max(n - 2, 0)).astype(np.intp)
    i1 = np.minimum(i0 + 1, n - 1)
    t = _snap(x - i0) if n > 1 else np.zeros_like(x)
    y = u2 * n - 0.5
    yf = np.floor(y)
    s = _snap(y - yf)
    j0 = np.mod(yf, n).astype(np.intp)
    j1 = np.mod(j0 + 1, n)

    c = np.cos(plan.incoming_theta)  # decreasing
    q = wi[..., 2]
    n_in = len(c)
    k1 = np.clip(np.searchsorted(-c, -q), 1, max(n_in - 1, 1)) if n_in > 1 else np.zeros(q.shape, np.intp)
    k0 = np.maximum(k1 - 1, 0)
    if n_in > 1:
        w = _snap(np.clip((c[k0] - q) / (c[k0] - c[k1]), 0.0, 1.0))
    else:
        w = np.zeros_like(q)

    v = table._filled
    t, s, w = t[..., None], s[..., None], w[..., None]

    def slice_value(k):
        a = (1.0 - s) * v[k, i0, j0] + s * v[k, i0, j1]
        b = (1.0 - s) * v[k, i1, j0] + s * v[k, i1, j1]
        return (1.0 - t) * a + t * b

    out = (1.0 - w) * slice_value(k0) + w * slice_value(k1)
    return np.maximum(out, 0.0)


def plan_records(plan):
    """Rows ``(in_theta, in_phi, out_theta, out_phi, u1, u2, valid)`` in entry order."""
    n_in, n = plan.valid.shape[0], plan.grid_n
    inc = plan.incoming
    out = dir_to_spherical(plan.wo)
    rows = []
    for k in range(n_in):
        for i in range(n):
            for j in range(n):
                rows.append((
                    float(inc.theta[k]), float(inc.phi[k]),
                    float(out.theta[k, i, j]), float(out.phi[k, i, j]),
                    float(plan.u1[i]), float(plan.u2[j]), bool(plan.valid[k, i, j]),
                ))
    return rows


def _params_header(plan):
    p = plan.params
    if isinstance(p, WardParams):
        colour = "rho_d=" + ",".join(repr(v) for v in p.rho_d)
    else:
        colour = "albedo=" + ",".join(repr(v) for v in p.albedo)
    return [
        f"# model={plan.model}",
        f"# {colour}",
        f"# alpha={p.alpha!r}",
        f"# w_s={plan.weights.w_s!r}",
        f"# grid_n={plan.grid_n}",
        f"# n_theta_in={len(plan.incoming_theta)}",
    ]


def write_plan(plan, path):
    """Write the gonioreflectometer plan: one ``in_theta in_phi out_theta out_phi u1 u2 valid`` line per entry."""
    lines = _params_header(plan)
    lines.append("# in_theta in_phi out_theta out_phi u1 u2 valid")
    for r in plan_records(plan):
        lines.append(" ".join(f"{v:.9g}" for v in r[:6]) + f" {int(r[6])}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_plan(path):
    """Rebuild a plan from the header of a file written by :func:`write_plan`."""
    from .brdf import LobeWeights

    meta = {}
    n_rows = 0
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, sep, val = line[1:].strip().partition("=")
            if sep:
                meta[key] = val
        elif line.strip():
            if len(line.split()) != 7:
                raise ValueError(f"bad plan row: {line!r}")
            n_rows += 1
    try:
        alpha = float(meta["alpha"])
        if meta["model"] == "ward":
            params = WardParams(tuple(float(v) for v in meta["rho_d"].split(",")), alpha)
        elif meta["model"] == "ggx":
            params = GgxParams(tuple(float(v) for v in meta["albedo"].split(",")), alpha)
        else:
            raise ValueError(f"unknown model {meta['model']!r}")
        plan = plan_measurements(
            params, LobeWeights.specular(float(meta["w_s"])), int(meta["grid_n"]), int(meta["n_theta_in"])
        )
    except KeyError as exc:
        raise ValueError(f"plan header lacks {exc.args[0]!r}") from None
    if plan.n_entries != n_rows:
        raise ValueError(f"plan header promises {plan.n_entries} rows, file has {n_rows}")
    return plan


def write_table(table, path):
    """CSV of the measured values, one row per valid entry."""
    rows = plan_records(table.plan)
    vals = table.values.reshape(-1, 3)
    lines = ["in_theta,in_phi,out_theta,out_phi,r,g,b"]
    for r, v in zip(rows, vals):
        if r[6]:
            lines.append(",".join(f"{x:.17g}" for x in (*r[:4], *v)))
    Path(path).write_text("\n".join(lines) + "\n")
