"""Recover analytic BRDF parameters from one rendered sphere image.

The objective is the mean absolute difference between the target and a
render of the candidate parameters under the same scene; it is minimized by
Nelder-Mead restarted from a fixed grid of starting points.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .brdf import GGX_ALPHA_RANGE, WARD_ALPHA_RANGE, GgxParams, WardParams
from .render import check_image, render_sphere, sphere_geometry

__all__ = [
    "FitResult",
    "image_loss_l1",
    "ward_supervised_loss",
    "ggx_supervised_loss",
    "fit_ward",
    "fit_ggx_alpha",
    "estimate_albedo",
    "START_RHO",
    "START_ALPHA",
]

START_RHO = np.linspace(0.1, 0.9, 4)
START_ALPHA = np.linspace(0.05, 0.8, 4)
FATOL = 1e-5
XATOL = 1e-4
MAX_ITER = 500
# Ward lobes wider than this are indistinguishable from diffuse in the image
# and reflect most of a warped lattice below the horizon
WARD_FIT_ALPHA_MAX = 1.0
# losses closer than this are ties (flat directions, e.g. alpha of a purely diffuse target)
TIE_TOL = 1e-12


@dataclass
class FitResult:
    params: object
    final_loss: float
    iterations: int
    converged: bool
    loss_history: list = field(default_factory=list, repr=False)


def image_loss_l1(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)))


def ward_supervised_loss(img_hat, img, p_hat, p):
    """Image L1 plus L1 distance between ``(rho_d, alpha)`` vectors."""
    d = np.abs(np.subtract((*p_hat.rho_d, p_hat.alpha), (*p.rho_d, p.alpha)))
    return image_loss_l1(img_hat, img) + float(np.sum(d))


def ggx_supervised_loss(img_hat, img, alpha_hat, alpha):
    """Image L1 plus squared error of the roughness."""
    return image_loss_l1(img_hat, img) + float((alpha_hat - alpha) ** 2)


class _Objective:
    # Wraps the image loss and records the best value seen so far.

    def __init__(self, target, scene, make_params):
        self.target = target
        self.scene = scene
        self.make_params = make_params
        self.history = []
        self.best = np.inf

    def __call__(self, x):
        p = self.make_params(x)
        loss = image_loss_l1(render_sphere(p.eval, self.scene), self.target)
        self.best = min(self.best, loss)
        self.history.append(self.best)
        return loss


def _nelder_mead(objective, x0, bounds):
    res = minimize(
        objective,
        np.asarray(x0, dtype=float),
        method="Nelder-Mead",
        bounds=bounds,
        options={"maxiter": MAX_ITER, "xatol": XATOL, "fatol": FATOL},
    )
    return res


def _multistart(target, scene, make_params, starts, bounds, workers):
    def run(x0):
        obj = _Objective(target, scene, make_params)
        res = _nelder_mead(obj, x0, bounds)
        return res, obj

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run, starts))
    else:
        runs = [run(x0) for x0 in starts]
    # deterministic reduction: lowest loss, then lowest start index
    low = min(float(r.fun) for r, _ in runs)
    best = min(k for k, (r, _) in enumerate(runs) if float(r.fun) <= low + TIE_TOL)
    res, obj = runs[best]
    iterations = sum(int(r.nit) for r, _ in runs)

    # one restart from the winner guards against a collapsed simplex
    polish = _Objective(target, scene, make_params)
    res2 = _nelder_mead(polish, res.x, bounds)
    iterations += int(res2.nit)
    history = list(obj.history)
    tail = [min(history[-1], v) for v in polish.history]
    history.extend(tail)
    final = res2 if res2.fun < res.fun - TIE_TOL else res
    params = make_params(final.x)
    loss = image_loss_l1(render_sphere(params.eval, scene), target)
    return FitResult(params, loss, iterations, bool(final.success), history)


def _ward_from_x(x):
    return WardParams(tuple(x[:3]), x[3])


def fit_ward(target, scene, workers=1):
    """Fit Ward ``(rho_d, alpha)`` to ``target`` rendered under ``scene``.

    The roughness search stops at ``WARD_FIT_ALPHA_MAX``; a non-white diffuse
    target lands there rather than at the type's upper clamp.
    If the fitted specular weight is zero in every channel the roughness does
    not affect the image; it is then reported as ``START_ALPHA[0]`` rather
    than wherever the simplex drifted.
    """
    target = check_image(target)
    _check_size(target, scene)
    starts = [(r, r, r, a) for r in START_RHO for a in START_ALPHA]
    bounds = [(0.0, 1.0)] * 3 + [(WARD_ALPHA_RANGE[0], WARD_FIT_ALPHA_MAX)]
    result = _multistart(target, scene, _ward_from_x, starts, bounds, workers)
    if max(result.params.rho_s) == 0.0:
        result.params = WardParams(result.params.rho_d, float(START_ALPHA[0]))
    return result


def estimate_albedo(target, scene, specular=None):
    """Per-channel diffuse albedo of a sphere image.

    Without ``specular`` this is the darkest-decile heuristic: reflectance
    (pixel over irradiance) of the darkest tenth of lit pixels, averaged and
    multiplied by ``pi``. With a known specular term ``specular(wi, wo)`` the
    albedo is the least-squares solution of
    ``pixel = (albedo / pi + specular) * irradiance`` over all lit pixels.
    """
    geo = sphere_geometry(scene)
    lit = geo.irradiance[:, 0] > 1e-6 * max(scene.light_intensity)
    pix = target[geo.mask][lit]
    irr = geo.irradiance[lit]
    if specular is None:
        refl = pix / irr
        order = np.argsort(np.sum(refl, axis=1), kind="stable")
        albedo = np.mean(refl[order[: max(1, len(order) // 10)]], axis=0) * np.pi
    else:
        resid = pix - np.asarray(specular(geo.wi[lit], geo.wo[lit])) * irr
        albedo = np.pi * np.sum(irr * resid, axis=0) / np.sum(irr * irr, axis=0)
    return tuple(float(v) for v in np.clip(albedo, 0.0, 1.0))


def fit_ggx_alpha(target, scene, albedo=None, max_rounds=8, tol=1e-4, workers=1):
    """Fit the GGX roughness with the albedo held fixed.

    Without ``albedo`` it starts from the darkest-decile estimate and
    alternates: fit ``alpha``, re-solve the albedo against the fitted lobe,
    until the albedo moves less than ``tol`` or ``max_rounds`` is reached.
    """
    target = check_image(target)
    _check_size(target, scene)
    fixed = albedo is not None
    alb = tuple(np.broadcast_to(np.asarray(albedo, dtype=float), (3,))) if fixed else estimate_albedo(target, scene)
    starts = [(a,) for a in START_ALPHA]
    iterations = 0
    history = []
    for _ in range(1 if fixed else max_rounds):
        current = alb
        result = _multistart(target, scene, lambda x: GgxParams(current, x[0]), starts, [GGX_ALPHA_RANGE], workers)
        iterations += result.iterations
        history.extend(min(v, history[-1]) if history else v for v in result.loss_history)
        if fixed:
            break
        spec = GgxParams((0.0, 0.0, 0.0), result.params.alpha)
        alb = estimate_albedo(target, scene, specular=spec.eval)
        if max(abs(a - b) for a, b in zip(alb, current)) < tol:
            break
    result.iterations = iterations
    result.loss_history = history
    return result


def _check_size(target, scene):
    if target.shape[:2] != (scene.resolution, scene.resolution):
        raise ValueError(f"target is {target.shape[:2]}, scene renders {scene.resolution}x{scene.resolution}")
