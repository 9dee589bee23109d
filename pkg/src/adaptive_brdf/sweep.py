"""Sample-count sweep: find the smallest outgoing grid whose render has plateaued."""

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .brdf import WardParams
from .estimator import fit_ward
from .metrics import psnr, rmse
from .render import render_sphere
from .sampler import brdf_function, measure, plan_measurements

__all__ = ["SweepReport", "DEFAULT_SCHEDULE", "run_sweep", "select_plateau", "write_curve_csv", "write_sweep_report"]

DEFAULT_SCHEDULE = tuple(range(2, 33, 2))
DEFAULT_EPSILON = 0.01
# RMSE changes below this are round-off, not improvement
RMSE_FLOOR = 1e-9


@dataclass
class SweepReport:
    schedule: list
    rmse: list
    psnr: list
    millis: list
    selected_n: int
    threshold: float
    plateaued: bool
    n_theta_in: int
    warp_params: object

    @property
    def samples_total(self):
        return [self.n_theta_in * n * n for n in self.schedule]


def _relative_improvements(errors):
    out = []
    for prev, cur in zip(errors[:-1], errors[1:]):
        out.append(0.0 if prev - cur <= RMSE_FLOOR else (prev - cur) / prev)
    return out


def select_plateau(schedule, errors, epsilon=DEFAULT_EPSILON):
    """Index of the smallest grid after which every step improves RMSE by less than ``epsilon``.

    Returns ``(index, plateaued)``. When even the last step still improves by
    ``epsilon`` or more the largest grid is returned with ``plateaued=False``.
    """
    gains = _relative_improvements(list(errors))
    k = len(schedule) - 1
    while k > 0 and gains[k - 1] < epsilon:
        k -= 1
    plateaued = not gains or gains[-1] < epsilon
    return k, plateaued


def run_sweep(reference, scene, warp=None, schedule=DEFAULT_SCHEDULE, epsilon=DEFAULT_EPSILON,
              n_theta_in=8, weights=None, workers=1, timing=True):
    """Measure, reconstruct and render ``reference`` for every grid side in ``schedule``.

    ``warp`` is the analytic model driving the plan; if omitted, Ward
    parameters are fitted to the ground-truth render. Each grid is scored by
    RMSE (linear) and PSNR against that ground truth.
    """
    schedule = [int(n) for n in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be non-empty and strictly increasing")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    f = brdf_function(reference)
    truth = render_sphere(f, scene)
    if warp is None:
        warp = fit_ward(truth, scene).params

    def score(n):
        t0 = time.perf_counter()
        table = measure(plan_measurements(warp, weights, n, n_theta_in), f)
        img = render_sphere(table.eval, scene)
        ms = (time.perf_counter() - t0) * 1e3 if timing else 0.0
        return rmse(img, truth), psnr(img, truth), ms

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(score, schedule))
    else:
        scores = [score(n) for n in schedule]
    errors = [s[0] for s in scores]
    k, plateaued = select_plateau(schedule, errors, epsilon)
    if not plateaued:
        warnings.warn(f"RMSE still improving at N={schedule[-1]}; selecting the largest grid", RuntimeWarning)
    return SweepReport(
        schedule=schedule,
        rmse=errors,
        psnr=[s[1] for s in scores],
        millis=[s[2] for s in scores],
        selected_n=schedule[k],
        threshold=float(epsilon),
        plateaued=plateaued,
        n_theta_in=int(n_theta_in),
        warp_params=warp,
    )


def write_curve_csv(report, path):
    lines = ["n,samples_total,rmse,psnr,millis"]
    for n, total, e, p, ms in zip(report.schedule, report.samples_total, report.rmse, report.psnr, report.millis):
        lines.append(f"{n},{total},{e:.9g},{p:.6f},{ms:.3f}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_sweep_report(report, path):
    p = report.warp_params
    colour = p.rho_d if isinstance(p, WardParams) else p.albedo
    fields = {
        "model": "ward" if isinstance(p, WardParams) else "ggx",
        "colour": ",".join(f"{v:.9g}" for v in colour),
        "alpha": f"{p.alpha:.9g}",
        "n_theta_in": report.n_theta_in,
        "schedule": ",".join(str(n) for n in report.schedule),
        "epsilon": f"{report.threshold:.9g}",
        "selected_n": report.selected_n,
        "selected_samples": report.n_theta_in * report.selected_n ** 2,
        "selected_rmse": f"{report.rmse[report.schedule.index(report.selected_n)]:.9g}",
        "plateaued": int(report.plateaued),
    }
    Path(path).write_text("".join(f"{k}={v}\n" for k, v in fields.items()))
