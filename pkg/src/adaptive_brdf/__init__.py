"""Image-driven adaptive BRDF measurement planning and simulation.

Modules
-------
geom       directions, half vectors, half/difference angles
brdf       Ward and GGX models with importance-sampling warps and inverses
merl       MERL isotropic table I/O and lookup
render     orthographic sphere renderer (point light, gradient dome)
metrics    RMSE and PSNR
imageio    PFM and PNG files
estimator  inverse rendering of model parameters from a sphere image
sampler    measurement plans, virtual measurement, reconstruction
sweep      sample-count sweep and plateau selection
"""

from .brdf import GgxParams, LobeWeights, WardParams, ggx_eval, pdf, ward_eval
from .estimator import FitResult, fit_ggx_alpha, fit_ward, image_loss_l1
from .imageio import read_pfm, write_pfm, write_png
from .merl import MerlBrdf, merl_lookup, parse_merl, read_merl, tabulate, write_merl
from .metrics import psnr, rmse
from .render import EnvironmentLight, SceneSpec, render_sphere, render_sphere_env
from .sampler import MeasurementPlan, MeasurementTable, measure, plan_measurements, reconstruct_eval
from .sweep import SweepReport, run_sweep

__version__ = "0.1.0"

__all__ = [
    "WardParams", "GgxParams", "LobeWeights", "ward_eval", "ggx_eval", "pdf",
    "FitResult", "fit_ward", "fit_ggx_alpha", "image_loss_l1",
    "read_pfm", "write_pfm", "write_png",
    "MerlBrdf", "merl_lookup", "parse_merl", "read_merl", "write_merl", "tabulate",
    "psnr", "rmse",
    "SceneSpec", "EnvironmentLight", "render_sphere", "render_sphere_env",
    "MeasurementPlan", "MeasurementTable", "plan_measurements", "measure", "reconstruct_eval",
    "SweepReport", "run_sweep",
]
