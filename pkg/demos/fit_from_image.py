"""Recover material parameters from one rendered sphere.

Renders Ward and GGX spheres under the default point light, then fits the
parameters back from the images alone.
"""

import time

from adaptive_brdf import GgxParams, SceneSpec, WardParams, fit_ggx_alpha, fit_ward, render_sphere

scene = SceneSpec(resolution=64)

truth = WardParams((0.3, 0.5, 0.7), 0.15)
t0 = time.perf_counter()
res = fit_ward(render_sphere(truth.eval, scene), scene)
print("Ward truth ", truth)
print("Ward fit   ", res.params)
print(f"  loss {res.final_loss:.2e} after {res.iterations} evaluations, {time.perf_counter() - t0:.1f} s")

truth = GgxParams(0.25, 0.3)
res = fit_ggx_alpha(render_sphere(truth.eval, scene), scene)
print("GGX truth  ", truth)
print("GGX fit    ", res.params)
