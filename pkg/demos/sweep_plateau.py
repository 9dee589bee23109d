"""How many measurements are enough?

Sweeps the outgoing grid size for a glossy and a matte material and reports
where the render error stops improving.
"""

import warnings

import numpy as np

from adaptive_brdf import SceneSpec, WardParams, run_sweep

scene = SceneSpec(resolution=64)
albedo = np.array([0.5, 0.4, 0.3])


def matte(wi, wo):
    return np.broadcast_to(albedo / np.pi, wi.shape)


for name, ref in (("glossy", WardParams(0.2, 0.1)), ("matte", matte)):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = run_sweep(ref, scene, schedule=[2, 4, 8, 16, 32], timing=False)
    print(name)
    for n, total, e, q in zip(report.schedule, report.samples_total, report.rmse, report.psnr):
        print(f"  N={n:2d} ({total:5d} samples): RMSE {e:.5f}  PSNR {q:5.2f} dB")
    note = "" if report.plateaued else f" (still improving: {caught[0].message})"
    print(f"  selected N={report.selected_n}{note}")
