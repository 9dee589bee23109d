"""Acceptance gate: one test per criterion, each logging a PASS/FAIL line.

The lines are repeated in the terminal summary of every pytest run.
"""

import math
import struct
import time
import warnings

import numpy as np
import pytest

from adaptive_brdf.brdf import GgxParams, LobeWeights, WardParams, inverse, pdf, sample
from adaptive_brdf.cli import EXIT_OK, main, read_report
from adaptive_brdf.estimator import fit_ggx_alpha, fit_ward
from adaptive_brdf.geom import spherical_to_dir
from adaptive_brdf.merl import N_CELLS, MerlHeaderError, MerlSizeError, merl_lookup, parse_merl, tabulate, write_merl
from adaptive_brdf.metrics import psnr, rmse
from adaptive_brdf.render import SceneSpec, render_sphere
from adaptive_brdf.sweep import DEFAULT_SCHEDULE, run_sweep
from oracles import hemisphere_integral

ALPHAS = (0.05, 0.1, 0.3, 0.8)
SCENE = SceneSpec()  # default point light, 128 x 128


def test_c1_warp_round_trip(acceptance_log):
    rng = np.random.default_rng(1)
    u = rng.random((2, 10_000))
    t0 = time.perf_counter()
    worst = 0.0
    for make in (WardParams, GgxParams):
        for alpha in ALPHAS:
            p = make(0.0, alpha)
            h = sample(p, u[0], u[1])
            worst = max(worst, float(np.max(np.abs(np.stack(inverse(p, h.theta, h.phi)) - u))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 1.0
    acceptance_log("C1 warp round-trip", ok, f"max err {worst:.2e} (< 1e-9), {elapsed:.3f} s (< 1 s)")
    assert ok


def test_c2_pdf_normalization(acceptance_log):
    wi = spherical_to_dir(0.6, 0.0)
    t0 = time.perf_counter()
    worst, where = 0.0, None
    for make in (WardParams, GgxParams):
        for alpha in ALPHAS:
            for w_s in (0.0, 0.5, 1.0):
                p = make(0.0, alpha)
                total = hemisphere_integral(lambda wo: pdf(p, LobeWeights.specular(w_s), wi, wo), 1000)
                if abs(total - 1.0) >= worst:
                    worst, where = abs(total - 1.0), (make.__name__, alpha, w_s)
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.01 and elapsed < 30.0
    acceptance_log(
        "C2 pdf normalization", ok,
        f"2 models x 12 (alpha, w_s), 1e6 samples each: max |I - 1| {worst:.4f} at {where} (<= 0.01), {elapsed:.1f} s (< 30 s)",
    )
    assert ok


def test_c3_merl_format(acceptance_log):
    rng = np.random.default_rng(3)
    data = struct.pack("<3i", 90, 90, 180) + rng.uniform(-1, 5000, 3 * N_CELLS).astype("<f8").tobytes()
    identical = write_merl(parse_merl(data)) == data
    rejected = 0
    for bad, err in ((b"\0" * 100, MerlSizeError), (data[:-1], MerlSizeError),
                     (struct.pack("<3i", 90, 90, 90) + data[12:], MerlHeaderError)):
        try:
            parse_merl(bad)
        except err:
            rejected += 1
    const = parse_merl(struct.pack("<3i", 90, 90, 180) + np.full(3 * N_CELLS, 1500.0).astype("<f8").tobytes())
    d = spherical_to_dir(np.arccos(rng.uniform(0, 1, (2, 2000))), rng.uniform(0, 2 * np.pi, (2, 2000)))
    err = float(np.max(np.abs(merl_lookup(const, d[0], d[1]) - [1.0, 1.15, 1.66])))
    ok = identical and rejected == 3 and err <= 1e-12
    acceptance_log("C3 MERL format", ok, f"round-trip identical={identical}, rejected {rejected}/3, constant lookup err {err:.1e} (<= 1e-12)")
    assert ok


def test_c4_estimator_recovery(acceptance_log):
    t0 = time.perf_counter()
    worst = 0.0
    for rho in (0.1, 0.5, 0.9):
        for alpha in (0.05, 0.2, 0.6):
            target = render_sphere(WardParams(rho, alpha).eval, SCENE)
            p = fit_ward(target, SCENE).params
            worst = max(worst, float(np.max(np.abs(np.subtract((*p.rho_d, p.alpha), (rho, rho, rho, alpha))))))
    tab_worst = 0.0
    for alpha in (0.05, 0.25, 0.6):
        reference = tabulate(GgxParams(0.2, alpha).eval)
        target = render_sphere(reference.eval, SCENE)
        tab_worst = max(tab_worst, abs(fit_ggx_alpha(target, SCENE).params.alpha - alpha))
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.03 and tab_worst <= 0.1 and elapsed < 300.0
    acceptance_log(
        "C4 estimator recovery", ok,
        f"9 Ward fits max err {worst:.4f} (<= 0.03); tabulated GGX max |d alpha| {tab_worst:.4f} (<= 0.1); {elapsed:.0f} s (< 300 s)",
    )
    assert ok


def test_c5_reconstruction_refinement(acceptance_log):
    ref = WardParams(0.2, 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = run_sweep(ref, SCENE, warp=ref, schedule=[2, 4, 8, 16, 32], timing=False)
    e = report.rmse
    rises = [(b - a) / a for a, b in zip(e, e[1:]) if b > a]
    ok = len(rises) <= 1 and all(r <= 0.05 for r in rises) and e[-1] < e[0] / 2
    curve = ", ".join(f"{n}:{v:.5f}" for n, v in zip(report.schedule, e))
    acceptance_log("C5 reconstruction refinement", ok, f"RMSE {curve}; inversions {len(rises)}; RMSE(32)/RMSE(2) = {e[-1] / e[0]:.3f} (< 0.5)")
    assert ok


def test_c6_diffuse_shortcut(acceptance_log):
    albedo = np.array([0.5, 0.4, 0.3])

    def lambertian(wi, wo):
        return np.broadcast_to(albedo / np.pi, np.shape(wi)[:-1] + (3,))

    report = run_sweep(lambertian, SCENE, epsilon=0.01, timing=False)
    ok = report.selected_n == 2
    acceptance_log("C6 diffuse shortcut", ok, f"selected N={report.selected_n} (expected 2), RMSE span {np.ptp(report.rmse):.1e}")
    assert ok


def test_c7_metric_anchor(acceptance_log):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        a = rng.uniform(-0.2, 1.2, (16, 16, 3))
        b = a + rng.normal(0, rng.uniform(0.001, 0.1), a.shape)
        expected = 20 * math.log10(1.0 / rmse(np.clip(a, 0, 1), np.clip(b, 0, 1)))
        worst = max(worst, abs(psnr(a, b) - expected))
    base = np.full((8, 8, 3), 0.5)
    anchor = psnr(base, base + 0.0098)
    ok = worst <= 0.2 and abs(anchor - 40.17) <= 0.2
    acceptance_log("C7 metric anchor", ok, f"max |psnr - 20 log10(1/rmse)| {worst:.1e} dB; rmse 0.0098 -> {anchor:.2f} dB (40.17 +- 0.2)")
    assert ok


def test_c8_determinism(acceptance_log, tmp_path):
    names = [
        "ground_truth.pfm", "ground_truth.png", "reconstruction.pfm", "reconstruction.png",
        "ground_truth_env.pfm", "ground_truth_env.png", "reconstruction_env.pfm", "reconstruction_env.png",
        "fit_report.txt", "plan.txt", "measurements.csv", "metrics.txt",
    ]
    runs = []
    for workers in (1, 4):
        for rep in range(2):
            out = tmp_path / f"w{workers}_{rep}"
            code = main(["pipeline", "--ward", "0.2,0.3,0.4", "0.15", "--resolution", "64", "--grid", "12",
                         "--workers", str(workers), "--out-dir", str(out)])
            assert code == EXIT_OK
            runs.append({n: (out / n).read_bytes() for n in names})
    ok = all(r == runs[0] for r in runs[1:])
    acceptance_log("C8 determinism", ok, f"4 pipeline runs (workers 1 and 4, twice each), {len(names)} files byte-identical={ok}")
    assert ok


def test_c9_performance(acceptance_log):
    ref = WardParams(0.2, 0.1)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = run_sweep(ref, SCENE, schedule=DEFAULT_SCHEDULE)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 60.0 and report.schedule == list(range(2, 33, 2))
    acceptance_log(
        "C9 performance envelope", ok,
        f"fit + 16-point sweep at 128x128 in {elapsed:.1f} s (< 60 s), selected N={report.selected_n}",
    )
    assert ok
