"""Plan, simulate and score adaptive BRDF measurements from the command line.

Exit codes: 0 success, 2 bad arguments, 3 input I/O failure, 4 parse or
validation failure. Reports are ``key=value`` lines; curves are CSV.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .brdf import GgxParams, WardParams
from .estimator import fit_ggx_alpha, fit_ward, image_loss_l1
from .imageio import PfmFormatError, read_pfm, write_pfm, write_png
from .merl import MerlFormatError, read_merl
from .metrics import psnr, rmse
from .render import EnvironmentLight, SceneSpec, render_sphere, render_sphere_env
from .sampler import measure, plan_measurements, read_plan, write_plan, write_table
from .sweep import DEFAULT_EPSILON, DEFAULT_SCHEDULE, run_sweep, write_curve_csv, write_sweep_report

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4


class UsageError(Exception):
    pass


def format_report(fields):
    return "".join(f"{k}={v}\n" for k, v in fields.items())


def parse_report(text):
    out = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed report line {line!r}")
        out[key.strip()] = value.strip()
    return out


def read_report(path):
    return parse_report(Path(path).read_text())


def _fmt(v):
    return f"{v:.9g}"


def _triple(values):
    return ",".join(_fmt(v) for v in values)


def params_fields(params):
    if isinstance(params, WardParams):
        return {"model": "ward", "rho_d": _triple(params.rho_d), "alpha": _fmt(params.alpha)}
    return {"model": "ggx", "albedo": _triple(params.albedo), "alpha": _fmt(params.alpha)}


def params_from_fields(fields):
    model = fields.get("model")
    try:
        alpha = float(fields["alpha"])
        if model == "ward":
            return WardParams(_parse_rgb(fields["rho_d"]), alpha)
        if model == "ggx":
            return GgxParams(_parse_rgb(fields["albedo"]), alpha)
    except KeyError as exc:
        raise ValueError(f"report lacks field {exc.args[0]!r}") from None
    raise ValueError(f"unknown model {model!r}")


def _parse_rgb(text):
    vals = [float(v) for v in str(text).split(",")]
    if len(vals) == 1:
        vals = vals * 3
    if len(vals) != 3:
        raise ValueError(f"expected one or three comma-separated values, got {text!r}")
    return tuple(vals)


def _rgb_arg(text):
    try:
        return _parse_rgb(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _scene(args):
    if not 16 <= args.resolution <= 1024:
        raise UsageError("--resolution must lie in [16, 1024]")
    return SceneSpec(tuple(args.light_pos), args.light_intensity, args.resolution)


def _material(args, required=True):
    """Reference material from --merl / --ward / --ggx."""
    if args.merl is not None:
        return read_merl(args.merl)
    if args.ward is not None:
        return WardParams(_parse_rgb(args.ward[0]), float(args.ward[1]))
    if args.ggx is not None:
        return GgxParams(_parse_rgb(args.ggx[0]), float(args.ggx[1]))
    if required:
        raise UsageError("a material is required: --merl PATH, --ward RHO ALPHA or --ggx ALBEDO ALPHA")
    return None


def _check_grid(args):
    if not 2 <= args.grid <= 64:
        raise UsageError("--grid must lie in [2, 64]")
    if not 1 <= args.theta_in <= 32:
        raise UsageError("--theta-in must lie in [1, 32]")


def _fit(image, scene, model, albedo, workers):
    if model == "ward":
        return fit_ward(image, scene, workers=workers)
    return fit_ggx_alpha(image, scene, albedo=albedo, workers=workers)


def fit_fields(result, scene):
    fields = params_fields(result.params)
    fields.update(
        final_loss=_fmt(result.final_loss),
        iterations=result.iterations,
        converged=int(result.converged),
        resolution=scene.resolution,
        light_position=_triple(scene.light_position),
        light_intensity=_triple(scene.light_intensity),
    )
    return fields


def _save_image(img, stem):
    write_pfm(img, f"{stem}.pfm")
    write_png(img, f"{stem}.png")


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_fit(args):
    image = read_pfm(args.image)
    scene = _scene(args)
    result = _fit(image, scene, args.model, args.albedo, args.workers)
    _emit(format_report(fit_fields(result, scene)), args.out)


def _warp(args):
    if args.params is not None:
        return params_from_fields(read_report(args.params))
    mat = _material(args, required=False)
    if isinstance(mat, (WardParams, GgxParams)):
        return mat
    raise UsageError("plan needs analytic warp parameters: --params REPORT, --ward or --ggx")


def cmd_plan(args):
    _check_grid(args)
    plan = plan_measurements(_warp(args), n_out=args.grid, n_theta_in=args.theta_in)
    write_plan(plan, args.out)


def cmd_measure(args):
    plan = read_plan(args.plan)
    reference = _material(args)
    write_table(measure(plan, reference), args.out)


def cmd_render(args):
    reference = _material(args)
    scene = _scene(args)
    if args.env:
        img = render_sphere_env(reference.eval, scene, EnvironmentLight(), workers=args.workers)
    else:
        img = render_sphere(reference.eval, scene, workers=args.workers)
    out = Path(args.out)
    if out.suffix.lower() == ".png":
        write_png(img, out)
    else:
        write_pfm(img, out)


def cmd_compare(args):
    a = read_pfm(args.a)
    b = read_pfm(args.b)
    fields = {"rmse": _fmt(rmse(a, b)), "psnr": _fmt(psnr(a, b)), "l1": _fmt(image_loss_l1(a, b))}
    _emit(format_report(fields), args.out)


def _default_model(reference, requested):
    if requested is not None:
        return requested
    return "ward" if isinstance(reference, WardParams) else "ggx"


def cmd_sweep(args):
    reference = _material(args)
    scene = _scene(args)
    schedule = args.schedule or list(DEFAULT_SCHEDULE)
    if any(not 2 <= n <= 64 for n in schedule):
        raise UsageError("schedule entries must lie in [2, 64]")
    if not 0.0 < args.epsilon < 1.0:
        raise UsageError("--epsilon must lie in (0, 1)")
    truth = render_sphere(reference.eval, scene, workers=args.workers)
    warp = _fit(truth, scene, _default_model(reference, args.model), None, args.workers).params
    report = run_sweep(reference, scene, warp, schedule, args.epsilon, args.theta_in,
                       workers=args.workers, timing=args.timing)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_curve_csv(report, out / "curve.csv")
    write_sweep_report(report, out / "sweep_report.txt")


def cmd_pipeline(args):
    _check_grid(args)
    reference = _material(args)
    scene = _scene(args)
    model = _default_model(reference, args.model)

    truth = render_sphere(reference.eval, scene, workers=args.workers)
    fit = _fit(truth, scene, model, None, args.workers)
    plan = plan_measurements(fit.params, n_out=args.grid, n_theta_in=args.theta_in)
    table = measure(plan, reference)
    recon = render_sphere(table.eval, scene, workers=args.workers)
    env = EnvironmentLight()
    recon_env = render_sphere_env(table.eval, scene, env, workers=args.workers)
    truth_env = render_sphere_env(reference.eval, scene, env, workers=args.workers)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _save_image(truth, out / "ground_truth")
    _save_image(recon, out / "reconstruction")
    _save_image(truth_env, out / "ground_truth_env")
    _save_image(recon_env, out / "reconstruction_env")
    (out / "fit_report.txt").write_text(format_report(fit_fields(fit, scene)))
    write_plan(plan, out / "plan.txt")
    write_table(table, out / "measurements.csv")
    metrics = {
        "grid_n": args.grid,
        "n_theta_in": args.theta_in,
        "entries": plan.n_entries,
        "valid_entries": plan.n_valid,
        "rmse": _fmt(rmse(recon, truth)),
        "psnr": _fmt(psnr(recon, truth)),
        "env_rmse": _fmt(rmse(recon_env, truth_env)),
        "env_psnr": _fmt(psnr(recon_env, truth_env)),
    }
    (out / "metrics.txt").write_text(format_report(metrics))


def _add_scene(p):
    p.add_argument("--light-pos", type=float, nargs=3, default=(2.0, 2.0, 4.0), metavar=("X", "Y", "Z"))
    p.add_argument("--light-intensity", type=_rgb_arg, default=(20.0, 20.0, 20.0), metavar="I[,G,B]")
    p.add_argument("--resolution", type=int, default=128)
    p.add_argument("--workers", type=int, default=1)


def _add_material(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--merl", metavar="PATH", help="MERL binary table")
    g.add_argument("--ward", nargs=2, metavar=("RHO_D", "ALPHA"), help="analytic Ward material")
    g.add_argument("--ggx", nargs=2, metavar=("ALBEDO", "ALPHA"), help="analytic GGX material")


def _add_grid(p):
    p.add_argument("--grid", type=int, default=16, help="outgoing grid side N")
    p.add_argument("--theta-in", type=int, default=8, help="number of incoming polar angles")


def build_parser():
    parser = argparse.ArgumentParser(prog="adaptive-brdf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="estimate model parameters from a PFM sphere image")
    p.add_argument("--image", required=True)
    p.add_argument("--model", choices=("ward", "ggx"), default="ward")
    p.add_argument("--albedo", type=_rgb_arg, help="fixed GGX albedo (default: estimated)")
    p.add_argument("--out", help="report path (default: stdout)")
    _add_scene(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("plan", help="write a gonioreflectometer direction plan")
    p.add_argument("--params", help="fit report providing the warp parameters")
    _add_material(p)
    _add_grid(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("measure", help="virtually measure a material at a plan's directions")
    p.add_argument("--plan", required=True)
    _add_material(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("render", help="render a material on the sphere")
    _add_material(p)
    _add_scene(p)
    p.add_argument("--env", action="store_true", help="light with the gradient dome instead of the point light")
    p.add_argument("--out", required=True, help=".pfm or .png")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("compare", help="RMSE / PSNR between two PFM images")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="sample-count sweep and plateau selection")
    _add_material(p)
    _add_scene(p)
    p.add_argument("--model", choices=("ward", "ggx"))
    p.add_argument("--theta-in", type=int, default=8)
    p.add_argument("--schedule", type=int, nargs="+")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--timing", action="store_true", help="record wall-clock millis (makes the CSV run-dependent)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pipeline", help="fit, plan, measure, reconstruct, render and score")
    _add_material(p)
    _add_scene(p)
    _add_grid(p)
    p.add_argument("--model", choices=("ward", "ggx"))
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MerlFormatError, PfmFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
