import numpy as np
import pytest

from adaptive_brdf.brdf import WardParams
from adaptive_brdf.cli import (
    EXIT_IO,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_USAGE,
    fit_fields,
    format_report,
    main,
    params_from_fields,
    parse_report,
    read_report,
)
from adaptive_brdf.estimator import FitResult
from adaptive_brdf.imageio import read_pfm
from adaptive_brdf.render import SceneSpec

SMALL = ["--resolution", "32"]


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def target(tmp_path_factory):
    path = tmp_path_factory.mktemp("fit") / "target.pfm"
    assert run("render", "--ward", "0.5", "0.2", "--resolution", "64", "--out", path) == EXIT_OK
    return path


def test_fit_self_rendered_target(target, tmp_path):
    out = tmp_path / "fit.txt"
    assert run("fit", "--image", target, "--resolution", "64", "--out", out) == EXIT_OK
    fields = read_report(out)
    p = params_from_fields(fields)
    assert np.max(np.abs(np.subtract(p.rho_d, 0.5))) <= 0.02 and abs(p.alpha - 0.2) <= 0.02
    assert fields["resolution"] == "64" and float(fields["final_loss"]) >= 0.0


def test_fit_report_to_stdout(target, capsys):
    assert run("fit", "--image", target, "--resolution", "64", "--model", "ggx", "--albedo", "0.5") == EXIT_OK
    fields = parse_report(capsys.readouterr().out)
    assert fields["model"] == "ggx" and fields["albedo"] == "0.5,0.5,0.5"


def test_report_round_trip():
    scene = SceneSpec(resolution=48)
    res = FitResult(WardParams((0.123456789, 0.5, 0.9), 0.0734), 0.00123, 42, True)
    fields = fit_fields(res, scene)
    back = parse_report(format_report(fields))
    assert back == {k: str(v) for k, v in fields.items()}
    assert params_from_fields(back) == res.params


def test_report_parse_errors():
    with pytest.raises(ValueError):
        parse_report("model ward\n")
    with pytest.raises(ValueError):
        params_from_fields({"model": "phong", "alpha": "0.1"})
    with pytest.raises(ValueError):
        params_from_fields({"model": "ward"})


def test_missing_input_leaves_no_output(tmp_path):
    out = tmp_path / "fit.txt"
    assert run("fit", "--image", tmp_path / "nope.pfm", "--out", out) == EXIT_IO
    assert not out.exists()
    assert run("pipeline", "--merl", tmp_path / "nope.binary", "--out-dir", tmp_path / "pl") == EXIT_IO
    assert not (tmp_path / "pl").exists()
    assert run("sweep", "--merl", tmp_path / "nope.binary", "--out-dir", tmp_path / "sw") == EXIT_IO
    assert not (tmp_path / "sw").exists()


def test_malformed_inputs(tmp_path):
    bad = tmp_path / "bad.pfm"
    bad.write_bytes(b"P6\n1 1\n255\n\0\0\0")
    assert run("fit", "--image", bad, "--out", tmp_path / "r.txt") == EXIT_PARSE
    merl = tmp_path / "short.binary"
    merl.write_bytes(b"\0" * 100)
    assert run("pipeline", "--merl", merl, "--out-dir", tmp_path / "pl") == EXIT_PARSE
    assert not (tmp_path / "pl").exists()


def test_fit_size_mismatch(target, tmp_path):
    assert run("fit", "--image", target, "--resolution", "32", "--out", tmp_path / "r.txt") == EXIT_PARSE


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["render", "--ward", "0.5", "0.2", "--resolution", "8", "--out", "x.pfm"],
        ["render", "--ward", "0.5", "0.2", "--resolution", "2048", "--out", "x.pfm"],
        ["render", "--out", "x.pfm"],
        ["plan", "--ward", "0.5", "0.2", "--grid", "1", "--out", "p.txt"],
        ["plan", "--ward", "0.5", "0.2", "--grid", "65", "--out", "p.txt"],
        ["plan", "--ward", "0.5", "0.2", "--theta-in", "0", "--out", "p.txt"],
        ["plan", "--out", "p.txt"],
        ["sweep", "--ward", "0.5", "0.2", "--schedule", "1", "4", "--out-dir", "s"],
        ["sweep", "--ward", "0.5", "0.2", "--epsilon", "2", "--out-dir", "s"],
        ["fit", "--image", "x.pfm", "--light-intensity", "1,2"],
        ["render", "--ward", "0.5", "0.2", "--merl", "m.binary", "--out", "x.pfm"],
    ],
)
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == EXIT_USAGE
    assert list(tmp_path.iterdir()) == []


def test_help_exits_ok(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "pipeline" in capsys.readouterr().out


def test_plan_and_measure(tmp_path, constant_merl_file):
    plan = tmp_path / "plan.txt"
    assert run("plan", "--ward", "0.2", "0.1", "--grid", "4", "--theta-in", "2", "--out", plan) == EXIT_OK
    rows = [ln for ln in plan.read_text().splitlines() if not ln.startswith("#")]
    assert len(rows) == 2 * 16
    table = tmp_path / "m.csv"
    assert run("measure", "--plan", plan, "--merl", constant_merl_file, "--out", table) == EXIT_OK
    vals = np.array([ln.split(",") for ln in table.read_text().splitlines()[1:]], dtype=float)
    assert len(vals) == 32
    np.testing.assert_allclose(vals[:, 4:], np.tile([1.0, 1.15, 1.66], (32, 1)), atol=1e-12)


def test_plan_from_fit_report(tmp_path):
    report = tmp_path / "fit.txt"
    report.write_text(format_report({"model": "ggx", "albedo": "0.1,0.2,0.3", "alpha": "0.3"}))
    plan = tmp_path / "plan.txt"
    assert run("plan", "--params", report, "--grid", "3", "--out", plan) == EXIT_OK
    assert "# model=ggx" in plan.read_text()


def test_render_and_compare(tmp_path, capsys):
    a, b = tmp_path / "a.pfm", tmp_path / "b.png"
    assert run("render", "--ggx", "0.3", "0.2", *SMALL, "--out", a) == EXIT_OK
    assert run("render", "--ggx", "0.3", "0.2", *SMALL, "--env", "--out", b) == EXIT_OK
    assert b.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert read_pfm(a).shape == (32, 32, 3)
    assert run("compare", a, a) == EXIT_OK
    fields = parse_report(capsys.readouterr().out)
    assert fields == {"rmse": "0", "psnr": "99", "l1": "0"}


def test_sweep_command(tmp_path):
    out = tmp_path / "sw"
    assert run("sweep", "--ward", "1.0", "0.3", *SMALL, "--schedule", "2", "4", "8", "--out-dir", out) == EXIT_OK
    fields = read_report(out / "sweep_report.txt")
    assert fields["selected_n"] == "2" and fields["plateaued"] == "1"
    lines = (out / "curve.csv").read_text().splitlines()
    assert lines[0] == "n,samples_total,rmse,psnr,millis" and len(lines) == 4
    first = (out / "curve.csv").read_bytes()
    assert run("sweep", "--ward", "1.0", "0.3", *SMALL, "--schedule", "2", "4", "8", "--out-dir", out) == EXIT_OK
    assert (out / "curve.csv").read_bytes() == first


PIPELINE_FILES = [
    "ground_truth.pfm", "ground_truth.png", "reconstruction.pfm", "reconstruction.png",
    "ground_truth_env.pfm", "ground_truth_env.png", "reconstruction_env.pfm", "reconstruction_env.png",
    "fit_report.txt", "plan.txt", "measurements.csv", "metrics.txt",
]


def test_pipeline_constant_merl_is_exact(tmp_path, constant_merl_file):
    out = tmp_path / "pl"
    assert run("pipeline", "--merl", constant_merl_file, *SMALL, "--grid", "4", "--out-dir", out) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == sorted(PIPELINE_FILES)
    m = read_report(out / "metrics.txt")
    assert float(m["psnr"]) == 99.0 and float(m["rmse"]) < 1e-12
    assert float(m["env_psnr"]) == 99.0
    assert m["entries"] == str(8 * 16)


def test_pipeline_is_deterministic(tmp_path):
    outs = []
    for k, workers in enumerate((1, 2)):
        out = tmp_path / f"pl{k}"
        argv = ("pipeline", "--ggx", "0.2", "0.3", *SMALL, "--grid", "6", "--workers", workers, "--out-dir", out)
        assert run(*argv) == EXIT_OK
        outs.append({name: (out / name).read_bytes() for name in PIPELINE_FILES})
    assert outs[0] == outs[1]


def test_pipeline_ward_default_scene(tmp_path):
    out = tmp_path / "pl"
    assert run("pipeline", "--ward", "0.2", "0.1", "--grid", "16", "--out-dir", out) == EXIT_OK
    m = read_report(out / "metrics.txt")
    assert float(m["psnr"]) > 30.0
    assert read_pfm(out / "ground_truth.pfm").shape == (128, 128, 3)
