import numpy as np
import pytest

from adaptive_brdf.merl import N_CELLS, SCALE, MerlBrdf, save_merl
from adaptive_brdf.render import SceneSpec

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def small_scene():
    return SceneSpec(resolution=64)


@pytest.fixture(scope="session")
def constant_merl():
    # every stored value is 1500 before per-channel scaling
    raw = np.full(3 * N_CELLS, 1500.0)
    return MerlBrdf(raw)


@pytest.fixture(scope="session")
def constant_merl_file(tmp_path_factory, constant_merl):
    path = tmp_path_factory.mktemp("merl") / "constant.binary"
    save_merl(constant_merl, path)
    return path


@pytest.fixture(scope="session")
def merl_scale():
    return np.asarray(SCALE)


@pytest.fixture
def acceptance_log():
    def log(tag, ok, detail):
        line = f"{tag}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
