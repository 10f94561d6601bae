import numpy as np
import pytest

from camscript.dmr import DirectionSpec, MotionPrimitive, TrajectoryScript


def prim(a, b, speed="medium", angle=None, radial=None, rotate="none", degrees=None):
    return MotionPrimitive(a, b, speed, DirectionSpec(angle, radial), rotate, degrees)


@pytest.fixture
def right_script():
    return TrajectoryScript((prim(0.0, 1.0, angle=0.0),))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ascii_ply(tmp_path):
    path = tmp_path / "tri.ply"
    path.write_text(
        "ply\nformat ascii 1.0\ncomment fixture\nelement vertex 3\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"
        "0 0 0 255 0 0\n1.5 -2 0.25 0 255 0\n-1 2 3 0 0 255\n"
    )
    return path


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(RESULTS):
        terminalreporter.write_line(line)
