import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from camscript.dmr import DirectionSpec, ScriptValidationError, TrajectoryScript
from camscript.planner import (
    PlanConfig,
    SphericalTrajectory,
    frame_count,
    jsonl_to_trajectory,
    plan,
    rescale_factor,
    rotation_track,
    step_increment,
    trajectory_to_jsonl,
)

from conftest import prim


def accumulate_oracle(step, n, start=0.0):
    """Plain running sum, frame by frame."""
    out = [start]
    for _ in range(n):
        out.append(out[-1] + step)
    return out


@pytest.mark.parametrize("fps,dur,expected", [(10, 1.0, 10), (25, 0.0, 0), (25, 0.5, 12), (5, 0.3, 2)])
def test_frame_count(fps, dur, expected):
    assert frame_count(fps, dur) == expected


def test_step_increment_examples():
    cfg = PlanConfig(fps=30)
    assert step_increment("medium", DirectionSpec(0.0), cfg) == (1.0, 0.0, 0.0)
    assert step_increment("high", DirectionSpec(90.0), cfg) == (0.0, -2.0, 0.0)
    assert step_increment("low", DirectionSpec(None, "zoom_in"), cfg) == (0.0, 0.0, pytest.approx(-0.005, abs=1e-15))


def test_speed_doubling():
    cfg = PlanConfig(fps=25)
    d = DirectionSpec(33.0, "zoom_out")
    lo, med, hi = (step_increment(s, d, cfg) for s in ("low", "medium", "high"))
    assert np.allclose(np.array(med) * 2, hi, rtol=0, atol=1e-15)
    assert np.allclose(np.array(lo) * 2, med, rtol=0, atol=1e-15)


def test_rotation_track_examples():
    assert rotation_track(90.0, 1, 100, 100) == [(90.0, 1.0)]
    (_, s), = rotation_track(45.0, 1, 100, 100)
    assert abs(s - 1 / math.sqrt(2)) < 1e-12
    assert rotation_track(90.0, 1, 2, 1)[0][1] == 0.5
    assert rescale_factor(0.0, 640, 360) == 1.0
    with pytest.raises(ValueError):
        rotation_track(45.0, 0, 10, 10)


@given(st.floats(-720, 720, allow_nan=False), st.integers(1, 4000), st.integers(1, 4000))
def test_rescale_in_unit_interval(angle, w, h):
    s = rescale_factor(angle, w, h)
    assert 0.0 < s <= 1.0
    # the rotated, rescaled frame fits
    c, sn = abs(math.cos(math.radians(angle))), abs(math.sin(math.radians(angle)))
    assert (w * c + h * sn) * s <= w * (1 + 1e-9)
    assert (w * sn + h * c) * s <= h * (1 + 1e-9)


def test_plan_matches_accumulation_oracle(right_script):
    traj = plan(right_script, PlanConfig(fps=5))
    assert [s.phi for s in traj.samples] == accumulate_oracle(6.0, 5) == [0, 6, 12, 18, 24, 30]
    assert all(s.theta == 90.0 and s.radius == 2.0 for s in traj.samples)


def test_gap_holds_pose():
    s = TrajectoryScript((prim(0, 1, angle=0.0), prim(3, 4, angle=90.0)))
    traj = plan(s, PlanConfig(fps=5))
    held = traj.samples[5]
    for k in range(6, 16):
        t = traj.samples[k]
        assert (t.phi, t.theta, t.radius, t.roll) == (held.phi, held.theta, held.radius, held.roll)
    assert traj.samples[16].theta == 84.0


def test_pure_rotation_track():
    s = TrajectoryScript((prim(0, 0.5, rotate="cw", degrees=45.0),))
    traj = plan(s, PlanConfig(fps=10))
    assert [t.roll for t in traj.samples[1:]] == [-9.0, -18.0, -27.0, -36.0, -45.0]
    assert all((t.phi, t.theta, t.radius) == (0.0, 90.0, 2.0) for t in traj.samples)


def test_roll_accumulates_and_scale_persists():
    s = TrajectoryScript((prim(0, 1, rotate="ccw", degrees=45.0), prim(1, 2, angle=0.0)))
    traj = plan(s, PlanConfig(fps=5), (100, 100))
    assert traj.samples[5].roll == 45.0
    assert traj.samples[-1].roll == 45.0
    assert traj.samples[-1].scale == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_clamps():
    s = TrajectoryScript((prim(0, 10, "high", 90.0), prim(10, 20, "high", radial="zoom_in")))
    traj = plan(s, PlanConfig(fps=5))
    assert min(t.theta for t in traj.samples) == 1.0
    assert min(t.radius for t in traj.samples) == pytest.approx(0.1)


def test_invalid_script_propagates():
    with pytest.raises(ScriptValidationError):
        plan(TrajectoryScript((prim(0, 1, angle=0.0), prim(0.5, 2, angle=90.0))))


def test_additivity():
    a, b = prim(0, 1, "high", 30.0, "zoom_in"), prim(1, 2, "low", 200.0)
    cfg = PlanConfig(fps=10)
    whole = plan(TrajectoryScript((a, b)), cfg)
    first = plan(TrajectoryScript((a,)), cfg)
    end = first.samples[-1]
    second = plan(TrajectoryScript((prim(0, 1, "low", 200.0),)),
                  PlanConfig(fps=10, initial_pose=(end.phi, end.theta, end.radius)))
    assert np.allclose(whole.to_array()[10:, :3], second.to_array()[:, :3], atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.floats(0.0, 6.0).map(lambda x: round(x, 1)))
def test_frame_count_identity(fps, dur):
    s = TrajectoryScript((prim(0, 1, angle=0.0),), total_duration=max(dur, 1.0))
    traj = plan(s, PlanConfig(fps=fps))
    assert len(traj) == frame_count(fps, s.total_duration) + 1


def test_subsample_and_arrays(right_script):
    traj = plan(right_script, PlanConfig(fps=25))
    sub = traj.subsample(5)
    assert sub.fps == 5 and len(sub) == 6
    assert [s.phi for s in sub.samples] == pytest.approx([0, 6, 12, 18, 24, 30])
    with pytest.raises(ValueError):
        traj.subsample(4)
    again = SphericalTrajectory.from_array(traj.to_array(), traj.config, traj.image_dims)
    assert np.array_equal(again.to_array(), traj.to_array())


def test_jsonl_round_trip():
    s = TrajectoryScript((prim(0, 2, "high", 37.3, "zoom_out", "ccw", 60.0),))
    traj = plan(s, PlanConfig(fps=5))
    back = jsonl_to_trajectory(trajectory_to_jsonl(traj))
    assert back.fps == 5 and back.image_dims == traj.image_dims
    assert np.allclose(back.to_array(), traj.to_array(), rtol=1e-8, atol=1e-9)


def test_config_round_trip():
    cfg = PlanConfig(fps=10, initial_pose=(5.0, 80.0, 3.0))
    assert PlanConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        PlanConfig(fps=0)
