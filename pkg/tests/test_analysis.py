import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from camscript.analysis import (
    InversionError,
    InversionTolerances,
    SmoothingConfig,
    dumps_pose_csv,
    invert_to_script,
    jitter_positions,
    loads_pose_csv,
    poses_to_spherical,
    smooth_poses,
    total_variation,
)
from camscript.dmr import TrajectoryScript
from camscript.geometry import Extrinsics, Intrinsics, PoseFrame, PoseSequence, look_at_extrinsics, trajectory_to_poses
from camscript.planner import PlanConfig, SphericalPoseSample, SphericalTrajectory, plan

from conftest import prim

K = Intrinsics.from_fov(64, 36)


def seq_from_centers(centers):
    frames = []
    for i, c in enumerate(centers):
        frames.append(PoseFrame(i, K, Extrinsics(np.eye(3), -np.asarray(c, dtype=float))))
    return PoseSequence(frames)


def round_trip(script, fps):
    cfg = PlanConfig(fps=fps)
    traj = plan(script, cfg)
    return invert_to_script(poses_to_spherical(trajectory_to_poses(traj), config=cfg), fps)


def test_smoothing_fixed_point():
    seq = seq_from_centers([(1, 2, 3)] * 6)
    out = smooth_poses(seq, SmoothingConfig(5))
    assert np.allclose(out.centers, seq.centers, atol=1e-15)


def test_window_one_is_identity():
    seq = seq_from_centers([(0, 0, 0), (1, 0, 0), (5, 2, 0)])
    out = smooth_poses(seq, SmoothingConfig(1))
    assert all(a.extrinsics == b.extrinsics for a, b in zip(seq, out))


def test_moving_average_hand_values():
    seq = seq_from_centers([(x, 0, 0) for x in (0, 1, 0, 1, 0)])
    xs = smooth_poses(seq, SmoothingConfig(3)).centers[:, 0]
    assert xs == pytest.approx([1 / 2, 1 / 3, 2 / 3, 1 / 3, 1 / 2], abs=1e-15)


def test_window_must_be_odd():
    with pytest.raises(ValueError):
        SmoothingConfig(4)


def test_orientation_smoothing_stays_orthonormal(rng):
    script = TrajectoryScript((prim(0, 1, "high", 60.0, rotate="ccw", degrees=90.0),))
    seq = jitter_positions(trajectory_to_poses(plan(script, PlanConfig(fps=25))), 0.01, rng)
    for f in smooth_poses(seq, SmoothingConfig(5)):
        assert f.extrinsics.orthonormality_error() < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([3, 5, 7]))
def test_smoothing_shrinks_total_variation(seed, window):
    pts = np.random.default_rng(seed).normal(size=(12, 3)).cumsum(axis=0)
    seq = seq_from_centers(pts)
    assert total_variation(smooth_poses(seq, SmoothingConfig(window))) <= total_variation(seq) + 1e-12


def test_identity_camera_recovery():
    seq = PoseSequence([PoseFrame(0, K, Extrinsics(np.eye(3), np.array([0.0, 0.0, -5.0])))])
    traj = poses_to_spherical(seq)
    s = traj.samples[0]
    assert len(traj) == 1
    assert (s.phi, s.theta, s.radius) == pytest.approx((90.0, 90.0, 5.0))
    assert s.roll == pytest.approx(0.0, abs=1e-12)


def test_camera_at_center_rejected():
    seq = PoseSequence([PoseFrame(0, K, Extrinsics(np.eye(3), np.zeros(3)))])
    with pytest.raises(InversionError):
        poses_to_spherical(seq)


def test_spherical_recovery_matches_planner():
    script = TrajectoryScript((prim(0, 2, "high", 100.0, "zoom_in", "cw", 300.0), prim(2, 4, "high", 200.0)))
    cfg = PlanConfig(fps=10)
    traj = plan(script, cfg)
    back = poses_to_spherical(trajectory_to_poses(traj), config=cfg)
    assert np.allclose(back.to_array()[:, :4], traj.to_array()[:, :4], atol=1e-6)


def test_invert_single(right_script):
    assert round_trip(right_script, 5) == right_script


def test_invert_gap():
    s = TrajectoryScript((prim(0, 1, angle=0.0), prim(3, 4, "low", radial="zoom_out")))
    assert round_trip(s, 5) == s


def test_invert_constant_trajectory():
    traj = SphericalTrajectory([SphericalPoseSample(i, 0, 90, 2) for i in range(11)], PlanConfig(fps=5))
    out = invert_to_script(traj)
    assert out.primitives == () and out.total_duration == 2.0


def test_invert_rejects_bad_input():
    with pytest.raises(InversionError):
        invert_to_script(SphericalTrajectory([]))
    with pytest.raises(InversionError):
        invert_to_script(SphericalTrajectory([SphericalPoseSample(0, 0, 90, 2), SphericalPoseSample(2, 0, 90, 2)]))


@pytest.mark.parametrize("fps", [5, 10, 25])
def test_invert_mixed_script(fps):
    s = TrajectoryScript((
        prim(0, 2, "high", 37.3),
        prim(2, 3, rotate="cw", degrees=90.0),
        prim(4, 5, "low", 180.0, "zoom_in", "ccw", 30.0),
        prim(5, 6, "medium", radial="zoom_out"),
    ))
    assert round_trip(s, fps) == s


def test_subsampled_inversion():
    s = TrajectoryScript((prim(0, 2, "low", 123.4), prim(3, 4, "high", 0.0, "zoom_out")))
    traj = plan(s, PlanConfig(fps=25)).subsample(5)
    seq = trajectory_to_poses(traj)
    assert invert_to_script(poses_to_spherical(seq, config=PlanConfig(fps=5))) == s


def test_noisy_inversion_recovers_structure(rng):
    s = TrajectoryScript((prim(0, 2, "high", 30.0), prim(2, 3, "medium", 250.0), prim(4, 6, "low", radial="zoom_in")))
    seq = trajectory_to_poses(plan(s, PlanConfig(fps=25)))
    noisy = smooth_poses(jitter_positions(seq, 2 * math.radians(0.1), rng), SmoothingConfig(5))
    sub = PoseSequence([replace(f, index=i) for i, f in enumerate(noisy.frames[::5])])
    out = invert_to_script(poses_to_spherical(sub, config=PlanConfig(fps=5)), tol=InversionTolerances.noisy())
    assert [(p.start_time, p.end_time, p.speed, p.direction.radial) for p in out.primitives] == \
        [(p.start_time, p.end_time, p.speed, p.direction.radial) for p in s.primitives]
    for p, g in zip(out.primitives, s.primitives):
        if g.direction.planar_angle is not None:
            assert abs(p.direction.planar_angle - g.direction.planar_angle) < 1.0


def test_time_tolerance_default():
    assert InversionTolerances().resolved_time_tol(25) == 0.02
    assert InversionTolerances(time_tol=0.1).resolved_time_tol(25) == 0.1
    with pytest.raises(ValueError):
        InversionTolerances(min_run=0)


def test_csv_round_trip():
    s = TrajectoryScript((prim(0, 1, "high", 45.0, rotate="ccw", degrees=45.0),))
    seq = trajectory_to_poses(plan(s, PlanConfig(fps=5)))
    back = loads_pose_csv(dumps_pose_csv(seq), seq[0].intrinsics)
    for a, b in zip(seq, back):
        assert np.allclose(a.extrinsics.R, b.extrinsics.R, atol=1e-8)
        assert np.allclose(a.extrinsics.camera_center, b.extrinsics.camera_center, atol=1e-8)


def test_jitter_is_seeded():
    seq = seq_from_centers([(0, 0, 2)] * 4)
    a = jitter_positions(seq, 0.1, np.random.default_rng(7))
    b = jitter_positions(seq, 0.1, np.random.default_rng(7))
    assert np.array_equal(a.centers, b.centers)
    assert not np.array_equal(a.centers, seq.centers)
