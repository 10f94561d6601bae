"""Pose-sequence ingestion, smoothing, spherical recovery and reverse parsing."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from .dmr import DirectionSpec, MotionPrimitive, TrajectoryScript
from .geometry import (
    DegenerateCameraError,
    Extrinsics,
    Intrinsics,
    PoseFileError,
    PoseFrame,
    PoseSequence,
    look_at_extrinsics,
)
from .planner import DEFAULT_IMAGE_DIMS, PlanConfig, SphericalPoseSample, SphericalTrajectory


@dataclass(frozen=True)
class SmoothingConfig:
    window: int = 5

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError("window must be an odd integer >= 1")

    @property
    def half_width(self) -> int:
        return (self.window - 1) // 2


@dataclass(frozen=True)
class InversionTolerances:
    """Quantization thresholds for reverse parsing and DMR scoring.

    ``eps_step`` is in degrees per frame; radial deltas are converted to the
    same unit through the ratio of base angular and radial rates. ``min_run``
    above 1 enables the noise-tolerant segmentation used for smoothed or
    jittered input. ``time_tol`` defaults to half a frame period.
    """

    eps_step: float = 1e-6
    eps_angle_fine: float = 1.0
    time_tol: Optional[float] = None
    min_run: int = 1
    angle_decimals: int = 6

    def __post_init__(self):
        if self.eps_step < 0 or self.eps_angle_fine < 0 or (self.time_tol is not None and self.time_tol < 0):
            raise ValueError("tolerances must be non-negative")
        if self.min_run < 1:
            raise ValueError("min_run must be >= 1")

    @classmethod
    def noisy(cls, **overrides) -> "InversionTolerances":
        """Settings for jittered, smoothed trajectories."""
        params = dict(eps_step=0.5, min_run=2)
        params.update(overrides)
        return cls(**params)

    def resolved_time_tol(self, fps: float) -> float:
        return 0.5 / fps if self.time_tol is None else self.time_tol


class InversionError(ValueError):
    pass


# -- smoothing -------------------------------------------------------------------


def smooth_poses(seq: PoseSequence, cfg: SmoothingConfig = SmoothingConfig()) -> PoseSequence:
    """Centred moving average of camera centres and nlerp of orientations.

    Edge frames average over the truncated window. Intrinsics are untouched.
    """
    n = len(seq)
    if n == 0:
        raise ValueError("cannot smooth an empty pose sequence")
    if cfg.window == 1:
        return PoseSequence(list(seq.frames))
    half = cfg.half_width
    centers = seq.centers
    quats = Rotation.from_matrix(np.stack(seq.rotations)).as_quat()
    frames = []
    for k in range(n):
        lo, hi = max(0, k - half), min(n, k + half + 1)
        c = centers[lo:hi].mean(axis=0)
        q = quats[lo:hi].copy()
        q[q @ quats[k] < 0] *= -1.0
        q = q.sum(axis=0)
        R = Rotation.from_quat(q / np.linalg.norm(q)).as_matrix()
        frame = seq.frames[k]
        frames.append(PoseFrame(frame.index, frame.intrinsics, Extrinsics(R, -R @ c)))
    return PoseSequence(frames)


def total_variation(seq: PoseSequence) -> float:
    c = seq.centers
    return float(np.linalg.norm(np.diff(c, axis=0), axis=1).sum()) if len(c) > 1 else 0.0


# -- spherical recovery ------------------------------------------------------------


def poses_to_spherical(
    seq: PoseSequence,
    center=(0.0, 0.0, 0.0),
    config: Optional[PlanConfig] = None,
    image_dims=None,
) -> SphericalTrajectory:
    """Map camera poses back to unwrapped (phi, theta, r, roll) about ``center``."""
    center = np.asarray(center, dtype=float)
    phis, thetas, radii, rolls = [], [], [], []
    for frame in seq.frames:
        rel = frame.extrinsics.camera_center - center
        r = float(np.linalg.norm(rel))
        if r < 1e-12:
            raise InversionError(f"camera at the centre in frame {frame.index}")
        x, y, z = rel
        thetas.append(math.degrees(math.acos(max(-1.0, min(1.0, y / r)))))
        phis.append(math.degrees(math.atan2(z, x)))
        radii.append(r)
        try:
            ref = look_at_extrinsics(rel + center, target=center).R
        except DegenerateCameraError as exc:
            raise InversionError(f"frame {frame.index}: {exc}") from None
        right = frame.extrinsics.R[0]
        rolls.append(math.degrees(math.atan2(right @ ref[1], right @ ref[0])))
    phis = np.unwrap(np.array(phis), period=360.0) if phis else []
    rolls = np.unwrap(np.array(rolls), period=360.0) if rolls else []
    samples = [
        SphericalPoseSample(i, float(p), t, r, float(s), 1.0)
        for i, (p, t, r, s) in enumerate(zip(phis, thetas, radii, rolls))
    ]
    if image_dims is None:
        if seq.frames:
            k = seq.frames[0].intrinsics
            image_dims = (k.width, k.height)
        else:
            image_dims = DEFAULT_IMAGE_DIMS
    return SphericalTrajectory(samples, config or PlanConfig(), tuple(image_dims))


# -- reverse parsing ------------------------------------------------------------------


def _greedy_runs(v: np.ndarray, eps: float) -> List[List[int]]:
    runs: List[List[int]] = []
    mean = None
    for i in range(len(v)):
        if runs and np.max(np.abs(v[i] - mean)) <= eps:
            runs[-1].append(i)
            mean = mean + (v[i] - mean) / len(runs[-1])
        else:
            runs.append([i])
            mean = v[i].copy()
    return runs


def _core(run: Sequence[int]) -> Sequence[int]:
    return run[1:-1] if len(run) >= 3 else run


def _optimal_partition(v: np.ndarray, w: np.ndarray, penalty: float, min_len: int) -> List[int]:
    """Cut points of the weighted least-squares piecewise-constant fit of ``v``."""
    n = len(v)
    if n < 2 * min_len:
        return [0, n]
    wv = v * w[:, None]
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cs = np.vstack([np.zeros(v.shape[1]), np.cumsum(wv, axis=0)])
    cs2 = np.concatenate([[0.0], np.cumsum((wv * v).sum(axis=1))])

    def sse(i, j):
        tw = cw[j] - cw[i]
        s = cs[j] - cs[i]
        return cs2[j] - cs2[i] - (float(s @ s) / tw if tw > 0 else 0.0)

    best = np.full(n + 1, np.inf)
    best[0] = -penalty
    prev = np.zeros(n + 1, dtype=int)
    for j in range(min_len, n + 1):
        for i in range(0, j - min_len + 1):
            if np.isfinite(best[i]):
                c = best[i] + penalty + sse(i, j)
                if c < best[j]:
                    best[j], prev[j] = c, i
    if not np.isfinite(best[n]):
        return [0, n]
    cuts = [n]
    while cuts[-1] > 0:
        cuts.append(int(prev[cuts[-1]]))
    return cuts[::-1]


def _segment(v: np.ndarray, tol: InversionTolerances) -> List[List[int]]:
    if tol.min_run <= 1:
        return _greedy_runs(v, tol.eps_step)
    eps = tol.eps_step
    n = len(v)
    # frames blended by smoothing sit next to sharp changes; keep them out of the fit
    jump = np.zeros(n)
    if n > 1:
        step = np.linalg.norm(np.diff(v, axis=0), axis=1)
        jump[1:] = step
        jump[:-1] = np.maximum(jump[:-1], step)
    w = eps**2 / (eps**2 + jump**2) if eps > 0 else np.ones(n)
    cuts = _optimal_partition(v, w, 4.0 * eps**2 * tol.min_run, tol.min_run)

    # place each cut where nearest-mean assignment of the neighbouring frames puts it
    def robust_mean(a, b):
        seg = v[a:b]
        return seg[1:-1].mean(axis=0) if len(seg) >= 3 else seg.mean(axis=0)

    for k in range(1, len(cuts) - 1):
        a, c, b = cuts[k - 1], cuts[k], cuts[k + 1]
        ma, mb = robust_mean(a, c), robust_mean(c, b)
        lo, hi = max(a + 1, c - tol.min_run), min(b - 1, c + tol.min_run)
        costs = {
            x: float(((v[lo:x] - ma) ** 2).sum() + ((v[x:hi] - mb) ** 2).sum()) for x in range(lo, hi + 1)
        }
        cuts[k] = min(costs, key=lambda x: (costs[x], abs(x - c)))
    runs = [list(range(a, b)) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]

    # neighbouring segments that only noise separated
    out: List[List[int]] = []
    for run in runs:
        if out:
            prev_mean = v[_core(out[-1])].mean(axis=0)
            cur_mean = v[_core(run)].mean(axis=0)
            if np.max(np.abs(prev_mean - cur_mean)) <= eps:
                out[-1].extend(run)
                continue
        out.append(run)
    return out


def _speed_tier(rate: float, multipliers: dict) -> str:
    best, best_d = "medium", abs(rate - multipliers["medium"])
    for tier in ("low", "high"):
        d = abs(rate - multipliers[tier])
        if d < best_d:
            best, best_d = tier, d
    return best


def invert_to_script(
    traj: SphericalTrajectory,
    fps: Optional[int] = None,
    tol: InversionTolerances = InversionTolerances(),
    config: Optional[PlanConfig] = None,
) -> TrajectoryScript:
    """Quantize a trajectory back into motion primitives.

    Frames are grouped into maximal runs of constant per-frame change; idle runs
    become gaps, every other run one primitive.
    """
    if len(traj) == 0:
        raise InversionError("empty trajectory")
    for i, s in enumerate(traj.samples):
        if s.frame_index != i:
            raise InversionError(f"trajectory not dense at position {i}")
    config = config or traj.config
    fps = fps or traj.fps
    arr = traj.to_array()
    n = len(arr) - 1
    total = round(n / fps, 6)
    if n == 0:
        return TrajectoryScript((), total)

    d = np.diff(arr[:, :4], axis=0)
    radial_scale = config.base_angular_rate / config.base_radial_rate
    v = d.copy()
    v[:, 2] *= radial_scale
    unit_angular = config.base_angular_rate / fps
    unit_radial = config.base_radial_rate / fps
    eps = tol.eps_step
    dec = tol.angle_decimals

    prims = []
    for run in _segment(v, tol):
        core = _core(run)
        m = v[core].mean(axis=0)
        if np.max(np.abs(m)) <= eps:
            continue
        planar = math.hypot(m[0], m[1]) > eps
        radial = abs(m[2]) > eps
        rotating = abs(m[3]) > eps

        angle = None
        if planar:
            angle = round(math.degrees(math.atan2(-m[1], m[0])) % 360.0, dec)
            if angle >= 360.0:
                angle -= 360.0
            angle += 0.0
        radial_dir = None
        if radial:
            radial_dir = "zoom_in" if m[2] < 0 else "zoom_out"

        if planar:
            speed = _speed_tier(math.hypot(m[0], m[1]) / unit_angular, config.speed_multipliers)
        elif radial:
            speed = _speed_tier(abs(m[2]) / radial_scale / unit_radial, config.speed_multipliers)
        else:
            speed = "medium"

        rotate, degrees = "none", None
        if rotating:
            swept = float(d[run, 3].sum())
            rotate = "ccw" if swept > 0 else "cw"
            degrees = round(abs(swept), dec)
        if not (planar or radial or rotating):
            continue
        prims.append(
            MotionPrimitive(
                start_time=round(run[0] / fps, 6),
                end_time=round((run[-1] + 1) / fps, 6),
                speed=speed,
                direction=DirectionSpec(angle, radial_dir),
                rotate=rotate,
                rotate_degrees=degrees,
            )
        )
    return TrajectoryScript(tuple(prims), total)


# -- third-party CSV ---------------------------------------------------------------------


def read_pose_csv(path, intrinsics: Optional[Intrinsics] = None) -> PoseSequence:
    """Read ``idx,x,y,z,qw,qx,qy,qz`` rows (camera centre and camera-to-world quaternion)."""
    return loads_pose_csv(Path(path).read_text(encoding="utf-8"), intrinsics)


def loads_pose_csv(text: str, intrinsics: Optional[Intrinsics] = None) -> PoseSequence:
    intrinsics = intrinsics or Intrinsics.from_fov(*DEFAULT_IMAGE_DIMS)
    frames = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in stripped.split(",")]
        if lineno == 1 and fields[0].lower() == "idx":
            continue
        if len(fields) != 8:
            raise PoseFileError(f"expected 8 fields, got {len(fields)}", lineno)
        try:
            idx = int(fields[0])
            x, y, z, qw, qx, qy, qz = (float(f) for f in fields[1:])
        except ValueError as exc:
            raise PoseFileError(f"bad number ({exc})", lineno) from None
        if idx != len(frames):
            raise PoseFileError(f"frame index {idx} not dense", lineno)
        R_wc = Rotation.from_quat([qx, qy, qz, qw]).as_matrix()
        R = R_wc.T
        c = np.array([x, y, z])
        frames.append(PoseFrame(idx, intrinsics, Extrinsics(R, -R @ c)))
    return PoseSequence(frames)


def dumps_pose_csv(seq: PoseSequence) -> str:
    lines = ["idx,x,y,z,qw,qx,qy,qz"]
    for f in seq.frames:
        c = f.extrinsics.camera_center
        qx, qy, qz, qw = Rotation.from_matrix(f.extrinsics.R.T).as_quat()
        lines.append(",".join([str(f.index)] + [f"{v:.9g}" for v in (*c, qw, qx, qy, qz)]))
    return "\n".join(lines) + "\n"


def jitter_positions(seq: PoseSequence, sigma: float, rng: np.random.Generator) -> PoseSequence:
    """Add isotropic Gaussian noise (std ``sigma``) to every camera centre."""
    frames = []
    for f in seq.frames:
        c = f.extrinsics.camera_center + rng.normal(0.0, sigma, 3)
        R = f.extrinsics.R
        frames.append(replace(f, extrinsics=Extrinsics(R, -R @ c)))
    return PoseSequence(frames)
