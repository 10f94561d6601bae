"""Frame-accurate spherical trajectory planning.

The camera orbits the scene centre on a sphere ``(phi, theta, r)``. Each
primitive contributes a constant per-frame increment to every frame whose
time falls in its half-open interval ``(start, end]``; frames outside every
primitive hold the previous pose. Rolls are distributed linearly over the
rotating primitive's frames and drive the per-frame rescale factor that keeps
a rotated frame inside the original aspect.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .dmr import DirectionSpec, TrajectoryScript, validate_script

DEFAULT_IMAGE_DIMS = (640, 360)


@dataclass(frozen=True)
class PlanConfig:
    fps: int = 25
    initial_pose: Tuple[float, float, float] = (0.0, 90.0, 2.0)
    base_angular_rate: float = 30.0
    base_radial_rate: float = 0.3
    speed_multipliers: Dict[str, float] = field(
        default_factory=lambda: {"low": 0.5, "medium": 1.0, "high": 2.0}
    )
    polar_clamp: Tuple[float, float] = (1.0, 179.0)
    r_min: float = 0.1

    def __post_init__(self):
        if int(self.fps) != self.fps or self.fps < 1:
            raise ValueError("fps must be a positive integer")
        if not (self.base_angular_rate > 0 and self.base_radial_rate > 0):
            raise ValueError("base rates must be positive")
        lo, hi = self.polar_clamp
        if not lo < hi:
            raise ValueError("polar_clamp must satisfy theta_min < theta_max")
        if not self.initial_pose[2] > self.r_min:
            raise ValueError("initial radius must exceed r_min")
        if set(self.speed_multipliers) != {"low", "medium", "high"}:
            raise ValueError("speed_multipliers needs low, medium and high")
        object.__setattr__(self, "fps", int(self.fps))
        object.__setattr__(self, "initial_pose", tuple(float(v) for v in self.initial_pose))
        object.__setattr__(self, "polar_clamp", (float(lo), float(hi)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["initial_pose"] = list(self.initial_pose)
        d["polar_clamp"] = list(self.polar_clamp)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PlanConfig":
        d = dict(d)
        for key in ("initial_pose", "polar_clamp"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class SphericalPoseSample:
    frame_index: int
    phi: float
    theta: float
    radius: float
    roll: float = 0.0
    scale: float = 1.0


@dataclass
class SphericalTrajectory:
    samples: List[SphericalPoseSample]
    config: PlanConfig = field(default_factory=PlanConfig)
    image_dims: Tuple[int, int] = DEFAULT_IMAGE_DIMS

    @property
    def fps(self) -> int:
        return self.config.fps

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def to_array(self) -> np.ndarray:
        """(n, 5) array of phi, theta, r, roll, scale."""
        return np.array(
            [(s.phi, s.theta, s.radius, s.roll, s.scale) for s in self.samples], dtype=float
        ).reshape(-1, 5)

    @classmethod
    def from_array(cls, arr, config=None, image_dims=DEFAULT_IMAGE_DIMS):
        arr = np.asarray(arr, dtype=float)
        samples = [
            SphericalPoseSample(i, *(float(v) for v in row)) for i, row in enumerate(arr)
        ]
        return cls(samples, config or PlanConfig(), tuple(image_dims))

    def subsample(self, step: int) -> "SphericalTrajectory":
        """Every ``step``-th frame, re-indexed, at ``fps / step``."""
        if step < 1 or self.fps % step:
            raise ValueError("step must divide fps")
        kept = self.samples[::step]
        samples = [replace(s, frame_index=i) for i, s in enumerate(kept)]
        return SphericalTrajectory(samples, replace(self.config, fps=self.fps // step), self.image_dims)


def frame_count(fps: float, duration: float) -> int:
    """round(fps * duration), ties to even."""
    if fps < 1 or duration < 0:
        raise ValueError("frame_count needs fps >= 1 and duration >= 0")
    return int(round(fps * duration))


def exact_cos_sin(angle: float) -> Tuple[float, float]:
    # exact values on the axes so cardinal moves accumulate without drift
    q, rem = divmod(angle, 90.0)
    if rem == 0.0:
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[int(q) % 4]
    rad = math.radians(angle)
    return math.cos(rad), math.sin(rad)


def step_increment(speed: str, direction: DirectionSpec, config: PlanConfig) -> Tuple[float, float, float]:
    """Per-frame (dphi, dtheta, dr) for a primitive's speed tier and direction."""
    m = config.speed_multipliers[speed]
    omega = config.base_angular_rate * m / config.fps
    rho = config.base_radial_rate * m / config.fps
    dphi = dtheta = dr = 0.0
    if direction.planar_angle is not None:
        c, s = exact_cos_sin(direction.planar_angle)
        dphi = omega * c
        dtheta = -omega * s
    if direction.radial == "zoom_in":
        dr = -rho
    elif direction.radial == "zoom_out":
        dr = rho
    return dphi, dtheta, dr


def rescale_factor(angle: float, width: float, height: float) -> float:
    """Largest shrink that keeps a frame rotated by ``angle`` degrees inside (w, h)."""
    c, s = exact_cos_sin(angle % 360.0)
    c, s = abs(c), abs(s)
    rot_w = width * c + height * s
    rot_h = width * s + height * c
    return min(width / rot_w, height / rot_h)


def rotation_track(total_angle: float, n_frames: int, width: float, height: float) -> List[Tuple[float, float]]:
    """(angle_k, s_k) for k = 1..n with angle_k = k * total / n."""
    if n_frames < 1:
        raise ValueError("rotation_track needs at least one frame")
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be >= 1")
    out = []
    for k in range(1, n_frames + 1):
        angle = total_angle if k == n_frames else k * total_angle / n_frames
        out.append((angle, rescale_factor(angle, width, height)))
    return out


def plan(script: TrajectoryScript, config: PlanConfig = None, image_dims=DEFAULT_IMAGE_DIMS) -> SphericalTrajectory:
    """Accumulate per-frame increments of every primitive into a trajectory."""
    config = config or PlanConfig()
    validate_script(script).raise_for_violations()
    w, h = image_dims
    fps = config.fps
    lo, hi = config.polar_clamp
    n_total = frame_count(fps, script.total_duration)

    # frame -> (primitive index, local frame number, frames in primitive)
    owner: List[Optional[Tuple[int, int, int]]] = [None] * (n_total + 1)
    for idx, p in enumerate(script.primitives):
        first = frame_count(fps, p.start_time) + 1
        last = min(frame_count(fps, p.end_time), n_total)
        n = last - first + 1
        for local, k in enumerate(range(first, last + 1), start=1):
            owner[k] = (idx, local, n)

    phi, theta, r = config.initial_pose
    psi, scale = 0.0, 1.0
    samples = [SphericalPoseSample(0, phi, theta, r, psi, scale)]
    increments = [step_increment(p.speed, p.direction, config) for p in script.primitives]
    roll_start = psi
    for k in range(1, n_total + 1):
        slot = owner[k]
        if slot is not None:
            idx, local, n = slot
            prim = script.primitives[idx]
            dphi, dtheta, dr = increments[idx]
            phi = phi + dphi
            theta = min(max(theta + dtheta, lo), hi)
            r = max(r + dr, config.r_min)
            total = prim.signed_rotation
            if total != 0.0:
                if local == 1:
                    roll_start = psi
                angle = total if local == n else local * total / n
                psi = roll_start + angle
                scale = rescale_factor(psi, w, h)
        samples.append(SphericalPoseSample(k, phi, theta, r, psi, scale))
    return SphericalTrajectory(samples, config, (int(w), int(h)))


# -- JSONL export ----------------------------------------------------------------


def _sig(x: float) -> float:
    return float(f"{x:.9g}") + 0.0


def trajectory_to_jsonl(traj: SphericalTrajectory) -> str:
    header = {
        "type": "header",
        "fps": traj.fps,
        "image_dims": list(traj.image_dims),
        "config": traj.config.to_dict(),
    }
    lines = [json.dumps(header)]
    for s in traj.samples:
        lines.append(
            json.dumps(
                {
                    "frame": s.frame_index,
                    "phi": _sig(s.phi),
                    "theta": _sig(s.theta),
                    "r": _sig(s.radius),
                    "roll": _sig(s.roll),
                    "scale": _sig(s.scale),
                }
            )
        )
    return "\n".join(lines) + "\n"


def jsonl_to_trajectory(text: str) -> SphericalTrajectory:
    config, dims = PlanConfig(), DEFAULT_IMAGE_DIMS
    samples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: {exc.msg}") from None
        if rec.get("type") == "header":
            config = PlanConfig.from_dict(rec.get("config", {}))
            dims = tuple(rec.get("image_dims", dims))
            continue
        try:
            samples.append(
                SphericalPoseSample(
                    int(rec["frame"]), float(rec["phi"]), float(rec["theta"]), float(rec["r"]),
                    float(rec.get("roll", 0.0)), float(rec.get("scale", 1.0)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: malformed trajectory sample ({exc})") from None
    for i, s in enumerate(samples):
        if s.frame_index != i:
            raise ValueError(f"trajectory frames not dense at frame {s.frame_index}")
    return SphericalTrajectory(samples, config, dims)

