"""Pinhole cameras, look-at extrinsics and the plain-text pose file.

Conventions: right-handed world with y up; the camera looks along its local
-z axis, x points right and y up in the image. Extrinsics map world to camera,
``p_cam = R @ p + t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from .planner import SphericalTrajectory, exact_cos_sin

WORLD_UP = np.array([0.0, 1.0, 0.0])
_POSE_FIELDS = 17


class DegenerateCameraError(ValueError):
    pass


class PoseFileError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")

    @classmethod
    def from_fov(cls, width: int, height: int, hfov_degrees: float = 60.0) -> "Intrinsics":
        """Centred principal point, square pixels, given horizontal field of view."""
        f = 0.5 * width / math.tan(math.radians(hfov_degrees) / 2.0)
        return cls(f, f, width / 2.0, height / 2.0, int(width), int(height))

    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def scaled(self, s: float) -> "Intrinsics":
        return replace(self, fx=self.fx * s, fy=self.fy * s)


@dataclass(frozen=True, eq=False)
class Extrinsics:
    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", np.asarray(self.R, dtype=float).reshape(3, 3))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float).reshape(3))

    def __eq__(self, other):
        if not isinstance(other, Extrinsics):
            return NotImplemented
        return np.array_equal(self.R, other.R) and np.array_equal(self.t, other.t)

    @property
    def camera_center(self) -> np.ndarray:
        return -self.R.T @ self.t

    def orthonormality_error(self) -> float:
        return float(np.abs(self.R.T @ self.R - np.eye(3)).max())

    def inverse(self) -> "Extrinsics":
        """Camera-to-world transform."""
        return Extrinsics(self.R.T, -self.R.T @ self.t)

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.R
        m[:3, 3] = self.t
        return m


@dataclass(frozen=True)
class PoseFrame:
    index: int
    intrinsics: Intrinsics
    extrinsics: Extrinsics


@dataclass
class PoseSequence:
    frames: List[PoseFrame] = field(default_factory=list)

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, i):
        return self.frames[i]

    @property
    def rotations(self) -> List[np.ndarray]:
        return [f.extrinsics.R for f in self.frames]

    @property
    def translations(self) -> List[np.ndarray]:
        return [f.extrinsics.t for f in self.frames]

    @property
    def centers(self) -> np.ndarray:
        return np.array([f.extrinsics.camera_center for f in self.frames]).reshape(-1, 3)


def spherical_to_position(phi: float, theta: float, r: float) -> np.ndarray:
    """Degrees in, world point out: x = r sin(theta) cos(phi), y = r cos(theta), z = r sin(theta) sin(phi)."""
    if not r > 0:
        raise ValueError("radius must be positive")
    cp, sp = exact_cos_sin(phi)
    ct, st = exact_cos_sin(theta)
    return np.array([r * st * cp, r * ct, r * st * sp])


def _normalize(v):
    n = np.linalg.norm(v)
    return v / n


def look_at_extrinsics(camera_pos, target=(0.0, 0.0, 0.0), world_up=WORLD_UP, roll: float = 0.0) -> Extrinsics:
    """World-to-camera transform for a camera at ``camera_pos`` aimed at ``target``.

    ``roll`` (degrees) spins the camera about its viewing axis, counterclockwise
    positive as seen by the camera.
    """
    pos = np.asarray(camera_pos, dtype=float)
    target = np.asarray(target, dtype=float)
    up = np.asarray(world_up, dtype=float)
    fwd = target - pos
    dist = np.linalg.norm(fwd)
    if dist < 1e-12:
        raise DegenerateCameraError("camera position coincides with target")
    fwd = fwd / dist
    side = np.cross(fwd, up)
    if np.linalg.norm(side) < 1e-12:
        raise DegenerateCameraError("viewing direction parallel to world up")
    right = _normalize(side)
    cam_up = np.cross(right, fwd)
    if roll:
        c, s = exact_cos_sin(roll)
        right, cam_up = c * right + s * cam_up, -s * right + c * cam_up
    R = np.stack([right, cam_up, -fwd])
    return Extrinsics(R, -R @ pos)


def trajectory_to_poses(traj: SphericalTrajectory, base_intrinsics: Optional[Intrinsics] = None) -> PoseSequence:
    """One pose per sample; focal lengths shrink by the sample's rescale factor."""
    if base_intrinsics is None:
        base_intrinsics = Intrinsics.from_fov(*traj.image_dims)
    frames = []
    for s in traj.samples:
        pos = spherical_to_position(s.phi, s.theta, s.radius)
        ext = look_at_extrinsics(pos, roll=s.roll)
        intr = base_intrinsics if s.scale == 1.0 else base_intrinsics.scaled(s.scale)
        frames.append(PoseFrame(s.frame_index, intr, ext))
    return PoseSequence(frames)


# -- pose file -----------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def format_pose_line(frame: PoseFrame) -> str:
    k, e = frame.intrinsics, frame.extrinsics
    vals = [k.fx, k.fy, k.cx, k.cy]
    for row in range(3):
        vals.extend(e.R[row])
        vals.append(e.t[row])
    return " ".join([str(frame.index)] + [_fmt(float(v) + 0.0) for v in vals])


def write_pose_file(seq: PoseSequence, path, width: Optional[int] = None, height: Optional[int] = None) -> None:
    """One line per frame: idx fx fy cx cy r00 r01 r02 t0 r10 r11 r12 t1 r20 r21 r22 t2.

    Image size is not part of a line; it is recorded once in a ``#`` comment so
    readers can restore it (default: twice the principal point).
    """
    Path(path).write_text(dumps_poses(seq, width, height), encoding="utf-8")


def dumps_poses(seq: PoseSequence, width: Optional[int] = None, height: Optional[int] = None) -> str:
    if not seq.frames:
        return ""
    k = seq.frames[0].intrinsics
    w = k.width if width is None else width
    h = k.height if height is None else height
    lines = [f"# size {w} {h}"]
    lines.extend(format_pose_line(f) for f in seq.frames)
    return "\n".join(lines) + "\n"


def loads_poses(text: str) -> PoseSequence:
    width = height = None
    frames = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            parts = stripped[1:].split()
            if len(parts) == 3 and parts[0] == "size":
                width, height = int(parts[1]), int(parts[2])
            continue
        fields = stripped.split()
        if len(fields) != _POSE_FIELDS:
            raise PoseFileError(f"expected {_POSE_FIELDS} fields, got {len(fields)}", lineno)
        try:
            idx = int(fields[0])
            vals = [float(v) for v in fields[1:]]
        except ValueError as exc:
            raise PoseFileError(f"bad number ({exc})", lineno) from None
        if not np.all(np.isfinite(vals)):
            raise PoseFileError("non-finite value", lineno)
        fx, fy, cx, cy = vals[:4]
        m = np.array(vals[4:]).reshape(3, 4)
        w = width if width is not None else int(round(2 * cx))
        h = height if height is not None else int(round(2 * cy))
        try:
            intr = Intrinsics(fx, fy, cx, cy, w, h)
        except ValueError as exc:
            raise PoseFileError(str(exc), lineno) from None
        if idx != len(frames):
            raise PoseFileError(f"frame index {idx} not dense (expected {len(frames)})", lineno)
        frames.append(PoseFrame(idx, intr, Extrinsics(m[:, :3], m[:, 3])))
    return PoseSequence(frames)


def read_pose_file(path) -> PoseSequence:
    return loads_poses(Path(path).read_text(encoding="utf-8"))
