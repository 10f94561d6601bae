"""scikit-learn style wrappers around the functional pipeline stages.

Every stage is stateless, so ``fit`` only validates hyperparameters. The
wrappers exist so stages compose in ``sklearn.pipeline.Pipeline`` and take
part in ``get_params``/``set_params``/``clone``.
"""

from __future__ import annotations

from typing import Iterable, List, Optional

from sklearn.base import BaseEstimator, TransformerMixin

from .analysis import InversionTolerances, SmoothingConfig, invert_to_script, poses_to_spherical, smooth_poses
from .dmr import TrajectoryScript
from .geometry import Intrinsics, PoseSequence, trajectory_to_poses
from .metrics import compute_dmr_metrics
from .parser import ParserDefaults, parse_instruction_text
from .planner import PlanConfig, SphericalTrajectory, plan


def _as_list(X, kind, name):
    if isinstance(X, (str, kind)):
        raise TypeError(f"{name} expects a sequence, not a single {type(X).__name__}")
    return list(X)


class _Stateless(TransformerMixin, BaseEstimator):
    def fit(self, X=None, y=None):
        self._check_params()
        self.is_fitted_ = True
        return self

    def _check_params(self):
        pass

    def __sklearn_is_fitted__(self):
        return True


class InstructionParser(_Stateless):
    """Text instructions to scripts."""

    def __init__(self, move_duration_default=1.0, rotate_duration_default=0.5, rotate_degrees_default=45.0):
        self.move_duration_default = move_duration_default
        self.rotate_duration_default = rotate_duration_default
        self.rotate_degrees_default = rotate_degrees_default

    def _defaults(self) -> ParserDefaults:
        return ParserDefaults(self.move_duration_default, self.rotate_duration_default, self.rotate_degrees_default)

    def _check_params(self):
        self._defaults()

    def transform(self, X: Iterable[str]) -> List[TrajectoryScript]:
        if isinstance(X, str):
            raise TypeError("InstructionParser expects a sequence of strings, not a single string")
        d = self._defaults()
        return [parse_instruction_text(t, d) for t in X]


class TrajectoryPlanner(_Stateless):
    """Scripts to spherical trajectories."""

    def __init__(self, fps=25, initial_pose=(0.0, 90.0, 2.0), base_angular_rate=30.0,
                 base_radial_rate=0.3, image_dims=(640, 360)):
        self.fps = fps
        self.initial_pose = initial_pose
        self.base_angular_rate = base_angular_rate
        self.base_radial_rate = base_radial_rate
        self.image_dims = image_dims

    def plan_config(self) -> PlanConfig:
        return PlanConfig(fps=self.fps, initial_pose=tuple(self.initial_pose),
                          base_angular_rate=self.base_angular_rate, base_radial_rate=self.base_radial_rate)

    def _check_params(self):
        self.plan_config()
        w, h = self.image_dims
        if w <= 0 or h <= 0:
            raise ValueError("image_dims must be positive")

    def transform(self, X: Iterable[TrajectoryScript]) -> List[SphericalTrajectory]:
        cfg = self.plan_config()
        return [plan(s, cfg, tuple(self.image_dims)) for s in _as_list(X, TrajectoryScript, "TrajectoryPlanner")]


class PoseGenerator(_Stateless):
    """Spherical trajectories to look-at pose sequences."""

    def __init__(self, hfov_degrees=60.0):
        self.hfov_degrees = hfov_degrees

    def _check_params(self):
        if not 0.0 < self.hfov_degrees < 180.0:
            raise ValueError("hfov_degrees must lie in (0, 180)")

    def transform(self, X: Iterable[SphericalTrajectory]) -> List[PoseSequence]:
        self._check_params()
        out = []
        for traj in _as_list(X, SphericalTrajectory, "PoseGenerator"):
            w, h = traj.image_dims
            out.append(trajectory_to_poses(traj, Intrinsics.from_fov(w, h, self.hfov_degrees)))
        return out


class PoseSmoother(_Stateless):
    def __init__(self, window=5):
        self.window = window

    def _check_params(self):
        SmoothingConfig(self.window)

    def transform(self, X: Iterable[PoseSequence]) -> List[PoseSequence]:
        cfg = SmoothingConfig(self.window)
        return [smooth_poses(seq, cfg) for seq in _as_list(X, PoseSequence, "PoseSmoother")]


class ReverseParser(_Stateless):
    """Pose sequences (or spherical trajectories) back to scripts.

    ``score`` returns the average of the six trajectory-accuracy metrics
    against reference scripts.
    """

    def __init__(self, fps=25, center=(0.0, 0.0, 0.0), eps_step=1e-6, eps_angle_fine=1.0, min_run=1,
                 angle_decimals=6, time_tol=None):
        self.fps = fps
        self.center = center
        self.eps_step = eps_step
        self.eps_angle_fine = eps_angle_fine
        self.min_run = min_run
        self.angle_decimals = angle_decimals
        self.time_tol = time_tol

    def tolerances(self) -> InversionTolerances:
        return InversionTolerances(eps_step=self.eps_step, eps_angle_fine=self.eps_angle_fine,
                                   time_tol=self.time_tol, min_run=self.min_run,
                                   angle_decimals=self.angle_decimals)

    def _check_params(self):
        self.tolerances()
        if self.fps <= 0:
            raise ValueError("fps must be positive")

    def transform(self, X) -> List[TrajectoryScript]:
        tol = self.tolerances()
        cfg = PlanConfig(fps=self.fps)
        out = []
        for item in _as_list(X, PoseSequence, "ReverseParser"):
            traj = item if isinstance(item, SphericalTrajectory) else poses_to_spherical(item, self.center, cfg)
            out.append(invert_to_script(traj, self.fps, tol, cfg))
        return out

    def score(self, X, y, sample_weight: Optional[object] = None) -> float:
        if sample_weight is not None:
            raise ValueError("sample_weight is not supported")
        return compute_dmr_metrics(self.transform(X), list(y), self.tolerances(), self.fps).avg
