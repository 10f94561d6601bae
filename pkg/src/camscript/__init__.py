"""Camera-instruction compiler, trajectory planner, renderer and evaluation toolkit."""

from .analysis import (
    InversionError,
    InversionTolerances,
    SmoothingConfig,
    invert_to_script,
    jitter_positions,
    poses_to_spherical,
    smooth_poses,
)
from .dataset import GenConfig, TrajectoryGroup, classify_primitive, generate_dataset, render_description, sample_script
from .dmr import (
    DirectionSpec,
    DMRFormatError,
    MotionPrimitive,
    ScriptValidationError,
    TrajectoryScript,
    json_to_script,
    script_to_json,
    validate_script,
)
from .geometry import (
    Extrinsics,
    Intrinsics,
    PoseFrame,
    PoseSequence,
    look_at_extrinsics,
    read_pose_file,
    spherical_to_position,
    trajectory_to_poses,
    write_pose_file,
)
from .metrics import MetricsReport, average_metrics, compute_dmr_metrics, psnr, rot_err, ssim, trans_err
from .parser import InstructionError, ParserDefaults, parse_instruction_text
from .planner import PlanConfig, SphericalPoseSample, SphericalTrajectory, plan, rescale_factor
from .ply import load_ply, save_ply
from .render import PointCloud, RenderedFrame, render_frame, render_trajectory

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
