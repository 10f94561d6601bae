"""Command-line entry point: ``camscript <subcommand> ...``.

Exit codes: 0 success, 2 usage error, 3 invalid input, 4 I/O error. Errors go
to stderr as one line of JSON.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from .analysis import (
    InversionError,
    InversionTolerances,
    SmoothingConfig,
    invert_to_script,
    poses_to_spherical,
    smooth_poses,
)
from .dataset import GenConfig, generate_dataset
from .dmr import DMRError, TrajectoryScript, load_scripts, script_to_json, scripts_to_jsonl, validate_script
from .geometry import DegenerateCameraError, Intrinsics, PoseFileError, dumps_poses, loads_poses, trajectory_to_poses
from .metrics import compute_dmr_metrics, psnr, rot_err, ssim, trans_err
from .parser import InstructionError, ParserDefaults, parse_instruction_text
from .planner import PlanConfig, jsonl_to_trajectory, plan, trajectory_to_jsonl
from .ply import PLYError, load_ply
from .render import read_pnm, render_trajectory, write_frames

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_IO = 0, 2, 3, 4

# pose files carry 9 significant digits, so exact-arithmetic tolerances are too tight
CLI_EPS_STEP = 1e-3
CLI_ANGLE_DECIMALS = 3

EPILOG = """\
instruction grammar (case-insensitive):
  clauses separated by '.', ';', 'then' or 'and then'
  time:      from A to B seconds | between A and B seconds | A-B seconds | A to B seconds | for D seconds
  movement:  [move|pan|go|orbit|shift|travel] right|left|up|down|upper right|...
             at|toward N degrees (0 = right, 90 = up, counterclockwise)
  zoom:      zoom in|zoom out|push in|pull out|pull back|dolly in|dolly out
  rotation:  rotate|roll|spin|turn clockwise|counterclockwise [by N degrees]
  speed:     slowly|quickly|fast|at low speed|at medium speed|at high speed|...
  untimed clauses start where the previous one ended; defaults 1 s (movement),
  0.5 s and 45 degrees (pure rotation)

file formats:
  DMR        JSON {"total_duration", "operations": [{"starttime", "endtime", "speed",
             "direction": {"angle", "radial"}, "rotate", "rotate_degrees"}]} or JSONL of such
  trajectory JSONL: header {"type": "header", "fps", "image_dims", "config"} then
             one {"frame", "phi", "theta", "r", "roll", "scale"} per frame
  poses      one line per frame: index fx fy cx cy r11 r12 r13 t1 r21 r22 r23 t2 r31 r32 r33 t3
             (world-to-camera, pixels); optional leading '# size W H'
  point cloud PLY (ascii or binary_little_endian) with x y z red green blue
  frames     frame_%05d.ppm (P6), mask_%05d.pgm (P5), optional depth_%05d.f32 (big-endian float32)
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)

    def exit(self, status=0, message=None):
        if status:
            raise UsageError((message or "").strip())
        if message:
            sys.stdout.write(message)
        raise SystemExit(status)


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=d(0), help="random seed (gen-dataset)")
    p.add_argument("--config", default=d(None), help="JSON config file with per-stage settings")
    p.add_argument("--output", "-o", default=d(None), help="write the primary output here instead of stdout")
    p.add_argument("--pretty", action="store_true", default=d(False), help="indented JSON / text tables")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="camscript",
        description="Compile camera instructions into trajectories, poses and renders; evaluate and invert them.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[_global_flags(False)],
    )
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True
    common = [_global_flags(True)]

    def add(name, help_):
        return sub.add_parser(name, help=help_, description=help_, parents=common,
                              epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)

    p = add("parse", "instruction text -> DMR JSON")
    p.add_argument("input", nargs="?", default="-", help="text file, '-' for stdin")
    p.add_argument("--text", help="instruction text given inline")
    p.add_argument("--lines", action="store_true", help="one instruction per line; emit DMR JSONL")

    p = add("plan", "DMR JSON -> trajectory JSONL")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--fps", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)

    p = add("poses", "trajectory JSONL -> pose file")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--hfov", type=float, help="horizontal field of view in degrees (default 60)")

    p = add("render", "pose file + PLY point cloud -> frames and masks")
    p.add_argument("input", nargs="?", default="-", help="pose file")
    p.add_argument("--ply", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--splat-radius", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--depth", action="store_true", help="also write depth dumps")

    p = add("invert", "pose file -> DMR JSON")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--fps", type=int)
    p.add_argument("--center", type=float, nargs=3, metavar=("X", "Y", "Z"))
    p.add_argument("--noisy", action="store_true", help="noise-tolerant segmentation for smoothed input")
    p.add_argument("--eps-step", type=float)
    p.add_argument("--min-run", type=int)
    p.add_argument("--angle-decimals", type=int)

    p = add("smooth", "pose file -> smoothed pose file")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--window", type=int)

    p = add("eval-dmr", "trajectory-accuracy metrics between DMR files")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--fps", type=int, default=25, help="frame rate behind the half-frame time tolerance")
    p.add_argument("--time-tol", type=float)
    p.add_argument("--eps-angle-fine", type=float, default=1.0)
    p.add_argument("--label", default="")

    p = add("eval-pose", "rotation / translation error between pose files")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)

    p = add("eval-image", "PSNR / SSIM between images or frame directories")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)

    p = add("gen-dataset", "synthetic trajectory-group corpus")
    p.add_argument("--n-groups", type=int)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--descriptions-per-group", type=int)
    p.add_argument("--fps", type=int)
    p.add_argument("--workers", type=int, default=1)
    return parser


# -- helpers ---------------------------------------------------------------------------


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _emit(text: str, args) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj, args) -> str:
    return json.dumps(obj, indent=2 if args.pretty else None)


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    return cfg


def _single_script(text: str) -> TrajectoryScript:
    scripts = load_scripts(text)
    if len(scripts) != 1:
        raise ValueError(f"expected one DMR document, got {len(scripts)}")
    return scripts[0]


def _finite(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


# -- subcommands -----------------------------------------------------------------------


def _cmd_parse(args, cfg):
    defaults = ParserDefaults(**cfg.get("parser", {}))
    text = args.text if args.text is not None else _read(args.input)
    if args.lines:
        scripts = [parse_instruction_text(line, defaults) for line in text.splitlines() if line.strip()]
        return scripts_to_jsonl(scripts)
    return script_to_json(parse_instruction_text(text, defaults), indent=2 if args.pretty else None)


def _plan_config(args, cfg) -> PlanConfig:
    pc = PlanConfig.from_dict(cfg["plan"]) if "plan" in cfg else PlanConfig()
    if getattr(args, "fps", None):
        pc = replace(pc, fps=args.fps)
    return pc


def _cmd_plan(args, cfg):
    script = _single_script(_read(args.input))
    validate_script(script).raise_for_violations()
    w, h = cfg.get("image_dims", (640, 360))
    dims = (args.width or w, args.height or h)
    return trajectory_to_jsonl(plan(script, _plan_config(args, cfg), dims))


def _cmd_poses(args, cfg):
    traj = jsonl_to_trajectory(_read(args.input))
    hfov = args.hfov if args.hfov is not None else cfg.get("hfov", 60.0)
    w, h = traj.image_dims
    return dumps_poses(trajectory_to_poses(traj, Intrinsics.from_fov(w, h, hfov)))


def _cmd_render(args, cfg):
    poses = loads_poses(_read(args.input))
    cloud = load_ply(args.ply)
    frames = render_trajectory(cloud, poses, args.splat_radius, args.workers)
    written = write_frames(frames, args.out_dir, depth=args.depth)
    return _json({"frames": len(written), "out_dir": str(args.out_dir),
                  "coverage": [f.coverage for f in frames]}, args)


def _cmd_invert(args, cfg):
    poses = loads_poses(_read(args.input))
    pc = _plan_config(args, cfg)
    base = dict(eps_step=CLI_EPS_STEP, angle_decimals=CLI_ANGLE_DECIMALS)
    if args.noisy:
        base.update(eps_step=0.5, min_run=2)
    base.update(cfg.get("inversion", {}))
    for key in ("eps_step", "min_run", "angle_decimals"):
        if getattr(args, key) is not None:
            base[key] = getattr(args, key)
    tol = InversionTolerances(**base)
    center = args.center if args.center is not None else cfg.get("center", (0.0, 0.0, 0.0))
    traj = poses_to_spherical(poses, center, pc)
    return script_to_json(invert_to_script(traj, pc.fps, tol, pc), indent=2 if args.pretty else None)


def _cmd_smooth(args, cfg):
    window = args.window if args.window is not None else cfg.get("smoothing", {}).get("window", 5)
    poses = loads_poses(_read(args.input))
    return dumps_poses(smooth_poses(poses, SmoothingConfig(window)))


def _cmd_eval_dmr(args, cfg):
    pred = load_scripts(_read(args.pred))
    gt = load_scripts(_read(args.gt))
    tol = InversionTolerances(eps_angle_fine=args.eps_angle_fine, time_tol=args.time_tol)
    report = compute_dmr_metrics(pred, gt, tol, args.fps)
    return report.table(args.label) if args.pretty else report.to_json()


def _cmd_eval_pose(args, cfg):
    pred = loads_poses(_read(args.pred))
    gt = loads_poses(_read(args.gt))
    if len(pred) != len(gt):
        raise ValueError(f"pose files differ in length ({len(pred)} vs {len(gt)})")
    return _json({
        "frames": len(gt),
        "rot_err": rot_err(pred.rotations, gt.rotations),
        "trans_err": trans_err(pred.translations, gt.translations),
    }, args)


def _image_pairs(pred: Path, gt: Path):
    if pred.is_dir() != gt.is_dir():
        raise ValueError("--pred and --gt must both be files or both be directories")
    if not pred.is_dir():
        return [(pred, gt)]
    a = sorted(pred.glob("frame_*.ppm"))
    b = sorted(gt.glob("frame_*.ppm"))
    if [p.name for p in a] != [p.name for p in b]:
        raise ValueError("frame directories hold different frame sets")
    if not a:
        raise ValueError("no frame_*.ppm files found")
    return list(zip(a, b))


def _cmd_eval_image(args, cfg):
    rows = []
    for p, g in _image_pairs(Path(args.pred), Path(args.gt)):
        x, y = read_pnm(p), read_pnm(g)
        rows.append((p.name, psnr(x, y), ssim(x, y)))
    psnrs = [r[1] for r in rows]
    return _json({
        "frames": len(rows),
        "psnr": _finite(float(np.mean(psnrs))),
        "ssim": float(np.mean([r[2] for r in rows])),
        "per_frame": [{"name": n, "psnr": _finite(pv), "ssim": sv} for n, pv, sv in rows],
    }, args)


def _cmd_gen_dataset(args, cfg):
    params = dict(cfg.get("dataset", {}))
    params["seed"] = args.seed
    for key in ("n_groups", "descriptions_per_group", "fps"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    if "ops_per_script" in params:
        params["ops_per_script"] = {int(k): v for k, v in params["ops_per_script"].items()}
    if "image_dims" in params:
        params["image_dims"] = tuple(params["image_dims"])
    _, stats = generate_dataset(GenConfig(**params), args.out_dir, workers=args.workers)
    return _json(stats, args)


COMMANDS = {
    "parse": _cmd_parse,
    "plan": _cmd_plan,
    "poses": _cmd_poses,
    "render": _cmd_render,
    "invert": _cmd_invert,
    "smooth": _cmd_smooth,
    "eval-dmr": _cmd_eval_dmr,
    "eval-pose": _cmd_eval_pose,
    "eval-image": _cmd_eval_image,
    "gen-dataset": _cmd_gen_dataset,
}

_INVALID = (DMRError, InstructionError, PoseFileError, PLYError, InversionError, DegenerateCameraError,
            ValueError, TypeError, KeyError)


def _fail(code: int, exc: BaseException, kind: Optional[str] = None) -> int:
    envelope = {"error": {"code": code, "type": kind or type(exc).__name__, "message": str(exc)}}
    sys.stderr.write(json.dumps(envelope) + "\n")
    return code


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc, "UsageError")
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        cfg = _load_config(args.config)
        out = COMMANDS[args.command](args, cfg)
        _emit(out, args)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    except _INVALID as exc:
        return _fail(EXIT_INVALID, exc)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
