"""Synthetic trajectory-group corpora: sampled scripts, phrasings and planned trajectories.

Randomness comes from numpy's Philox4x64 counter-based generator keyed by
``SeedSequence([seed, group_id])``, so any group can be regenerated on its own
and the corpus is a pure function of the configuration.

Sampled operation boundaries sit on whole seconds. That keeps every boundary
on the frame grid at 1, 5, 10 and 25 fps, which the reverse parser needs for an
exact round trip; rotations therefore always carry explicit times, since the
0.5 s default falls between frames at those rates.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .dmr import DirectionSpec, MotionPrimitive, TrajectoryScript, script_to_dict, validate_script
from .parser import ParserDefaults, parse_instruction_text
from .planner import PlanConfig, SphericalTrajectory, plan

CLASSES = ("single", "compound", "angular", "rotation")
CARDINALS = (0.0, 90.0, 180.0, 270.0)
ROTATION_MAGNITUDES = (30.0, 45.0, 60.0, 90.0)
N_TEMPLATES = 10

# sampled scripts keep clear of the polar clamp and the radius floor
THETA_BOUNDS = (20.0, 160.0)
RADIUS_BOUNDS = (0.5, 5.0)
# contiguous operations must differ by this much (in base-rate units) to stay separable
MIN_CONTRAST = 0.25


@dataclass(frozen=True)
class GenConfig:
    n_groups: int = 1000
    seed: int = 0
    ops_per_script: Dict[int, float] = field(
        default_factory=lambda: {1: 0.05, 2: 0.30, 3: 0.35, 4: 0.25, 5: 0.05}
    )
    motion_mix: Dict[str, float] = field(
        default_factory=lambda: {"single": 0.275, "compound": 0.257, "angular": 0.401, "rotation": 0.067}
    )
    descriptions_per_group: int = 10
    gap_probability: float = 0.2
    fps: int = 25
    image_dims: Tuple[int, int] = (640, 360)

    def __post_init__(self):
        if self.n_groups < 1:
            raise ValueError("n_groups must be >= 1")
        if abs(sum(self.motion_mix.values()) - 1.0) > 1e-9:
            raise ValueError("motion_mix proportions must sum to 1")
        if set(self.motion_mix) != set(CLASSES):
            raise ValueError(f"motion_mix needs exactly {CLASSES}")
        if abs(sum(self.ops_per_script.values()) - 1.0) > 1e-9:
            raise ValueError("ops_per_script weights must sum to 1")
        if not set(self.ops_per_script) <= {1, 2, 3, 4, 5}:
            raise ValueError("ops_per_script covers 1..5 operations")
        if not 1 <= self.descriptions_per_group <= N_TEMPLATES:
            raise ValueError(f"descriptions_per_group must be in 1..{N_TEMPLATES}")

    @property
    def plan_config(self) -> PlanConfig:
        return PlanConfig(fps=self.fps)


@dataclass
class TrajectoryGroup:
    group_id: int
    descriptions: List[str]
    script: TrajectoryScript
    trajectory: SphericalTrajectory

    def to_dict(self) -> dict:
        return {
            "group_id": self.group_id,
            "descriptions": list(self.descriptions),
            "dmr": script_to_dict(self.script),
            "trajectory": {
                "fps": self.trajectory.fps,
                "image_dims": list(self.trajectory.image_dims),
                "columns": ["phi", "theta", "r", "roll", "scale"],
                "samples": [
                    [float(f"{v:.9g}") + 0.0 for v in (s.phi, s.theta, s.radius, s.roll, s.scale)]
                    for s in self.trajectory.samples
                ],
            },
        }


def group_rng(seed: int, group_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, group_id])))


def classify_primitive(p: MotionPrimitive) -> str:
    """Count-once class with priority rotation > angular > compound > single."""
    if p.rotate != "none":
        return "rotation"
    a = p.direction.planar_angle
    if a is not None and not _near_principal(a):
        return "angular"
    if a is not None and p.direction.radial is not None:
        return "compound"
    return "single"


def _near_principal(angle: float, tol: float = 1.0) -> bool:
    off = angle % 45.0
    return min(off, 45.0 - off) <= tol


def _rate_vector(p: MotionPrimitive, cfg: PlanConfig) -> np.ndarray:
    m = cfg.speed_multipliers[p.speed]
    v = np.zeros(4)
    if p.direction.planar_angle is not None:
        a = math.radians(p.direction.planar_angle)
        v[0], v[1] = m * math.cos(a), -m * math.sin(a)
    if p.direction.radial is not None:
        v[2] = -m if p.direction.radial == "zoom_in" else m
    if p.rotate != "none":
        v[3] = p.signed_rotation / p.duration / cfg.base_angular_rate
    return v


def _sample_op(rng: np.random.Generator, cls: str, start: float) -> MotionPrimitive:
    speeds = ("low", "medium", "high")
    duration = float(rng.choice((1.0, 2.0), p=(0.6, 0.4)))
    if cls == "single":
        k = int(rng.integers(6))
        direction = DirectionSpec(CARDINALS[k], None) if k < 4 else DirectionSpec(None, ("zoom_in", "zoom_out")[k - 4])
        return MotionPrimitive(start, start + duration, speeds[rng.integers(3)], direction)
    if cls == "compound":
        angle = CARDINALS[rng.integers(4)]
        radial = ("zoom_in", "zoom_out")[rng.integers(2)]
        return MotionPrimitive(start, start + duration, speeds[rng.integers(3)], DirectionSpec(angle, radial))
    if cls == "angular":
        while True:
            angle = round(float(rng.uniform(0.0, 360.0)), 1) % 360.0
            if not _near_principal(angle):
                break
        return MotionPrimitive(start, start + duration, speeds[rng.integers(3)], DirectionSpec(angle, None))
    rotate = ("cw", "ccw")[rng.integers(2)]
    degrees = ROTATION_MAGNITUDES[rng.integers(len(ROTATION_MAGNITUDES))]
    if rng.random() < 0.3:
        direction = DirectionSpec(CARDINALS[rng.integers(4)], None)
        speed = speeds[rng.integers(3)]
    else:
        direction, speed = DirectionSpec(), "medium"
    return MotionPrimitive(start, start + duration, speed, direction, rotate, degrees)


def _advance(state, p: MotionPrimitive, cfg: PlanConfig):
    theta, r = state
    m = cfg.speed_multipliers[p.speed]
    if p.direction.planar_angle is not None:
        theta -= cfg.base_angular_rate * m * math.sin(math.radians(p.direction.planar_angle)) * p.duration
    if p.direction.radial is not None:
        sign = -1.0 if p.direction.radial == "zoom_in" else 1.0
        r += sign * cfg.base_radial_rate * m * p.duration
    return theta, r


def _in_bounds(state) -> bool:
    theta, r = state
    return THETA_BOUNDS[0] <= theta <= THETA_BOUNDS[1] and RADIUS_BOUNDS[0] <= r <= RADIUS_BOUNDS[1]


def sample_script(rng: np.random.Generator, cfg: GenConfig = GenConfig()) -> TrajectoryScript:
    """Draw one script: op count, per-op class, parameters, and occasional gaps."""
    pcfg = cfg.plan_config
    counts = sorted(cfg.ops_per_script)
    n_ops = int(rng.choice(counts, p=[cfg.ops_per_script[c] for c in counts]))
    classes = list(CLASSES)
    mix = [cfg.motion_mix[c] for c in classes]
    state = (pcfg.initial_pose[1], pcfg.initial_pose[2])
    cursor = 0.0
    prims: List[MotionPrimitive] = []
    for _ in range(n_ops):
        if rng.random() < cfg.gap_probability:
            cursor += float(rng.integers(1, 3))
        cls = classes[int(rng.choice(len(classes), p=mix))]
        for _attempt in range(200):
            op = _sample_op(rng, cls, cursor)
            nxt = _advance(state, op, pcfg)
            if not _in_bounds(nxt):
                continue
            if prims and prims[-1].end_time == op.start_time:
                contrast = np.max(np.abs(_rate_vector(op, pcfg) - _rate_vector(prims[-1], pcfg)))
                if contrast < MIN_CONTRAST:
                    continue
            break
        else:
            raise RuntimeError(f"could not sample a {cls} operation within bounds")
        prims.append(op)
        state = nxt
        cursor = op.end_time
    script = TrajectoryScript(tuple(prims))
    validate_script(script).raise_for_violations()
    return script


# -- phrasing templates ----------------------------------------------------------------


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


_CARDINAL_WORDS = {0.0: "right", 90.0: "up", 180.0: "left", 270.0: "down"}

# per template: time style, move verb, speed words (low, medium, high), radial words,
# rotation verb, angle form, clause separator, optional joiner between planar and radial parts
_STYLES = [
    dict(time="from", verb="move", speed=("slowly", "", "quickly"), radial=("zoom in", "zoom out"),
         rot="rotate", angle="at", sep=". ", default_ok=False),
    dict(time="between", verb="the camera moves", speed=("slowly", "", "quickly"),
         radial=("the camera zooms in", "the camera zooms out"), rot="the camera rotates",
         angle="toward", sep=". ", default_ok=True),
    dict(time="dash", verb="pan", speed=("at low speed", "", "at high speed"), radial=("push in", "pull out"),
         rot="roll", angle="at", sep="; ", default_ok=True),
    dict(time="from", verb="glide", speed=("slowly", "", "fast"), radial=("pushing in", "pulling out"),
         rot="turn", angle="at", sep=", then ", default_ok=True, joiner=" while "),
    dict(time="from", verb="go", speed=("gently", "", "rapidly"), radial=("dolly in", "dolly out"),
         rot="spin", angle="at", sep=". ", default_ok=True, adverb_first=True),
    dict(time="from", verb="the camera orbits", speed=("slowly", "steadily", "swiftly"),
         radial=("the camera pushes in", "the camera pulls out"), rot="the camera turns",
         angle="toward", sep=". ", default_ok=True),
    dict(time="to", verb="shift", speed=("slowly", "", "quickly"), radial=("zoom in", "zoom out"),
         rot="rotate", angle="at", sep=". ", default_ok=False),
    dict(time="from", verb="move", speed=("at a low speed", "at medium speed", "at a high speed"),
         radial=("push in", "pull back"), rot="the camera rolls", angle="direction", sep=". ", default_ok=True),
    dict(time="from", verb="move", speed=("slowly", "", "quickly"), radial=("zoom in", "zoom out"),
         rot="rotate", angle="at", sep=". ", default_ok=True, shout=True),
    dict(time="between", verb="travel", speed=("slowly", "", "quickly"), radial=("zooming in", "zooming out"),
         rot="the camera spins", angle="at", sep=" and then ", default_ok=True, joiner=" while "),
]


_GERUNDS = {"rotate": "rotating", "roll": "rolling", "turn": "turning", "spin": "spinning"}


def _direction_phrase(angle: float, style: dict) -> str:
    if style["angle"] == "direction":
        return f"in the direction of {_num(angle)} degrees"
    word = _CARDINAL_WORDS.get(angle)
    if word is not None:
        return word
    return f"{style['angle']} {_num(angle)} degrees"


def _time_phrase(p: MotionPrimitive, style: dict) -> str:
    a, b = _num(p.start_time), _num(p.end_time)
    unit = "second" if p.end_time == 1.0 else "seconds"
    kind = style["time"]
    if kind == "between":
        return f"between {a} and {b} seconds, "
    if kind == "dash":
        return f"{a}-{b} seconds, "
    if kind == "to":
        return f"{a} to {b} {unit}, "
    return f"from {a} to {b} {unit}, "


def _clause(p: MotionPrimitive, cursor: float, style: dict, defaults: ParserDefaults) -> str:
    moving = not p.direction.is_empty
    speed_word = style["speed"][("low", "medium", "high").index(p.speed)]
    parts = []
    if p.direction.planar_angle is not None:
        parts.append(f"{style['verb']} {_direction_phrase(p.direction.planar_angle, style)}")
    if p.direction.radial is not None:
        parts.append(style["radial"][0 if p.direction.radial == "zoom_in" else 1])
    action = style.get("joiner", " and ").join(parts)
    if speed_word and moving:
        action = f"{speed_word} {action}" if style.get("adverb_first") else f"{action} {speed_word}"
    if p.rotate != "none":
        rot_dir = "clockwise" if p.rotate == "cw" else "counterclockwise"
        rot = f"{style['rot']} {rot_dir}"
        if p.rotate_degrees is not None and p.rotate_degrees != defaults.rotate_degrees_default:
            rot += f" by {_num(p.rotate_degrees)} degrees"
        elif style["time"] in ("between", "to"):
            rot += f" by {_num(p.rotate_degrees)} degrees"
        if moving:
            verb, _, rest = rot.partition(" ")
            rot = f"{_GERUNDS.get(verb, verb)} {rest}"
            action = f"{action} while {rot}"
        else:
            action = rot

    default_len = defaults.move_duration_default if moving else defaults.rotate_duration_default
    sequential = p.start_time == cursor
    if style["default_ok"] and sequential and p.duration == default_len:
        return action
    if style["default_ok"] and sequential:
        unit = "second" if p.duration == 1.0 else "seconds"
        return f"{action} for {_num(p.duration)} {unit}"
    return _time_phrase(p, style) + action


def render_description(script: TrajectoryScript, template_id: int, defaults: ParserDefaults = ParserDefaults()) -> str:
    """Phrase ``script`` with one of ten templates; the text parses back to ``script``."""
    if not 0 <= template_id < N_TEMPLATES:
        raise ValueError(f"template_id must be in 0..{N_TEMPLATES - 1}")
    style = _STYLES[template_id]
    clauses = []
    cursor = 0.0
    for p in script.primitives:
        clauses.append(_clause(p, cursor, style, defaults))
        cursor = p.end_time
    if style["sep"] == ". ":
        clauses = [c[:1].upper() + c[1:] for c in clauses]
    text = style["sep"].join(clauses)
    text = text[:1].upper() + text[1:] + "."
    if style.get("shout"):
        text = text.upper()
    return text


# -- corpus ----------------------------------------------------------------------------


def generate_group(group_id: int, cfg: GenConfig) -> TrajectoryGroup:
    rng = group_rng(cfg.seed, group_id)
    script = sample_script(rng, cfg)
    descriptions = [render_description(script, k) for k in range(cfg.descriptions_per_group)]
    traj = plan(script, cfg.plan_config, cfg.image_dims)
    return TrajectoryGroup(group_id, descriptions, script, traj)


def corpus_stats(groups: List[TrajectoryGroup], cfg: GenConfig, check_adjointness: bool = True) -> dict:
    classes = Counter()
    hist = Counter()
    n_desc = 0
    reparsed = 0
    for g in groups:
        hist[len(g.script)] += 1
        for p in g.script.primitives:
            classes[classify_primitive(p)] += 1
        n_desc += len(g.descriptions)
        if check_adjointness:
            reparsed += sum(parse_instruction_text(d) == g.script for d in g.descriptions)
    n_ops = sum(classes.values())
    stats = {
        "n_groups": len(groups),
        "n_descriptions": n_desc,
        "n_operations": n_ops,
        "class_counts": {c: classes[c] for c in CLASSES},
        "class_proportions": {c: classes[c] / n_ops if n_ops else 0.0 for c in CLASSES},
        "target_proportions": dict(cfg.motion_mix),
        "ops_histogram": {str(k): hist[k] for k in range(1, 6)},
        "seed": cfg.seed,
    }
    if check_adjointness:
        stats["adjointness_rate"] = reparsed / n_desc if n_desc else 1.0
    return stats


def generate_dataset(
    cfg: GenConfig = GenConfig(), out_dir=None, workers: Optional[int] = None
) -> Tuple[List[TrajectoryGroup], dict]:
    """Build ``cfg.n_groups`` groups; optionally write ``corpus.jsonl`` and ``stats.json``.

    ``workers > 1`` spreads groups over processes. Seeds are per group, so the
    result does not depend on the worker count.
    """
    ids = range(cfg.n_groups)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(generate_group, ids, [cfg] * cfg.n_groups, chunksize=64))
    else:
        groups = [generate_group(i, cfg) for i in ids]
    stats = corpus_stats(groups, cfg)
    if out_dir is not None:
        write_corpus(groups, stats, out_dir)
    return groups, stats


def write_corpus(groups: List[TrajectoryGroup], stats: dict, out_dir) -> Tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = out / "corpus.jsonl"
    with open(corpus, "w", encoding="utf-8") as f:
        for g in groups:
            f.write(json.dumps(g.to_dict(), ensure_ascii=False) + "\n")
    stats_path = out / "stats.json"
    stats_path.write_text(json.dumps(stats, indent=2) + "\n", encoding="utf-8")
    return corpus, stats_path


def sample_scripts(n: int, seed: int = 0, cfg: Optional[GenConfig] = None) -> List[TrajectoryScript]:
    """``n`` scripts drawn exactly as the corpus generator draws them."""
    cfg = cfg or GenConfig(n_groups=max(n, 1), seed=seed)
    return [sample_script(group_rng(seed, i), cfg) for i in range(n)]
