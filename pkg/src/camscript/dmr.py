"""Discrete motion representation: primitives, scripts, validation and JSON I/O.

A script is an ordered list of camera operations. Each operation carries the
five canonical fields ``starttime``, ``endtime``, ``speed``, ``direction`` and
``rotate``; rotations may also carry an explicit magnitude in degrees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

SPEEDS = ("low", "medium", "high")
ROTATIONS = ("cw", "ccw", "none")
RADIALS = ("zoom_in", "zoom_out")

# canonical wire names first, aliases after
_ROTATE_WIRE = {"cw": "clockwise", "ccw": "counterclockwise", "none": "stationary"}
_ROTATE_ALIASES = {
    "clockwise": "cw",
    "cw": "cw",
    "counterclockwise": "ccw",
    "anticlockwise": "ccw",
    "ccw": "ccw",
    "stationary": "none",
    "none": "none",
}

TIME_DECIMALS = 6


class DMRError(ValueError):
    """Base class for malformed discrete motion representations."""


class DMRFormatError(DMRError):
    """A serialized document could not be decoded."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ScriptValidationError(DMRError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class DirectionSpec:
    """Image-plane direction (0 = right, 90 = up, ccw) and/or a radial zoom."""

    planar_angle: Optional[float] = None
    radial: Optional[str] = None

    @property
    def is_empty(self) -> bool:
        return self.planar_angle is None and self.radial is None


@dataclass(frozen=True)
class MotionPrimitive:
    start_time: float
    end_time: float
    speed: str = "medium"
    direction: DirectionSpec = field(default_factory=DirectionSpec)
    rotate: str = "none"
    rotate_degrees: Optional[float] = None

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time

    @property
    def signed_rotation(self) -> float:
        """Rotation magnitude with sign: counterclockwise positive."""
        if self.rotate == "none" or self.rotate_degrees is None:
            return 0.0
        return self.rotate_degrees if self.rotate == "ccw" else -self.rotate_degrees


@dataclass(frozen=True)
class TrajectoryScript:
    primitives: Tuple[MotionPrimitive, ...] = ()
    total_duration: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        if self.total_duration is None:
            end = max((p.end_time for p in self.primitives), default=0.0)
            object.__setattr__(self, "total_duration", end)

    def __len__(self):
        return len(self.primitives)

    def __iter__(self):
        return iter(self.primitives)


@dataclass(frozen=True)
class Violation:
    index: Optional[int]
    rule: str

    def __str__(self):
        where = "script" if self.index is None else f"index {self.index}"
        return f"{self.rule} at {where}"


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def raise_for_violations(self):
        if self.violations:
            raise ScriptValidationError(self.violations)


def _primitive_violations(i: int, p: MotionPrimitive) -> List[Violation]:
    out = []
    if p.start_time < 0:
        out.append(Violation(i, "negative start time"))
    if not p.end_time > p.start_time:
        out.append(Violation(i, "empty interval"))
    if p.speed not in SPEEDS:
        out.append(Violation(i, f"unknown speed {p.speed!r}"))
    if p.rotate not in ROTATIONS:
        out.append(Violation(i, f"unknown rotate {p.rotate!r}"))
    d = p.direction
    if d.planar_angle is not None and not 0.0 <= d.planar_angle < 360.0:
        out.append(Violation(i, "planar angle outside [0, 360)"))
    if d.radial is not None and d.radial not in RADIALS:
        out.append(Violation(i, f"unknown radial {d.radial!r}"))
    if p.rotate_degrees is not None:
        if p.rotate == "none":
            out.append(Violation(i, "rotate_degrees without rotation"))
        if not p.rotate_degrees > 0:
            out.append(Violation(i, "non-positive rotate_degrees"))
    if d.is_empty and p.rotate == "none":
        out.append(Violation(i, "no motion"))
    return out


def validate_script(script: TrajectoryScript) -> ValidationReport:
    """Check every primitive and the ordering/overlap rules of a script."""
    violations = []
    prims = script.primitives
    for i, p in enumerate(prims):
        violations.extend(_primitive_violations(i, p))
        if i > 0:
            prev = prims[i - 1]
            if p.start_time < prev.start_time:
                violations.append(Violation(i, "unsorted"))
            elif p.start_time < prev.end_time:
                violations.append(Violation(i, "overlap"))
    end = max((p.end_time for p in prims), default=0.0)
    if script.total_duration < end:
        violations.append(Violation(None, "total_duration shorter than last end time"))
    return ValidationReport(tuple(violations))


def sort_primitives(script: TrajectoryScript) -> TrajectoryScript:
    ordered = sorted(script.primitives, key=lambda p: (p.start_time, p.end_time))
    return TrajectoryScript(tuple(ordered), script.total_duration)


# -- serialization -----------------------------------------------------------


def _time(value: float) -> float:
    return round(float(value), TIME_DECIMALS) + 0.0


def primitive_to_dict(p: MotionPrimitive) -> dict:
    out = {
        "starttime": _time(p.start_time),
        "endtime": _time(p.end_time),
        "speed": p.speed,
        "direction": {
            "angle": p.direction.planar_angle,
            "radial": p.direction.radial,
        },
        "rotate": _ROTATE_WIRE[p.rotate],
    }
    if p.rotate_degrees is not None:
        out["rotate_degrees"] = p.rotate_degrees
    return out


def script_to_dict(script: TrajectoryScript) -> dict:
    ordered = sort_primitives(script)
    return {
        "total_duration": _time(ordered.total_duration),
        "operations": [primitive_to_dict(p) for p in ordered.primitives],
    }


def script_to_json(script: TrajectoryScript, indent=None) -> str:
    """Serialize to the canonical DMR document (keys in fixed order)."""
    return json.dumps(script_to_dict(script), indent=indent, ensure_ascii=False)


_PRIMITIVE_KEYS = {"starttime", "endtime", "speed", "direction", "rotate", "rotate_degrees"}
_REQUIRED_KEYS = ("starttime", "endtime", "speed", "direction", "rotate")


def _number(value, name, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DMRFormatError(f"{where}: field {name!r} must be a number")
    return float(value)


def primitive_from_dict(d: dict, where="operation") -> MotionPrimitive:
    if not isinstance(d, dict):
        raise DMRFormatError(f"{where}: expected an object")
    unknown = set(d) - _PRIMITIVE_KEYS
    if unknown:
        raise DMRFormatError(f"{where}: unknown field {sorted(unknown)[0]!r}")
    for key in _REQUIRED_KEYS:
        if key not in d:
            raise DMRFormatError(f"{where}: missing required field {key!r}")

    speed = d["speed"]
    if speed not in SPEEDS:
        raise DMRFormatError(f"{where}: unknown speed {speed!r}")
    rotate = _ROTATE_ALIASES.get(str(d["rotate"]).lower())
    if rotate is None:
        raise DMRFormatError(f"{where}: unknown rotate {d['rotate']!r}")

    direction = d["direction"]
    if direction is None:
        direction = {}
    if not isinstance(direction, dict):
        raise DMRFormatError(f"{where}: field 'direction' must be an object")
    extra = set(direction) - {"angle", "radial"}
    if extra:
        raise DMRFormatError(f"{where}: unknown field {sorted(extra)[0]!r} in direction")
    angle = direction.get("angle")
    if angle is not None:
        angle = _number(angle, "angle", where)
    radial = direction.get("radial")
    if radial is not None and radial not in RADIALS:
        raise DMRFormatError(f"{where}: unknown radial {radial!r}")

    degrees = d.get("rotate_degrees")
    if degrees is not None:
        degrees = _number(degrees, "rotate_degrees", where)

    return MotionPrimitive(
        start_time=_number(d["starttime"], "starttime", where),
        end_time=_number(d["endtime"], "endtime", where),
        speed=speed,
        direction=DirectionSpec(angle, radial),
        rotate=rotate,
        rotate_degrees=degrees,
    )


def script_from_dict(doc) -> TrajectoryScript:
    if isinstance(doc, list):
        doc = {"operations": doc}
    if not isinstance(doc, dict):
        raise DMRFormatError("document must be an object")
    unknown = set(doc) - {"operations", "total_duration"}
    if unknown:
        raise DMRFormatError(f"unknown field {sorted(unknown)[0]!r}")
    if "operations" not in doc:
        raise DMRFormatError("missing required field 'operations'")
    ops = doc["operations"]
    if not isinstance(ops, list):
        raise DMRFormatError("field 'operations' must be a list")
    prims = [primitive_from_dict(op, f"operation {i}") for i, op in enumerate(ops)]
    total = doc.get("total_duration")
    if total is not None:
        total = _number(total, "total_duration", "document")
    return TrajectoryScript(tuple(prims), total)


def json_to_script(document: str) -> TrajectoryScript:
    """Parse a canonical DMR document; raises DMRFormatError with position info."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise DMRFormatError(exc.msg, exc.lineno, exc.colno) from None
    return script_from_dict(doc)


def scripts_to_jsonl(scripts: Iterable[TrajectoryScript]) -> str:
    return "".join(script_to_json(s) + "\n" for s in scripts)


def jsonl_to_scripts(text: str) -> List[TrajectoryScript]:
    scripts = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DMRFormatError(exc.msg, lineno, exc.colno) from None
        # corpus records embed the script under "dmr"
        if isinstance(doc, dict) and "dmr" in doc:
            doc = doc["dmr"]
        scripts.append(script_from_dict(doc))
    return scripts


def load_scripts(text: str) -> List[TrajectoryScript]:
    """Accept either a single DMR document or JSONL."""
    stripped = text.strip()
    if not stripped:
        return []
    try:
        return [json_to_script(stripped)]
    except DMRFormatError as exc:
        if "\n" not in stripped or exc.line is None:
            raise
    return jsonl_to_scripts(stripped)

