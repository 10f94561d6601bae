"""Grammar-driven compiler from camera instructions to trajectory scripts.

Grammar (case-insensitive)::

    text    := clause (SEP clause)*
    SEP     := "." | ";" | "then" | "and then"
    clause  := [time ","] action+
    time    := ("from" | "between") NUM ("to" | "and" | "-") NUM [UNIT]
             | NUM ("to" | "-") NUM UNIT
             | "for" NUM UNIT                      (duration, sequential start)
    action  := MOVE_VERB? DIRECTION | ZOOM | ROTATE ROT_DIR ["by" NUM "degrees"]
             | SPEED | "at" NUM "degrees" | connector
    UNIT    := "s" | "sec" | "second" | "seconds"

Clauses without an explicit range start where the previous clause ended (the
first one at 0) and last 1 s for movements, 0.5 s for pure rotations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional

from .dmr import DirectionSpec, MotionPrimitive, TrajectoryScript, validate_script

GRAMMAR_VERSION = "1.0"


@dataclass(frozen=True)
class ParserDefaults:
    move_duration_default: float = 1.0
    rotate_duration_default: float = 0.5
    rotate_degrees_default: float = 45.0

    def __post_init__(self):
        for name in ("move_duration_default", "rotate_duration_default", "rotate_degrees_default"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


class InstructionError(ValueError):
    def __init__(self, message, clause=None, token=None):
        self.clause = clause
        self.token = token
        where = []
        if clause is not None:
            where.append(f"clause {clause}")
        if token is not None:
            where.append(f"token {token!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class InstructionSyntaxError(InstructionError):
    pass


class InstructionSemanticError(InstructionError):
    pass


class UnknownKeywordError(InstructionError):
    pass


# -- keyword table -------------------------------------------------------------

MOVE_VERBS = ("move", "moves", "moving", "go", "goes", "pan", "pans", "panning", "orbit",
              "orbits", "orbiting", "shift", "shifts", "travel", "travels", "glide", "glides")
DIRECTIONS = {
    "right": 0.0, "rightward": 0.0, "rightwards": 0.0,
    "up": 90.0, "upward": 90.0, "upwards": 90.0,
    "left": 180.0, "leftward": 180.0, "leftwards": 180.0,
    "down": 270.0, "downward": 270.0, "downwards": 270.0,
    "up right": 45.0, "upper right": 45.0,
    "up left": 135.0, "upper left": 135.0,
    "down left": 225.0, "lower left": 225.0,
    "down right": 315.0, "lower right": 315.0,
}
RADIAL_PHRASES = {
    "zoom in": "zoom_in", "zooms in": "zoom_in", "zooming in": "zoom_in",
    "push in": "zoom_in", "pushes in": "zoom_in", "pushing in": "zoom_in",
    "dolly in": "zoom_in",
    "zoom out": "zoom_out", "zooms out": "zoom_out", "zooming out": "zoom_out",
    "pull out": "zoom_out", "pulls out": "zoom_out", "pulling out": "zoom_out",
    "pull back": "zoom_out", "dolly out": "zoom_out",
}
ROTATE_VERBS = ("rotate", "rotates", "rotating", "roll", "rolls", "rolling", "spin", "spins",
                "spinning", "turn", "turns", "turning")
ROTATE_DIRECTIONS = {
    "clockwise": "cw",
    "counterclockwise": "ccw",
    "counter clockwise": "ccw",
    "anticlockwise": "ccw",
    "anti clockwise": "ccw",
}
SPEED_PHRASES = {
    "slowly": "low", "slow": "low", "gently": "low", "at low speed": "low", "at a low speed": "low",
    "at slow speed": "low",
    "quickly": "high", "quick": "high", "fast": "high", "rapidly": "high", "swiftly": "high",
    "at high speed": "high", "at a high speed": "high", "at fast speed": "high",
    "steadily": "medium", "at medium speed": "medium", "at a medium speed": "medium",
    "at normal speed": "medium",
}
CONNECTORS = ("and", "while", "the", "camera", "a", "to", "then", "also", "simultaneously",
              "of", "direction", "in", "lens", "view", "shot")
ANGLE_PREPOSITIONS = {"at": "planar", "toward": "planar", "towards": "planar",
                      "by": "rotation", "through": "rotation"}
DEGREE_UNITS = ("degrees", "degree", "deg", "°")
TIME_UNITS = ("s", "sec", "secs", "second", "seconds")


def grammar_keywords() -> dict:
    """Keyword table backing the grammar; stable for a given GRAMMAR_VERSION."""
    return {
        "version": GRAMMAR_VERSION,
        "move_verbs": list(MOVE_VERBS),
        "directions": dict(DIRECTIONS),
        "radial": dict(RADIAL_PHRASES),
        "rotate_verbs": list(ROTATE_VERBS),
        "rotate_directions": dict(ROTATE_DIRECTIONS),
        "speed_adverbs": dict(SPEED_PHRASES),
        "angle_forms": ["at N degrees", "toward N degrees", "in the direction of N degrees",
                        "by N degrees (rotation magnitude)"],
        "time_forms": ["from A to B seconds", "between A and B seconds", "A-B seconds",
                       "A to B seconds", "for D seconds"],
        "separators": [".", ";", "then", "and then"],
        "connectors": list(CONNECTORS),
    }


_PHRASES = {}
for _p in MOVE_VERBS:
    _PHRASES[_p] = ("move", None)
for _p, _v in DIRECTIONS.items():
    _PHRASES[_p] = ("dir", _v)
for _p, _v in RADIAL_PHRASES.items():
    _PHRASES[_p] = ("radial", _v)
for _p in ROTATE_VERBS:
    _PHRASES[_p] = ("rotate", None)
for _p, _v in ROTATE_DIRECTIONS.items():
    _PHRASES[_p] = ("rotdir", _v)
for _p, _v in SPEED_PHRASES.items():
    _PHRASES[_p] = ("speed", _v)
for _p in CONNECTORS:
    _PHRASES.setdefault(_p, ("filler", None))
for _p, _v in ANGLE_PREPOSITIONS.items():
    _PHRASES.setdefault(_p, ("prep", _v))
_MAX_PHRASE = max(len(p.split()) for p in _PHRASES)

_NUM = r"\d+(?:\.\d+)?"
_UNIT = r"(?:s|secs?|seconds?)\b"
_TIME_PATTERNS = [
    re.compile(rf"^(?:from|between)\s+({_NUM})\s*(?:to|and|-)\s*({_NUM})\s*(?:{_UNIT})?\s*[,:]?\s*"),
    re.compile(rf"^({_NUM})\s*(?:to|-)\s*({_NUM})\s*{_UNIT}\s*[,:]?\s*"),
]
_DURATION = re.compile(rf"(?:^|\s|,)for\s+({_NUM})\s*{_UNIT}\s*,?")
_TOKEN = re.compile(rf"{_NUM}|°|[a-z]+|,|\S")


def _split_clauses(text: str) -> List[str]:
    # protect decimals so "0.5" survives splitting on "."
    marked = re.sub(r"(\d)\.(\d)", "\\1\x00\\2", text.lower())
    parts = re.split(r"[.;\n]|\band then\b|\bthen\b", marked)
    clauses = []
    for part in parts:
        part = part.replace("\x00", ".")
        part = re.sub(r"(\d)\s*-\s*(\d)", "\\1 to \\2", part).replace("-", " ")
        part = re.sub(r"\s+", " ", part).strip(" ,")
        if part:
            clauses.append(part)
    return clauses


@dataclass
class _Clause:
    start: Optional[float] = None
    end: Optional[float] = None
    duration: Optional[float] = None
    planar: Optional[float] = None
    radial: Optional[str] = None
    rotate: str = "none"
    rotate_degrees: Optional[float] = None
    speed: Optional[str] = None
    has_rotate_verb: bool = False


def _set_once(clause, attr, value, index, token):
    current = getattr(clause, attr)
    if current is not None and current != value:
        raise InstructionSemanticError(f"conflicting {attr}", index, token)
    setattr(clause, attr, value)


def _parse_clause(text: str, index: int) -> _Clause:
    c = _Clause()
    # time range prefix
    for pattern in _TIME_PATTERNS:
        m = pattern.match(text)
        if m:
            c.start, c.end = float(m.group(1)), float(m.group(2))
            text = text[m.end():]
            break
    m = _DURATION.search(text)
    if m:
        if c.start is not None:
            raise InstructionSemanticError("both time range and duration given", index, m.group(0).strip())
        c.duration = float(m.group(1))
        text = (text[: m.start()] + " " + text[m.end():]).strip()

    tokens = [t for t in _TOKEN.findall(text) if t != ","]
    i = 0
    pending_prep = None
    while i < len(tokens):
        tok = tokens[i]
        if re.fullmatch(_NUM, tok):
            if i + 1 >= len(tokens) or tokens[i + 1] not in DEGREE_UNITS:
                raise InstructionSyntaxError("number without unit", index, tok)
            value = float(tok)
            kind = pending_prep
            if kind is None:
                kind = "rotation" if c.has_rotate_verb and c.planar is None else "planar"
            if kind == "rotation":
                _set_once(c, "rotate_degrees", value, index, tok)
            else:
                if not 0.0 <= value < 360.0:
                    raise InstructionSemanticError("planar angle outside [0, 360)", index, tok)
                _set_once(c, "planar", value, index, tok)
            pending_prep = None
            i += 2
            continue
        for n in range(min(_MAX_PHRASE, len(tokens) - i), 0, -1):
            phrase = " ".join(tokens[i : i + n])
            if phrase in _PHRASES:
                break
        else:
            raise UnknownKeywordError("unknown keyword", index, tok)
        kind, value = _PHRASES[phrase]
        if kind == "prep":
            if i + 1 < len(tokens) and re.fullmatch(_NUM, tokens[i + 1]):
                pending_prep = value
            elif phrase not in CONNECTORS:
                raise InstructionSyntaxError("preposition without angle", index, tok)
        elif kind == "dir":
            _set_once(c, "planar", value, index, phrase)
        elif kind == "radial":
            _set_once(c, "radial", value, index, phrase)
        elif kind == "rotate":
            c.has_rotate_verb = True
        elif kind == "rotdir":
            if c.rotate != "none" and c.rotate != value:
                raise InstructionSemanticError("conflicting rotation", index, phrase)
            c.rotate = value
        elif kind == "speed":
            _set_once(c, "speed", value, index, phrase)
        i += n

    if c.has_rotate_verb and c.rotate == "none":
        raise InstructionSemanticError("rotation without direction", index)
    if c.rotate_degrees is not None and c.rotate == "none":
        raise InstructionSemanticError("rotation magnitude without rotation", index)
    if c.planar is None and c.radial is None and c.rotate == "none":
        raise InstructionSyntaxError("clause has no camera operation", index, text or None)
    return c


def parse_instruction_text(text: str, defaults: ParserDefaults = ParserDefaults()) -> TrajectoryScript:
    """Compile an instruction string into a validated TrajectoryScript."""
    clauses = _split_clauses(text)
    if not clauses:
        raise InstructionSyntaxError("empty instruction")
    prims = []
    cursor = 0.0
    for index, raw in enumerate(clauses):
        c = _parse_clause(raw, index)
        moving = c.planar is not None or c.radial is not None
        if c.start is not None:
            start, end = c.start, c.end
            if end <= start:
                raise InstructionSemanticError("end time not after start time", index)
            if start < cursor:
                raise InstructionSemanticError("time range overlaps previous operation", index)
        else:
            if c.duration is not None:
                if not c.duration > 0:
                    raise InstructionSemanticError("non-positive duration", index)
                length = c.duration
            else:
                length = defaults.move_duration_default if moving else defaults.rotate_duration_default
            start, end = cursor, cursor + length
        degrees = c.rotate_degrees
        if c.rotate != "none" and degrees is None:
            degrees = defaults.rotate_degrees_default
        prims.append(
            MotionPrimitive(
                start_time=start,
                end_time=end,
                speed=c.speed or "medium",
                direction=DirectionSpec(c.planar, c.radial),
                rotate=c.rotate,
                rotate_degrees=degrees,
            )
        )
        cursor = end
    script = TrajectoryScript(tuple(prims))
    validate_script(script).raise_for_violations()
    return script
