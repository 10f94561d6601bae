import pytest

from camscript.dmr import TrajectoryScript
from camscript.parser import (
    GRAMMAR_VERSION,
    InstructionError,
    InstructionSemanticError,
    InstructionSyntaxError,
    ParserDefaults,
    UnknownKeywordError,
    grammar_keywords,
    parse_instruction_text,
)

from conftest import prim


def test_move_right_defaults():
    assert parse_instruction_text("Move right.") == TrajectoryScript((prim(0.0, 1.0, angle=0.0),))


def test_rotate_defaults():
    s = parse_instruction_text("Rotate clockwise.")
    assert s.primitives == (prim(0.0, 0.5, rotate="cw", degrees=45.0),)


def test_explicit_ranges_with_gap():
    s = parse_instruction_text(
        "From 0 to 1 second, move quickly at 45 degrees. From 3 to 4 seconds, zoom out slowly."
    )
    assert s.primitives == (prim(0, 1, "high", 45.0), prim(3, 4, "low", radial="zoom_out"))
    assert s.total_duration == 4.0


def test_sequential_scheduling():
    s = parse_instruction_text("Move left. Then rotate counterclockwise by 90 degrees. Zoom in for 2 seconds.")
    assert [(p.start_time, p.end_time) for p in s.primitives] == [(0, 1), (1, 1.5), (1.5, 3.5)]
    assert s.primitives[1].rotate == "ccw" and s.primitives[1].rotate_degrees == 90.0


@pytest.mark.parametrize("text", [
    "Between 2 and 3 seconds, pan up.",
    "2-3 seconds: pan up.",
    "2 to 3 seconds, pan up.",
    "FROM 2 TO 3 SECONDS, MOVE UPWARD.",
])
def test_time_forms(text):
    assert parse_instruction_text(text).primitives == (prim(2, 3, angle=90.0),)


def test_compound_and_rotation_in_one_clause():
    s = parse_instruction_text("move down and zoom in quickly while rotating clockwise by 30 degrees")
    assert s.primitives == (prim(0, 1, "high", 270.0, "zoom_in", "cw", 30.0),)


def test_direction_of_phrase():
    s = parse_instruction_text("Move in the direction of 212.5 degrees at a low speed.")
    assert s.primitives == (prim(0, 1, "low", 212.5),)


def test_custom_defaults():
    s = parse_instruction_text("Rotate clockwise.", ParserDefaults(rotate_duration_default=2.0, rotate_degrees_default=90))
    assert s.primitives == (prim(0, 2, rotate="cw", degrees=90.0),)


def test_unknown_word():
    with pytest.raises(UnknownKeywordError) as err:
        parse_instruction_text("Move right. Fly sideways.")
    assert err.value.clause == 1 and err.value.token == "fly"


def test_overlapping_ranges_rejected():
    with pytest.raises(InstructionError):
        parse_instruction_text("From 0 to 2 seconds, move right. From 1 to 3 seconds, move up.")


def test_clause_without_motion():
    with pytest.raises(InstructionSyntaxError):
        parse_instruction_text("From 0 to 1 seconds, slowly.")


def test_rotation_verb_without_sense():
    with pytest.raises(InstructionSemanticError):
        parse_instruction_text("Rotate by 30 degrees.")


def test_conflicting_directions():
    with pytest.raises(InstructionError):
        parse_instruction_text("move left right")


def test_keyword_table():
    kw = grammar_keywords()
    assert kw["version"] == GRAMMAR_VERSION
    for word in ("left", "right", "up", "down"):
        assert word in kw["directions"]
    assert {"zoom in", "zoom out"} <= set(kw["radial"])
    assert kw["speed_adverbs"]["slowly"] == "low" and kw["speed_adverbs"]["quickly"] == "high"
    assert kw["rotate_directions"]["counterclockwise"] == "ccw"


def test_deterministic():
    text = "From 1 to 2.5 seconds, move at 33.3 degrees. Then spin clockwise by 60 degrees."
    assert parse_instruction_text(text) == parse_instruction_text(text)
