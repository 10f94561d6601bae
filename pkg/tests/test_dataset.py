import json
from collections import Counter

import pytest

from camscript.analysis import invert_to_script, poses_to_spherical
from camscript.dataset import (
    CLASSES,
    GenConfig,
    classify_primitive,
    generate_dataset,
    group_rng,
    render_description,
    sample_script,
    sample_scripts,
)
from camscript.dmr import TrajectoryScript, validate_script
from camscript.geometry import trajectory_to_poses
from camscript.parser import parse_instruction_text
from camscript.planner import PlanConfig, plan

from conftest import prim


def test_template_zero(right_script):
    assert render_description(right_script, 0) == "From 0 to 1 second, move right."


def test_all_templates_distinct_and_adjoint(right_script):
    texts = [render_description(right_script, k) for k in range(10)]
    assert len(set(texts)) == 10
    assert all(parse_instruction_text(t) == right_script for t in texts)


def test_rotation_wording():
    s = TrajectoryScript((prim(0, 1, rotate="ccw", degrees=60.0),))
    assert "rotate counterclockwise" in render_description(s, 0)
    s = TrajectoryScript((prim(0, 1, rotate="cw", degrees=60.0),))
    assert "rotate clockwise" in render_description(s, 0)


def test_template_range():
    with pytest.raises(ValueError):
        render_description(TrajectoryScript((prim(0, 1, angle=0.0),)), 10)


def test_classification_priority():
    assert classify_primitive(prim(0, 1, angle=12.5, rotate="cw", degrees=30.0)) == "rotation"
    assert classify_primitive(prim(0, 1, angle=12.5, radial="zoom_in")) == "angular"
    assert classify_primitive(prim(0, 1, angle=90.0, radial="zoom_in")) == "compound"
    assert classify_primitive(prim(0, 1, angle=180.0)) == "single"
    assert classify_primitive(prim(0, 1, radial="zoom_out")) == "single"


def test_sampling_deterministic():
    cfg = GenConfig(n_groups=1)
    assert sample_script(group_rng(9, 4), cfg) == sample_script(group_rng(9, 4), cfg)
    assert sample_script(group_rng(9, 4), cfg) != sample_script(group_rng(9, 5), cfg)


def test_sampled_scripts_properties():
    scripts = sample_scripts(2000, seed=11)
    counts = Counter()
    for s in scripts:
        assert 1 <= len(s) <= 5
        assert validate_script(s).ok
        for p in s.primitives:
            counts[classify_primitive(p)] += 1
            a = p.direction.planar_angle
            if classify_primitive(p) == "angular":
                off = a % 45.0
                assert min(off, 45.0 - off) > 1.0
    total = sum(counts.values())
    mix = GenConfig().motion_mix
    for c in CLASSES:
        assert abs(counts[c] / total - mix[c]) <= 0.03


def test_plan_invert_closure():
    for s in sample_scripts(60, seed=5):
        for fps in (5, 10, 25):
            cfg = PlanConfig(fps=fps)
            traj = plan(s, cfg)
            assert invert_to_script(poses_to_spherical(trajectory_to_poses(traj), config=cfg)) == s


def test_corpus_files_byte_identical(tmp_path):
    cfg = GenConfig(n_groups=100, seed=2)
    generate_dataset(cfg, tmp_path / "a")
    generate_dataset(cfg, tmp_path / "b", workers=2)
    assert (tmp_path / "a" / "corpus.jsonl").read_bytes() == (tmp_path / "b" / "corpus.jsonl").read_bytes()
    lines = (tmp_path / "a" / "corpus.jsonl").read_text().splitlines()
    assert len(lines) == 100
    rec = json.loads(lines[0])
    assert set(rec) == {"group_id", "descriptions", "dmr", "trajectory"}
    assert len(rec["descriptions"]) == 10


def test_stats_match_counting_oracle(tmp_path):
    groups, stats = generate_dataset(GenConfig(n_groups=200, seed=8), tmp_path)
    on_disk = json.loads((tmp_path / "stats.json").read_text())
    assert on_disk == stats
    counts = Counter(classify_primitive(p) for g in groups for p in g.script.primitives)
    assert stats["class_counts"] == {c: counts[c] for c in CLASSES}
    assert sum(stats["ops_histogram"].values()) == 200
    assert stats["adjointness_rate"] == 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(n_groups=0)
    with pytest.raises(ValueError):
        GenConfig(motion_mix={"single": 0.5, "compound": 0.5, "angular": 0.1, "rotation": 0.0})
    with pytest.raises(ValueError):
        GenConfig(descriptions_per_group=11)
