import numpy as np
import pytest

from camscript.geometry import Extrinsics, Intrinsics, PoseFrame, PoseSequence, look_at_extrinsics
from camscript.ply import PLYError, load_ply, save_ply
from camscript.render import (
    PointCloud,
    cube_cloud,
    project,
    read_pnm,
    render_frame,
    render_trajectory,
    write_frames,
)

K = Intrinsics(32.0, 32.0, 32.0, 32.0, 64, 64)
E = look_at_extrinsics((0, 0, 5))


def test_project_on_axis():
    assert project((0, 0, 0), K, E) == (32.0, 32.0, 5.0)


def test_project_behind_camera_culled():
    assert project((0, 0, 6), K, E) is None


def test_project_45_degrees_hits_edge():
    u, v, d = project((1, 0, 4), K, E)
    assert (u, v, d) == (64.0, 32.0, 1.0)
    assert project((1.01, 0, 4), K, E) is None


def test_single_point_single_pixel():
    f = render_frame(PointCloud([(0, 0, 0)], [(10, 20, 30)]), K, E)
    assert f.coverage == 1 and f.mask[32, 32] == 1
    assert tuple(f.rgb[32, 32]) == (10, 20, 30) and f.depth[32, 32] == 5.0


def test_nearer_point_wins():
    cloud = PointCloud([(0, 0, 3), (0, 0, 4)], [(255, 0, 0), (0, 255, 0)])
    f = render_frame(cloud, K, E)
    assert tuple(f.rgb[32, 32]) == (0, 255, 0) and f.depth[32, 32] == 1.0


def test_exact_tie_goes_to_lower_index():
    cloud = PointCloud([(0, 0, 0), (0, 0, 0)], [(1, 1, 1), (2, 2, 2)])
    assert tuple(render_frame(cloud, K, E).rgb[32, 32]) == (1, 1, 1)


def test_mask_matches_depth():
    f = render_frame(cube_cloud(1.0, 30), K, E, splat_radius=1)
    assert np.array_equal(f.mask == 0, np.isinf(f.depth))
    assert np.all(f.rgb[f.mask == 0] == 0)
    assert f.mask[0, 0] == 0


def test_splat_coverage_monotone():
    cloud = cube_cloud(1.0, 12)
    cov = [render_frame(cloud, K, E, splat_radius=r).coverage for r in range(4)]
    assert cov == sorted(cov)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        render_frame(PointCloud(np.zeros((0, 3)), np.zeros((0, 3))), K, E)
    with pytest.raises(ValueError):
        render_frame(PointCloud([(0, 0, 0)], [(0, 0, 0)]), K, E, splat_radius=-1)
    with pytest.raises(ValueError):
        PointCloud([(0, 0, np.nan)], [(0, 0, 0)])


def _poses(extrinsics):
    return PoseSequence([PoseFrame(i, K, e) for i, e in enumerate(extrinsics)])


def test_trajectory_determinism():
    cloud = PointCloud(np.random.default_rng(0).uniform(-1, 1, (5000, 3)),
                       np.random.default_rng(1).integers(0, 256, (5000, 3)))
    poses = _poses([look_at_extrinsics((np.cos(a) * 4, 1.0, np.sin(a) * 4)) for a in np.linspace(0, 1, 25)])
    seq = render_trajectory(cloud, poses)
    par = render_trajectory(cloud, poses, workers=4)
    assert len(seq) == 25
    assert all(a == b for a, b in zip(seq, par))
    same = render_trajectory(cloud, _poses([E, E]))
    assert same[0] == same[1]


def test_roll_quarter_turn_rotates_image():
    cloud = PointCloud(np.random.default_rng(5).uniform(-1, 1, (20000, 3)),
                       np.random.default_rng(6).integers(0, 256, (20000, 3)))
    base = render_frame(cloud, K, look_at_extrinsics((0.3, 0.8, 4.0)))
    rolled = render_frame(cloud, K, look_at_extrinsics((0.3, 0.8, 4.0), roll=90.0))
    expected = np.rot90(base.rgb, k=-1)
    mismatch = np.any(rolled.rgb != expected, axis=-1).mean()
    assert mismatch < 0.005


def test_frame_files(tmp_path):
    frames = render_trajectory(cube_cloud(1.0, 10), _poses([E]))
    write_frames(frames, tmp_path, depth=True)
    assert np.array_equal(read_pnm(tmp_path / "frame_00000.ppm"), frames[0].rgb)
    assert np.array_equal(read_pnm(tmp_path / "mask_00000.pgm"), frames[0].mask * 255)
    depth = np.frombuffer((tmp_path / "depth_00000.f32").read_bytes(), dtype=">f4").reshape(64, 64)
    assert np.array_equal(np.isinf(depth), frames[0].mask == 0)


# -- PLY ---------------------------------------------------------------------------


def test_ascii_fixture(ascii_ply):
    cloud = load_ply(ascii_ply)
    assert len(cloud) == 3
    assert np.array_equal(cloud.points[1], [1.5, -2.0, 0.25])
    assert np.array_equal(cloud.colors[2], [0, 0, 255])


def test_binary_matches_ascii(ascii_ply, tmp_path):
    cloud = load_ply(ascii_ply)
    save_ply(cloud, tmp_path / "b.ply", binary=True)
    save_ply(cloud, tmp_path / "a.ply", binary=False)
    assert load_ply(tmp_path / "b.ply") == cloud == load_ply(tmp_path / "a.ply")


def test_missing_z_named(tmp_path):
    p = tmp_path / "noz.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
                 "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n0 0 1 2 3\n")
    with pytest.raises(PLYError, match="'z'"):
        load_ply(p)


def test_truncated_and_malformed(tmp_path, ascii_ply):
    text = ascii_ply.read_text()
    (tmp_path / "short.ply").write_text(text.rsplit("\n", 2)[0] + "\n")
    with pytest.raises(PLYError, match="truncated"):
        load_ply(tmp_path / "short.ply")
    (tmp_path / "bad.ply").write_text("plx\n" + text[4:])
    with pytest.raises(PLYError, match="malformed"):
        load_ply(tmp_path / "bad.ply")
    cloud = load_ply(ascii_ply)
    save_ply(cloud, tmp_path / "b.ply")
    data = (tmp_path / "b.ply").read_bytes()
    (tmp_path / "bt.ply").write_bytes(data[:-5])
    with pytest.raises(PLYError, match="truncated"):
        load_ply(tmp_path / "bt.ply")


def test_extra_properties_ignored(tmp_path):
    p = tmp_path / "extra.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n"
                 "property float nx\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n"
                 "element face 0\nproperty list uchar int vertex_indices\nend_header\n1 2 3 0.5 4 5 6\n")
    cloud = load_ply(p)
    assert np.array_equal(cloud.points[0], [1, 2, 3]) and np.array_equal(cloud.colors[0], [4, 5, 6])
