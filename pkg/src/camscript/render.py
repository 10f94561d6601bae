"""Z-buffered point splatting along a pose sequence.

Pixel ``(i, j)`` covers ``[i, i+1) x [j, j+1)`` in image coordinates, so a
point at ``(u, v)`` lands in column ``floor(u)`` and row ``floor(v)``. With
the principal point at ``(w/2, h/2)`` this keeps square renders exactly
symmetric under quarter-turn rolls.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from .geometry import Extrinsics, Intrinsics, PoseSequence

NEAR = 1e-6
BACKGROUND = (0, 0, 0)


@dataclass(eq=False)
class PointCloud:
    points: np.ndarray
    colors: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        self.colors = np.asarray(self.colors, dtype=float).reshape(-1, 3)
        if len(self.points) != len(self.colors):
            raise ValueError("points and colors differ in length")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point coordinates must be finite")

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(self.colors, other.colors)


@dataclass(eq=False)
class RenderedFrame:
    rgb: np.ndarray    # (h, w, 3) uint8
    mask: np.ndarray   # (h, w) uint8, 1 = covered
    depth: np.ndarray  # (h, w) float, inf where uncovered

    def __eq__(self, other):
        if not isinstance(other, RenderedFrame):
            return NotImplemented
        return (
            np.array_equal(self.rgb, other.rgb)
            and np.array_equal(self.mask, other.mask)
            and np.array_equal(self.depth, other.depth)
        )

    @property
    def coverage(self) -> int:
        return int(self.mask.sum())


def project(point, K: Intrinsics, E: Extrinsics):
    """(u, v, depth) of a world point, or None when culled."""
    pc = E.R @ np.asarray(point, dtype=float) + E.t
    depth = -pc[2]
    if depth <= NEAR:
        return None
    u = K.cx + K.fx * pc[0] / depth
    v = K.cy - K.fy * pc[1] / depth
    if not (0.0 <= u <= K.width and 0.0 <= v <= K.height):
        return None
    return float(u), float(v), float(depth)


def render_frame(cloud: PointCloud, K: Intrinsics, E: Extrinsics, splat_radius: int = 0) -> RenderedFrame:
    """Nearest point wins each pixel; exact depth ties go to the lower point index."""
    w, h = int(K.width), int(K.height)
    if w <= 0 or h <= 0:
        raise ValueError("zero-size image")
    if len(cloud) == 0:
        raise ValueError("empty point cloud")
    if splat_radius < 0:
        raise ValueError("splat_radius must be >= 0")

    pc = cloud.points @ E.R.T + E.t
    depth = -pc[:, 2]
    front = depth > NEAR
    idx = np.nonzero(front)[0]
    d = depth[front]
    u = K.cx + K.fx * pc[front, 0] / d
    v = K.cy - K.fy * pc[front, 1] / d
    # drop points whose splat cannot reach the image before the integer cast
    reach = splat_radius + 1
    keep = (u > -reach) & (u < w + reach) & (v > -reach) & (v < h + reach)
    idx, d = idx[keep], d[keep]
    col = np.floor(u[keep]).astype(np.int64)
    row = np.floor(v[keep]).astype(np.int64)

    if splat_radius:
        offs = np.arange(-splat_radius, splat_radius + 1)
        dc, dr = np.meshgrid(offs, offs)
        col = (col[:, None] + dc.ravel()[None, :]).ravel()
        row = (row[:, None] + dr.ravel()[None, :]).ravel()
        k = dc.size
        idx = np.repeat(idx, k)
        d = np.repeat(d, k)

    inside = (col >= 0) & (col < w) & (row >= 0) & (row < h)
    col, row, idx, d = col[inside], row[inside], idx[inside], d[inside]
    pix = row * w + col

    rgb = np.zeros((h * w, 3), dtype=np.uint8)
    rgb[:] = BACKGROUND
    zbuf = np.full(h * w, np.inf)
    mask = np.zeros(h * w, dtype=np.uint8)
    if len(pix):
        order = np.lexsort((idx, d, pix))
        pix_s = pix[order]
        first = np.ones(len(pix_s), dtype=bool)
        first[1:] = pix_s[1:] != pix_s[:-1]
        winners = order[first]
        target = pix[winners]
        colors = np.clip(np.round(cloud.colors[idx[winners]]), 0, 255).astype(np.uint8)
        rgb[target] = colors
        zbuf[target] = d[winners]
        mask[target] = 1
    return RenderedFrame(rgb.reshape(h, w, 3), mask.reshape(h, w), zbuf.reshape(h, w))


def render_trajectory(
    cloud: PointCloud, poses: PoseSequence, splat_radius: int = 0, workers: Optional[int] = None
) -> List[RenderedFrame]:
    """Render every pose in order; ``workers > 1`` renders frames concurrently."""
    if len(cloud) == 0:
        raise ValueError("empty point cloud")

    def one(frame):
        return render_frame(cloud, frame.intrinsics, frame.extrinsics, splat_radius)

    if workers is None or workers <= 1:
        return [one(f) for f in poses.frames]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, poses.frames))


# -- image files ----------------------------------------------------------------------


def write_ppm(rgb: np.ndarray, path) -> None:
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w = rgb.shape[:2]
    Path(path).write_bytes(f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes())


def write_pgm(gray: np.ndarray, path) -> None:
    gray = np.ascontiguousarray(gray, dtype=np.uint8)
    h, w = gray.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + gray.tobytes())


def write_depth(depth: np.ndarray, path) -> None:
    """Raw 32-bit big-endian floats, row-major."""
    Path(path).write_bytes(np.ascontiguousarray(depth, dtype=">f4").tobytes())


def read_pnm(path) -> np.ndarray:
    """Read a binary PPM (P6) or PGM (P5) with maxval < 256."""
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PNM header")
        tokens.append(data[start:pos])
    pos += 1
    magic = tokens[0]
    w, h, maxval = (int(t) for t in tokens[1:])
    if magic not in (b"P5", b"P6") or maxval > 255:
        raise ValueError("only 8-bit binary PPM/PGM supported")
    channels = 3 if magic == b"P6" else 1
    n = w * h * channels
    body = data[pos : pos + n]
    if len(body) < n:
        raise ValueError("truncated PNM body")
    img = np.frombuffer(body, dtype=np.uint8)
    return img.reshape(h, w, 3) if channels == 3 else img.reshape(h, w)


def write_frames(frames: List[RenderedFrame], out_dir, depth: bool = False) -> List[Path]:
    """``frame_%05d.ppm`` plus ``mask_%05d.pgm`` (and ``depth_%05d.f32``) per frame."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for i, fr in enumerate(frames):
        p = out / f"frame_{i:05d}.ppm"
        write_ppm(fr.rgb, p)
        write_pgm(fr.mask * 255, out / f"mask_{i:05d}.pgm")
        if depth:
            write_depth(fr.depth, out / f"depth_{i:05d}.f32")
        written.append(p)
    return written


def cube_cloud(size: float = 1.0, per_edge: int = 20, center=(0.0, 0.0, 0.0)) -> PointCloud:
    """Points on the surface of an axis-aligned cube, coloured by face."""
    s = np.linspace(-size / 2, size / 2, per_edge)
    a, b = np.meshgrid(s, s)
    a, b = a.ravel(), b.ravel()
    half = np.full_like(a, size / 2)
    faces = []
    palette = [(255, 0, 0), (0, 255, 0), (0, 0, 255), (255, 255, 0), (0, 255, 255), (255, 0, 255)]
    for axis in range(3):
        for sign in (-1.0, 1.0):
            pts = np.empty((len(a), 3))
            others = [i for i in range(3) if i != axis]
            pts[:, axis] = sign * half
            pts[:, others[0]] = a
            pts[:, others[1]] = b
            faces.append(pts)
    points = np.concatenate(faces) + np.asarray(center, dtype=float)
    colors = np.concatenate([np.tile(palette[i], (len(a), 1)) for i in range(6)])
    return PointCloud(points, colors)

