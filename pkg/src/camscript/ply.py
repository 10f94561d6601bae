"""Minimal PLY reader/writer for coloured point clouds (ascii and binary little-endian)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .render import PointCloud

_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}
_REQUIRED = ("x", "y", "z", "red", "green", "blue")


class PLYError(ValueError):
    pass


def _parse_header(f):
    first = f.readline()
    if first.strip() != b"ply":
        raise PLYError("malformed header: missing 'ply' magic")
    fmt = None
    elements = []  # (name, count, [(prop, dtype)] or None for lists)
    while True:
        raw = f.readline()
        if not raw:
            raise PLYError("malformed header: missing end_header")
        line = raw.decode("ascii", errors="replace").strip()
        if not line or line.startswith("comment") or line.startswith("obj_info"):
            continue
        parts = line.split()
        if parts[0] == "end_header":
            break
        if parts[0] == "format":
            if len(parts) != 3:
                raise PLYError(f"malformed header line {line!r}")
            fmt = parts[1]
        elif parts[0] == "element":
            if len(parts) != 3:
                raise PLYError(f"malformed header line {line!r}")
            try:
                elements.append([parts[1], int(parts[2]), []])
            except ValueError:
                raise PLYError(f"malformed element count in {line!r}") from None
        elif parts[0] == "property":
            if not elements:
                raise PLYError("malformed header: property before element")
            if parts[1] == "list":
                elements[-1][2].append((parts[-1], None))
            else:
                if len(parts) != 3 or parts[1] not in _PLY_TYPES:
                    raise PLYError(f"malformed property line {line!r}")
                elements[-1][2].append((parts[2], _PLY_TYPES[parts[1]]))
        else:
            raise PLYError(f"malformed header line {line!r}")
    if fmt not in ("ascii", "binary_little_endian"):
        raise PLYError(f"unsupported format {fmt!r}")
    return fmt, elements


def load_ply(path) -> PointCloud:
    """Vertices in file order; properties other than x, y, z, red, green, blue are ignored."""
    with open(path, "rb") as f:
        fmt, elements = _parse_header(f)
        vertex = None
        for name, count, props in elements:
            if name == "vertex":
                vertex = (count, props)
                break
            if fmt != "ascii" and any(dt is None for _, dt in props):
                raise PLYError("list properties before the vertex element are not supported")
        if vertex is None:
            raise PLYError("no vertex element")
        count, props = vertex
        names = [p for p, _ in props]
        for req in _REQUIRED:
            if req not in names:
                raise PLYError(f"missing required vertex property {req!r}")
        if any(dt is None for _, dt in props):
            raise PLYError("list properties on vertices are not supported")

        if fmt == "ascii":
            # skip any elements declared before the vertices
            for name, n, _ in elements:
                if name == "vertex":
                    break
                for _ in range(n):
                    f.readline()
            rows = []
            for i in range(count):
                line = f.readline()
                if not line:
                    raise PLYError(f"truncated body: expected {count} vertices, got {i}")
                vals = line.split()
                if len(vals) < len(props):
                    raise PLYError(f"truncated vertex {i}")
                rows.append(vals[: len(props)])
            try:
                table = np.array(rows, dtype=float).reshape(count, len(props))
            except ValueError as exc:
                raise PLYError(f"malformed vertex data ({exc})") from None
            col = {p: table[:, i] for i, p in enumerate(names)}
        else:
            for name, n, eprops in elements:
                if name == "vertex":
                    break
                f.seek(n * np.dtype([(p, "<" + dt) for p, dt in eprops]).itemsize, 1)
            dtype = np.dtype([(p, "<" + dt) for p, dt in props])
            buf = f.read(dtype.itemsize * count)
            if len(buf) < dtype.itemsize * count:
                raise PLYError(f"truncated body: expected {count} vertices")
            data = np.frombuffer(buf, dtype=dtype, count=count)
            col = {p: data[p].astype(float) for p in names}

    xyz = np.stack([col["x"], col["y"], col["z"]], axis=1)
    rgb = np.stack([col["red"], col["green"], col["blue"]], axis=1)
    return PointCloud(xyz, rgb)


def save_ply(cloud: PointCloud, path, binary: bool = True) -> None:
    n = len(cloud)
    header = [
        "ply",
        f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
        f"element vertex {n}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        "end_header",
    ]
    head = ("\n".join(header) + "\n").encode("ascii")
    rgb = np.clip(np.round(cloud.colors), 0, 255).astype(np.uint8)
    with open(Path(path), "wb") as f:
        f.write(head)
        if binary:
            data = np.empty(n, dtype=[("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
                                      ("red", "u1"), ("green", "u1"), ("blue", "u1")])
            for i, k in enumerate("xyz"):
                data[k] = cloud.points[:, i]
            data["red"], data["green"], data["blue"] = rgb[:, 0], rgb[:, 1], rgb[:, 2]
            f.write(data.tobytes())
        else:
            lines = [
                " ".join(f"{float(np.float32(v)):.9g}" for v in p) + f" {c[0]} {c[1]} {c[2]}"
                for p, c in zip(cloud.points, rgb)
            ]
            f.write(("\n".join(lines) + ("\n" if lines else "")).encode("ascii"))
