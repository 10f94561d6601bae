"""Trajectory accuracy metrics, pose errors and pixel metrics."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .analysis import InversionTolerances
from .dmr import MotionPrimitive, TrajectoryScript

METRIC_NAMES = ("m_d_course", "m_d_fine", "m_speed", "m_rotate", "m_starttime", "m_endtime")
_TABLE_HEADERS = ("Avg", "M_d-course", "M_d-fine", "M_speed", "M_rotate", "M_starttime", "M_endtime")

# boundary comparisons on decimal times should not flip on the last ulp
_TIME_SLACK = 1e-9


@dataclass(frozen=True)
class MetricsReport:
    m_starttime: float
    m_endtime: float
    m_speed: float
    m_rotate: float
    m_d_course: float
    m_d_fine: float
    avg: float
    counts: Dict[str, Dict[str, int]]

    def metrics(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def table(self, label: str = "") -> str:
        """Aligned one-row text table, Avg first."""
        values = [self.avg] + [getattr(self, n) for n in METRIC_NAMES]
        cells = [f"{v:.3f}" for v in values]
        widths = [max(len(h), len(c)) for h, c in zip(_TABLE_HEADERS, cells)]
        lead = max(len(label), 5)
        head = "Model".ljust(lead) + "  " + "  ".join(h.rjust(w) for h, w in zip(_TABLE_HEADERS, widths))
        row = label.ljust(lead) + "  " + "  ".join(c.rjust(w) for c, w in zip(cells, widths))
        return head + "\n" + row


def average_metrics(values: Sequence[float]) -> float:
    """Arithmetic mean of the six trajectory metrics, summed in order."""
    values = list(values)
    if len(values) != len(METRIC_NAMES):
        raise ValueError(f"expected {len(METRIC_NAMES)} metric values")
    total = 0.0
    for v in values:
        total += v
    return total / len(values)


def report_from_values(
    m_d_course: float, m_d_fine: float, m_speed: float, m_rotate: float, m_starttime: float, m_endtime: float
) -> MetricsReport:
    vals = (m_d_course, m_d_fine, m_speed, m_rotate, m_starttime, m_endtime)
    return MetricsReport(
        m_starttime=m_starttime, m_endtime=m_endtime, m_speed=m_speed, m_rotate=m_rotate,
        m_d_course=m_d_course, m_d_fine=m_d_fine, avg=average_metrics(vals), counts={},
    )


def compass_bin(angle: float, n_bins: int = 8) -> int:
    """Index of the nearest of ``n_bins`` principal directions (0 = right)."""
    width = 360.0 / n_bins
    return int(math.floor(((angle % 360.0) + width / 2.0) / width)) % n_bins


def _angle_diff(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def direction_course_match(pred: MotionPrimitive, gt: MotionPrimitive, n_bins: int = 8) -> bool:
    pa, ga = pred.direction.planar_angle, gt.direction.planar_angle
    if (pa is None) != (ga is None):
        return False
    if pa is not None and compass_bin(pa, n_bins) != compass_bin(ga, n_bins):
        return False
    return pred.direction.radial == gt.direction.radial


def direction_fine_match(pred: MotionPrimitive, gt: MotionPrimitive, eps_angle: float, n_bins: int = 8) -> bool:
    if not direction_course_match(pred, gt, n_bins):
        return False
    pa, ga = pred.direction.planar_angle, gt.direction.planar_angle
    return pa is None or _angle_diff(pa, ga) <= eps_angle


def compute_dmr_metrics(
    pred: Sequence[TrajectoryScript],
    gt: Sequence[TrajectoryScript],
    tol: Optional[InversionTolerances] = None,
    fps: float = 25,
    n_bins: int = 8,
) -> MetricsReport:
    """Score predicted scripts against ground truth, pairing scripts and primitives by index.

    Start and end times are scored over every ground-truth or predicted
    primitive; speed, rotate and both direction metrics are scored over the
    matched pairs and only count as correct when both times are correct.
    Primitives without a counterpart are wrong on start/end.
    """
    pred, gt = list(pred), list(gt)
    if not pred or not gt:
        raise ValueError("empty input")
    if len(pred) != len(gt):
        raise ValueError(f"{len(pred)} predictions for {len(gt)} ground-truth scripts")
    tol = tol or InversionTolerances()
    time_tol = tol.resolved_time_tol(fps) + _TIME_SLACK

    correct = dict.fromkeys(METRIC_NAMES, 0)
    time_total = 0
    matched = 0
    for p_script, g_script in zip(pred, gt):
        pp, gp = p_script.primitives, g_script.primitives
        time_total += max(len(pp), len(gp))
        for p, g in zip(pp, gp):
            matched += 1
            start_ok = abs(p.start_time - g.start_time) <= time_tol
            end_ok = abs(p.end_time - g.end_time) <= time_tol
            correct["m_starttime"] += start_ok
            correct["m_endtime"] += end_ok
            if not (start_ok and end_ok):
                continue
            correct["m_speed"] += p.speed == g.speed
            correct["m_rotate"] += p.rotate == g.rotate
            correct["m_d_course"] += direction_course_match(p, g, n_bins)
            correct["m_d_fine"] += direction_fine_match(p, g, tol.eps_angle_fine, n_bins)

    totals = {
        "m_starttime": time_total, "m_endtime": time_total,
        "m_speed": matched, "m_rotate": matched, "m_d_course": matched, "m_d_fine": matched,
    }
    values = {}
    for name in METRIC_NAMES:
        values[name] = 100.0 * correct[name] / totals[name] if totals[name] else 100.0
    counts = {name: {"correct": correct[name], "total": totals[name]} for name in METRIC_NAMES}
    return MetricsReport(
        avg=average_metrics([values[n] for n in METRIC_NAMES]), counts=counts, **values
    )


# -- pose errors ---------------------------------------------------------------------


def rot_err(gen: Sequence[np.ndarray], gt: Sequence[np.ndarray]) -> float:
    """Summed geodesic angle (radians) between paired rotation matrices.

    The angle is atan2(sin, cos) with cos = (tr(A B^T) - 1) / 2 clamped to
    [-1, 1] and sin taken from the skew part. For exact rotations this equals
    arccos(cos); unlike arccos it stays accurate near zero, where rounded
    matrices would otherwise report a spurious error of order sqrt(ulp).
    """
    if len(gen) != len(gt):
        raise ValueError("rotation lists differ in length")
    total = 0.0
    for a, b in zip(gen, gt):
        m = np.asarray(a, dtype=float) @ np.asarray(b, dtype=float).T
        cos = min(1.0, max(-1.0, (float(np.trace(m)) - 1.0) / 2.0))
        sin = 0.5 * math.sqrt((m[2, 1] - m[1, 2]) ** 2 + (m[0, 2] - m[2, 0]) ** 2 + (m[1, 0] - m[0, 1]) ** 2)
        total += math.atan2(sin, cos)
    return total


def trans_err(gen: Sequence[np.ndarray], gt: Sequence[np.ndarray]) -> float:
    """Summed Euclidean distance between paired translations."""
    if len(gen) != len(gt):
        raise ValueError("translation lists differ in length")
    total = 0.0
    for a, b in zip(gen, gt):
        total += float(np.linalg.norm(np.asarray(b, dtype=float) - np.asarray(a, dtype=float)))
    return total


# -- pixel metrics ---------------------------------------------------------------------

SSIM_WINDOW = 8
SSIM_K1 = 0.01
SSIM_K2 = 0.03
_LUMA = np.array([0.299, 0.587, 0.114])


def _check_pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(a, b, max_value: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    a, b = _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(max_value**2 / mse)


def to_luma(img) -> np.ndarray:
    img = np.asarray(img, dtype=float)
    if img.ndim == 3 and img.shape[2] == 3:
        return img @ _LUMA
    if img.ndim == 3 and img.shape[2] == 1:
        return img[..., 0]
    if img.ndim == 2:
        return img
    raise ValueError(f"unsupported image shape {img.shape}")


def ssim(a, b, max_value: float = 255.0, window: int = SSIM_WINDOW) -> float:
    """Mean SSIM over non-overlapping ``window`` x ``window`` blocks of luma.

    Images smaller than one block are scored as a single block.
    """
    a, b = _check_pair(a, b)
    x, y = to_luma(a), to_luma(b)
    c1 = (SSIM_K1 * max_value) ** 2
    c2 = (SSIM_K2 * max_value) ** 2
    h, w = x.shape
    wh, ww = min(window, h), min(window, w)
    nh, nw = h // wh, w // ww
    xb = x[: nh * wh, : nw * ww].reshape(nh, wh, nw, ww).transpose(0, 2, 1, 3).reshape(nh, nw, -1)
    yb = y[: nh * wh, : nw * ww].reshape(nh, wh, nw, ww).transpose(0, 2, 1, 3).reshape(nh, nw, -1)
    mx, my = xb.mean(axis=-1), yb.mean(axis=-1)
    vx = ((xb - mx[..., None]) ** 2).mean(axis=-1)
    vy = ((yb - my[..., None]) ** 2).mean(axis=-1)
    cov = ((xb - mx[..., None]) * (yb - my[..., None])).mean(axis=-1)
    num = (2 * mx * my + c1) * (2 * cov + c2)
    den = (mx**2 + my**2 + c1) * (vx + vy + c2)
    return float(np.mean(num / den))
