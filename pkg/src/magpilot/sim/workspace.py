"""Corridor-shaped workspaces of graded difficulty.

Three fixed geometries (A, B, C) inside a 1280x960 tick frame. The corridor
is the set of points within ``half_width`` of a centerline polyline; task
difficulty grows with the cumulative heading change along the centerline
(30, 90, 150 degrees) while the corridor simultaneously narrows.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

WIDTH = 1280.0
HEIGHT = 960.0
TASKS = ("A", "B", "C")

# (start, start heading deg, [(turn deg, length), ...], half width)
_LAYOUTS = {
    "A": ((160.0, 420.0), 0.0, [(0.0, 480.0), (30.0, 500.0)], 66.0),
    "B": ((160.0, 300.0), 0.0, [(0.0, 400.0), (45.0, 330.0), (45.0, 330.0)], 50.0),
    "C": ((160.0, 240.0), 0.0, [(0.0, 400.0), (75.0, 340.0), (75.0, 340.0)], 40.0),
}
_CARGO_ARC = 260.0
_BEAD_ARC = 150.0
_GOAL_BACKOFF = 70.0
GOAL_RADIUS = 55.0


@dataclass(frozen=True)
class WorkspaceSpec:
    task_id: str
    width: float
    height: float
    centerline: np.ndarray  # (n, 2) vertices, ticks
    half_width: float
    cargo_start: np.ndarray  # (2,)
    bead_start: np.ndarray  # (2,) canonical reset position
    goal_center: np.ndarray  # (2,)
    goal_radius: float
    cumulative_turn_deg: float

    @property
    def poly_xs(self) -> np.ndarray:
        return np.ascontiguousarray(self.centerline[:, 0])

    @property
    def poly_ys(self) -> np.ndarray:
        return np.ascontiguousarray(self.centerline[:, 1])


def arc_length(centerline: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.diff(centerline, axis=0), axis=1)))


def point_at_arc(centerline: np.ndarray, s: float):
    """Point and unit tangent at arc position s (clamped to the ends)."""
    if s <= 0.0:
        seg = centerline[1] - centerline[0]
        return centerline[0].copy(), seg / np.linalg.norm(seg)
    acc = 0.0
    for i in range(len(centerline) - 1):
        seg = centerline[i + 1] - centerline[i]
        seg_len = float(np.linalg.norm(seg))
        if acc + seg_len >= s:
            t = (s - acc) / seg_len
            return centerline[i] + t * seg, seg / seg_len
        acc += seg_len
    seg = centerline[-1] - centerline[-2]
    return centerline[-1].copy(), seg / np.linalg.norm(seg)


def arc_position(centerline: np.ndarray, p: np.ndarray) -> float:
    """Arc coordinate of the centerline point nearest to p."""
    best_d2 = math.inf
    best_s = 0.0
    acc = 0.0
    for i in range(len(centerline) - 1):
        a = centerline[i]
        e = centerline[i + 1] - a
        seg_len2 = float(e @ e)
        t = float((p - a) @ e) / seg_len2
        t = min(1.0, max(0.0, t))
        c = a + t * e
        d2 = float((p - c) @ (p - c))
        seg_len = math.sqrt(seg_len2)
        if d2 < best_d2:
            best_d2 = d2
            best_s = acc + t * seg_len
        acc += seg_len
    return best_s


def build_workspace(task_id: str) -> WorkspaceSpec:
    """Fixed, seed-independent geometry for one of the tasks A, B, C."""
    if task_id not in _LAYOUTS:
        raise ValueError(f"unknown task {task_id!r}; expected one of {TASKS}")
    (sx, sy), heading, segs, half_width = _LAYOUTS[task_id]
    pts = [(sx, sy)]
    cum_turn = 0.0
    for turn, length in segs:
        heading += turn
        cum_turn += abs(turn)
        rad = math.radians(heading)
        px, py = pts[-1]
        pts.append((px + length * math.cos(rad), py + length * math.sin(rad)))
    centerline = np.array(pts, dtype=np.float64)
    cargo, _ = point_at_arc(centerline, _CARGO_ARC)
    bead, _ = point_at_arc(centerline, _BEAD_ARC)
    goal, _ = point_at_arc(centerline, arc_length(centerline) - _GOAL_BACKOFF)
    return WorkspaceSpec(
        task_id=task_id,
        width=WIDTH,
        height=HEIGHT,
        centerline=centerline,
        half_width=half_width,
        cargo_start=cargo,
        bead_start=bead,
        goal_center=goal,
        goal_radius=GOAL_RADIUS,
        cumulative_turn_deg=cum_turn,
    )


def workspace_to_dict(ws: WorkspaceSpec) -> dict:
    return {
        "task_id": ws.task_id,
        "bounds": {"width": ws.width, "height": ws.height},
        "corridor": {
            "centerline": ws.centerline.tolist(),
            "half_width": ws.half_width,
        },
        "cargo_start": ws.cargo_start.tolist(),
        "bead_start": ws.bead_start.tolist(),
        "goal_region": {
            "center": ws.goal_center.tolist(),
            "radius": ws.goal_radius,
        },
        "cumulative_turn_deg": ws.cumulative_turn_deg,
        "arc_length": arc_length(ws.centerline),
    }


def export_workspaces(path) -> None:
    """Write all task geometries as documented JSON (consumed by the UI)."""
    payload = {
        "format_version": 1,
        "workspaces": {t: workspace_to_dict(build_workspace(t)) for t in TASKS},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
