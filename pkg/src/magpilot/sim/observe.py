"""Observations: a normalized feature vector plus an optional occupancy grid.

The goal region is deliberately absent from both, so goal identity reaches
the policy only through the language prompt.
"""

from dataclasses import dataclass

import numpy as np

from magpilot.sim import kernels
from magpilot.sim.engine import SimState
from magpilot.sim.workspace import WorkspaceSpec

FEATURE_DIM = 11
GRID_SIZE = 32
GRID_CHANNELS = 4  # walls, bead, cargo, arms

_walls_cache: dict[str, np.ndarray] = {}


@dataclass(frozen=True)
class Observation:
    features: np.ndarray  # (FEATURE_DIM,)
    grid: np.ndarray | None = None  # (4, 32, 32) in [0, 1]


def walls_grid(ws: WorkspaceSpec) -> np.ndarray:
    """Cells whose center lies outside the corridor (cached per task)."""
    cached = _walls_cache.get(ws.task_id)
    if cached is None:
        g = np.zeros((GRID_SIZE, GRID_SIZE), dtype=np.float64)
        for row in range(GRID_SIZE):
            cy = (row + 0.5) / GRID_SIZE * ws.height
            for col in range(GRID_SIZE):
                cx = (col + 0.5) / GRID_SIZE * ws.width
                *_, dist, _ = kernels.nearest_on_polyline(ws.poly_xs, ws.poly_ys, cx, cy)
                if dist > ws.half_width:
                    g[row, col] = 1.0
        _walls_cache[ws.task_id] = g
        cached = g
    return cached


def observe(state: SimState, ws: WorkspaceSpec, with_grid: bool = False) -> Observation:
    """Deterministic function of (state, geometry); positions normalized to
    workspace fractions, wall clearances to half-width fractions."""
    bx, by = float(state.bead[0]), float(state.bead[1])
    cx, cy, tx, ty, _, _ = kernels.nearest_on_polyline(ws.poly_xs, ws.poly_ys, bx, by)
    # signed lateral offset: positive on the left of the local tangent
    lat = tx * (by - cy) - ty * (bx - cx)
    w, h, hw = ws.width, ws.height, ws.half_width
    features = np.array([
        bx / w, by / h,
        state.cargo[0] / w, state.cargo[1] / h,
        state.arms[0] / w, state.arms[1] / h,
        state.arms[2] / w, state.arms[3] / h,
        1.0 if state.attached else 0.0,
        (hw - lat) / hw,
        (hw + lat) / hw,
    ])
    grid = None
    if with_grid:
        grid = np.zeros((GRID_CHANNELS, GRID_SIZE, GRID_SIZE), dtype=np.float64)
        grid[0] = walls_grid(ws)
        kernels.rasterize_points(
            grid, w, h, bx, by,
            float(state.cargo[0]), float(state.cargo[1]),
            float(state.arms[0]), float(state.arms[1]),
            float(state.arms[2]), float(state.arms[3]))
    return Observation(features=features, grid=grid)
