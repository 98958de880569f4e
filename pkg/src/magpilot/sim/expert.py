"""Scripted demonstration controller.

Approach: lead the bead toward the cargo by parking both magnets ahead of it
along the bead-to-cargo line. Transport: pure pursuit along the corridor
centerline with a fixed lookahead, the arm pair straddling the corridor
perpendicular to the pursuit direction.
"""

import numpy as np

from magpilot.sim.engine import ARM_LEAD, ARM_SIDE, SimConfig, SimState
from magpilot.sim.workspace import WorkspaceSpec, arc_length, arc_position, point_at_arc

APPROACH = 0
TRANSPORT = 1

LOOKAHEAD = 90.0


def expert_action(state: SimState, ws: WorkspaceSpec, cfg: SimConfig,
                  rng: np.random.Generator | None = None,
                  noise_std: float = 0.0):
    """Per-tick action of the scripted expert; returns (action (4,), phase)."""
    if state.attached:
        phase = TRANSPORT
        s = arc_position(ws.centerline, state.bead)
        target, _ = point_at_arc(ws.centerline, s + LOOKAHEAD)
    else:
        phase = APPROACH
        target = state.cargo
    u = target - state.bead
    d = float(np.linalg.norm(u))
    if d < 1e-9:
        u = np.array([1.0, 0.0])
    else:
        u = u / d
    n = np.array([-u[1], u[0]])
    anchor = state.bead + ARM_LEAD * u
    desired = np.concatenate([anchor + ARM_SIDE * n, anchor - ARM_SIDE * n])
    action = np.clip(desired - state.arms, -cfg.max_arm_delta, cfg.max_arm_delta)
    if noise_std > 0.0 and rng is not None:
        action = np.clip(action + rng.normal(0.0, noise_std, size=4),
                         -cfg.max_arm_delta, cfg.max_arm_delta)
    return action, phase
