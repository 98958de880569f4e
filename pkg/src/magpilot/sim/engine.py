"""Overdamped two-magnet bead/cargo simulator.

State evolves at 10 Hz under an inverse-power attraction toward each
magnet-bearing arm tip. The bead slides along corridor walls (never
bounces); the cargo attaches rigidly inside ``attach_radius`` and slips off
on sharp yanks or wall scrapes.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from magpilot.sim import kernels
from magpilot.sim.workspace import WorkspaceSpec, point_at_arc


class SimulationError(Exception):
    pass


class InvalidActionError(SimulationError):
    pass


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.1  # 10 Hz
    coupling: float = 3.5e5  # force scale per magnet
    force_exponent: float = 2.0
    mobility: float = 1.0  # ticks per force-second
    max_arm_delta: float = 50.0  # ticks per step, per component
    attach_radius: float = 20.0
    slip_threshold: float = 12.0  # bead ticks per step
    eps_dist: float = 1.0  # force-law distance clamp
    rng_seed: int = 0

    def validate(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.force_exponent < 1:
            raise ValueError("force_exponent must be >= 1")
        for name in ("coupling", "mobility", "max_arm_delta", "attach_radius",
                     "slip_threshold", "eps_dist"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    def to_dict(self) -> dict:
        return {
            "dt": self.dt, "coupling": self.coupling,
            "force_exponent": self.force_exponent, "mobility": self.mobility,
            "max_arm_delta": self.max_arm_delta,
            "attach_radius": self.attach_radius,
            "slip_threshold": self.slip_threshold, "eps_dist": self.eps_dist,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        cfg = cls(**d)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class SimState:
    arms: np.ndarray  # (4,) [x_L, y_L, x_R, y_R]
    bead: np.ndarray  # (2,)
    cargo: np.ndarray  # (2,)
    attached: bool
    t: int
    ever_attached: bool = False  # latch for the approach-stage predicate
    saturated: bool = False
    slipped: bool = False
    bead_disp: float = 0.0


# expert/reset placement relative to the bead
ARM_LEAD = 55.0
ARM_SIDE = 70.0


def init_state(ws: WorkspaceSpec, rng: np.random.Generator | None = None) -> SimState:
    """Canonical start, with seeded cargo/bead perturbation when rng given."""
    bead = ws.bead_start.copy()
    cargo = ws.cargo_start.copy()
    if rng is not None:
        _, tangent = point_at_arc(ws.centerline, 260.0)
        normal = np.array([-tangent[1], tangent[0]])
        cargo = cargo + tangent * rng.uniform(-30.0, 30.0) \
                      + normal * rng.uniform(-20.0, 20.0)
        bead = bead + rng.uniform(-8.0, 8.0, size=2)
    u = cargo - bead
    u = u / np.linalg.norm(u)
    n = np.array([-u[1], u[0]])
    anchor = bead + ARM_LEAD * u
    arm_l = anchor + ARM_SIDE * n
    arm_r = anchor - ARM_SIDE * n
    arms = np.array([arm_l[0], arm_l[1], arm_r[0], arm_r[1]])
    return SimState(arms=arms, bead=bead, cargo=cargo, attached=False, t=0)


def magnetic_force(arms: np.ndarray, bead: np.ndarray, cfg: SimConfig):
    """Net force on the bead; returns (force (2,), saturated flag)."""
    fx, fy, sat = kernels.magnet_force(
        float(arms[0]), float(arms[1]), float(arms[2]), float(arms[3]),
        float(bead[0]), float(bead[1]),
        cfg.coupling, cfg.force_exponent, cfg.eps_dist)
    return np.array([fx, fy]), bool(sat)


def step_sim(state: SimState, action: np.ndarray, ws: WorkspaceSpec,
             cfg: SimConfig) -> SimState:
    action = np.asarray(action, dtype=np.float64)
    if action.shape != (4,):
        raise InvalidActionError(f"action must have shape (4,), got {action.shape}")
    if not np.all(np.isfinite(action)):
        raise InvalidActionError("action components must be finite")
    out = kernels.sim_step(
        float(state.arms[0]), float(state.arms[1]),
        float(state.arms[2]), float(state.arms[3]),
        float(state.bead[0]), float(state.bead[1]),
        float(state.cargo[0]), float(state.cargo[1]),
        1 if state.attached else 0,
        float(action[0]), float(action[1]), float(action[2]), float(action[3]),
        ws.poly_xs, ws.poly_ys, ws.half_width, ws.width, ws.height,
        cfg.dt, cfg.coupling, cfg.force_exponent, cfg.mobility,
        cfg.max_arm_delta, cfg.attach_radius, cfg.slip_threshold, cfg.eps_dist)
    (xl, yl, xr, yr, bx, by, cgx, cgy, attached, saturated, slipped,
     bead_disp) = out
    attached = bool(attached)
    return SimState(
        arms=np.array([xl, yl, xr, yr]),
        bead=np.array([bx, by]),
        cargo=np.array([cgx, cgy]),
        attached=attached,
        t=state.t + 1,
        ever_attached=state.ever_attached or attached,
        saturated=bool(saturated),
        slipped=bool(slipped),
        bead_disp=float(bead_disp),
    )


def check_success(state: SimState, ws: WorkspaceSpec) -> dict:
    """Stage predicates: approach latches on first attachment; transport
    holds while the cargo sits inside the goal disc."""
    gd = state.cargo - ws.goal_center
    transport_done = float(gd @ gd) <= ws.goal_radius ** 2
    return {
        "approach_done": bool(state.ever_attached),
        "transport_done": bool(transport_done),
    }
