from magpilot.sim.engine import (
    InvalidActionError,
    SimConfig,
    SimState,
    SimulationError,
    check_success,
    init_state,
    magnetic_force,
    step_sim,
)
from magpilot.sim.expert import APPROACH, TRANSPORT, expert_action
from magpilot.sim.kernels import BACKEND
from magpilot.sim.observe import FEATURE_DIM, Observation, observe
from magpilot.sim.workspace import (
    TASKS,
    WorkspaceSpec,
    build_workspace,
    export_workspaces,
)

__all__ = [
    "APPROACH", "BACKEND", "FEATURE_DIM", "InvalidActionError", "Observation",
    "SimConfig", "SimState", "SimulationError", "TASKS", "TRANSPORT",
    "WorkspaceSpec", "build_workspace", "check_success", "expert_action",
    "export_workspaces", "init_state", "magnetic_force", "observe", "step_sim",
]
