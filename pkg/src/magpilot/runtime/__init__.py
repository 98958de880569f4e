from magpilot.runtime.ensemble import (
    DEFAULT_LAMBDA,
    ChunkBuffer,
    EmptyBufferError,
)
from magpilot.runtime.rollout import (
    RolloutConfig,
    RolloutResult,
    policy_predictor,
    read_trajectory,
    replay_ensemble,
    run_rollout,
    write_trajectory,
)

__all__ = ["ChunkBuffer", "DEFAULT_LAMBDA", "EmptyBufferError",
           "RolloutConfig", "RolloutResult", "policy_predictor",
           "read_trajectory", "replay_ensemble", "run_rollout",
           "write_trajectory"]
