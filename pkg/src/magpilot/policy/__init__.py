from magpilot.policy.checkpoint import (
    CheckpointError,
    load_checkpoint,
    save_checkpoint,
)
from magpilot.policy.model import ModelConfig, Policy, smooth_l1

__all__ = ["CheckpointError", "ModelConfig", "Policy", "load_checkpoint",
           "save_checkpoint", "smooth_l1"]
