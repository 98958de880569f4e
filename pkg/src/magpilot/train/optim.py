"""Decoupled-weight-decay adaptive optimizer and the cosine LR schedule."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 2000
    batch: int = 16
    lr_max: float = 1e-3
    lr_min: float = 0.0
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    eval_every: int = 200
    augment: bool = True  # grid photometrics; no-op for feature-only data

    def validate(self) -> None:
        if self.steps <= 0:
            raise ValueError("steps must be positive")
        if not (self.lr_max > self.lr_min >= 0):
            raise ValueError("need lr_max > lr_min >= 0")
        if self.batch <= 0:
            raise ValueError("batch must be positive")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "steps", "batch", "lr_max", "lr_min", "weight_decay", "beta1",
            "beta2", "eps", "seed", "eval_every", "augment")}


def cosine_lr(step: int, cfg: TrainConfig) -> float:
    if not 0 <= step <= cfg.steps:
        raise ValueError(f"step {step} outside [0, {cfg.steps}]")
    return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (
        1.0 + math.cos(math.pi * step / cfg.steps))


class AdamW:
    """Moment estimates with bias correction; decay applied to the weights
    directly (decoupled), scaled by the current lr, before the update."""

    def __init__(self, params: dict, cfg: TrainConfig):
        self.params = params
        self.cfg = cfg
        self.t = 0
        self.skipped = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self, lr: float) -> bool:
        """Applies one update; returns False (and counts) on non-finite grads."""
        grads = {k: p.grad for k, p in self.params.items() if p.grad is not None}
        for g in grads.values():
            if not np.all(np.isfinite(g)):
                self.skipped += 1
                return False
        self.t += 1
        c = self.cfg
        bc1 = 1.0 - c.beta1 ** self.t
        bc2 = 1.0 - c.beta2 ** self.t
        for k, g in grads.items():
            p = self.params[k]
            if c.weight_decay:
                p.data *= (1.0 - lr * c.weight_decay)
            m = self.m[k]
            v = self.v[k]
            m *= c.beta1
            m += (1.0 - c.beta1) * g
            v *= c.beta2
            v += (1.0 - c.beta2) * (g * g)
            p.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + c.eps)
        return True
