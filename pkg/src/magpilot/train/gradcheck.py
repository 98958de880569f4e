"""Finite-difference verification of the analytic gradients.

Central differences in double precision over every parameter of a tiny
configuration. Relative error uses |a-n| / max(|a|, |n|) wherever that
denominator exceeds 1e-6; smaller gradients must agree within 1e-8
absolutely (the fd roundoff floor makes a pure ratio meaningless there).
Targets are nudged away from the SmoothL1 transition point so the loss is
twice differentiable at every probed point.
"""

import time

import numpy as np

from magpilot.policy.model import ModelConfig, Policy

TINY_CONFIG = ModelConfig(hidden=16, ffn_hidden=32, phase_hidden=16,
                          n_heads=2, prompt_tasks=(0, 1, 2, 0), seed=13)

REL_FLOOR = 1e-6
ABS_TOL = 1e-8
KINK_MARGIN = 1e-3


def synthetic_batch(cfg: ModelConfig, batch: int = 2, seed: int = 21) -> dict:
    rng = np.random.default_rng(seed)
    return {
        "obs_history": rng.uniform(0, 1, (batch, cfg.history, cfg.feature_dim)),
        "state_history": rng.uniform(0, cfg.ws_width, (batch, cfg.history, 4)),
        "state": rng.uniform(0, cfg.ws_width, (batch, 4)),
        "prompt_id": rng.integers(0, cfg.n_prompts, batch),
        "chunk": rng.normal(0, 1, (batch, cfg.chunk_len, cfg.action_dim)),
        "phase": np.arange(batch) % 2,  # exercise both phase-token rows
        "grid_history": rng.uniform(0, 1, (batch, cfg.history, 4, 32, 32))
        if cfg.use_grid else None,
    }


def nudge_off_kink(policy: Policy, batch: dict) -> dict:
    """Shift chunk targets until no residual sits near |e| = beta."""
    chunk, _, _ = policy.forward(batch)
    target = batch["chunk"].copy()
    for _ in range(10):
        e = np.abs(chunk.data - target)
        near = np.abs(e - policy.cfg.beta) < KINK_MARGIN
        if not near.any():
            break
        target[near] += 3.0 * KINK_MARGIN
    batch = dict(batch)
    batch["chunk"] = target
    return batch


def grad_check(cfg: ModelConfig | None = None, batch: dict | None = None,
               step: float = 1e-5, param_scale: float = 0.05,
               seed: int = 3) -> dict:
    """Compares analytic and central-difference gradients for every
    parameter group; returns a report with per-group and overall errors."""
    cfg = cfg or TINY_CONFIG
    policy = Policy(cfg)
    rng = np.random.default_rng(seed)
    # perturb all parameters (incl. the zero-init head) so gradients are alive
    for t in policy.parameters().values():
        t.data += rng.normal(0.0, param_scale, t.data.shape)
    if batch is None:
        batch = synthetic_batch(cfg)
    batch = nudge_off_kink(policy, batch)

    def loss_value() -> float:
        chunk, logits, _ = policy.forward(batch)
        total, _ = policy.compute_loss(chunk, batch["chunk"], logits,
                                       batch["phase"])
        return total.item()

    t0 = time.perf_counter()
    policy.zero_grad()
    chunk, logits, _ = policy.forward(batch)
    total, _ = policy.compute_loss(chunk, batch["chunk"], logits, batch["phase"])
    total.backward()

    groups = {}
    worst = 0.0
    checked = 0
    for name, p in policy.parameters().items():
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        numeric = np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        nflat = numeric.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            hi = loss_value()
            flat[i] = keep - step
            lo = loss_value()
            flat[i] = keep
            nflat[i] = (hi - lo) / (2.0 * step)
        denom = np.maximum(np.abs(analytic), np.abs(numeric))
        diff = np.abs(analytic - numeric)
        large = denom > REL_FLOOR
        rel = float((diff[large] / denom[large]).max()) if large.any() else 0.0
        small_ok = bool(diff[~large].max() <= ABS_TOL) if (~large).any() else True
        groups[name] = {
            "size": int(p.data.size),
            "max_rel_error": rel,
            "small_grads_ok": small_ok,
        }
        worst = max(worst, rel if small_ok else np.inf)
        checked += int(p.data.size)
    return {
        "max_rel_error": worst,
        "params_checked": checked,
        "groups_checked": len(groups),
        "coverage": 1.0,
        "rel_floor": REL_FLOOR,
        "abs_tol": ABS_TOL,
        "fd_step": step,
        "elapsed_s": time.perf_counter() - t0,
        "groups": groups,
    }
