"""Receding-horizon execution of a trained policy in the simulator.

Per tick: observe, rebuild histories, predict a fresh chunk (denormalized
to ticks), push it into the ensembling buffer, prune, execute the fused
action. The trajectory log keeps every pushed chunk so the ensembling can
be replayed offline against the executed actions.

The first history-1 ticks repeat the initial observation (training samples
always carry a full real history; the mismatch lasts three steps).
"""

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from magpilot.data.episodes import HISTORY
from magpilot.data.stats import NormStats, denormalize_action
from magpilot.policy.model import Policy
from magpilot.runtime.ensemble import DEFAULT_LAMBDA, ChunkBuffer, EmptyBufferError
from magpilot.sim import check_success, init_state, observe, step_sim
from magpilot.sim.workspace import workspace_to_dict


@dataclass
class RolloutConfig:
    max_steps: int = 600
    replan_every: int = 1
    teacher_phase: bool = False
    lam: float = DEFAULT_LAMBDA
    with_grid: bool = False


@dataclass
class RolloutResult:
    task_id: str
    seed: int | None
    steps: int
    approach_done: bool
    transport_done: bool
    trajectory: list = field(default_factory=list)
    error: str | None = None


def policy_predictor(policy: Policy, stats: NormStats):
    """Wraps a policy as predict(obs_h, grid_h, state_h, state, prompt, gt_phase)
    -> (chunk ticks (K,4), phase_pred, logits)."""

    def predict(obs_h, grid_h, state_h, state, prompt_id, gt_phase,
                teacher_phase=False):
        batch = {
            "obs_history": obs_h[None],
            "state_history": state_h[None],
            "state": state[None],
            "prompt_id": np.array([prompt_id]),
            "phase": np.array([gt_phase]),
        }
        if grid_h is not None:
            batch["grid_history"] = grid_h[None]
        chunk, logits, phase_pred = policy.forward(batch,
                                                   teacher_phase=teacher_phase)
        ticks = denormalize_action(chunk.data[0], stats)
        return ticks, int(phase_pred[0]), logits.data[0]

    return predict


def run_rollout(predict, ws, sim_cfg, prompt_id: int,
                cfg: RolloutConfig | None = None,
                seed: int | None = None,
                log_path: str | Path | None = None) -> RolloutResult:
    cfg = cfg or RolloutConfig()
    rng = np.random.Generator(np.random.PCG64(seed)) if seed is not None else None
    state = init_state(ws, rng)
    buf = ChunkBuffer(lam=cfg.lam)
    obs_hist: deque = deque(maxlen=HISTORY)
    state_hist: deque = deque(maxlen=HISTORY)
    trajectory = []
    header = {
        "type": "header", "task": ws.task_id, "seed": seed,
        "prompt_id": prompt_id, "max_steps": cfg.max_steps,
        "replan_every": cfg.replan_every, "lambda": cfg.lam,
        "teacher_phase": cfg.teacher_phase,
        "sim_config": sim_cfg.to_dict(), "workspace": workspace_to_dict(ws),
    }
    trajectory.append(header)
    result = RolloutResult(task_id=ws.task_id, seed=seed, steps=0,
                           approach_done=False, transport_done=False,
                           trajectory=trajectory)
    try:
        for t in range(cfg.max_steps):
            obs = observe(state, ws, with_grid=cfg.with_grid)
            while len(obs_hist) < HISTORY - 1:
                obs_hist.append(obs)
                state_hist.append(state.arms.copy())
            obs_hist.append(obs)
            state_hist.append(state.arms.copy())
            pushed = None
            phase_pred = None
            logits = None
            if t % cfg.replan_every == 0:
                obs_h = np.stack([o.features for o in obs_hist])
                grid_h = np.stack([o.grid for o in obs_hist]) \
                    if cfg.with_grid else None
                gt_phase = 1 if state.attached else 0
                chunk_ticks, phase_pred, logits = predict(
                    obs_h, grid_h, np.stack(state_hist), state.arms.copy(),
                    prompt_id, gt_phase, teacher_phase=cfg.teacher_phase)
                buf.push_chunk(t, chunk_ticks)
                pushed = chunk_ticks
            buf.prune(t)
            try:
                action = buf.ensemble_action(t)
            except EmptyBufferError:
                action = np.zeros(4)  # hold position
            state = step_sim(state, action, ws, sim_cfg)
            flags = check_success(state, ws)
            trajectory.append({
                "type": "step", "t": t,
                "state": state.arms.tolist(), "bead": state.bead.tolist(),
                "cargo": state.cargo.tolist(), "attached": state.attached,
                "slipped": state.slipped,
                "phase_pred": phase_pred,
                "logits": logits.tolist() if logits is not None else None,
                "pushed_chunk": pushed.tolist() if pushed is not None else None,
                "action": action.tolist(),
                "weight_mass": buf.weight_mass(t),
                "n_active": buf.active_count(t),
                "approach_done": flags["approach_done"],
                "transport_done": flags["transport_done"],
            })
            result.steps = t + 1
            result.approach_done = flags["approach_done"]
            result.transport_done = flags["transport_done"]
            if flags["transport_done"]:
                break
    except Exception as exc:  # crash counts as failure, flagged in the log
        result.error = f"{type(exc).__name__}: {exc}"
        trajectory.append({"type": "error", "message": result.error})
    trajectory.append({
        "type": "result", "steps": result.steps,
        "approach_done": result.approach_done,
        "transport_done": result.transport_done,
        "error": result.error,
    })
    if log_path is not None:
        write_trajectory(log_path, trajectory)
    return result


def write_trajectory(path, trajectory) -> None:
    with open(path, "w") as fh:
        for line in trajectory:
            fh.write(json.dumps(line, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_trajectory(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh]


def replay_ensemble(trajectory) -> list[np.ndarray]:
    """Recomputes every executed action from the logged chunks (oracle)."""
    header = trajectory[0]
    lam = header["lambda"]
    recomputed = []
    chunks = []
    for line in trajectory:
        if line.get("type") != "step":
            continue
        t = line["t"]
        if line["pushed_chunk"] is not None:
            chunks.append((t, np.asarray(line["pushed_chunk"])))
        num = np.zeros(4)
        den = 0.0
        for t_r, chunk in chunks:
            i = t - t_r
            if 0 <= i < len(chunk):
                w = np.exp(-lam * i)
                num += w * chunk[i]
                den += w
        recomputed.append(num / den if den > 0 else np.zeros(4))
    return recomputed
