"""Closed-loop success evaluation over seeded rollouts.

Each task runs n_trials rollouts with randomized cargo/bead perturbations;
approach and transport success are counted separately. A crashed rollout
counts as failure for both stages and is flagged. The scripted expert can
stand in for the policy as a calibration ceiling.
"""

from pathlib import Path

import numpy as np

from magpilot.policy import load_checkpoint
from magpilot.runtime import RolloutConfig, policy_predictor, run_rollout
from magpilot.sim import (
    SimConfig,
    build_workspace,
    check_success,
    expert_action,
    init_state,
    step_sim,
)
from magpilot.data.prompts import build_prompt_bank


def expert_rollout(ws, sim_cfg, seed, max_steps=600):
    rng = np.random.Generator(np.random.PCG64(seed))
    state = init_state(ws, rng)
    steps = 0
    for t in range(max_steps):
        action, _ = expert_action(state, ws, sim_cfg)
        state = step_sim(state, action, ws, sim_cfg)
        steps = t + 1
        if check_success(state, ws)["transport_done"]:
            break
    flags = check_success(state, ws)
    return flags["approach_done"], flags["transport_done"], steps


def closed_loop_eval(ckpt_path, tasks=("A", "B", "C"), n_trials=20, seed=0,
                     sim_cfg: SimConfig | None = None,
                     rollout_cfg: RolloutConfig | None = None,
                     log_dir: str | Path | None = None) -> dict:
    """Success table per task. ckpt_path="expert" runs the scripted oracle."""
    if n_trials < 10:
        raise ValueError("need at least 10 trials per task")
    sim_cfg = sim_cfg or SimConfig()
    rollout_cfg = rollout_cfg or RolloutConfig()
    bank = build_prompt_bank()
    use_expert = ckpt_path == "expert"
    if not use_expert:
        policy, stats, _ = load_checkpoint(ckpt_path)
        predict = policy_predictor(policy, stats)
    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
    table = {}
    for task in tasks:
        ws = build_workspace(task)
        approach = transport = 0
        trials = []
        for k in range(n_trials):
            trial_seed = seed * 100000 + hash_task(task) * 1000 + k
            if use_expert:
                a_done, t_done, steps = expert_rollout(
                    ws, sim_cfg, trial_seed, rollout_cfg.max_steps)
                err = None
            else:
                prompt_rng = np.random.Generator(np.random.PCG64(
                    np.random.SeedSequence(trial_seed, spawn_key=(7,))))
                prompt_id = int(prompt_rng.choice(bank.ids_for_task(task)))
                log_path = (log_dir / f"rollout_{task}_{k:03d}.jsonl"
                            if log_dir is not None else None)
                res = run_rollout(predict, ws, sim_cfg, prompt_id,
                                  cfg=rollout_cfg, seed=trial_seed,
                                  log_path=log_path)
                a_done, t_done, steps, err = (res.approach_done,
                                              res.transport_done, res.steps,
                                              res.error)
                if err is not None:
                    a_done = t_done = False
            approach += a_done
            transport += t_done
            trials.append({"seed": trial_seed, "approach": bool(a_done),
                           "transport": bool(t_done), "steps": steps,
                           "error": err})
        table[task] = {
            "n_trials": n_trials,
            "approach_rate": approach / n_trials,
            "transport_rate": transport / n_trials,
            "trials": trials,
        }
    return table


def hash_task(task: str) -> int:
    return {"A": 1, "B": 2, "C": 3}[task]
