"""Scripted-expert dataset generation.

Episodes cycle through tasks A, B, C with seeded cargo/bead perturbations,
per-episode prompt sampling and mild action jitter for state coverage.
Failed episodes (no transport success inside the step budget) are discarded
and regenerated under a fresh sub-seed; the count is kept in meta. Episode
seeds come from a splittable counter, so generation order is immaterial.
"""

from pathlib import Path

import numpy as np

from magpilot.data.episodes import (
    FORMAT_VERSION,
    EpisodeRecord,
    episode_filename,
    write_episode,
    write_meta,
)
from magpilot.data.prompts import build_prompt_bank
from magpilot.data.stats import compute_norm_stats, write_stats
from magpilot.sim import (
    SimConfig,
    build_workspace,
    check_success,
    expert_action,
    init_state,
    observe,
    step_sim,
)
from magpilot.sim.workspace import TASKS, export_workspaces

SPLIT_RATIO = {"train": 60, "val": 9, "test": 6}  # by episode
MAX_ATTEMPTS = 25


def episode_rng(seed: int, episode_index: int, attempt: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(episode_index, attempt))
    return np.random.Generator(np.random.PCG64(ss))


def record_expert_episode(ws, cfg, rng, episode_id, prompt_id,
                          noise_std=2.0, max_steps=600, with_grid=False):
    """Run the expert once; returns an EpisodeRecord or None on failure."""
    st = init_state(ws, rng)
    obs_l, states_l, actions_l, phases_l, grids_l = [], [], [], [], []
    done = False
    for _ in range(max_steps):
        o = observe(st, ws, with_grid=with_grid)
        action, phase = expert_action(st, ws, cfg, rng=rng, noise_std=noise_std)
        obs_l.append(o.features)
        states_l.append(st.arms.copy())
        actions_l.append(action)
        phases_l.append(phase)
        if with_grid:
            grids_l.append(o.grid)
        st = step_sim(st, action, ws, cfg)
        if check_success(st, ws)["transport_done"]:
            done = True
            break
    if not done:
        return None
    ep = EpisodeRecord(
        episode_id=episode_id, task_id=ws.task_id, prompt_id=prompt_id,
        obs=np.asarray(obs_l), states=np.asarray(states_l),
        actions=np.asarray(actions_l),
        phases=np.asarray(phases_l, dtype=np.int64),
        grids=np.asarray(grids_l) if with_grid else None)
    ep.validate()
    return ep


def assign_splits(task_ids: list[str]) -> list[str]:
    """Stratified largest-remainder split at the 60:9:6 episode ratio."""
    total = sum(SPLIT_RATIO.values())
    out = [""] * len(task_ids)
    for task in sorted(set(task_ids)):
        members = [i for i, t in enumerate(task_ids) if t == task]
        n = len(members)
        quotas = {s: n * r / total for s, r in SPLIT_RATIO.items()}
        counts = {s: int(q) for s, q in quotas.items()}
        leftovers = sorted(quotas, key=lambda s: (quotas[s] - counts[s]), reverse=True)
        i = 0
        while sum(counts.values()) < n:
            counts[leftovers[i % len(leftovers)]] += 1
            i += 1
        cursor = 0
        for split in ("train", "val", "test"):
            for i in members[cursor:cursor + counts[split]]:
                out[i] = split
            cursor += counts[split]
    return out


def generate_capacity_set(out_dir, n_episodes=5, seed=0,
                          sim_cfg: SimConfig | None = None) -> dict:
    """Small noise-free all-train dataset for overfit capacity checks.

    Jitter-free expert actions make the state->action mapping deterministic,
    so a policy with enough capacity can drive the regression loss to zero.
    """
    return generate_dataset(out_dir, n_episodes=n_episodes, seed=seed,
                            sim_cfg=sim_cfg, noise_std=0.0,
                            _splits_override=["train"] * n_episodes,
                            _allow_small=True)


def generate_dataset(out_dir, n_episodes=75, seed=7, sim_cfg: SimConfig | None = None,
                     with_grid=False, noise_std=2.0, max_steps=600,
                     _splits_override=None, _allow_small=False) -> dict:
    if n_episodes < 10 and not _allow_small:
        raise ValueError("need at least 10 episodes for a meaningful split")
    out_dir = Path(out_dir)
    (out_dir / "episodes").mkdir(parents=True, exist_ok=True)
    cfg = sim_cfg or SimConfig(rng_seed=seed)
    cfg.validate()
    bank = build_prompt_bank()
    workspaces = {t: build_workspace(t) for t in TASKS}

    episodes: list[EpisodeRecord] = []
    discarded = 0
    for idx in range(n_episodes):
        task = TASKS[idx % len(TASKS)]
        ws = workspaces[task]
        ep = None
        for attempt in range(MAX_ATTEMPTS):
            rng = episode_rng(seed, idx, attempt)
            prompt_id = int(rng.choice(bank.ids_for_task(task)))
            ep = record_expert_episode(ws, cfg, rng, idx, prompt_id,
                                       noise_std=noise_std, max_steps=max_steps,
                                       with_grid=with_grid)
            if ep is not None:
                break
            discarded += 1
        if ep is None:
            raise RuntimeError(f"episode {idx} failed {MAX_ATTEMPTS} times")
        episodes.append(ep)

    splits = assign_splits([ep.task_id for ep in episodes])
    for ep in episodes:
        write_episode(out_dir / "episodes" / episode_filename(ep.episode_id), ep)

    train_eps = [ep for ep, s in zip(episodes, splits) if s == "train"]
    stats = compute_norm_stats(train_eps)
    write_stats(out_dir / "stats.json", stats)
    export_workspaces(out_dir / "workspaces.json")

    meta = {
        "format_version": FORMAT_VERSION,
        "fps": round(1.0 / cfg.dt),
        "seed": seed,
        "n_episodes": n_episodes,
        "grid": with_grid,
        "noise_std": noise_std,
        "max_steps": max_steps,
        "discarded": discarded,
        "sim_config": cfg.to_dict(),
        "frame_count": int(sum(len(ep) for ep in episodes)),
        "episodes": [
            {"episode_id": ep.episode_id, "task_id": ep.task_id,
             "prompt_id": ep.prompt_id, "length": len(ep), "split": split,
             "source": ep.source}
            for ep, split in zip(episodes, splits)
        ],
        "splits": {
            s: [ep.episode_id for ep, sp in zip(episodes, splits) if sp == s]
            for s in ("train", "val", "test")
        },
    }
    write_meta(out_dir / "meta.json", meta)
    return meta
