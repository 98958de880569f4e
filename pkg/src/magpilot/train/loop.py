"""Imitation training: shuffled minibatches, teacher-forced phase tokens,
cosine-annealed AdamW, periodic validation, best-checkpoint retention."""

import json
from pathlib import Path

import numpy as np

from magpilot.data import (
    DatasetError,
    compute_norm_stats,
    load_episodes,
    materialize_samples,
    read_meta,
    read_stats,
)
from magpilot.data.augment import augment_grid
from magpilot.policy import ModelConfig, Policy, save_checkpoint
from magpilot.train.optim import AdamW, TrainConfig, cosine_lr


def _epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(seed, spawn_key=(0, epoch))))


def _aug_rng(seed: int, step: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(seed, spawn_key=(1, step))))


def _gather(arrays, idx, augment_rng=None):
    batch = {
        "obs_history": arrays.obs_history[idx],
        "state_history": arrays.state_history[idx],
        "state": arrays.state[idx],
        "prompt_id": arrays.prompt_id[idx],
        "chunk": arrays.chunk[idx],
        "phase": arrays.phase[idx],
    }
    grids = arrays.gather_grids(idx)
    if grids is not None:
        if augment_rng is not None:
            grids = augment_grid(grids, augment_rng)
        batch["grid_history"] = grids
    return batch


def evaluate_split(policy: Policy, arrays, batch_size: int = 64,
                   teacher_phase: bool = True) -> dict:
    """Loss components and phase accuracy over a sample array set."""
    n = len(arrays)
    tot_action = tot_phase = 0.0
    correct = 0
    for lo in range(0, n, batch_size):
        idx = np.arange(lo, min(lo + batch_size, n))
        batch = _gather(arrays, idx)
        chunk, logits, phase_pred = policy.forward(batch, teacher_phase=teacher_phase)
        _, parts = policy.compute_loss(chunk, batch["chunk"], logits, batch["phase"])
        w = len(idx) / n
        tot_action += parts["loss_action"] * w
        tot_phase += parts["loss_phase"] * w
        correct += int((phase_pred == batch["phase"]).sum())
    return {
        "loss_action": tot_action,
        "loss_phase": tot_phase,
        "loss": tot_action + policy.cfg.lambda_phase * tot_phase,
        "phase_acc": correct / n,
        "n_samples": n,
    }


def train_loop(dataset_dir, model_cfg: ModelConfig, train_cfg: TrainConfig,
               out_dir, log_every: int = 10) -> dict:
    """Runs the full recipe; returns paths and final metrics."""
    train_cfg.validate()
    model_cfg.validate()
    dataset_dir = Path(dataset_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    meta = read_meta(dataset_dir)
    stats = read_stats(dataset_dir)
    train_eps = load_episodes(dataset_dir, split="train")
    val_eps = load_episodes(dataset_dir, split="val")
    recomputed = compute_norm_stats(train_eps)
    if not stats.allclose(recomputed):
        raise DatasetError("stats.json does not match the train split")
    if meta["grid"] != model_cfg.use_grid:
        raise DatasetError(
            f"dataset grid={meta['grid']} but model use_grid={model_cfg.use_grid}")

    train_arrays = materialize_samples(train_eps, stats)
    val_arrays = materialize_samples(val_eps, stats)
    policy = Policy(model_cfg)
    opt = AdamW(policy.parameters(), train_cfg)

    log_path = out_dir / "train_log.jsonl"
    best_path = out_dir / "ckpt_best.bin"
    final_path = out_dir / "ckpt_final.bin"
    best_val = np.inf
    n = len(train_arrays)
    order = np.empty(0, dtype=np.int64)
    epoch = 0
    cursor = 0

    with open(log_path, "w") as log:
        header = {"type": "config", "model": model_cfg.to_dict(),
                  "train": train_cfg.to_dict(), "n_train_samples": n,
                  "n_val_samples": len(val_arrays),
                  "n_params": policy.num_params()}
        log.write(json.dumps(header, sort_keys=True) + "\n")
        for step in range(train_cfg.steps):
            if cursor + train_cfg.batch > len(order):
                order = _epoch_rng(train_cfg.seed, epoch).permutation(n)
                epoch += 1
                cursor = 0
            idx = order[cursor:cursor + train_cfg.batch]
            cursor += train_cfg.batch
            aug = _aug_rng(train_cfg.seed, step) if train_cfg.augment else None
            batch = _gather(train_arrays, idx, augment_rng=aug)
            chunk, logits, _ = policy.forward(batch, teacher_phase=True)
            total, parts = policy.compute_loss(chunk, batch["chunk"], logits,
                                               batch["phase"])
            policy.zero_grad()
            total.backward()
            lr = cosine_lr(step, train_cfg)
            opt.step(lr)
            if step % log_every == 0 or step == train_cfg.steps - 1:
                log.write(json.dumps({"type": "train", "step": step, "lr": lr,
                                      **parts}, sort_keys=True) + "\n")
            last = step == train_cfg.steps - 1
            if (step + 1) % train_cfg.eval_every == 0 or last:
                val = evaluate_split(policy, val_arrays) if len(val_arrays) \
                    else {"loss": np.nan}
                is_best = len(val_arrays) and val["loss"] < best_val
                if is_best:
                    best_val = val["loss"]
                    save_checkpoint(best_path, policy, stats,
                                    extra={"step": step + 1, "val": val})
                log.write(json.dumps({"type": "val", "step": step + 1,
                                      "best": bool(is_best), **val},
                                     sort_keys=True) + "\n")
        final_train = evaluate_split(policy, train_arrays)
        log.write(json.dumps({"type": "final_train", **final_train},
                             sort_keys=True) + "\n")
        save_checkpoint(final_path, policy, stats,
                        extra={"step": train_cfg.steps, "final_train": final_train})
        if not best_path.exists():
            save_checkpoint(best_path, policy, stats,
                            extra={"step": train_cfg.steps})
    return {
        "log": str(log_path),
        "ckpt_best": str(best_path),
        "ckpt_final": str(final_path),
        "final_train": final_train,
        "skipped_steps": opt.skipped,
    }
