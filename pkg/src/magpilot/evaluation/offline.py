"""Offline evaluation of a checkpoint on a dataset split."""

import numpy as np

from magpilot.data import load_episodes, materialize_samples, read_stats
from magpilot.evaluation.metrics import MetricReport, build_metric_report
from magpilot.policy import load_checkpoint


def eval_offline(ckpt_path, dataset_dir, split: str = "test",
                 batch_size: int = 64, teacher_phase: bool = False
                 ) -> MetricReport:
    """Runs the policy in deployment mode (predicted phase token) over every
    sample of the split and aggregates the metric suite."""
    policy, stats, _ = load_checkpoint(ckpt_path)
    file_stats = read_stats(dataset_dir)
    if not stats.allclose(file_stats):
        raise ValueError("checkpoint stats do not match the dataset stats")
    episodes = load_episodes(dataset_dir, split=split)
    arrays = materialize_samples(episodes, stats)
    preds, logits_all = [], []
    n = len(arrays)
    for lo in range(0, n, batch_size):
        idx = np.arange(lo, min(lo + batch_size, n))
        batch = {
            "obs_history": arrays.obs_history[idx],
            "state_history": arrays.state_history[idx],
            "state": arrays.state[idx],
            "prompt_id": arrays.prompt_id[idx],
            "phase": arrays.phase[idx],
        }
        grids = arrays.gather_grids(idx)
        if grids is not None:
            batch["grid_history"] = grids
        chunk, logits, _ = policy.forward(batch, teacher_phase=teacher_phase)
        preds.append(chunk.data)
        logits_all.append(logits.data)
    return build_metric_report(
        np.concatenate(preds), arrays.chunk, arrays.phase,
        np.concatenate(logits_all), stats)
