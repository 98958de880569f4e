"""Offline action-prediction metrics.

All errors are reported in raw tick units after denormalization. RMSE
averages over samples, chunk steps and action dimensions; phase-wise
variants restrict to samples whose ground-truth phase matches. Direction
metrics treat every (sample, step) pair with a non-trivial ground-truth
action as one case; accuracy demands strictly positive cosine.
"""

from dataclasses import dataclass

import numpy as np

from magpilot.data.stats import NormStats, denormalize_action

MOVING_EPS = 1e-6


@dataclass
class MetricReport:
    rmse_overall: float
    rmse_approach: float | None
    rmse_transport: float | None
    endpoint_mean: float
    endpoint_median: float
    rmse_per_axis: list  # [x_L, y_L, x_R, y_R]
    direction_accuracy: float
    mean_cosine: float
    phase_acc_overall: float | None
    phase_acc_approach: float | None
    phase_acc_transport: float | None
    n_samples: int
    n_moving: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _denorm_pair(preds, gts, stats):
    preds = np.asarray(preds, dtype=np.float64)
    gts = np.asarray(gts, dtype=np.float64)
    if preds.shape != gts.shape:
        raise ValueError(f"shape mismatch {preds.shape} vs {gts.shape}")
    return denormalize_action(preds, stats), denormalize_action(gts, stats)


def rmse_report(preds, gts, phases, stats: NormStats) -> dict:
    """RMSE overall / per ground-truth phase / per action axis (ticks)."""
    p, g = _denorm_pair(preds, gts, stats)
    phases = np.asarray(phases)
    err2 = (p - g) ** 2
    out = {
        "rmse_overall": float(np.sqrt(err2.mean())),
        "rmse_per_axis": np.sqrt(err2.mean(axis=(0, 1))).tolist(),
    }
    for name, cls in (("rmse_approach", 0), ("rmse_transport", 1)):
        sel = phases == cls
        out[name] = float(np.sqrt(err2[sel].mean())) if sel.any() else None
    return out


def endpoint_error(preds, gts, stats: NormStats) -> tuple[float, float]:
    """Euclidean error of the final chunk step, mean and median (ticks)."""
    p, g = _denorm_pair(preds, gts, stats)
    d = np.linalg.norm(p[:, -1, :] - g[:, -1, :], axis=1)
    return float(d.mean()), float(np.median(d))


def direction_metrics(preds, gts, stats: NormStats, eps: float = MOVING_EPS):
    """(direction_accuracy, mean_cosine, n_moving) over moving (sample, step)
    pairs; a zero-norm prediction scores cosine 0 (counted incorrect)."""
    p, g = _denorm_pair(preds, gts, stats)
    p = p.reshape(-1, p.shape[-1])
    g = g.reshape(-1, g.shape[-1])
    gn = np.linalg.norm(g, axis=1)
    moving = gn > eps
    n_moving = int(moving.sum())
    if n_moving == 0:
        return None, None, 0
    p = p[moving]
    g = g[moving]
    pn = np.linalg.norm(p, axis=1)
    gn = gn[moving]
    cos = np.zeros(n_moving)
    ok = pn > 0
    cos[ok] = (p[ok] * g[ok]).sum(axis=1) / (pn[ok] * gn[ok])
    return float((cos > 0).mean()), float(cos.mean()), n_moving


def phase_accuracy(logits, labels):
    """Argmax accuracy (ties resolve to approach): overall and per class."""
    logits = np.asarray(logits)
    labels = np.asarray(labels)
    pred = (logits[:, 1] > logits[:, 0]).astype(np.int64)
    correct = pred == labels
    out = {"overall": float(correct.mean())}
    for name, cls in (("approach", 0), ("transport", 1)):
        sel = labels == cls
        out[name] = float(correct[sel].mean()) if sel.any() else None
    return out


def build_metric_report(preds, gts, phases, logits, stats) -> MetricReport:
    rmse = rmse_report(preds, gts, phases, stats)
    ep_mean, ep_median = endpoint_error(preds, gts, stats)
    dir_acc, mean_cos, n_moving = direction_metrics(preds, gts, stats)
    ph = phase_accuracy(logits, phases)
    return MetricReport(
        rmse_overall=rmse["rmse_overall"],
        rmse_approach=rmse["rmse_approach"],
        rmse_transport=rmse["rmse_transport"],
        endpoint_mean=ep_mean,
        endpoint_median=ep_median,
        rmse_per_axis=rmse["rmse_per_axis"],
        direction_accuracy=dir_acc,
        mean_cosine=mean_cos,
        phase_acc_overall=ph["overall"],
        phase_acc_approach=ph["approach"],
        phase_acc_transport=ph["transport"],
        n_samples=int(np.asarray(preds).shape[0]),
        n_moving=n_moving,
    )
