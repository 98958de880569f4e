"""Per-dimension action normalization (z-score, train split only)."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from magpilot.data.episodes import FORMAT_VERSION, DatasetError

STD_FLOOR = 1e-6


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray  # (4,)
    std: np.ndarray  # (4,), floored at STD_FLOOR

    @classmethod
    def identity(cls) -> "NormStats":
        return cls(mean=np.zeros(4), std=np.ones(4))

    def to_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION,
                "mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        return cls(mean=np.asarray(d["mean"], dtype=np.float64),
                   std=np.asarray(d["std"], dtype=np.float64))

    def allclose(self, other: "NormStats", tol: float = 1e-9) -> bool:
        return (np.allclose(self.mean, other.mean, atol=tol)
                and np.allclose(self.std, other.std, atol=tol))


def compute_norm_stats(train_episodes) -> NormStats:
    if not train_episodes:
        raise DatasetError("norm stats need at least one training episode")
    actions = np.concatenate([ep.actions for ep in train_episodes], axis=0)
    mean = actions.mean(axis=0)
    std = np.maximum(actions.std(axis=0), STD_FLOOR)
    return NormStats(mean=mean, std=std)


def normalize_action(a: np.ndarray, stats: NormStats) -> np.ndarray:
    return (a - stats.mean) / stats.std


def denormalize_action(z: np.ndarray, stats: NormStats) -> np.ndarray:
    return z * stats.std + stats.mean


def write_stats(path: Path, stats: NormStats) -> None:
    with open(path, "w") as fh:
        json.dump(stats.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_stats(dataset_dir: Path) -> NormStats:
    with open(Path(dataset_dir) / "stats.json") as fh:
        return NormStats.from_dict(json.load(fh))
