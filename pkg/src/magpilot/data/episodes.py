"""Episode records and their on-disk JSONL layout.

A dataset directory holds::

    meta.json             counts, splits, sim config, per-episode index
    stats.json            action normalization statistics (train split only)
    workspaces.json       task geometries (consumed by the UI)
    episodes/ep_NNNN.jsonl   one frame object per line

Frame objects carry {"obs", "state", "action", "phase"} plus an optional
"grid" string: intensities quantized to 16 levels, hex nibble per cell,
channels flattened in C order.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from magpilot.sim.observe import FEATURE_DIM, GRID_CHANNELS, GRID_SIZE

FORMAT_VERSION = 1
CHUNK_LEN = 5  # K
HISTORY = 4
MIN_FRAMES = CHUNK_LEN + HISTORY


class DatasetError(Exception):
    pass


def grid_to_hex(grid: np.ndarray) -> str:
    q = np.clip(np.rint(grid * 15.0), 0, 15).astype(np.uint8).ravel()
    return "".join("0123456789abcdef"[v] for v in q)


_HEX = {c: i for i, c in enumerate("0123456789abcdef")}


def hex_to_grid(s: str) -> np.ndarray:
    vals = np.fromiter((_HEX[ch] for ch in s), dtype=np.float64, count=len(s))
    return (vals / 15.0).reshape(GRID_CHANNELS, GRID_SIZE, GRID_SIZE)


@dataclass
class EpisodeRecord:
    episode_id: int
    task_id: str
    prompt_id: int
    obs: np.ndarray  # (T, FEATURE_DIM)
    states: np.ndarray  # (T, 4)
    actions: np.ndarray  # (T, 4) executed deltas
    phases: np.ndarray  # (T,) int
    grids: np.ndarray | None = None  # (T, 4, 32, 32)
    source: str = "expert"

    def __len__(self) -> int:
        return len(self.actions)

    def validate(self) -> None:
        n = len(self)
        if n < MIN_FRAMES:
            raise DatasetError(
                f"episode {self.episode_id}: {n} frames < minimum {MIN_FRAMES}")
        if self.obs.shape != (n, FEATURE_DIM) or self.states.shape != (n, 4) \
                or self.actions.shape != (n, 4) or self.phases.shape != (n,):
            raise DatasetError(f"episode {self.episode_id}: inconsistent shapes")
        if not np.all(np.isfinite(self.actions)):
            raise DatasetError(f"episode {self.episode_id}: non-finite action")
        if not np.all(np.isin(self.phases, (0, 1))):
            raise DatasetError(f"episode {self.episode_id}: bad phase label")
        if self.source == "expert":
            # transport may only revert to approach on a detach event,
            # visible as the attached flag (obs column 8) dropping
            attached = self.obs[:, 8]
            for t in range(1, n):
                if self.phases[t] < self.phases[t - 1]:
                    if not (attached[t - 1] == 1.0 and attached[t] == 0.0):
                        raise DatasetError(
                            f"episode {self.episode_id}: phase reverted at "
                            f"t={t} without a slip")


def write_episode(path: Path, ep: EpisodeRecord) -> None:
    with open(path, "w") as fh:
        for t in range(len(ep)):
            frame = {
                "obs": ep.obs[t].tolist(),
                "state": ep.states[t].tolist(),
                "action": ep.actions[t].tolist(),
                "phase": int(ep.phases[t]),
            }
            if ep.grids is not None:
                frame["grid"] = grid_to_hex(ep.grids[t])
            fh.write(json.dumps(frame, separators=(",", ":")))
            fh.write("\n")


def read_episode(path: Path, episode_id: int, task_id: str, prompt_id: int,
                 source: str = "expert") -> EpisodeRecord:
    obs, states, actions, phases, grids = [], [], [], [], []
    with open(path) as fh:
        for line in fh:
            frame = json.loads(line)
            obs.append(frame["obs"])
            states.append(frame["state"])
            actions.append(frame["action"])
            phases.append(frame["phase"])
            if "grid" in frame:
                grids.append(hex_to_grid(frame["grid"]))
    ep = EpisodeRecord(
        episode_id=episode_id, task_id=task_id, prompt_id=prompt_id,
        obs=np.asarray(obs, dtype=np.float64),
        states=np.asarray(states, dtype=np.float64),
        actions=np.asarray(actions, dtype=np.float64),
        phases=np.asarray(phases, dtype=np.int64),
        grids=np.asarray(grids) if grids else None,
        source=source,
    )
    ep.validate()
    return ep


def episode_filename(episode_id: int) -> str:
    return f"ep_{episode_id:04d}.jsonl"


def write_meta(path: Path, meta: dict) -> None:
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_meta(dataset_dir: Path) -> dict:
    with open(Path(dataset_dir) / "meta.json") as fh:
        meta = json.load(fh)
    if meta.get("format_version") != FORMAT_VERSION:
        raise DatasetError(f"unsupported dataset format {meta.get('format_version')}")
    return meta


def load_episodes(dataset_dir: Path, split: str | None = None) -> list[EpisodeRecord]:
    dataset_dir = Path(dataset_dir)
    meta = read_meta(dataset_dir)
    out = []
    for entry in meta["episodes"]:
        if split is not None and entry["split"] != split:
            continue
        ep = read_episode(
            dataset_dir / "episodes" / episode_filename(entry["episode_id"]),
            entry["episode_id"], entry["task_id"], entry["prompt_id"],
            source=entry.get("source", "expert"))
        if len(ep) != entry["length"]:
            raise DatasetError(
                f"episode {entry['episode_id']}: meta length {entry['length']} "
                f"!= {len(ep)} frames on disk")
        out.append(ep)
    return out
