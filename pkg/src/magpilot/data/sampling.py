"""Training samples: observation/state histories plus a normalized chunk.

Only timesteps with a full 4-frame history *and* a full 5-step future chunk
are sampled; episode edges are skipped rather than padded.
"""

from dataclasses import dataclass

import numpy as np

from magpilot.data.episodes import CHUNK_LEN, HISTORY, EpisodeRecord
from magpilot.data.stats import NormStats, normalize_action


@dataclass
class TrainingSample:
    obs_history: np.ndarray  # (HISTORY, FEATURE_DIM)
    state_history: np.ndarray  # (HISTORY, 4)
    state: np.ndarray  # (4,) current arms
    prompt_id: int
    chunk: np.ndarray  # (CHUNK_LEN, 4) normalized
    phase: int
    grid_history: np.ndarray | None = None  # (HISTORY, 4, 32, 32)


def valid_t_range(episode_len: int) -> range:
    return range(HISTORY - 1, episode_len - CHUNK_LEN + 1)


def sample_count(episode_len: int) -> int:
    return max(0, episode_len - CHUNK_LEN - HISTORY + 2)


def make_sample(ep: EpisodeRecord, t: int, stats: NormStats) -> TrainingSample:
    if t < HISTORY - 1 or t > len(ep) - CHUNK_LEN:
        raise IndexError(
            f"t={t} outside valid range [{HISTORY - 1}, {len(ep) - CHUNK_LEN}] "
            f"for episode of length {len(ep)}")
    lo = t - HISTORY + 1
    return TrainingSample(
        obs_history=ep.obs[lo:t + 1].copy(),
        state_history=ep.states[lo:t + 1].copy(),
        state=ep.states[t].copy(),
        prompt_id=ep.prompt_id,
        chunk=normalize_action(ep.actions[t:t + CHUNK_LEN], stats),
        phase=int(ep.phases[t]),
        grid_history=ep.grids[lo:t + 1].copy() if ep.grids is not None else None,
    )


@dataclass
class SampleArrays:
    """All samples of an episode list, materialized as flat arrays."""

    obs_history: np.ndarray  # (N, HISTORY, F)
    state_history: np.ndarray  # (N, HISTORY, 4)
    state: np.ndarray  # (N, 4)
    prompt_id: np.ndarray  # (N,)
    chunk: np.ndarray  # (N, CHUNK_LEN, 4)
    phase: np.ndarray  # (N,)
    grid_ref: list | None = None  # (episode grids, t) pairs, gathered lazily

    def __len__(self) -> int:
        return len(self.phase)

    def gather_grids(self, idx: np.ndarray) -> np.ndarray | None:
        if self.grid_ref is None:
            return None
        out = []
        for i in idx:
            grids, t = self.grid_ref[int(i)]
            out.append(grids[t - HISTORY + 1:t + 1])
        return np.asarray(out)


def materialize_samples(episodes: list[EpisodeRecord], stats: NormStats) -> SampleArrays:
    obs_h, st_h, st, pid, chunks, phases = [], [], [], [], [], []
    grid_ref = [] if any(ep.grids is not None for ep in episodes) else None
    for ep in episodes:
        for t in valid_t_range(len(ep)):
            s = make_sample(ep, t, stats)
            obs_h.append(s.obs_history)
            st_h.append(s.state_history)
            st.append(s.state)
            pid.append(s.prompt_id)
            chunks.append(s.chunk)
            phases.append(s.phase)
            if grid_ref is not None:
                grid_ref.append((ep.grids, t))
    return SampleArrays(
        obs_history=np.asarray(obs_h), state_history=np.asarray(st_h),
        state=np.asarray(st), prompt_id=np.asarray(pid, dtype=np.int64),
        chunk=np.asarray(chunks), phase=np.asarray(phases, dtype=np.int64),
        grid_ref=grid_ref)
