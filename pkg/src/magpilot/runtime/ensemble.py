"""Temporal ensembling over overlapping action chunks.

A chunk predicted at step t_r covers steps t_r .. t_r+K-1. At execution
step t every active chunk contributes its aligned row i = t - t_r with
weight exp(-lambda * i); the executed action is the weighted average.
Weights depend only on the aligned index, never on entry order or clock.
"""

from dataclasses import dataclass, field

import numpy as np

DEFAULT_LAMBDA = 0.01


class EmptyBufferError(Exception):
    """No active chunk covers the current step; caller holds position."""


@dataclass
class ChunkBuffer:
    lam: float = DEFAULT_LAMBDA
    chunk_len: int = 5
    entries: list = field(default_factory=list)  # (t_r, (K, 4) ticks)

    def push_chunk(self, t_r: int, chunk: np.ndarray) -> None:
        chunk = np.asarray(chunk, dtype=np.float64)
        if chunk.shape != (self.chunk_len, chunk.shape[1]):
            raise ValueError(f"chunk must have {self.chunk_len} rows")
        if self.entries and t_r <= self.entries[-1][0]:
            raise ValueError(
                f"issue step {t_r} not after last {self.entries[-1][0]}")
        self.entries.append((t_r, chunk))

    def prune(self, t: int) -> None:
        self.entries = [(t_r, c) for t_r, c in self.entries
                        if t - t_r < self.chunk_len]

    def ensemble_action(self, t: int) -> np.ndarray:
        num = None
        den = 0.0
        for t_r, chunk in self.entries:
            i = t - t_r
            if not 0 <= i < self.chunk_len:
                continue
            w = np.exp(-self.lam * i)
            den += w
            num = w * chunk[i] if num is None else num + w * chunk[i]
        if num is None:
            raise EmptyBufferError(f"no active chunk covers step {t}")
        return num / den

    def weight_mass(self, t: int) -> float:
        return float(sum(np.exp(-self.lam * (t - t_r)) for t_r, _ in self.entries
                         if 0 <= t - t_r < self.chunk_len))

    def active_count(self, t: int) -> int:
        return sum(1 for t_r, _ in self.entries if 0 <= t - t_r < self.chunk_len)

    def __len__(self) -> int:
        return len(self.entries)
