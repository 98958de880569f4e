"""Deterministic checkpoint container.

Layout: 8-byte magic, 8-byte little-endian header length, JSON header
(model config, normalization stats, array manifest), then the raw
little-endian float64 array bytes in manifest order. No timestamps or
compression, so identical training runs produce identical files.
"""

import json
import struct
from pathlib import Path

import numpy as np

from magpilot.data.stats import NormStats
from magpilot.policy.model import ModelConfig, Policy

MAGIC = b"MAGPCKP1"
VERSION = 1


class CheckpointError(Exception):
    pass


def save_checkpoint(path, policy: Policy, stats: NormStats,
                    extra: dict | None = None) -> None:
    arrays = policy.state_arrays()
    manifest = []
    offset = 0
    for name in arrays:
        nbytes = arrays[name].size * 8
        manifest.append({"name": name, "shape": list(arrays[name].shape),
                         "offset": offset})
        offset += nbytes
    header = {
        "version": VERSION,
        "model_config": policy.cfg.to_dict(),
        "norm_stats": stats.to_dict(),
        "manifest": manifest,
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for name in arrays:
            fh.write(np.ascontiguousarray(arrays[name], dtype="<f8").tobytes())


def load_checkpoint(path, expect_config: ModelConfig | None = None):
    """Returns (policy, stats, extra). Rejects mismatched configs."""
    path = Path(path)
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen))
        if header.get("version") != VERSION:
            raise CheckpointError(f"{path}: unsupported version {header.get('version')}")
        cfg = ModelConfig.from_dict(header["model_config"])
        if expect_config is not None and cfg != expect_config:
            raise CheckpointError("checkpoint model config does not match the "
                                  "requested configuration")
        stats = NormStats.from_dict(header["norm_stats"])
        policy = Policy(cfg)
        arrays = {}
        for entry in header["manifest"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            arrays[entry["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape)
        policy.load_arrays(arrays)
    return policy, stats, header.get("extra", {})
