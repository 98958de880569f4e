from magpilot.data.augment import augment_grid, augment_observation
from magpilot.data.episodes import (
    CHUNK_LEN,
    HISTORY,
    DatasetError,
    EpisodeRecord,
    load_episodes,
    read_episode,
    read_meta,
    write_episode,
)
from magpilot.data.generate import generate_dataset
from magpilot.data.prompts import PromptBank, build_prompt_bank
from magpilot.data.sampling import (
    SampleArrays,
    TrainingSample,
    make_sample,
    materialize_samples,
    sample_count,
    valid_t_range,
)
from magpilot.data.stats import (
    NormStats,
    compute_norm_stats,
    denormalize_action,
    normalize_action,
    read_stats,
    write_stats,
)

__all__ = [
    "CHUNK_LEN", "DatasetError", "EpisodeRecord", "HISTORY", "NormStats",
    "PromptBank", "SampleArrays", "TrainingSample", "augment_grid",
    "augment_observation", "build_prompt_bank", "compute_norm_stats",
    "denormalize_action", "generate_dataset", "load_episodes", "make_sample",
    "materialize_samples", "normalize_action", "read_episode", "read_meta",
    "read_stats", "sample_count", "valid_t_range", "write_episode",
    "write_stats",
]
