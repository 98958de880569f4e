import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from magpilot.data import (
    CHUNK_LEN,
    HISTORY,
    DatasetError,
    EpisodeRecord,
    NormStats,
    compute_norm_stats,
    denormalize_action,
    generate_dataset,
    load_episodes,
    make_sample,
    materialize_samples,
    normalize_action,
    read_episode,
    read_meta,
    read_stats,
    sample_count,
    write_episode,
)
from magpilot.data.generate import assign_splits
from magpilot.sim import FEATURE_DIM


def toy_episode(episode_id=0, length=30, prompt_id=3, seed=0, with_grid=False):
    rng = np.random.Generator(np.random.PCG64(seed))
    attached = np.zeros(length)
    attached[length // 2:] = 1.0
    obs = rng.uniform(0, 1, size=(length, FEATURE_DIM))
    obs[:, 8] = attached
    return EpisodeRecord(
        episode_id=episode_id, task_id="A", prompt_id=prompt_id,
        obs=obs,
        states=rng.uniform(0, 1000, size=(length, 4)),
        actions=rng.normal(0, 10, size=(length, 4)),
        phases=attached.astype(np.int64),
        grids=rng.integers(0, 2, size=(length, 4, 32, 32)).astype(np.float64)
        if with_grid else None)


class TestSplits:
    def test_75_episodes_split_60_9_6(self):
        tasks = [("A", "B", "C")[i % 3] for i in range(75)]
        splits = assign_splits(tasks)
        from collections import Counter
        c = Counter(splits)
        assert (c["train"], c["val"], c["test"]) == (60, 9, 6)

    def test_split_hygiene_and_task_coverage(self):
        tasks = [("A", "B", "C")[i % 3] for i in range(75)]
        splits = assign_splits(tasks)
        for split in ("train", "val", "test"):
            covered = {t for t, s in zip(tasks, splits) if s == split}
            assert covered == {"A", "B", "C"}


class TestNormStats:
    def test_all_zero_actions_hit_floor(self):
        ep = toy_episode()
        ep.actions[:] = 0.0
        stats = compute_norm_stats([ep])
        assert np.allclose(stats.mean, 0.0)
        assert np.allclose(stats.std, 1e-6)

    def test_plus_minus_one(self):
        ep = toy_episode(length=10)
        ep.actions[:] = 0.0
        ep.actions[::2, 0] = 1.0
        ep.actions[1::2, 0] = -1.0
        stats = compute_norm_stats([ep])
        assert stats.mean[0] == pytest.approx(0.0)
        assert stats.std[0] == pytest.approx(1.0)

    def test_matches_streaming_oracle(self, rng):
        eps = [toy_episode(i, seed=i) for i in range(5)]
        stats = compute_norm_stats(eps)
        # Welford accumulation as the independent reference
        count = 0
        mean = np.zeros(4)
        m2 = np.zeros(4)
        for ep in eps:
            for a in ep.actions:
                count += 1
                delta = a - mean
                mean += delta / count
                m2 += delta * (a - mean)
        assert np.allclose(stats.mean, mean, atol=1e-12)
        assert np.allclose(stats.std, np.sqrt(m2 / count), atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(DatasetError):
            compute_norm_stats([])

    def test_normalize_roundtrip(self, rng):
        stats = NormStats(mean=rng.normal(0, 5, 4), std=rng.uniform(0.5, 3, 4))
        for _ in range(20):
            a = rng.normal(0, 10, 4)
            assert np.allclose(denormalize_action(normalize_action(a, stats), stats),
                               a, atol=1e-12)
        assert np.allclose(normalize_action(stats.mean, stats), 0.0)
        assert np.allclose(denormalize_action(np.ones(4), stats),
                           stats.mean + stats.std)


class TestSampling:
    def test_valid_range_arithmetic(self):
        # length 30, K=5, history 4: t in [3, 25], 23 samples
        ep = toy_episode(length=30)
        stats = NormStats.identity()
        assert sample_count(30) == 23
        make_sample(ep, 3, stats)
        make_sample(ep, 25, stats)
        with pytest.raises(IndexError):
            make_sample(ep, 2, stats)
        with pytest.raises(IndexError):
            make_sample(ep, 26, stats)

    def test_chunk_row0_is_current_action(self):
        ep = toy_episode()
        stats = compute_norm_stats([ep])
        s = make_sample(ep, 10, stats)
        assert np.allclose(denormalize_action(s.chunk[0], stats), ep.actions[10])
        assert np.allclose(denormalize_action(s.chunk[4], stats), ep.actions[14])

    def test_histories_time_ordered(self):
        ep = toy_episode()
        s = make_sample(ep, 10, NormStats.identity())
        assert np.array_equal(s.obs_history, ep.obs[7:11])
        assert np.array_equal(s.state_history, ep.states[7:11])
        assert np.array_equal(s.state, ep.states[10])
        assert s.phase == int(ep.phases[10])

    def test_materialized_count_matches_formula(self):
        eps = [toy_episode(i, length=l, seed=i) for i, l in enumerate((30, 15, 50))]
        arrays = materialize_samples(eps, NormStats.identity())
        assert len(arrays) == sum(sample_count(l) for l in (30, 15, 50))


class TestEpisodeIO:
    def test_roundtrip(self, tmp_path):
        ep = toy_episode(with_grid=True)
        path = tmp_path / "ep_0000.jsonl"
        write_episode(path, ep)
        back = read_episode(path, ep.episode_id, ep.task_id, ep.prompt_id)
        assert np.array_equal(back.obs, ep.obs)
        assert np.array_equal(back.states, ep.states)
        assert np.array_equal(back.actions, ep.actions)
        assert np.array_equal(back.phases, ep.phases)
        assert np.array_equal(back.grids, ep.grids)  # binary grids are lossless

    def test_validation_catches_bad_phase_reversion(self):
        ep = toy_episode()
        ep.phases[20] = 0  # revert without a detach
        ep.phases[21:] = 1
        with pytest.raises(DatasetError):
            ep.validate()

    def test_validation_allows_slip_reversion(self):
        ep = toy_episode()
        # detach event visible in the attached flag at the reversion step
        ep.obs[20, 8] = 0.0
        ep.phases[20] = 0
        ep.obs[21:, 8] = 1.0
        ep.phases[21:] = 1
        ep.validate()

    def test_short_episode_rejected(self):
        ep = toy_episode(length=8)
        with pytest.raises(DatasetError):
            ep.validate()


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("ds")
    meta = generate_dataset(out, n_episodes=12, seed=11)
    return out, meta


class TestGeneration:
    def test_meta_counts(self, small_dataset):
        out, meta = small_dataset
        assert meta["n_episodes"] == 12
        eps = load_episodes(out)
        assert len(eps) == 12
        assert meta["frame_count"] == sum(len(ep) for ep in eps)

    def test_split_assignment_recorded(self, small_dataset):
        out, meta = small_dataset
        seen = set()
        for split, ids in meta["splits"].items():
            for i in ids:
                assert i not in seen
                seen.add(i)
        assert len(seen) == 12

    def test_stats_from_train_split_only(self, small_dataset):
        out, meta = small_dataset
        stats = read_stats(out)
        ref = compute_norm_stats(load_episodes(out, split="train"))
        assert stats.allclose(ref)

    def test_phase_labels_bracket_attachment(self, small_dataset):
        out, _ = small_dataset
        for ep in load_episodes(out):
            attached = ep.obs[:, 8]
            first_attach = int(np.argmax(attached)) if attached.any() else len(ep)
            assert np.all(ep.phases[:first_attach] == 0)
            if attached.any():
                assert ep.phases[first_attach] == 1

    def test_determinism_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        generate_dataset(a, n_episodes=10, seed=3)
        generate_dataset(b, n_episodes=10, seed=3)
        for rel in sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file()):
            assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel

    def test_different_seed_differs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        generate_dataset(a, n_episodes=10, seed=3)
        generate_dataset(b, n_episodes=10, seed=4)
        assert (a / "episodes" / "ep_0000.jsonl").read_bytes() != \
            (b / "episodes" / "ep_0000.jsonl").read_bytes()

    def test_too_few_episodes_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            generate_dataset(tmp_path / "x", n_episodes=5, seed=1)
