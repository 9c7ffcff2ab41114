import json

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from kgprobe import make_cold_start, random_split, sample_negatives, save_split
from kgprobe.rng import RngStream
from conftest import make_ds


def test_split_sizes_six_one_zero():
    # 7 interactions at 0.8/0.1/0.1: round-half-up gives 6 train, 1 valid, 0 test
    ds = make_ds([(0, i) for i in range(7)])
    split = random_split(ds, stream=RngStream(1, "s"))
    assert (len(split.train_idx), len(split.valid_idx), len(split.test_idx)) == (6, 1, 0)
    assert split.is_partition()


def test_split_sizes_ten():
    ds = make_ds([(0, i % 5) for i in range(10)], n_items=5)
    split = random_split(ds, stream=RngStream(1, "s"))
    assert (len(split.train_idx), len(split.valid_idx), len(split.test_idx)) == (8, 1, 1)


@given(st.integers(1, 200), st.integers(0, 999))
@settings(max_examples=60, deadline=None)
def test_split_always_partitions(n, seed):
    ds = make_ds([(i % 7, i % 11) for i in range(n)], n_users=7, n_items=11)
    split = random_split(ds, stream=RngStream(seed, "s"))
    assert split.is_partition()
    merged = np.concatenate([split.train_idx, split.valid_idx, split.test_idx])
    assert sorted(merged.tolist()) == list(range(n))


def test_split_deterministic():
    ds = make_ds([(i % 5, i % 9) for i in range(40)], n_users=5, n_items=9)
    a = random_split(ds, stream=RngStream(3, "s"))
    b = random_split(ds, stream=RngStream(3, "s"))
    assert np.array_equal(a.train_idx, b.train_idx)
    assert np.array_equal(a.test_idx, b.test_idx)
    c = random_split(ds, stream=RngStream(4, "s"))
    assert not np.array_equal(a.train_idx, c.train_idx)


def test_split_rejects_bad_ratios():
    ds = make_ds([(0, 0)])
    with pytest.raises(ValueError):
        random_split(ds, (0.5, 0.2, 0.2), RngStream(0, "s"))


def test_negative_sampling_invariants(planted_split, planted_cands):
    ds = planted_split.dataset
    rated = {}
    for u, i in zip(ds.users.tolist(), ds.items.tolist()):
        rated.setdefault(u, set()).add(i)
    test_items = planted_split.user_items("test")
    for row in planted_cands.rows:
        positives = set(row.items[row.is_positive].tolist())
        negatives = set(row.items[~row.is_positive].tolist())
        assert positives == set(test_items[row.user])
        # negatives never touch anything the user interacted with anywhere
        assert not negatives & rated[row.user]
        assert len(negatives) >= 50  # >= because unions of per-positive draws
        assert np.all(np.diff(row.items) > 0)  # sorted, unique


def test_negative_sampling_exhausted_user():
    # user 0 has rated 4 of 5 items; only 1 unseen item exists
    ds = make_ds([(0, 0), (0, 1), (0, 2), (0, 3)], n_items=5)
    split = random_split(ds, stream=RngStream(0, "s"))
    cands = sample_negatives(split, 50, RngStream(0, "e"))
    if cands.rows:  # the single test positive may land in train instead
        assert cands.exhausted_users == [0]
        negs = (~cands.rows[0].is_positive).sum()
        assert negs == 1


def test_negative_sampling_users_filter(planted_split):
    keep = {1, 2, 3}
    cands = sample_negatives(planted_split, 10, RngStream(0, "e"), users=keep)
    assert {r.user for r in cands.rows} <= keep


def _cold_ds(n_users=30, per_user=30, n_items=40, seed=0):
    gen = np.random.default_rng(seed)
    pairs = []
    for u in range(n_users):
        for i in gen.choice(n_items, size=per_user, replace=False):
            pairs.append((u, int(i)))
    return make_ds(pairs, n_users=n_users, n_items=n_items)


def test_cold_start_budget_respected():
    ds = _cold_ds()
    split = make_cold_start(ds, 0.2, 25, 3, RngStream(5, "c"))
    assert len(split.cold_users) == 6  # round_half_up(0.2 * 30)
    assert split.t_budget == 3
    train_items = split.user_items("train")
    test_items = split.user_items("test")
    valid_users = {int(u) for u in split.dataset.users[split.valid_idx]}
    for u in split.cold_users:
        assert len(train_items[u]) == 3
        assert len(test_items[u]) == 30 - 3
        assert u not in valid_users
    assert split.is_partition()


def test_cold_start_eligibility_strict():
    # users with exactly min_interactions are NOT eligible
    ds = _cold_ds(n_users=10, per_user=25)
    with pytest.raises(ValueError, match="more than 25"):
        make_cold_start(ds, 0.5, 25, 3, RngStream(0, "c"))


def test_cold_start_t_budget_bounds():
    ds = _cold_ds()
    with pytest.raises(ValueError):
        make_cold_start(ds, 0.2, 25, 0, RngStream(0, "c"))
    with pytest.raises(ValueError):
        make_cold_start(ds, 0.2, 25, 26, RngStream(0, "c"))


def test_cold_start_non_cold_users_follow_base_split():
    ds = _cold_ds()
    split = make_cold_start(ds, 0.2, 25, 1, RngStream(7, "c"))
    # every interaction of a non-cold user lands in exactly one part
    assert split.is_partition()
    warm = set(range(30)) - set(split.cold_users)
    warm_total = sum((ds.users == u).sum() for u in warm)
    warm_in_parts = sum(
        int(np.isin(ds.users[getattr(split, part)], list(warm)).sum())
        for part in ("train_idx", "valid_idx", "test_idx")
    )
    assert warm_total == warm_in_parts


def test_save_split_writes_manifest(tmp_path, planted_split):
    paths = save_split(planted_split, str(tmp_path))
    meta = json.loads((tmp_path / "split.json").read_text())
    assert meta["sizes"]["train"] == len(planted_split.train_idx)
    assert meta["t_budget"] == 0
    for name in ("train", "valid", "test"):
        assert (tmp_path / f"{name}.inter").exists()
