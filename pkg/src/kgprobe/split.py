"""Train/valid/test protocol: splitting, negative sampling, cold-start.

The evaluation protocol is rank-based with sampled candidates: for every
test positive of a user, 50 items the user never touched (in train, valid,
or test) are drawn without replacement; the model then ranks positives
against the union of those draws. Cold-start splits hold back all but a
fixed budget ``T`` of interactions for a sampled set of well-active users;
those users never appear in the validation partition, so early stopping
cannot peek at them.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .data import InteractionDataset, save_interactions
from .perturb import round_half_up
from .rng import RngStream

logger = logging.getLogger(__name__)

DEFAULT_RATIOS = (0.8, 0.1, 0.1)
DEFAULT_NEGATIVES = 50


@dataclass
class DatasetSplit:
    """Index-based partition of a dataset's interaction list."""

    dataset: InteractionDataset
    train_idx: np.ndarray
    valid_idx: np.ndarray
    test_idx: np.ndarray
    cold_users: frozenset[int] = frozenset()
    t_budget: int = 0

    def part(self, name: str) -> np.ndarray:
        return {"train": self.train_idx, "valid": self.valid_idx, "test": self.test_idx}[name]

    def pairs(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        idx = self.part(name)
        return self.dataset.users[idx], self.dataset.items[idx]

    def is_partition(self) -> bool:
        n = self.dataset.n_interactions
        allidx = np.concatenate([self.train_idx, self.valid_idx, self.test_idx])
        return len(allidx) == n and np.array_equal(np.sort(allidx), np.arange(n))

    def user_items(self, name: str) -> dict[int, np.ndarray]:
        """user -> sorted unique item ids in the named partition."""
        users, items = self.pairs(name)
        out: dict[int, np.ndarray] = {}
        order = np.argsort(users, kind="stable")
        users, items = users[order], items[order]
        bounds = np.flatnonzero(np.diff(users)) + 1
        for chunk_u, chunk_i in zip(
            np.split(users, bounds), np.split(items, bounds)
        ):
            if len(chunk_u):
                out[int(chunk_u[0])] = np.unique(chunk_i)
        return out


@dataclass
class CandidateSet:
    user: int
    items: np.ndarray  # sorted ascending
    is_positive: np.ndarray  # bool, parallel to items


@dataclass
class EvalCandidates:
    rows: list[CandidateSet]
    n_negatives: int
    exhausted_users: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)


def _check_ratios(ratios: tuple[float, float, float]) -> None:
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")


def _slice_sizes(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    n_train = min(round_half_up(ratios[0] * n), n)
    n_valid = min(round_half_up(ratios[1] * n), n - n_train)
    return n_train, n_valid, n - n_train - n_valid


def random_split(
    ds: InteractionDataset,
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    stream: RngStream = RngStream(0, "split"),
) -> DatasetSplit:
    """Uniformly shuffle interactions, then slice by rounded boundaries."""
    _check_ratios(ratios)
    n = ds.n_interactions
    perm = stream.generator().permutation(n)
    n_train, n_valid, _ = _slice_sizes(n, ratios)
    return DatasetSplit(
        dataset=ds,
        train_idx=np.sort(perm[:n_train]),
        valid_idx=np.sort(perm[n_train : n_train + n_valid]),
        test_idx=np.sort(perm[n_train + n_valid :]),
    )


def sample_negatives(
    split: DatasetSplit,
    n: int = DEFAULT_NEGATIVES,
    stream: RngStream = RngStream(0, "negatives"),
    part: str = "test",
    users: set[int] | None = None,
) -> EvalCandidates:
    """Candidate lists for ranking: per positive, ``n`` unseen items.

    "Unseen" means absent from the user's train, valid, AND test
    interactions. Draws for different positives of one user are independent,
    so their union can be smaller than ``n * positives``; candidates are
    deduplicated and sorted. When a user has fewer than ``n`` unseen items,
    all of them are used and the user is recorded in ``exhausted_users``.
    """
    if n < 1:
        raise ValueError(f"need at least 1 negative per positive, got {n}")
    ds = split.dataset
    rated: dict[int, set[int]] = {}
    for u, i in zip(ds.users, ds.items):
        rated.setdefault(int(u), set()).add(int(i))
    positives = split.user_items(part)
    gen = stream.generator()
    rows: list[CandidateSet] = []
    exhausted: list[int] = []
    for user in sorted(positives):
        if users is not None and user not in users:
            continue
        pool = np.setdiff1d(np.arange(ds.n_items), np.fromiter(rated[user], dtype=np.int64))
        chunks = [positives[user]]
        short = False
        for _ in positives[user]:
            k = min(n, len(pool))
            if k < n:
                short = True
            if k:
                chunks.append(gen.choice(pool, size=k, replace=False))
        if short:
            exhausted.append(user)
        items = np.unique(np.concatenate(chunks))
        pos_mask = np.isin(items, positives[user])
        rows.append(CandidateSet(user=user, items=items, is_positive=pos_mask))
    if exhausted:
        logger.warning("%d users had fewer than %d unseen items", len(exhausted), n)
    return EvalCandidates(rows=rows, n_negatives=n, exhausted_users=exhausted)


def make_cold_start(
    ds: InteractionDataset,
    fraction: float = 0.1,
    min_interactions: int = 25,
    t_budget: int = 3,
    stream: RngStream = RngStream(0, "cold"),
    base_ratios: tuple[float, float, float] = DEFAULT_RATIOS,
) -> DatasetSplit:
    """Hold back all but ``t_budget`` interactions of sampled active users.

    Users with strictly more than ``min_interactions`` interactions are
    eligible; ``round_half_up(fraction * n_eligible)`` of them become cold.
    Each cold user keeps a uniform sample of ``t_budget`` interactions in
    train and sends the rest to test. Everyone else is split by
    ``base_ratios``; validation therefore contains no cold users.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    if t_budget < 1:
        raise ValueError(f"t_budget must be at least 1, got {t_budget}")
    if t_budget > min_interactions:
        raise ValueError(
            f"t_budget {t_budget} exceeds min_interactions {min_interactions}; "
            "eligible users could not fund the training budget"
        )
    _check_ratios(base_ratios)
    counts = np.bincount(ds.users, minlength=ds.n_users)
    eligible = np.flatnonzero(counts > min_interactions)
    if len(eligible) == 0:
        raise ValueError(
            f"no users with more than {min_interactions} interactions; cannot build a cold-start split"
        )
    n_cold = round_half_up(fraction * len(eligible))
    cold = np.sort(stream.child("users").generator().choice(eligible, size=n_cold, replace=False))
    cold_set = frozenset(int(u) for u in cold)

    is_cold = np.zeros(ds.n_users, dtype=bool)
    is_cold[cold] = True
    cold_mask = is_cold[ds.users]

    keep_gen = stream.child("budget").generator()
    train_parts = []
    test_parts = []
    for user in cold:
        idx = np.flatnonzero(ds.users == user)
        kept = keep_gen.choice(idx, size=t_budget, replace=False)
        train_parts.append(kept)
        test_parts.append(np.setdiff1d(idx, kept))

    base_idx = np.flatnonzero(~cold_mask)
    perm = stream.child("base").generator().permutation(len(base_idx))
    n_train, n_valid, _ = _slice_sizes(len(base_idx), base_ratios)
    train_parts.append(base_idx[perm[:n_train]])
    valid_idx = base_idx[perm[n_train : n_train + n_valid]]
    test_parts.append(base_idx[perm[n_train + n_valid :]])

    return DatasetSplit(
        dataset=ds,
        train_idx=np.sort(np.concatenate(train_parts)),
        valid_idx=np.sort(valid_idx),
        test_idx=np.sort(np.concatenate(test_parts)) if test_parts else np.empty(0, dtype=np.int64),
        cold_users=cold_set,
        t_budget=t_budget,
    )


def save_split(split: DatasetSplit, out_dir: str, manifest_extra: dict | None = None) -> None:
    """Persist a split as three ``.inter`` files plus a JSON manifest."""
    os.makedirs(out_dir, exist_ok=True)
    ds = split.dataset
    for name in ("train", "valid", "test"):
        idx = split.part(name)
        part = InteractionDataset(
            n_users=ds.n_users,
            n_items=ds.n_items,
            users=ds.users[idx],
            items=ds.items[idx],
            ratings=ds.ratings[idx] if ds.ratings is not None else None,
            timestamps=ds.timestamps[idx] if ds.timestamps is not None else None,
            user_tokens=ds.user_tokens,
            item_tokens=ds.item_tokens,
        )
        save_interactions(part, os.path.join(out_dir, f"{name}.inter"))
    manifest = {
        "t_budget": split.t_budget,
        "cold_users": sorted(split.cold_users),
        "sizes": {
            "train": int(len(split.train_idx)),
            "valid": int(len(split.valid_idx)),
            "test": int(len(split.test_idx)),
        },
    }
    manifest.update(manifest_extra or {})
    with open(os.path.join(out_dir, "split.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
