"""Graph-free baseline: matrix factorization with pairwise ranking loss.

Scores are plain dot products. Each training step takes a positive
interaction ``(u, i+)`` and a uniformly sampled item ``i-`` the user never
interacted with in train, and minimizes ``-ln sigma(s(u,i+) - s(u,i-))``
plus L2 on the touched rows.
"""

from __future__ import annotations

import numpy as np

from ..rng import RngStream
from ..split import DatasetSplit, EvalCandidates, sample_negatives
from .common import (
    ModelConfig,
    TrainedModel,
    finalize_tables,
    init_table,
    run_training,
    sgd_update,
    sigmoid,
    softplus,
)

_BATCH = 256
_REJECT_ROUNDS = 20


def batch_loss_grads(
    tables: dict[str, np.ndarray],
    users: np.ndarray,
    pos_items: np.ndarray,
    neg_items: np.ndarray,
    config: ModelConfig,
):
    """Mean pairwise loss over the batch and its gradients.

    Returns ``(loss, [(table, row_indices, grad_rows), ...])`` where the
    gradient rows are for the mean loss (duplicate indices accumulate).
    """
    U, V = tables["user_emb"], tables["item_emb"]
    b = len(users)
    uu, vp, vn = U[users], V[pos_items], V[neg_items]
    x = np.einsum("bd,bd->b", uu, vp - vn)
    l2 = config.l2_weight
    loss = softplus(-x).mean() + 0.5 * l2 * (
        np.einsum("bd,bd->b", uu, uu) + np.einsum("bd,bd->b", vp, vp) + np.einsum("bd,bd->b", vn, vn)
    ).mean()
    dx = (-sigmoid(-x) / b)[:, None]
    grads = [
        ("user_emb", users, dx * (vp - vn) + (l2 / b) * uu),
        ("item_emb", pos_items, dx * uu + (l2 / b) * vp),
        ("item_emb", neg_items, -dx * uu + (l2 / b) * vn),
    ]
    return float(loss), grads


def draw_negatives(
    gen: np.random.Generator,
    users: np.ndarray,
    n_items: int,
    pos_sets: dict[int, set[int]],
) -> np.ndarray:
    """Uniform items, re-drawn (a few rounds) where they hit a train positive."""
    neg = gen.integers(0, n_items, size=len(users))
    for _ in range(_REJECT_ROUNDS):
        bad = np.asarray(
            [int(it) in pos_sets.get(int(u), ()) for u, it in zip(users, neg)], dtype=bool
        )
        if not bad.any():
            break
        neg[bad] = gen.integers(0, n_items, size=int(bad.sum()))
    return neg


def train_bpr_mf(
    split: DatasetSplit,
    config: ModelConfig = ModelConfig(),
    stream: RngStream = RngStream(0, "train/bpr_mf"),
    valid_candidates: EvalCandidates | None = None,
    n_valid_negatives: int = 50,
) -> TrainedModel:
    ds = split.dataset
    t_users, t_items = split.pairs("train")
    pos_sets = {int(u): set(map(int, items)) for u, items in split.user_items("train").items()}

    gen = stream.child("init").generator()
    tables = {
        "user_emb": init_table(gen, ds.n_users, config.embedding_dim),
        "item_emb": init_table(gen, ds.n_items, config.embedding_dim),
    }

    if valid_candidates is None:
        valid_candidates = sample_negatives(
            split, n_valid_negatives, stream.child("valid-candidates"), part="valid"
        )

    def make_eval_model(tb: dict[str, np.ndarray]) -> TrainedModel:
        return TrainedModel(
            kind="bpr_mf",
            config=config,
            n_users=ds.n_users,
            n_items=ds.n_items,
            user_emb=tb["user_emb"],
            item_emb=tb["item_emb"],
        )

    def train_epoch(tb: dict[str, np.ndarray], estream: RngStream) -> float:
        egen = estream.generator()
        order = np.repeat(egen.permutation(len(t_users)), config.train_neg_per_pos)
        total, seen = 0.0, 0
        for start in range(0, len(order), _BATCH):
            sl = order[start : start + _BATCH]
            users, pos = t_users[sl], t_items[sl]
            neg = draw_negatives(egen, users, ds.n_items, pos_sets)
            loss, grads = batch_loss_grads(tb, users, pos, neg, config)
            sgd_update(tb, grads, config.learning_rate)
            total += loss * len(sl)
            seen += len(sl)
        return total / max(seen, 1)

    best, log = run_training(tables, config, stream, train_epoch, make_eval_model, valid_candidates)
    model = make_eval_model(finalize_tables(best))
    model.training_log = log
    return model
