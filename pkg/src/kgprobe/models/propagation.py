"""One-hop neighbor aggregation with user-relation attention.

An item is represented by its entity embedding plus an attention-weighted
mean of a fixed-size sample of its entity's *outgoing* neighbors (edges are
directed). Attention over the sampled neighbors is a softmax of
``u . e_relation``, so different users weight the same edge differently.
The score is ``u . (e_item + weighted_neighbors)`` and training uses the
same pairwise ranking loss as the factorization baseline.

Neighbors are resampled every batch during training (with replacement, so
low-degree entities repeat); evaluation uses one fixed sample per item drawn
from a dedicated stream, which keeps scoring deterministic. Entities with no
outgoing edges fall back to their own embedding.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..graph import KnowledgeGraph
from ..rng import RngStream
from ..split import DatasetSplit, EvalCandidates, sample_negatives
from .common import (
    ModelConfig,
    TrainedModel,
    finalize_tables,
    init_table,
    links_array,
    run_training,
    sgd_update,
    sigmoid,
    softplus,
)
from .bpr import draw_negatives

_BATCH = 256


class NeighborSample(NamedTuple):
    ents: np.ndarray  # (b,) entity per example
    rels: np.ndarray  # (b, k) sampled relation ids (0 where has is False)
    tails: np.ndarray  # (b, k) sampled tail ids (0 where has is False)
    has: np.ndarray  # (b,) bool, entity has outgoing edges


class _Csr(NamedTuple):
    start: np.ndarray
    degree: np.ndarray
    rels: np.ndarray
    tails: np.ndarray


def _build_csr(kg: KnowledgeGraph) -> _Csr:
    order = np.argsort(kg.heads, kind="stable")
    degree = np.bincount(kg.heads, minlength=kg.entity_count)
    start = np.concatenate([[0], np.cumsum(degree)[:-1]])
    return _Csr(start, degree, kg.relations[order], kg.tails[order])


def _sample(csr: _Csr, gen: np.random.Generator, ents: np.ndarray, k: int) -> NeighborSample:
    deg = csr.degree[ents]
    has = deg > 0
    picks = np.floor(gen.random((len(ents), k)) * np.maximum(deg, 1)[:, None]).astype(np.int64)
    if len(csr.rels) == 0:
        zero = np.zeros((len(ents), k), dtype=np.int64)
        return NeighborSample(ents, zero, zero, has)
    rows = np.minimum(csr.start[ents][:, None] + picks, len(csr.rels) - 1)
    rels = np.where(has[:, None], csr.rels[rows], 0)
    tails = np.where(has[:, None], csr.tails[rows], 0)
    return NeighborSample(ents, rels, tails, has)


def _forward(tables, users, side: NeighborSample):
    U, E, R = tables["user_emb"], tables["entity_emb"], tables["rel_emb"]
    uu = U[users]
    ev = E[side.ents]
    rk = R[side.rels]
    tk = E[side.tails]
    logits = np.einsum("bd,bkd->bk", uu, rk)
    logits = logits - logits.max(axis=1, keepdims=True)
    pi = np.exp(logits)
    pi /= pi.sum(axis=1, keepdims=True)
    neigh = np.where(side.has[:, None], np.einsum("bk,bkd->bd", pi, tk), 0.0)
    agg = ev + neigh
    s = np.einsum("bd,bd->b", uu, agg)
    return s, (uu, ev, rk, tk, pi, agg)


def _side_grads(users, side: NeighborSample, cache, g):
    """Scatter-ready gradients of ``sum(g * s)`` for one side."""
    uu, ev, rk, tk, pi, agg = cache
    mask = side.has.astype(np.float64)[:, None]
    w = np.einsum("bd,bkd->bk", uu, tk)
    sbar = np.einsum("bk,bk->b", pi, w)
    dlogit = pi * (w - sbar[:, None]) * mask
    g_col = g[:, None]
    grad_u = g_col * (agg + np.einsum("bk,bkd->bd", dlogit, rk))
    grad_ev = g_col * uu
    grad_t = (g[:, None, None] * pi[..., None] * uu[:, None, :]) * mask[..., None]
    grad_r = g[:, None, None] * dlogit[..., None] * uu[:, None, :]
    b, k = pi.shape
    return [
        ("user_emb", users, grad_u),
        ("entity_emb", side.ents, grad_ev),
        ("entity_emb", side.tails.reshape(b * k), grad_t.reshape(b * k, -1)),
        ("rel_emb", side.rels.reshape(b * k), grad_r.reshape(b * k, -1)),
    ]


def batch_loss_grads(
    tables: dict[str, np.ndarray],
    users: np.ndarray,
    pos: NeighborSample,
    neg: NeighborSample,
    config: ModelConfig,
):
    """Mean pairwise loss between the two aggregated sides, plus gradients."""
    b = len(users)
    s_pos, cache_pos = _forward(tables, users, pos)
    s_neg, cache_neg = _forward(tables, users, neg)
    x = s_pos - s_neg
    uu, ev_pos = cache_pos[0], cache_pos[1]
    ev_neg = cache_neg[1]
    l2 = config.l2_weight
    reg = 0.5 * l2 * (
        np.einsum("bd,bd->b", uu, uu)
        + np.einsum("bd,bd->b", ev_pos, ev_pos)
        + np.einsum("bd,bd->b", ev_neg, ev_neg)
    )
    loss = float(softplus(-x).mean() + reg.mean())
    dx = -sigmoid(-x) / b
    grads = _side_grads(users, pos, cache_pos, dx) + _side_grads(users, neg, cache_neg, -dx)
    grads.append(("user_emb", users, (l2 / b) * uu))
    grads.append(("entity_emb", pos.ents, (l2 / b) * ev_pos))
    grads.append(("entity_emb", neg.ents, (l2 / b) * ev_neg))
    return loss, grads


def train_kgcn_lite(
    split: DatasetSplit,
    kg: KnowledgeGraph,
    config: ModelConfig = ModelConfig(),
    stream: RngStream = RngStream(0, "train/kgcn_lite"),
    valid_candidates: EvalCandidates | None = None,
    n_valid_negatives: int = 50,
) -> TrainedModel:
    ds = split.dataset
    links = links_array(ds, kg.entity_count)
    csr = _build_csr(kg)
    k = config.neighbor_sample_size

    t_users, t_items = split.pairs("train")
    pos_sets = {int(u): set(map(int, items)) for u, items in split.user_items("train").items()}

    gen = stream.child("init").generator()
    tables = {
        "user_emb": init_table(gen, ds.n_users, config.embedding_dim),
        "entity_emb": init_table(gen, kg.entity_count, config.embedding_dim),
        "rel_emb": init_table(gen, kg.relation_count, config.embedding_dim),
    }

    eval_sample = _sample(csr, stream.child("eval-neighbors").generator(), links, k)
    eval_rels = np.where(eval_sample.has[:, None], eval_sample.rels, -1)
    eval_ents = np.where(eval_sample.has[:, None], eval_sample.tails, -1)

    if valid_candidates is None:
        valid_candidates = sample_negatives(
            split, n_valid_negatives, stream.child("valid-candidates"), part="valid"
        )

    def make_eval_model(tb: dict[str, np.ndarray]) -> TrainedModel:
        return TrainedModel(
            kind="kgcn_lite",
            config=config,
            n_users=ds.n_users,
            n_items=ds.n_items,
            user_emb=tb["user_emb"],
            entity_emb=tb["entity_emb"],
            rel_emb=tb["rel_emb"],
            links=links,
            eval_rels=eval_rels,
            eval_ents=eval_ents,
        )

    def train_epoch(tb: dict[str, np.ndarray], estream: RngStream) -> float:
        egen = estream.generator()
        order = np.repeat(egen.permutation(len(t_users)), config.train_neg_per_pos)
        total, seen = 0.0, 0
        for start in range(0, len(order), _BATCH):
            sl = order[start : start + _BATCH]
            users, pos_items = t_users[sl], t_items[sl]
            neg_items = draw_negatives(egen, users, ds.n_items, pos_sets)
            pos = _sample(csr, egen, links[pos_items], k)
            neg = _sample(csr, egen, links[neg_items], k)
            loss, grads = batch_loss_grads(tb, users, pos, neg, config)
            sgd_update(tb, grads, config.learning_rate)
            total += loss * len(sl)
            seen += len(sl)
        return total / max(seen, 1)

    best, log = run_training(tables, config, stream, train_epoch, make_eval_model, valid_candidates)
    model = make_eval_model(finalize_tables(best))
    model.training_log = log
    return model
