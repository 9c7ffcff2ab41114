"""Joint translation embeddings over interactions and item knowledge.

The unified graph contains the item graph's facts verbatim plus, per
training interaction, ``<u, interact, ent(i)>`` and the reverse
``<ent(i), interact_trans, u>`` with user nodes appended after the graph's
entities. Triples score as ``-||e_h + e_r - e_t||``; recommendation scores
reuse the ``interact`` relation. Training corrupts each triple's tail within
its own node population (item entities for ``interact``, user nodes for the
reverse, and for knowledge facts the observed tail set of the fact's own
relation) and minimizes a margin ranking loss between the true and corrupted
triple. Tails densely shared within a relation — genre-style hub entities —
then repel each other directly, which is what keeps them apart; corrupting
across the whole vocabulary almost never samples a hub, so hubs drift into
one point and the graph signal dissolves. Node embeddings are projected back
to the unit sphere after every update, the usual TransE constraint: without
it the margin pressure shrinks every cluster toward the origin instead of
arranging it.
"""

from __future__ import annotations

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
)

_BATCH = 256
_EPS = 1e-12


def batch_loss_grads(
    tables: dict[str, np.ndarray],
    heads: np.ndarray,
    rels: np.ndarray,
    tails: np.ndarray,
    neg_tails: np.ndarray,
    config: ModelConfig,
):
    """Mean margin ranking loss ``max(0, m + d_pos - d_neg)`` and gradients."""
    E, R = tables["entity_emb"], tables["rel_emb"]
    b = len(heads)
    eh, er, et, en = E[heads], R[rels], E[tails], E[neg_tails]
    pos_vec = eh + er - et
    neg_vec = eh + er - en
    d_pos = np.linalg.norm(pos_vec, axis=1)
    d_neg = np.linalg.norm(neg_vec, axis=1)
    hinge = config.margin + d_pos - d_neg
    active = hinge > 0
    l2 = config.l2_weight
    reg = 0.5 * l2 * (
        np.einsum("bd,bd->b", eh, eh)
        + np.einsum("bd,bd->b", er, er)
        + np.einsum("bd,bd->b", et, et)
        + np.einsum("bd,bd->b", en, en)
    )
    loss = float(np.where(active, hinge, 0.0).mean() + reg.mean())
    u_pos = pos_vec / np.maximum(d_pos, _EPS)[:, None]
    u_neg = neg_vec / np.maximum(d_neg, _EPS)[:, None]
    act = (active.astype(np.float64) / b)[:, None]
    grads = [
        ("entity_emb", heads, act * (u_pos - u_neg) + (l2 / b) * eh),
        ("rel_emb", rels, act * (u_pos - u_neg) + (l2 / b) * er),
        ("entity_emb", tails, -act * u_pos + (l2 / b) * et),
        ("entity_emb", neg_tails, act * u_neg + (l2 / b) * en),
    ]
    return loss, grads


def train_cfkg_lite(
    split: DatasetSplit,
    kg: KnowledgeGraph,
    config: ModelConfig = ModelConfig(),
    stream: RngStream = RngStream(0, "train/cfkg_lite"),
    valid_candidates: EvalCandidates | None = None,
    n_valid_negatives: int = 50,
) -> TrainedModel:
    ds = split.dataset
    links = links_array(ds, kg.entity_count)
    user_offset = kg.entity_count
    interact = kg.relation_count
    n_entities = kg.entity_count + ds.n_users
    n_relations = kg.relation_count + 2

    t_users, t_items = split.pairs("train")
    n_inter = len(t_users)
    user_nodes = user_offset + t_users
    item_ents = links[t_items]
    heads = np.concatenate([kg.heads, user_nodes, item_ents])
    rels = np.concatenate(
        [kg.relations, np.full(n_inter, interact), np.full(n_inter, interact + 1)]
    )
    tails = np.concatenate([kg.tails, item_ents, user_nodes])
    # tail corruption pools: graph facts corrupt within their relation's
    # observed tails (family = relation id), interactions within item
    # entities (family -1), reverse interactions within user nodes (-2)
    family = np.concatenate(
        [kg.relations, np.full(n_inter, -1, dtype=np.int64), np.full(n_inter, -2, dtype=np.int64)]
    )
    pools = {-1: np.unique(links), -2: np.arange(user_offset, user_offset + ds.n_users)}
    for rel in np.unique(kg.relations):
        pools[int(rel)] = np.unique(kg.tails[kg.relations == rel])

    gen = stream.child("init").generator()
    tables = {
        "entity_emb": init_table(gen, n_entities, config.embedding_dim),
        "rel_emb": init_table(gen, n_relations, config.embedding_dim),
    }

    if valid_candidates is None:
        valid_candidates = sample_negatives(
            split, n_valid_negatives, stream.child("valid-candidates"), part="valid"
        )

    def make_eval_model(tb: dict[str, np.ndarray]) -> TrainedModel:
        return TrainedModel(
            kind="cfkg_lite",
            config=config,
            n_users=ds.n_users,
            n_items=ds.n_items,
            entity_emb=tb["entity_emb"],
            rel_emb=tb["rel_emb"],
            links=links,
            user_offset=user_offset,
            interact_relation=interact,
        )

    def train_epoch(tb: dict[str, np.ndarray], estream: RngStream) -> float:
        egen = estream.generator()
        order = np.repeat(egen.permutation(len(heads)), config.train_neg_per_pos)
        total, seen = 0.0, 0
        for start in range(0, len(order), _BATCH):
            sl = order[start : start + _BATCH]
            neg = np.empty(len(sl), dtype=np.int64)
            fam = family[sl]
            for f in np.unique(fam):
                pool = pools[int(f)]
                mask = fam == f
                neg[mask] = pool[egen.integers(0, len(pool), size=int(mask.sum()))]
            loss, grads = batch_loss_grads(tb, heads[sl], rels[sl], tails[sl], neg, config)
            sgd_update(tb, grads, config.learning_rate)
            touched = np.unique(np.concatenate([heads[sl], tails[sl], neg]))
            E = tb["entity_emb"]
            E[touched] /= np.maximum(np.linalg.norm(E[touched], axis=1), _EPS)[:, None]
            total += loss * len(sl)
            seen += len(sl)
        return total / max(seen, 1)

    best, log = run_training(tables, config, stream, train_epoch, make_eval_model, valid_candidates)
    model = make_eval_model(finalize_tables(best))
    model.training_log = log
    return model
