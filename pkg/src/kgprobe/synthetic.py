"""Synthetic datasets with known structure, for demos and verification.

Two builders share one interaction generator: users belong to preference
blocks and interact only with items of their block, with a within-block
popularity skew so models have a ranking signal to learn.

* :func:`make_planted_dataset` attaches a graph that *encodes the planted
  structure*: every item's entity points at its block entity. A model that
  reads the graph can generalize across items of a block.
* :func:`make_noise_dataset` attaches a graph of the same general shape
  whose facts are pure noise. Any model behaving differently with and
  without this graph is reacting to noise, not knowledge.
"""

from __future__ import annotations

import numpy as np

from .data import InteractionDataset
from .graph import KnowledgeGraph
from .rng import RngStream


def _block_interactions(
    gen: np.random.Generator,
    n_users: int,
    n_items: int,
    n_blocks: int,
    interactions_per_user: int,
    popularity_exponent: float,
) -> tuple[np.ndarray, np.ndarray]:
    if n_blocks < 1 or n_users < n_blocks or n_items < n_blocks:
        raise ValueError("need at least one user and one item per block")
    item_block = np.arange(n_items) * n_blocks // n_items
    users_out = []
    items_out = []
    for user in range(n_users):
        block = user * n_blocks // n_users
        block_items = np.flatnonzero(item_block == block)
        if interactions_per_user > len(block_items):
            raise ValueError(
                f"interactions_per_user={interactions_per_user} exceeds the "
                f"{len(block_items)} items of block {block}"
            )
        weights = 1.0 / (1.0 + np.arange(len(block_items))) ** popularity_exponent
        weights /= weights.sum()
        chosen = gen.choice(block_items, size=interactions_per_user, replace=False, p=weights)
        users_out.append(np.full(interactions_per_user, user, dtype=np.int64))
        items_out.append(chosen.astype(np.int64))
    return np.concatenate(users_out), np.concatenate(items_out)


def _base_dataset(users: np.ndarray, items: np.ndarray, n_users: int, n_items: int) -> InteractionDataset:
    return InteractionDataset(
        n_users=n_users,
        n_items=n_items,
        users=users,
        items=items,
        links={i: i for i in range(n_items)},
        user_tokens=[f"u{n}" for n in range(n_users)],
        item_tokens=[f"i{n}" for n in range(n_items)],
    )


def make_planted_dataset(
    stream: RngStream = RngStream(0, "dataset/planted"),
    n_users: int = 200,
    n_items: int = 100,
    n_blocks: int = 2,
    interactions_per_user: int = 20,
    popularity_exponent: float = 1.0,
    facts_per_item: int = 1,
    n_extra_entities: int = 0,
) -> tuple[InteractionDataset, KnowledgeGraph]:
    """Block-structured interactions plus a graph that names each block.

    Entities ``0..n_items-1`` are the items (identity links); entities
    ``n_items..n_items+n_blocks-1`` are block entities. The single relation
    ``member_of`` connects each item to its block. ``facts_per_item``
    replicates each membership fact, raising the graph's weight relative to
    the interaction signal (a multigraph is legal here). ``n_extra_entities``
    appends entities that carry no facts, mimicking the long tail of a real
    entity vocabulary: corruption-style edits can then land outside the
    planted structure instead of accidentally wiring items to each other.
    """
    if facts_per_item < 1:
        raise ValueError("facts_per_item must be at least 1")
    if n_extra_entities < 0:
        raise ValueError("n_extra_entities must be non-negative")
    gen = stream.generator()
    users, items = _block_interactions(
        gen, n_users, n_items, n_blocks, interactions_per_user, popularity_exponent
    )
    ds = _base_dataset(users, items, n_users, n_items)
    item_block = np.arange(n_items) * n_blocks // n_items
    facts = np.column_stack(
        [
            np.arange(n_items, dtype=np.int64),
            np.zeros(n_items, dtype=np.int64),
            (n_items + item_block).astype(np.int64),
        ]
    )
    facts = np.repeat(facts, facts_per_item, axis=0)
    kg = KnowledgeGraph(
        entity_count=n_items + n_blocks + n_extra_entities,
        relation_count=1,
        facts=facts,
        entity_tokens=[f"i{n}" for n in range(n_items)]
        + [f"block{b}" for b in range(n_blocks)]
        + [f"e{n}" for n in range(n_extra_entities)],
        relation_tokens=["member_of"],
    )
    return ds, kg


def make_noise_dataset(
    stream: RngStream = RngStream(0, "dataset/noise"),
    n_users: int = 200,
    n_items: int = 100,
    n_blocks: int = 2,
    interactions_per_user: int = 20,
    popularity_exponent: float = 1.0,
    facts_per_item: int = 1,
    n_extra_entities: int = 20,
    n_relations: int = 3,
) -> tuple[InteractionDataset, KnowledgeGraph]:
    """Same interaction structure, but the graph is uniform random noise."""
    if facts_per_item < 1 or n_relations < 1:
        raise ValueError("need at least one fact per item and one relation")
    gen = stream.generator()
    users, items = _block_interactions(
        gen, n_users, n_items, n_blocks, interactions_per_user, popularity_exponent
    )
    ds = _base_dataset(users, items, n_users, n_items)
    n_entities = n_items + n_extra_entities
    heads = np.repeat(np.arange(n_items, dtype=np.int64), facts_per_item)
    rels = gen.integers(0, n_relations, size=len(heads))
    tails = gen.integers(0, n_entities, size=len(heads))
    kg = KnowledgeGraph(
        entity_count=n_entities,
        relation_count=n_relations,
        facts=np.column_stack([heads, rels, tails]),
        entity_tokens=[f"i{n}" for n in range(n_items)]
        + [f"e{n}" for n in range(n_extra_entities)],
        relation_tokens=[f"r{n}" for n in range(n_relations)],
    )
    return ds, kg
