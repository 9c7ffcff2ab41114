"""Shared fixtures: small handcrafted datasets and one planted dataset."""

import numpy as np
import pytest

from kgprobe import (
    InteractionDataset,
    ModelConfig,
    add_self_loop_placeholders,
    build_graph,
    link_all_items,
    make_planted_dataset,
    random_split,
    sample_negatives,
)
from kgprobe.rng import RngStream


def make_ds(pairs, n_users=None, n_items=None, links=None, ratings=None):
    """Build an InteractionDataset from (user, item) tuples."""
    users = np.array([u for u, _ in pairs], dtype=np.int64)
    items = np.array([i for _, i in pairs], dtype=np.int64)
    nu = n_users if n_users is not None else int(users.max()) + 1
    ni = n_items if n_items is not None else int(items.max()) + 1
    return InteractionDataset(
        n_users=nu,
        n_items=ni,
        users=users,
        items=items,
        ratings=np.asarray(ratings, dtype=np.float64) if ratings is not None else None,
        timestamps=None,
        links=dict(links) if links else {},
        user_tokens=[f"u{k}" for k in range(nu)],
        item_tokens=[f"i{k}" for k in range(ni)],
    )


@pytest.fixture
def tiny_ds():
    # 4 users x 5 items, 10 interactions, items 0..3 linked to entities 0..3
    pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 3), (2, 0), (2, 4), (3, 2), (3, 3), (3, 4)]
    return make_ds(pairs, links={0: 0, 1: 1, 2: 2, 3: 3})


@pytest.fixture
def tiny_kg():
    facts = np.array(
        [[0, 0, 4], [1, 0, 4], [2, 1, 5], [3, 1, 5], [4, 2, 5], [0, 2, 1]],
        dtype=np.int64,
    )
    return build_graph(facts, entity_count=6, relation_count=3)


@pytest.fixture(scope="session")
def planted():
    """Planted-structure dataset, fully prepped (links + placeholders)."""
    ds, kg = make_planted_dataset(RngStream(11, "dataset/planted"))
    ds, kg = link_all_items(ds, kg)
    kg = add_self_loop_placeholders(kg, set(ds.links.values()))
    return ds, kg


@pytest.fixture(scope="session")
def planted_split(planted):
    ds, _ = planted
    return random_split(ds, stream=RngStream(11, "tests/split"))


@pytest.fixture(scope="session")
def planted_cands(planted_split):
    return sample_negatives(planted_split, 50, RngStream(11, "tests/eval"))


@pytest.fixture
def quick_config():
    return ModelConfig(embedding_dim=8, learning_rate=0.1, max_epochs=6, patience=3)
