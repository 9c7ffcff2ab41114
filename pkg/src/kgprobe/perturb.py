"""Graph edit operators for knowledge-ablation experiments.

Two families:

* **Replacement regimes** build a brand-new graph from the interactions:
  :func:`to_interaction_kg` (both directed facts per training interaction)
  and :func:`to_self_kg` (one self-loop per linked item entity). These carry
  no item knowledge beyond what the interactions already say.

* **Edit operators** damage an existing graph by a controlled amount:
  :func:`distort` rewrites facts with uniform random triples,
  :func:`delete_facts` / :func:`delete_entities` / :func:`delete_relations`
  remove a uniformly chosen share of the respective pool, and
  :func:`remove_relation_type` drops one named relation deterministically.

Selection counts are ``round_half_up(ratio * pool_size)``. Vocabulary sizes
never shrink: deleted entities simply become isolated ids. Entities marked
protected keep their self-loop placeholder facts under every operator and
every ratio (see :func:`add_self_loop_placeholders`), so items linked to the
graph never lose their last edge.

All stochastic operators take an :class:`~kgprobe.rng.RngStream` and are pure:
the same ``(graph, arguments, stream)`` always yields a bit-identical result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .graph import KnowledgeGraph
from .rng import RngStream

INTERACT_RELATION = 0
INTERACT_TRANS_RELATION = 1
SELF_RELATION = 0

PERTURB_KINDS = (
    "interaction_kg",
    "self_kg",
    "distort",
    "delete_facts",
    "delete_entities",
    "delete_relations",
    "remove_relation",
)

_RATIO_KINDS = {"distort", "delete_facts", "delete_entities", "delete_relations"}


def round_half_up(x: float) -> int:
    """Package-wide selection arithmetic: 0.5 rounds up, never banker's.

    A 1e-9 nudge absorbs binary-float fuzz in products like ``ratio * n``.
    """
    return int(math.floor(x + 0.5 + 1e-9))


@dataclass(frozen=True)
class PerturbSpec:
    """Names one perturbation so runs can be recorded and replayed."""

    kind: str
    ratio: float | None = None
    target_relation: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in PERTURB_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if self.kind in _RATIO_KINDS:
            if self.ratio is None or not 0.0 <= self.ratio <= 1.0:
                raise ValueError(f"{self.kind} needs a ratio in [0, 1], got {self.ratio}")
        elif self.ratio is not None:
            raise ValueError(f"{self.kind} takes no ratio")
        if self.kind == "remove_relation":
            if self.target_relation is None or self.target_relation < 0:
                raise ValueError("remove_relation needs a non-negative target_relation")
        elif self.target_relation is not None:
            raise ValueError(f"{self.kind} takes no target_relation")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "ratio": self.ratio, "target_relation": self.target_relation}

    @classmethod
    def from_dict(cls, d: dict) -> "PerturbSpec":
        return cls(d["kind"], d.get("ratio"), d.get("target_relation"))


def to_interaction_kg(
    train_users: np.ndarray,
    train_items: np.ndarray,
    links: dict[int, int],
    n_users: int,
    entity_count: int,
) -> KnowledgeGraph:
    """Replace the item graph with the interactions themselves.

    Every training interaction ``<u, i>`` becomes two directed facts,
    ``<u, interact, i>`` and ``<i, interact_trans, u>``, between the item's
    entity and a user node appended after the existing entity ids (user ``u``
    is entity ``entity_count + u``). The id space therefore stays compatible
    with ``links``; entities that carried item knowledge are simply left
    isolated.
    """
    train_users = np.asarray(train_users, dtype=np.int64)
    train_items = np.asarray(train_items, dtype=np.int64)
    if train_users.shape != train_items.shape:
        raise ValueError("user and item arrays must be parallel")
    missing = [int(i) for i in np.unique(train_items) if int(i) not in links]
    if missing:
        raise ValueError(f"items without graph links: {missing[:5]} (link every item first)")
    item_ents = np.asarray([links[int(i)] for i in train_items], dtype=np.int64)
    user_nodes = entity_count + train_users
    n = len(train_users)
    facts = np.empty((2 * n, 3), dtype=np.int64)
    facts[0::2, 0] = user_nodes
    facts[0::2, 1] = INTERACT_RELATION
    facts[0::2, 2] = item_ents
    facts[1::2, 0] = item_ents
    facts[1::2, 1] = INTERACT_TRANS_RELATION
    facts[1::2, 2] = user_nodes
    return KnowledgeGraph(
        entity_count=entity_count + n_users,
        relation_count=2,
        facts=facts,
        relation_tokens=["interact", "interact_trans"],
    )


def to_self_kg(links: dict[int, int], entity_count: int) -> KnowledgeGraph:
    """Replace the item graph with one ``<e, self_to_self, e>`` per linked item."""
    ents = np.asarray([links[i] for i in sorted(links)], dtype=np.int64)
    facts = np.column_stack([ents, np.zeros(len(ents), dtype=np.int64), ents])
    return KnowledgeGraph(
        entity_count=entity_count,
        relation_count=1,
        facts=facts,
        relation_tokens=["self_to_self"],
    )


def _editable_positions(kg: KnowledgeGraph) -> np.ndarray:
    """Fact positions that ratio operators may touch (placeholders exempt)."""
    return np.flatnonzero(~kg.placeholder_mask())


def distort(kg: KnowledgeGraph, degree: float, stream: RngStream) -> KnowledgeGraph:
    """Rewrite ``round_half_up(degree * n_editable)`` facts with random triples.

    Each selected position gets an independent uniform head, relation, and
    tail (self-loops and duplicates allowed). The fact count is unchanged.
    Draw order: positions, then heads, then relations, then tails.
    """
    if not 0.0 <= degree <= 1.0:
        raise ValueError(f"degree must be in [0, 1], got {degree}")
    pool = _editable_positions(kg)
    count = round_half_up(degree * len(pool))
    facts = kg.facts.copy()
    if count:
        gen = stream.generator()
        selected = np.sort(gen.choice(pool, size=count, replace=False))
        facts[selected, 0] = gen.integers(0, kg.entity_count, size=count)
        if kg.placeholder_relation is None:
            facts[selected, 1] = gen.integers(0, kg.relation_count, size=count)
        else:
            allowed = np.delete(np.arange(kg.relation_count), kg.placeholder_relation)
            facts[selected, 1] = gen.choice(allowed, size=count, replace=True)
        facts[selected, 2] = gen.integers(0, kg.entity_count, size=count)
    return kg.with_facts(facts)


def delete_facts(kg: KnowledgeGraph, ratio: float, stream: RngStream) -> KnowledgeGraph:
    """Drop ``round_half_up(ratio * n_editable)`` facts, keeping order."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1], got {ratio}")
    pool = _editable_positions(kg)
    count = round_half_up(ratio * len(pool))
    keep = np.ones(kg.n_facts, dtype=bool)
    if count:
        selected = stream.generator().choice(pool, size=count, replace=False)
        keep[selected] = False
    return kg.with_facts(kg.facts[keep])


def delete_entities(
    kg: KnowledgeGraph,
    ratio: float,
    stream: RngStream,
    protected: Iterable[int] | None = None,
) -> KnowledgeGraph:
    """Isolate a uniform share of unprotected entities.

    Marks ``round_half_up(ratio * n_unprotected)`` entities deleted and drops
    every fact touching one. The vocabulary keeps its size; deleted ids just
    lose all their edges.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1], got {ratio}")
    prot = kg.protected_entities if protected is None else frozenset(protected)
    pool = np.setdiff1d(np.arange(kg.entity_count), np.fromiter(prot, dtype=np.int64, count=len(prot)))
    count = round_half_up(ratio * len(pool))
    if not count:
        return kg.with_facts(kg.facts.copy())
    deleted = stream.generator().choice(pool, size=count, replace=False)
    gone = np.zeros(kg.entity_count, dtype=bool)
    gone[deleted] = True
    keep = ~(gone[kg.heads] | gone[kg.tails])
    return kg.with_facts(kg.facts[keep])


def delete_relations(kg: KnowledgeGraph, ratio: float, stream: RngStream) -> KnowledgeGraph:
    """Remove a uniform share of relation types (all their facts).

    The pool is the relation vocabulary minus the placeholder relation, and
    it includes relations that currently have zero facts. Relation ids stay
    valid; removed relations simply have no facts left.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1], got {ratio}")
    pool = np.arange(kg.relation_count)
    if kg.placeholder_relation is not None:
        pool = np.delete(pool, kg.placeholder_relation)
    count = round_half_up(ratio * len(pool))
    if not count:
        return kg.with_facts(kg.facts.copy())
    deleted = stream.generator().choice(pool, size=count, replace=False)
    gone = np.zeros(kg.relation_count, dtype=bool)
    gone[deleted] = True
    return kg.with_facts(kg.facts[~gone[kg.relations]])


def remove_relation_type(kg: KnowledgeGraph, relation: int) -> KnowledgeGraph:
    """Deterministically drop every fact of one relation type."""
    if not 0 <= relation < kg.relation_count:
        raise ValueError(
            f"relation {relation} out of bounds for relation_count={kg.relation_count}"
        )
    return kg.with_facts(kg.facts[kg.relations != relation])


def add_self_loop_placeholders(kg: KnowledgeGraph, protected: Iterable[int]) -> KnowledgeGraph:
    """Guarantee every protected entity a permanent self-loop fact.

    A dedicated placeholder relation is appended to the vocabulary on first
    use; each protected entity lacking ``<e, placeholder, e>`` gets one. The
    placeholder facts are exempt from every ratio operator, so linked items
    keep at least one edge no matter how hard the graph is damaged.
    Idempotent: reapplying adds nothing.
    """
    prot = sorted(set(int(e) for e in protected))
    for e in prot:
        if not 0 <= e < kg.entity_count:
            raise ValueError(f"protected entity {e} out of bounds")
    if kg.placeholder_relation is None:
        rel = kg.relation_count
        relation_count = kg.relation_count + 1
        relation_tokens = (
            kg.relation_tokens + ["self_loop_placeholder"]
            if kg.relation_tokens is not None
            else None
        )
        have: set[int] = set()
    else:
        rel = kg.placeholder_relation
        relation_count = kg.relation_count
        relation_tokens = kg.relation_tokens
        ph = kg.facts[(kg.relations == rel) & (kg.heads == kg.tails)]
        have = set(int(h) for h in ph[:, 0])
    missing = [e for e in prot if e not in have]
    new_facts = np.asarray([[e, rel, e] for e in missing], dtype=np.int64).reshape(-1, 3)
    return replace(
        kg,
        relation_count=relation_count,
        relation_tokens=relation_tokens,
        facts=np.concatenate([kg.facts, new_facts]),
        protected_entities=kg.protected_entities | frozenset(prot),
        placeholder_relation=rel,
        _adjacency=None,
    )


def apply_spec(
    kg: KnowledgeGraph | None,
    spec: PerturbSpec,
    stream: RngStream,
    *,
    train_users: np.ndarray | None = None,
    train_items: np.ndarray | None = None,
    links: dict[int, int] | None = None,
    n_users: int | None = None,
) -> KnowledgeGraph:
    """Apply a recorded perturbation. Replacement kinds need the keyword
    context (training interactions and links); edit kinds need the graph."""
    if spec.kind == "interaction_kg":
        if train_users is None or train_items is None or links is None or n_users is None:
            raise ValueError("interaction_kg needs train_users/train_items/links/n_users")
        base = kg.entity_count if kg is not None else max(links.values()) + 1
        return to_interaction_kg(train_users, train_items, links, n_users, base)
    if spec.kind == "self_kg":
        if links is None:
            raise ValueError("self_kg needs links")
        base = kg.entity_count if kg is not None else max(links.values()) + 1
        return to_self_kg(links, base)
    if kg is None:
        raise ValueError(f"{spec.kind} needs a graph")
    if spec.kind == "distort":
        return distort(kg, spec.ratio, stream)
    if spec.kind == "delete_facts":
        return delete_facts(kg, spec.ratio, stream)
    if spec.kind == "delete_entities":
        return delete_entities(kg, spec.ratio, stream)
    if spec.kind == "delete_relations":
        return delete_relations(kg, spec.ratio, stream)
    if spec.kind == "remove_relation":
        return remove_relation_type(kg, spec.target_relation)
    raise AssertionError(f"unhandled kind {spec.kind}")
