"""Knowledge-graph container and basic queries.

A graph is a fixed entity/relation vocabulary plus an ordered multiset of
facts ``<head, relation, tail>``. Ids are dense integers. The fact list is
kept as an ``(n, 3)`` int64 array in insertion order; duplicates are allowed
(they stay if the source had them). Vocabulary sizes only ever grow under the
edit operators in :mod:`kgprobe.perturb` -- deleting facts or isolating
entities never shrinks the id space.

``protected_entities`` marks entities whose self-loop placeholder facts (see
:func:`kgprobe.perturb.add_self_loop_placeholders`) must survive every edit;
``placeholder_relation`` is the dedicated relation those facts use.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class Fact(NamedTuple):
    head: int
    relation: int
    tail: int


class GraphStats(NamedTuple):
    n_entities: int
    n_relations: int
    n_facts: int


class GraphConstructionError(ValueError):
    """A fact references an id outside the declared vocabulary."""


@dataclass
class KnowledgeGraph:
    entity_count: int
    relation_count: int
    facts: np.ndarray  # (n, 3) int64, columns head/relation/tail, insertion order
    protected_entities: frozenset[int] = frozenset()
    placeholder_relation: int | None = None
    # optional sidecars mapping dense ids back to source tokens
    entity_tokens: list[str] | None = None
    relation_tokens: list[str] | None = None
    _adjacency: dict[int, np.ndarray] | None = field(
        default=None, repr=False, compare=False
    )

    @property
    def n_facts(self) -> int:
        return int(self.facts.shape[0])

    @property
    def heads(self) -> np.ndarray:
        return self.facts[:, 0]

    @property
    def relations(self) -> np.ndarray:
        return self.facts[:, 1]

    @property
    def tails(self) -> np.ndarray:
        return self.facts[:, 2]

    def fact(self, index: int) -> Fact:
        h, r, t = self.facts[index]
        return Fact(int(h), int(r), int(t))

    def iter_facts(self) -> Iterable[Fact]:
        for h, r, t in self.facts:
            yield Fact(int(h), int(r), int(t))

    def with_facts(self, facts: np.ndarray) -> "KnowledgeGraph":
        """Copy of this graph with a different fact array (index cleared)."""
        return replace(self, facts=facts, _adjacency=None)

    def placeholder_mask(self) -> np.ndarray:
        """Boolean mask over fact positions that are placeholder self-loops."""
        if self.placeholder_relation is None:
            return np.zeros(self.n_facts, dtype=bool)
        return self.relations == self.placeholder_relation

    def outgoing_index(self) -> dict[int, np.ndarray]:
        """head entity -> array of fact row indices, built lazily and cached."""
        if self._adjacency is None:
            order = np.argsort(self.heads, kind="stable")
            sorted_heads = self.heads[order]
            uniq, starts = np.unique(sorted_heads, return_index=True)
            bounds = np.append(starts, len(order))
            self._adjacency = {
                int(e): order[bounds[i] : bounds[i + 1]] for i, e in enumerate(uniq)
            }
        return self._adjacency


def build_graph(
    facts: Sequence[tuple[int, int, int]] | np.ndarray,
    entity_count: int,
    relation_count: int,
) -> KnowledgeGraph:
    """Validate ids against the vocabulary and assemble a graph.

    Raises :class:`GraphConstructionError` naming the first offending fact.
    """
    if entity_count < 0 or relation_count < 0:
        raise GraphConstructionError("vocabulary sizes must be non-negative")
    arr = np.asarray(facts, dtype=np.int64)
    if arr.size == 0:
        arr = np.empty((0, 3), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise GraphConstructionError(f"facts must be (n, 3) triples, got shape {arr.shape}")

    bad_ent = (arr[:, 0] < 0) | (arr[:, 0] >= entity_count) | (arr[:, 2] < 0) | (arr[:, 2] >= entity_count)
    if bad_ent.any():
        i = int(np.argmax(bad_ent))
        h, _, t = arr[i]
        offender = h if (h < 0 or h >= entity_count) else t
        raise GraphConstructionError(
            f"fact {i}: entity {int(offender)} out of bounds for entity_count={entity_count}"
        )
    bad_rel = (arr[:, 1] < 0) | (arr[:, 1] >= relation_count)
    if bad_rel.any():
        i = int(np.argmax(bad_rel))
        raise GraphConstructionError(
            f"fact {i}: relation {int(arr[i, 1])} out of bounds for relation_count={relation_count}"
        )
    return KnowledgeGraph(entity_count=entity_count, relation_count=relation_count, facts=arr.copy())


def neighbors(kg: KnowledgeGraph, entity: int) -> list[tuple[int, int]]:
    """Outgoing ``(relation, tail)`` pairs of ``entity`` in fact order."""
    if not 0 <= entity < kg.entity_count:
        raise ValueError(f"entity {entity} out of bounds for entity_count={kg.entity_count}")
    rows = kg.outgoing_index().get(entity)
    if rows is None:
        return []
    rows = np.sort(rows)
    return [(int(r), int(t)) for r, t in kg.facts[rows][:, 1:]]


def stats(kg: KnowledgeGraph) -> GraphStats:
    return GraphStats(kg.entity_count, kg.relation_count, kg.n_facts)


def relation_fact_counts(kg: KnowledgeGraph) -> np.ndarray:
    """Fact count per relation id (length ``relation_count``)."""
    return np.bincount(kg.relations, minlength=kg.relation_count).astype(np.int64)
