"""
Building a knowledge graph and damaging it on purpose
=====================================================

Every experiment in this package is some variation of "train on a damaged
graph, compare against the intact one". This script builds a small graph by
hand and walks through each damage operator.
"""

import numpy as np

from kgprobe import (
    KnowledgeGraph,
    RngStream,
    add_self_loop_placeholders,
    delete_entities,
    delete_facts,
    delete_relations,
    distort,
    remove_relation_type,
    to_self_kg,
)

# A toy graph: 8 entities, 3 relation types, facts as (head, relation, tail).
facts = np.array(
    [
        [0, 0, 4], [1, 0, 4], [2, 0, 5], [3, 0, 5],  # items -> genre
        [0, 1, 6], [2, 1, 6], [3, 1, 7],              # items -> author
        [4, 2, 5], [6, 2, 7],                          # genre/author cross-links
    ],
    dtype=np.int64,
)
kg = KnowledgeGraph(entity_count=8, relation_count=3, facts=facts)
print(f"original graph: {kg.n_facts} facts, {kg.entity_count} entities")

# Entities 0..3 back real items, so they get exempt self-loop placeholders:
# the ratio operators below will never let them drop to zero degree.
kg = add_self_loop_placeholders(kg, protected=[0, 1, 2, 3])
print(f"with placeholders: {kg.n_facts} facts (relation {kg.placeholder_relation} is exempt)")

# Each operator takes the graph, a ratio in [0, 1], and a named RNG stream.
# Same stream, same result -- rerun any line and the output is identical.
half = distort(kg, 0.5, RngStream(0, "demo/distort"))
changed = int((half.facts != kg.facts).any(axis=1).sum())
print(f"\ndistort 0.5 rewrote {changed} of 9 editable facts, count stays {half.n_facts}")

fewer = delete_facts(kg, 0.5, RngStream(0, "demo/facts"))
print(f"delete_facts 0.5 keeps {fewer.n_facts} facts")

lonely = delete_entities(kg, 0.5, RngStream(0, "demo/entities"))
print(f"delete_entities 0.5 keeps {lonely.n_facts} facts (vocab still {lonely.entity_count})")

poorer = delete_relations(kg, 0.5, RngStream(0, "demo/relations"))
kept = sorted(set(int(r) for r in poorer.relations))
print(f"delete_relations 0.5 keeps relation types {kept}")

no_genre = remove_relation_type(kg, 0)
print(f"remove_relation_type(0) keeps {no_genre.n_facts} facts")

# The replacement regimes swap the whole graph instead of scaling damage.
links = {0: 0, 1: 1, 2: 2, 3: 3}  # item id -> its graph entity
self_only = to_self_kg(links, kg.entity_count)
print(f"\nself-graph replacement: {self_only.n_facts} self-loops, nothing else")
