"""
Loading interaction/graph/link files and preprocessing them
===========================================================

The on-disk format is three tab-separated files sharing token vocabularies:
``.inter`` (user_id, item_id[, rating][, timestamp]), ``.kg`` (head_id,
relation_id, tail_id), and ``.link`` (item_id, entity_id). This script
writes a tiny trio, loads it back, and applies the two standard filters.
"""

import os
import tempfile

from kgprobe import dataset_stats, filter_by_rating, k_core_filter, link_all_items, load_dataset

tmp = tempfile.mkdtemp(prefix="kgprobe_demo_")

inter = [
    "user_id\titem_id\trating",
    "alice\tdune\t5", "alice\tsolaris\t4", "alice\tcontact\t2",
    "bob\tdune\t4", "bob\tsolaris\t5", "bob\thyperion\t3",
    "carol\tdune\t3", "carol\thyperion\t5", "carol\tcontact\t4",
    "dave\tcontact\t1", "dave\tsolaris\t4", "dave\tdune\t5",
]
kg = [
    "head_id\trelation_id\ttail_id",
    "e_dune\tgenre\tscifi", "e_solaris\tgenre\tscifi",
    "e_contact\tgenre\tscifi", "e_dune\tauthor\therbert",
    "e_hyperion\tauthor\tsimmons", "scifi\tsubgenre_of\tfiction",
]
link = [
    "item_id\tentity_id",
    "dune\te_dune", "solaris\te_solaris", "contact\te_contact", "hyperion\te_hyperion",
]
for name, lines in (("demo.inter", inter), ("demo.kg", kg), ("demo.link", link)):
    with open(os.path.join(tmp, name), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

ds, graph = load_dataset(
    os.path.join(tmp, "demo.inter"),
    os.path.join(tmp, "demo.kg"),
    os.path.join(tmp, "demo.link"),
)
stats = dataset_stats(ds)
print(f"loaded: {stats.n_users} users, {stats.n_items} items, "
      f"{stats.n_interactions} interactions, sparsity {100 * stats.sparsity:.1f}%")
print(f"graph: {graph.n_facts} facts over {graph.entity_count} entities; "
      f"{len(ds.links)} items linked")

# Keep interactions at rating >= 4 (implicit-feedback binarization) ...
liked = filter_by_rating(ds, 4.0)
print(f"\nrating >= 4 keeps {liked.n_interactions} interactions")

# ... then core-filter to a fixpoint. The threshold is strict: k=1 keeps
# only users and items with more than one interaction left.
core = k_core_filter(liked, 1)
print(f"1-core keeps {core.n_interactions} interactions, "
      f"{core.n_users} users, {core.n_items} items")

# Any item that lost its link row would get a fresh isolated entity here, so
# graph-aware models can always embed the full item vocabulary.
core, graph = link_all_items(core, graph)
print(f"after link_all_items every one of the {core.n_items} items has an entity")
