"""Dataset ingestion, preprocessing, and statistics.

Three tab-separated formats are supported, each with a header row:

* ``.inter`` -- ``user_id<TAB>item_id[<TAB>rating][<TAB>timestamp]``
* ``.kg``    -- ``head_id<TAB>relation_id<TAB>tail_id``
* ``.link``  -- ``item_id<TAB>entity_id``

Source ids are arbitrary tokens (no tabs). Loaders assign dense integer ids
in first-appearance order and keep the original tokens in sidecar lists, so
a load is reproducible byte-for-byte from the same file.

Preprocessing mirrors the usual implicit-feedback recipe: drop low ratings,
then iteratively drop users/items until every survivor has more than ``k``
interactions (a k-core). Both steps re-densify ids and are idempotent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple

import numpy as np

from .graph import KnowledgeGraph, build_graph

logger = logging.getLogger(__name__)


class DataFormatError(ValueError):
    """Malformed input file; the message carries the 1-based line number."""


class Interaction(NamedTuple):
    user: int
    item: int
    rating: float | None = None
    timestamp: int | None = None


class DatasetStats(NamedTuple):
    n_users: int
    n_items: int
    n_interactions: int
    sparsity: float


@dataclass
class InteractionDataset:
    """User-item interactions with optional rating/timestamp columns.

    ``users``/``items`` are parallel int64 arrays in file order. ``links``
    maps a dense item id to the dense id of its knowledge-graph entity.
    """

    n_users: int
    n_items: int
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray | None = None
    timestamps: np.ndarray | None = None
    links: dict[int, int] = field(default_factory=dict)
    user_tokens: list[str] = field(default_factory=list)
    item_tokens: list[str] = field(default_factory=list)

    @property
    def n_interactions(self) -> int:
        return int(self.users.shape[0])

    def iter_interactions(self) -> Iterable[Interaction]:
        for idx in range(self.n_interactions):
            yield Interaction(
                int(self.users[idx]),
                int(self.items[idx]),
                float(self.ratings[idx]) if self.ratings is not None else None,
                int(self.timestamps[idx]) if self.timestamps is not None else None,
            )

    def equals(self, other: "InteractionDataset") -> bool:
        def arr_eq(a, b):
            if a is None or b is None:
                return a is None and b is None
            return np.array_equal(a, b)

        return (
            self.n_users == other.n_users
            and self.n_items == other.n_items
            and np.array_equal(self.users, other.users)
            and np.array_equal(self.items, other.items)
            and arr_eq(self.ratings, other.ratings)
            and arr_eq(self.timestamps, other.timestamps)
            and self.links == other.links
            and self.user_tokens == other.user_tokens
            and self.item_tokens == other.item_tokens
        )


def _read_rows(path: str, expected_headers: list[list[str]]) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    header = lines[0].split("\t")
    if header not in expected_headers:
        raise DataFormatError(
            f"{path}: line 1: unrecognized header {header!r}"
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != len(header):
            raise DataFormatError(
                f"{path}: line {lineno}: expected {len(header)} columns, got {len(cells)}"
            )
        rows.append(cells)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return header, rows


def load_interactions(path: str) -> InteractionDataset:
    """Load a ``.inter`` file, assigning dense ids in first-appearance order."""
    header, rows = _read_rows(
        path,
        [
            ["user_id", "item_id"],
            ["user_id", "item_id", "rating"],
            ["user_id", "item_id", "timestamp"],
            ["user_id", "item_id", "rating", "timestamp"],
        ],
    )
    has_rating = "rating" in header
    has_ts = "timestamp" in header
    user_ids: dict[str, int] = {}
    item_ids: dict[str, int] = {}
    users = np.empty(len(rows), dtype=np.int64)
    items = np.empty(len(rows), dtype=np.int64)
    ratings = np.empty(len(rows), dtype=np.float64) if has_rating else None
    timestamps = np.empty(len(rows), dtype=np.int64) if has_ts else None
    for idx, cells in enumerate(rows):
        users[idx] = user_ids.setdefault(cells[0], len(user_ids))
        items[idx] = item_ids.setdefault(cells[1], len(item_ids))
        col = 2
        if has_rating:
            try:
                ratings[idx] = float(cells[col])
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {idx + 2}: bad rating {cells[col]!r}"
                ) from None
            col += 1
        if has_ts:
            try:
                timestamps[idx] = int(float(cells[col]))
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {idx + 2}: bad timestamp {cells[col]!r}"
                ) from None
    return InteractionDataset(
        n_users=len(user_ids),
        n_items=len(item_ids),
        users=users,
        items=items,
        ratings=ratings,
        timestamps=timestamps,
        user_tokens=list(user_ids),
        item_tokens=list(item_ids),
    )


def load_kg(path: str) -> KnowledgeGraph:
    """Load a ``.kg`` file. Duplicate facts are kept and their count logged."""
    _, rows = _read_rows(path, [["head_id", "relation_id", "tail_id"]])
    entity_ids: dict[str, int] = {}
    relation_ids: dict[str, int] = {}
    facts = np.empty((len(rows), 3), dtype=np.int64)
    seen: set[tuple[int, int, int]] = set()
    duplicates = 0
    for idx, (h, r, t) in enumerate(rows):
        hid = entity_ids.setdefault(h, len(entity_ids))
        rid = relation_ids.setdefault(r, len(relation_ids))
        tid = entity_ids.setdefault(t, len(entity_ids))
        facts[idx] = (hid, rid, tid)
        key = (hid, rid, tid)
        if key in seen:
            duplicates += 1
        seen.add(key)
    if duplicates:
        logger.warning("%s: %d duplicate facts kept", path, duplicates)
    kg = build_graph(facts, len(entity_ids), len(relation_ids))
    kg.entity_tokens = list(entity_ids)
    kg.relation_tokens = list(relation_ids)
    return kg


def load_links(path: str, item_ids: dict[str, int], entity_ids: dict[str, int]) -> dict[int, int]:
    """Load a ``.link`` file and resolve tokens to dense ids.

    Rows naming unknown items or entities are skipped (and logged); the item
    itself stays in the dataset. The resolved map must be injective.
    """
    _, rows = _read_rows(path, [["item_id", "entity_id"]])
    links: dict[int, int] = {}
    used_entities: dict[int, int] = {}
    skipped = 0
    for lineno, (item_tok, ent_tok) in enumerate(rows, start=2):
        item = item_ids.get(item_tok)
        ent = entity_ids.get(ent_tok)
        if item is None or ent is None:
            skipped += 1
            continue
        if item in links:
            if links[item] == ent:
                continue
            raise DataFormatError(
                f"{path}: line {lineno}: item {item_tok!r} linked to two entities"
            )
        if ent in used_entities:
            raise DataFormatError(
                f"{path}: line {lineno}: entity {ent_tok!r} linked from two items"
            )
        links[item] = ent
        used_entities[ent] = item
    if skipped:
        logger.warning("%s: skipped %d link rows with unknown tokens", path, skipped)
    return links


def load_dataset(
    inter_path: str, kg_path: str | None = None, link_path: str | None = None
) -> tuple[InteractionDataset, KnowledgeGraph | None]:
    """Convenience loader wiring interactions, graph, and links together."""
    ds = load_interactions(inter_path)
    kg = None
    if kg_path is not None:
        kg = load_kg(kg_path)
        if link_path is not None:
            item_ids = {tok: i for i, tok in enumerate(ds.item_tokens)}
            entity_ids = {tok: i for i, tok in enumerate(kg.entity_tokens or [])}
            ds.links = load_links(link_path, item_ids, entity_ids)
            unlinked = ds.n_items - len(ds.links)
            if unlinked:
                logger.warning("%d items have no knowledge-graph link", unlinked)
    return ds, kg


def save_interactions(ds: InteractionDataset, path: str) -> None:
    cols = ["user_id", "item_id"]
    if ds.ratings is not None:
        cols.append("rating")
    if ds.timestamps is not None:
        cols.append("timestamp")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(cols) + "\n")
        for idx in range(ds.n_interactions):
            row = [ds.user_tokens[ds.users[idx]], ds.item_tokens[ds.items[idx]]]
            if ds.ratings is not None:
                row.append(repr(float(ds.ratings[idx])))
            if ds.timestamps is not None:
                row.append(str(int(ds.timestamps[idx])))
            fh.write("\t".join(row) + "\n")


def save_kg(kg: KnowledgeGraph, path: str) -> None:
    ent = kg.entity_tokens or [str(i) for i in range(kg.entity_count)]
    rel = kg.relation_tokens or [str(i) for i in range(kg.relation_count)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("head_id\trelation_id\ttail_id\n")
        for h, r, t in kg.facts:
            fh.write(f"{ent[h]}\t{rel[r]}\t{ent[t]}\n")


def save_links(ds: InteractionDataset, kg: KnowledgeGraph, path: str) -> None:
    ent = kg.entity_tokens or [str(i) for i in range(kg.entity_count)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("item_id\tentity_id\n")
        for item in sorted(ds.links):
            fh.write(f"{ds.item_tokens[item]}\t{ent[ds.links[item]]}\n")


def _redensify(ds: InteractionDataset, keep: np.ndarray) -> InteractionDataset:
    """Drop masked-out interactions and re-densify ids to the survivors."""
    users = ds.users[keep]
    items = ds.items[keep]
    kept_users = np.unique(users)
    kept_items = np.unique(items)
    user_map = np.full(ds.n_users, -1, dtype=np.int64)
    user_map[kept_users] = np.arange(len(kept_users))
    item_map = np.full(ds.n_items, -1, dtype=np.int64)
    item_map[kept_items] = np.arange(len(kept_items))
    return InteractionDataset(
        n_users=len(kept_users),
        n_items=len(kept_items),
        users=user_map[users],
        items=item_map[items],
        ratings=ds.ratings[keep] if ds.ratings is not None else None,
        timestamps=ds.timestamps[keep] if ds.timestamps is not None else None,
        links={
            int(item_map[i]): e for i, e in ds.links.items() if item_map[i] >= 0
        },
        user_tokens=[ds.user_tokens[u] for u in kept_users] if ds.user_tokens else [],
        item_tokens=[ds.item_tokens[i] for i in kept_items] if ds.item_tokens else [],
    )


def filter_by_rating(ds: InteractionDataset, threshold: float) -> InteractionDataset:
    """Keep interactions with ``rating >= threshold``; re-densify ids."""
    if ds.ratings is None:
        raise ValueError("dataset has no rating column")
    return _redensify(ds, ds.ratings >= threshold)


def k_core_filter(ds: InteractionDataset, k: int) -> InteractionDataset:
    """Iteratively drop users/items until every survivor has more than ``k``
    interactions, then re-densify. May return an empty dataset."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    keep = np.ones(ds.n_interactions, dtype=bool)
    while True:
        user_deg = np.bincount(ds.users[keep], minlength=ds.n_users)
        new_keep = keep & (user_deg[ds.users] > k)
        item_deg = np.bincount(ds.items[new_keep], minlength=ds.n_items)
        new_keep &= item_deg[ds.items] > k
        if np.array_equal(new_keep, keep):
            break
        keep = new_keep
    return _redensify(ds, keep)


def compute_sparsity(n_users: int, n_items: int, n_interactions: int) -> float:
    """Fraction of the user-item matrix that is empty."""
    if n_users <= 0 or n_items <= 0:
        raise ValueError("sparsity is undefined for an empty user or item set")
    return 1.0 - n_interactions / (n_users * n_items)


def dataset_stats(ds: InteractionDataset) -> DatasetStats:
    return DatasetStats(
        ds.n_users,
        ds.n_items,
        ds.n_interactions,
        compute_sparsity(ds.n_users, ds.n_items, ds.n_interactions),
    )


def link_all_items(
    ds: InteractionDataset, kg: KnowledgeGraph
) -> tuple[InteractionDataset, KnowledgeGraph]:
    """Give every unlinked item a fresh, isolated graph entity.

    Guarantees full link coverage so graph-aware models can embed every item;
    pair with :func:`kgprobe.perturb.add_self_loop_placeholders` to keep those
    entities connected. Returns new objects; inputs are untouched.
    """
    unlinked = [i for i in range(ds.n_items) if i not in ds.links]
    if not unlinked:
        return ds, kg
    links = dict(ds.links)
    next_ent = kg.entity_count
    new_tokens = list(kg.entity_tokens) if kg.entity_tokens is not None else None
    for item in unlinked:
        links[item] = next_ent
        if new_tokens is not None:
            tok = ds.item_tokens[item] if ds.item_tokens else str(item)
            new_tokens.append(f"item:{tok}")
        next_ent += 1
    new_ds = replace(ds, links=links)
    new_kg = replace(
        kg,
        entity_count=next_ent,
        entity_tokens=new_tokens,
        facts=kg.facts.copy(),
        _adjacency=None,
    )
    return new_ds, new_kg
