"""Shared model plumbing: config, scoring, training loop, checkpoints.

All three reference models are trained with plain SGD at a fixed learning
rate from uniform ``[-1/sqrt(dim), +1/sqrt(dim)]`` initializations. Early
stopping watches validation MRR: training stops once it has not improved for
``patience`` consecutive epochs, and the returned model is the snapshot from
the best epoch. Training math runs in float64; the returned tables are cast
to float32, which is also the checkpoint precision, so a save/load round
trip reproduces scores exactly.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from ..data import InteractionDataset
from ..metrics import RankingResult, mrr
from ..rng import RngStream
from ..split import EvalCandidates

MODEL_KINDS = ("bpr_mf", "cfkg_lite", "kgcn_lite")

_MAGIC = b"KGPM"


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; reports the epoch and learning rate."""

    def __init__(self, epoch: int, learning_rate: float):
        super().__init__(
            f"training diverged at epoch {epoch} (learning_rate={learning_rate}); "
            "lower the learning rate"
        )
        self.epoch = epoch
        self.learning_rate = learning_rate


@dataclass(frozen=True)
class ModelConfig:
    embedding_dim: int = 16
    learning_rate: float = 0.05
    margin: float = 1.0
    l2_weight: float = 1e-6
    neighbor_sample_size: int = 4
    train_neg_per_pos: int = 1
    max_epochs: int = 200
    patience: int = 50

    def __post_init__(self) -> None:
        if self.embedding_dim < 1:
            raise ValueError(f"embedding_dim must be positive, got {self.embedding_dim}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.margin <= 0:
            raise ValueError(f"margin must be positive, got {self.margin}")
        if self.l2_weight < 0:
            raise ValueError(f"l2_weight must be non-negative, got {self.l2_weight}")
        if self.neighbor_sample_size < 1:
            raise ValueError(
                f"neighbor_sample_size must be positive, got {self.neighbor_sample_size}"
            )
        if self.train_neg_per_pos < 1:
            raise ValueError(f"train_neg_per_pos must be positive, got {self.train_neg_per_pos}")
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be non-negative, got {self.max_epochs}")
        if self.patience < 1:
            raise ValueError(f"patience must be positive, got {self.patience}")

    def replace(self, **kw) -> "ModelConfig":
        d = asdict(self)
        d.update(kw)
        return ModelConfig(**d)


class EpochStats(NamedTuple):
    epoch: int
    train_loss: float
    valid_mrr: float


@dataclass
class TrainedModel:
    """Embedding tables plus whatever the model kind needs to score.

    ``links`` maps item id to graph entity id (graph-aware kinds). For the
    neighbor-aggregation model, ``eval_rels``/``eval_ents`` hold the fixed
    evaluation-time neighbor samples (-1 where an item's entity is isolated).
    """

    kind: str
    config: ModelConfig
    n_users: int
    n_items: int
    user_emb: np.ndarray | None = None
    item_emb: np.ndarray | None = None
    entity_emb: np.ndarray | None = None
    rel_emb: np.ndarray | None = None
    links: np.ndarray | None = None
    user_offset: int | None = None
    interact_relation: int | None = None
    eval_rels: np.ndarray | None = None
    eval_ents: np.ndarray | None = None
    training_log: list[EpochStats] = field(default_factory=list)


def init_table(gen: np.random.Generator, rows: int, dim: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(dim)
    return gen.uniform(-bound, bound, size=(rows, dim))


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def sgd_update(tables: dict[str, np.ndarray], grads, learning_rate: float) -> None:
    for name, idx, rows in grads:
        np.subtract.at(tables[name], idx, learning_rate * rows)


def links_array(ds: InteractionDataset, entity_count: int) -> np.ndarray:
    """Dense item -> entity map; every item must be linked and in bounds."""
    arr = np.full(ds.n_items, -1, dtype=np.int64)
    for item, ent in ds.links.items():
        arr[item] = ent
    missing = np.flatnonzero(arr < 0)
    if len(missing):
        raise ValueError(
            f"{len(missing)} items have no graph link (first: {int(missing[0])}); "
            "run link_all_items first"
        )
    if arr.max() >= entity_count:
        raise ValueError("a link points outside the graph's entity vocabulary")
    return arr


def score_items(model: TrainedModel, user: int, items: np.ndarray) -> np.ndarray:
    """Model scores for one user over an array of items."""
    items = np.asarray(items, dtype=np.int64)
    if model.kind == "bpr_mf":
        return model.item_emb[items] @ model.user_emb[user]
    if model.kind == "cfkg_lite":
        query = model.entity_emb[model.user_offset + user] + model.rel_emb[model.interact_relation]
        diff = query[None, :] - model.entity_emb[model.links[items]]
        return -np.linalg.norm(diff, axis=1)
    if model.kind == "kgcn_lite":
        u = model.user_emb[user]
        rels = model.eval_rels[items]
        ents = model.eval_ents[items]
        has = rels[:, 0] >= 0
        safe_rels = np.where(rels < 0, 0, rels)
        safe_ents = np.where(ents < 0, 0, ents)
        logits = model.rel_emb[safe_rels] @ u
        logits -= logits.max(axis=1, keepdims=True)
        pi = np.exp(logits)
        pi /= pi.sum(axis=1, keepdims=True)
        neigh = np.einsum("mk,mkd->md", pi, model.entity_emb[safe_ents])
        agg = model.entity_emb[model.links[items]] + np.where(has[:, None], neigh, 0.0)
        return agg @ u
    raise ValueError(f"unknown model kind {model.kind!r}")


def score(model: TrainedModel, user: int, item: int) -> float:
    return float(score_items(model, user, np.asarray([item]))[0])


def rank_candidates(model: TrainedModel, user: int, items: np.ndarray) -> np.ndarray:
    """Items sorted by descending score; ties broken by ascending item id."""
    scores = score_items(model, user, items)
    order = np.lexsort((items, -scores))
    return np.asarray(items)[order]


def evaluate(model: TrainedModel, candidates: EvalCandidates) -> list[RankingResult]:
    results = []
    for row in candidates.rows:
        ranked = rank_candidates(model, row.user, row.items)
        results.append(
            RankingResult(
                user=row.user,
                ranked_items=ranked,
                positives=frozenset(int(i) for i in row.items[row.is_positive]),
            )
        )
    return results


def run_training(
    tables: dict[str, np.ndarray],
    config: ModelConfig,
    stream: RngStream,
    train_epoch: Callable[[dict[str, np.ndarray], RngStream], float],
    make_eval_model: Callable[[dict[str, np.ndarray]], TrainedModel],
    valid_candidates: EvalCandidates | None,
) -> tuple[dict[str, np.ndarray], list[EpochStats]]:
    """Generic SGD loop with early stopping on validation MRR.

    Without validation rows there is nothing to stop on: the loop runs all
    ``max_epochs`` and returns the final tables.
    """
    has_valid = valid_candidates is not None and len(valid_candidates) > 0
    best = {k: v.copy() for k, v in tables.items()}
    best_mrr = -np.inf
    streak = 0
    log: list[EpochStats] = []
    for epoch in range(config.max_epochs):
        loss = train_epoch(tables, stream.child(f"epoch/{epoch}"))
        if not np.isfinite(loss):
            raise TrainingDivergedError(epoch, config.learning_rate)
        if has_valid:
            vm = mrr(evaluate(make_eval_model(tables), valid_candidates))
            log.append(EpochStats(epoch, float(loss), float(vm)))
            if vm > best_mrr:
                best_mrr = vm
                best = {k: v.copy() for k, v in tables.items()}
                streak = 0
            else:
                streak += 1
                if streak >= config.patience:
                    break
        else:
            log.append(EpochStats(epoch, float(loss), float("nan")))
    if not has_valid:
        best = {k: v.copy() for k, v in tables.items()}
    return best, log


def finalize_tables(tables: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: v.astype(np.float32) for k, v in tables.items()}


_TABLE_FIELDS = ("user_emb", "item_emb", "entity_emb", "rel_emb")


def save_model(model: TrainedModel, path: str) -> None:
    """Flat binary checkpoint: magic, JSON header, float32 LE tables."""
    tables = [(name, getattr(model, name)) for name in _TABLE_FIELDS if getattr(model, name) is not None]
    header = {
        "kind": model.kind,
        "dim": model.config.embedding_dim,
        "vocab": {
            "n_users": model.n_users,
            "n_items": model.n_items,
            "n_entities": int(model.entity_emb.shape[0]) if model.entity_emb is not None else 0,
            "n_relations": int(model.rel_emb.shape[0]) if model.rel_emb is not None else 0,
        },
        "config": asdict(model.config),
        "tables": [[name, list(arr.shape)] for name, arr in tables],
        "aux": {
            "links": model.links.tolist() if model.links is not None else None,
            "user_offset": model.user_offset,
            "interact_relation": model.interact_relation,
            "eval_rels": model.eval_rels.tolist() if model.eval_rels is not None else None,
            "eval_ents": model.eval_ents.tolist() if model.eval_ents is not None else None,
            "training_log": [[e, l, m] for e, l, m in model.training_log],
        },
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sI", _MAGIC, len(blob)))
        fh.write(blob)
        for _, arr in tables:
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_model(path: str) -> TrainedModel:
    with open(path, "rb") as fh:
        magic, hlen = struct.unpack("<4sI", fh.read(8))
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a model checkpoint")
        header = json.loads(fh.read(hlen).decode("utf-8"))
        arrays = {}
        for name, shape in header["tables"]:
            count = int(np.prod(shape))
            buf = fh.read(count * 4)
            if len(buf) != count * 4:
                raise ValueError(f"{path}: truncated table {name}")
            arrays[name] = np.frombuffer(buf, dtype="<f4").reshape(shape).copy()
    aux = header["aux"]
    log = [EpochStats(int(e), float(l), float(m)) for e, l, m in aux.get("training_log", [])]
    return TrainedModel(
        kind=header["kind"],
        config=ModelConfig(**header["config"]),
        n_users=header["vocab"]["n_users"],
        n_items=header["vocab"]["n_items"],
        user_emb=arrays.get("user_emb"),
        item_emb=arrays.get("item_emb"),
        entity_emb=arrays.get("entity_emb"),
        rel_emb=arrays.get("rel_emb"),
        links=np.asarray(aux["links"], dtype=np.int64) if aux.get("links") is not None else None,
        user_offset=aux.get("user_offset"),
        interact_relation=aux.get("interact_relation"),
        eval_rels=np.asarray(aux["eval_rels"], dtype=np.int64) if aux.get("eval_rels") is not None else None,
        eval_ents=np.asarray(aux["eval_ents"], dtype=np.int64) if aux.get("eval_ents") is not None else None,
        training_log=log,
    )
