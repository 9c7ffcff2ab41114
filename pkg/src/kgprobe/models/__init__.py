"""Reference recommenders: one graph-free baseline and two graph consumers."""

from .common import (
    MODEL_KINDS,
    EpochStats,
    ModelConfig,
    TrainedModel,
    TrainingDivergedError,
    evaluate,
    links_array,
    load_model,
    rank_candidates,
    save_model,
    score,
    score_items,
)
from .bpr import train_bpr_mf
from .propagation import train_kgcn_lite
from .translation import train_cfkg_lite

__all__ = [
    "MODEL_KINDS",
    "EpochStats",
    "ModelConfig",
    "TrainedModel",
    "TrainingDivergedError",
    "evaluate",
    "links_array",
    "load_model",
    "rank_candidates",
    "save_model",
    "score",
    "score_items",
    "train_bpr_mf",
    "train_cfkg_lite",
    "train_kgcn_lite",
]
