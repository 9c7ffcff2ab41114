"""kgprobe: how much does the knowledge graph actually contribute?

Perturb a recommender's knowledge graph in controlled ways -- replace it,
distort it, shrink it -- retrain, and measure the change in ranking quality.
"""

from .data import (
    DataFormatError,
    InteractionDataset,
    compute_sparsity,
    dataset_stats,
    filter_by_rating,
    k_core_filter,
    link_all_items,
    load_dataset,
    load_interactions,
    load_kg,
    load_links,
    save_interactions,
    save_kg,
    save_links,
)
from .graph import (
    Fact,
    GraphConstructionError,
    KnowledgeGraph,
    build_graph,
    neighbors,
    relation_fact_counts,
    stats,
)
from .metrics import (
    RankingResult,
    hit_at_k,
    kger,
    kgus,
    mrr,
    ndcg_at_k,
    precision_at_k,
    recall_at_k,
)
from .models import (
    MODEL_KINDS,
    ModelConfig,
    TrainedModel,
    TrainingDivergedError,
    evaluate,
    load_model,
    rank_candidates,
    save_model,
    score,
    train_bpr_mf,
    train_cfkg_lite,
    train_kgcn_lite,
)
from .perturb import (
    PERTURB_KINDS,
    PerturbSpec,
    add_self_loop_placeholders,
    apply_spec,
    delete_entities,
    delete_facts,
    delete_relations,
    distort,
    remove_relation_type,
    round_half_up,
    to_interaction_kg,
    to_self_kg,
)
from .report import Cell, ExperimentReport, aggregate, contribution_rows, emit_report, load_raw_csv
from .rng import RngStream
from .runner import (
    SUITES,
    DataSource,
    ExperimentConfig,
    load_source,
    replay,
    run_experiment,
    run_rq5,
    sweep_hyperparameters,
    train_one,
)
from .split import (
    DatasetSplit,
    EvalCandidates,
    make_cold_start,
    random_split,
    sample_negatives,
    save_split,
)
from .synthetic import make_noise_dataset, make_planted_dataset

__version__ = "0.1.0"

__all__ = [
    "Cell",
    "DataFormatError",
    "DataSource",
    "DatasetSplit",
    "EvalCandidates",
    "ExperimentConfig",
    "ExperimentReport",
    "Fact",
    "GraphConstructionError",
    "InteractionDataset",
    "KnowledgeGraph",
    "MODEL_KINDS",
    "ModelConfig",
    "PERTURB_KINDS",
    "PerturbSpec",
    "RankingResult",
    "RngStream",
    "SUITES",
    "TrainedModel",
    "TrainingDivergedError",
    "add_self_loop_placeholders",
    "aggregate",
    "apply_spec",
    "build_graph",
    "compute_sparsity",
    "contribution_rows",
    "dataset_stats",
    "delete_entities",
    "delete_facts",
    "delete_relations",
    "distort",
    "emit_report",
    "evaluate",
    "filter_by_rating",
    "hit_at_k",
    "k_core_filter",
    "kger",
    "kgus",
    "link_all_items",
    "load_dataset",
    "load_interactions",
    "load_kg",
    "load_links",
    "load_model",
    "load_raw_csv",
    "load_source",
    "make_cold_start",
    "make_noise_dataset",
    "make_planted_dataset",
    "mrr",
    "ndcg_at_k",
    "neighbors",
    "precision_at_k",
    "random_split",
    "rank_candidates",
    "recall_at_k",
    "relation_fact_counts",
    "remove_relation_type",
    "replay",
    "round_half_up",
    "run_experiment",
    "run_rq5",
    "sample_negatives",
    "save_interactions",
    "save_kg",
    "save_links",
    "save_model",
    "save_split",
    "score",
    "stats",
    "sweep_hyperparameters",
    "to_interaction_kg",
    "to_self_kg",
    "train_bpr_mf",
    "train_cfkg_lite",
    "train_kgcn_lite",
    "train_one",
]
