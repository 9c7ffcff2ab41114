"""Experiment suites: orchestration from dataset to report.

Each suite trains the configured models on systematically damaged versions
of the knowledge graph and records ranking metrics per repeat:

* ``rq1``            -- graph replacement regimes (original / interaction / self)
* ``rq2``            -- fact distortion sweep (false knowledge)
* ``rq3_facts``      -- fact deletion sweep (less knowledge)
* ``rq3_entities``   -- entity deletion sweep
* ``rq3_relations``  -- relation-type deletion sweep
* ``rq4_false``      -- distortion sweep evaluated on cold-start users
* ``rq4_decrease``   -- fact-deletion sweep evaluated on cold-start users
* ``rq5``            -- mean |contribution| grid over the four regimes above
* ``relation_ablation`` -- remove each of the top-5 relations by fact count

Determinism: every random choice draws from a stream named by
``(master_seed, "<suite>/<purpose>...", repeat)``. Stream tags include the
swept ratio, so editing the ratio list never changes the baseline cells, and
every ratio > 0 cell shares its split, candidates, and training seeds with
the ratio-0 cell of the same repeat.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import (
    InteractionDataset,
    filter_by_rating,
    k_core_filter,
    link_all_items,
    load_dataset,
)
from .graph import KnowledgeGraph, relation_fact_counts
from .metrics import hit_at_k, kger, mrr, ndcg_at_k, precision_at_k, recall_at_k
from .models import (
    ModelConfig,
    TrainedModel,
    evaluate,
    train_bpr_mf,
    train_cfkg_lite,
    train_kgcn_lite,
)
from .perturb import (
    add_self_loop_placeholders,
    delete_entities,
    delete_facts,
    delete_relations,
    distort,
    remove_relation_type,
    to_interaction_kg,
    to_self_kg,
)
from .report import Cell, ExperimentReport, _contribution_pairs
from .rng import RngStream
from .split import DatasetSplit, EvalCandidates, make_cold_start, random_split, sample_negatives
from .synthetic import make_noise_dataset, make_planted_dataset

SUITES = (
    "rq1",
    "rq2",
    "rq3_facts",
    "rq3_entities",
    "rq3_relations",
    "rq4_false",
    "rq4_decrease",
    "rq5",
    "relation_ablation",
)

_SWEEP_OPS = {
    "rq2": ("distort", distort),
    "rq3_facts": ("delete_facts", delete_facts),
    "rq3_entities": ("delete_entities", delete_entities),
    "rq3_relations": ("delete_relations", delete_relations),
    "rq4_false": ("distort", distort),
    "rq4_decrease": ("delete_facts", delete_facts),
}

RQ5_REGIMES = {
    "normal-false": "rq2",
    "normal-decrease": "rq3_facts",
    "cold-false": "rq4_false",
    "cold-decrease": "rq4_decrease",
}

DEFAULT_RATIOS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass
class DataSource:
    """Where the interactions and graph come from.

    Either file paths (``inter`` required, ``kg``/``link`` optional) or a
    named synthetic builder (``synthetic`` in {"planted", "noise"} with
    ``params`` forwarded to it). ``seed`` overrides the master seed for
    synthetic generation so the data can stay fixed across experiment seeds.
    """

    inter: str | None = None
    kg: str | None = None
    link: str | None = None
    synthetic: str | None = None
    params: dict = field(default_factory=dict)
    min_rating: float | None = None
    k_core: int | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if (self.inter is None) == (self.synthetic is None):
            raise ValueError("dataset needs exactly one of 'inter' or 'synthetic'")
        if self.synthetic is not None and self.synthetic not in ("planted", "noise"):
            raise ValueError(f"unknown synthetic dataset {self.synthetic!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentConfig:
    suite: str
    dataset: DataSource
    models: list[str] = field(default_factory=lambda: ["bpr_mf", "cfkg_lite", "kgcn_lite"])
    ratios: list[float] = field(default_factory=lambda: list(DEFAULT_RATIOS))
    t_values: list[int] = field(default_factory=lambda: [1, 3, 5])
    cold_fraction: float = 0.1
    cold_min_interactions: int = 25
    repeats: int = 5
    master_seed: int = 0
    retune: bool = False
    model_config: ModelConfig = field(default_factory=ModelConfig)
    grid: dict[str, list] | None = None
    eval_negatives: int = 50
    top_k: int = 10
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    n_ablation_relations: int = 5

    def __post_init__(self) -> None:
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; pick one of {SUITES}")
        if not self.models:
            raise ValueError("at least one model kind is required")
        for m in self.models:
            if m not in ("bpr_mf", "cfkg_lite", "kgcn_lite"):
                raise ValueError(f"unknown model kind {m!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")
        if any(not 0.0 <= r <= 1.0 for r in self.ratios):
            raise ValueError("ratios must lie in [0, 1]")
        if len(set(self.ratios)) != len(self.ratios):
            raise ValueError("ratios must be distinct")

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "dataset": self.dataset.to_dict(),
            "model": {
                "kind": list(self.models),
                "grid": self.grid,
                **{k: v for k, v in asdict(self.model_config).items()},
            },
            "ratios": [float(r) for r in self.ratios],
            "cold": {
                "T": list(self.t_values),
                "fraction": self.cold_fraction,
                "min_interactions": self.cold_min_interactions,
            },
            "repeats": self.repeats,
            "seed": self.master_seed,
            "retune": self.retune,
            "eval": {"negatives": self.eval_negatives, "top_k": self.top_k},
            "split_ratios": list(self.split_ratios),
            "n_ablation_relations": self.n_ablation_relations,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known_top = {
            "suite", "dataset", "model", "ratios", "cold", "repeats",
            "seed", "retune", "eval", "split_ratios", "n_ablation_relations",
        }
        unknown_top = set(d) - known_top
        if unknown_top:
            raise ValueError(f"unknown config keys: {sorted(unknown_top)}")
        for req in ("suite", "dataset"):
            if req not in d:
                raise ValueError(f"config is missing required key {req!r}")
        model = dict(d.get("model", {}))
        kinds = model.pop("kind", ["bpr_mf", "cfkg_lite", "kgcn_lite"])
        if isinstance(kinds, str):
            kinds = [kinds]
        grid = model.pop("grid", None)
        cfg_fields = {k: v for k, v in model.items() if v is not None}
        cold = d.get("cold", {})
        t_values = cold.get("T", [1, 3, 5])
        if isinstance(t_values, int):
            t_values = [t_values]
        ds = d["dataset"]
        known = {"inter", "kg", "link", "synthetic", "params", "min_rating", "k_core", "seed"}
        unknown = set(ds) - known
        if unknown:
            raise ValueError(f"unknown dataset keys: {sorted(unknown)}")
        return cls(
            suite=d["suite"],
            dataset=DataSource(**ds),
            models=list(kinds),
            ratios=[float(r) for r in d.get("ratios", DEFAULT_RATIOS)],
            t_values=[int(t) for t in t_values],
            cold_fraction=float(cold.get("fraction", 0.1)),
            cold_min_interactions=int(cold.get("min_interactions", 25)),
            repeats=int(d.get("repeats", 5)),
            master_seed=int(d.get("seed", 0)),
            retune=bool(d.get("retune", False)),
            model_config=ModelConfig(**cfg_fields),
            grid=grid,
            eval_negatives=int(d.get("eval", {}).get("negatives", 50)),
            top_k=int(d.get("eval", {}).get("top_k", 10)),
            split_ratios=tuple(d.get("split_ratios", (0.8, 0.1, 0.1))),
            n_ablation_relations=int(d.get("n_ablation_relations", 5)),
        )


def load_source(source: DataSource, master_seed: int) -> tuple[InteractionDataset, KnowledgeGraph | None]:
    """Materialize the dataset, run preprocessing, attach placeholders."""
    if source.synthetic is not None:
        seed = source.seed if source.seed is not None else master_seed
        stream = RngStream(seed, f"dataset/{source.synthetic}")
        builder = make_planted_dataset if source.synthetic == "planted" else make_noise_dataset
        ds, kg = builder(stream, **source.params)
    else:
        ds, kg = load_dataset(source.inter, source.kg, source.link)
        if source.min_rating is not None:
            ds = filter_by_rating(ds, source.min_rating)
        if source.k_core is not None:
            ds = k_core_filter(ds, source.k_core)
    if kg is not None:
        ds, kg = link_all_items(ds, kg)
        kg = add_self_loop_placeholders(kg, set(ds.links.values()))
    return ds, kg


def train_one(
    kind: str,
    split: DatasetSplit,
    kg: KnowledgeGraph | None,
    config: ModelConfig,
    stream: RngStream,
    valid_candidates: EvalCandidates | None,
) -> TrainedModel:
    if kind == "bpr_mf":
        return train_bpr_mf(split, config, stream, valid_candidates)
    if kg is None:
        raise ValueError(f"{kind} needs a knowledge graph; this dataset has none")
    if kind == "cfkg_lite":
        return train_cfkg_lite(split, kg, config, stream, valid_candidates)
    if kind == "kgcn_lite":
        return train_kgcn_lite(split, kg, config, stream, valid_candidates)
    raise ValueError(f"unknown model kind {kind!r}")


def sweep_hyperparameters(
    kind: str,
    split: DatasetSplit,
    kg: KnowledgeGraph | None,
    base_config: ModelConfig,
    grid: dict[str, list],
    stream: RngStream,
    valid_candidates: EvalCandidates,
) -> tuple[ModelConfig, float]:
    """Grid search on validation MRR. Ties keep the earlier grid point."""
    if not grid:
        raise ValueError("empty hyperparameter grid")
    keys = list(grid)
    best_cfg, best_mrr = None, -np.inf
    for idx, values in enumerate(itertools.product(*(grid[k] for k in keys))):
        cfg = base_config.replace(**dict(zip(keys, values)))
        model = train_one(kind, split, kg, cfg, stream.child(f"sweep/{idx}"), valid_candidates)
        scores = [s.valid_mrr for s in model.training_log if np.isfinite(s.valid_mrr)]
        if not scores:
            raise ValueError("hyperparameter sweep needs a non-empty validation partition")
        vm = max(scores)
        if vm > best_mrr:
            best_cfg, best_mrr = cfg, vm
    return best_cfg, float(best_mrr)


def _ratio_tag(ratio: float) -> str:
    return repr(float(ratio))


def _metric_rows(results, top_k: int) -> list[tuple[str, float]]:
    return [
        ("mrr", mrr(results)),
        (f"hit@{top_k}", hit_at_k(results, top_k)),
        (f"ndcg@{top_k}", ndcg_at_k(results, top_k)),
        (f"precision@{top_k}", precision_at_k(results, top_k)),
        (f"recall@{top_k}", recall_at_k(results, top_k)),
    ]


def _model_config_for(
    config: ExperimentConfig,
    kind: str,
    split: DatasetSplit,
    kg: KnowledgeGraph | None,
    stream: RngStream,
    valid_candidates: EvalCandidates,
    cache: dict,
    cache_key: tuple,
) -> ModelConfig:
    """Tuned config: once on the pristine graph, or per point when retuning."""
    if config.grid is None:
        return config.model_config
    if cache_key in cache:
        return cache[cache_key]
    cfg, _ = sweep_hyperparameters(
        kind, split, kg, config.model_config, config.grid, stream, valid_candidates
    )
    cache[cache_key] = cfg
    return cfg


def _eval_cells(
    config: ExperimentConfig,
    suite: str,
    model_kind: str,
    regime: str,
    ratio: float,
    t_budget: int,
    repeat: int,
    model: TrainedModel,
    candidates: EvalCandidates,
) -> list[Cell]:
    results = evaluate(model, candidates)
    return [
        Cell(suite, model_kind, regime, float(ratio), t_budget, repeat, name, value)
        for name, value in _metric_rows(results, config.top_k)
    ]


def _repeat_rq1(
    config: ExperimentConfig, ds: InteractionDataset, kg: KnowledgeGraph, repeat: int
) -> list[Cell]:
    seed = config.master_seed
    split = random_split(ds, config.split_ratios, RngStream(seed, "rq1/split", repeat))
    test_cands = sample_negatives(
        split, config.eval_negatives, RngStream(seed, "rq1/eval", repeat)
    )
    valid_cands = sample_negatives(
        split, config.eval_negatives, RngStream(seed, "rq1/valid-eval", repeat), part="valid"
    )
    t_users, t_items = split.pairs("train")
    regimes = [
        ("original", kg),
        ("interaction_kg", to_interaction_kg(t_users, t_items, ds.links, ds.n_users, kg.entity_count)),
        ("self_kg", to_self_kg(ds.links, kg.entity_count)),
    ]
    cells: list[Cell] = []
    tune_cache: dict = {}
    for regime, graph in regimes:
        for kind in config.models:
            tune_key = (kind,) if not config.retune else (kind, regime)
            cfg = _model_config_for(
                config, kind, split, kg if tune_key == (kind,) else graph,
                RngStream(seed, f"rq1/tune/{kind}/{regime if config.retune else 'original'}", repeat),
                valid_cands, tune_cache, tune_key,
            )
            model = train_one(
                kind, split, graph, cfg,
                RngStream(seed, f"rq1/train/{kind}/{regime}", repeat), valid_cands,
            )
            cells.extend(
                _eval_cells(config, "rq1", kind, regime, 0.0, 0, repeat, model, test_cands)
            )
    return cells


def _repeat_sweep(
    config: ExperimentConfig, ds: InteractionDataset, kg: KnowledgeGraph, repeat: int
) -> list[Cell]:
    suite = config.suite
    op_name, op = _SWEEP_OPS[suite]
    seed = config.master_seed
    cold = suite.startswith("rq4")
    cells: list[Cell] = []
    t_values = config.t_values if cold else [0]
    for t in t_values:
        if cold:
            split = make_cold_start(
                ds,
                config.cold_fraction,
                config.cold_min_interactions,
                t,
                RngStream(seed, f"{suite}/cold/T={t}", repeat),
                config.split_ratios,
            )
            eval_users = set(split.cold_users)
        else:
            split = random_split(ds, config.split_ratios, RngStream(seed, f"{suite}/split", repeat))
            eval_users = None
        test_cands = sample_negatives(
            split,
            config.eval_negatives,
            RngStream(seed, f"{suite}/eval/T={t}", repeat),
            users=eval_users,
        )
        valid_cands = sample_negatives(
            split,
            config.eval_negatives,
            RngStream(seed, f"{suite}/valid-eval/T={t}", repeat),
            part="valid",
        )
        tune_cache: dict = {}
        for ratio in config.ratios:
            if ratio == 0.0:
                graph = kg
            else:
                graph = op(
                    kg,
                    ratio,
                    RngStream(
                        seed, f"{suite}/perturb/{op_name}/ratio={_ratio_tag(ratio)}", repeat
                    ),
                )
            for kind in config.models:
                tune_key = (kind, t) if not config.retune else (kind, t, ratio)
                cfg = _model_config_for(
                    config, kind, split, kg if not config.retune else graph,
                    RngStream(
                        seed,
                        f"{suite}/tune/{kind}/T={t}/ratio="
                        + (_ratio_tag(ratio) if config.retune else _ratio_tag(0.0)),
                        repeat,
                    ),
                    valid_cands, tune_cache, tune_key,
                )
                model = train_one(
                    kind, split, graph, cfg,
                    RngStream(
                        seed,
                        f"{suite}/train/{kind}/{op_name}/T={t}/ratio={_ratio_tag(ratio)}",
                        repeat,
                    ),
                    valid_cands,
                )
                cells.extend(
                    _eval_cells(config, suite, kind, op_name, ratio, t, repeat, model, test_cands)
                )
    return cells


def _repeat_ablation(
    config: ExperimentConfig, ds: InteractionDataset, kg: KnowledgeGraph, repeat: int
) -> list[Cell]:
    seed = config.master_seed
    counts = relation_fact_counts(kg)
    rel_ids = np.arange(kg.relation_count)
    if kg.placeholder_relation is not None:
        keep = rel_ids != kg.placeholder_relation
        rel_ids, counts = rel_ids[keep], counts[keep]
    order = np.lexsort((rel_ids, -counts))
    top = [int(rel_ids[i]) for i in order[: config.n_ablation_relations]]

    split = random_split(ds, config.split_ratios, RngStream(seed, "relation_ablation/split", repeat))
    test_cands = sample_negatives(
        split, config.eval_negatives, RngStream(seed, "relation_ablation/eval", repeat)
    )
    valid_cands = sample_negatives(
        split, config.eval_negatives, RngStream(seed, "relation_ablation/valid-eval", repeat),
        part="valid",
    )
    variants = [("original", kg)] + [
        (
            f"remove:{kg.relation_tokens[rid] if kg.relation_tokens else rid}",
            remove_relation_type(kg, rid),
        )
        for rid in top
    ]
    cells: list[Cell] = []
    tune_cache: dict = {}
    for kind_name, graph in variants:
        for kind in config.models:
            cfg = _model_config_for(
                config, kind, split, kg,
                RngStream(seed, f"relation_ablation/tune/{kind}", repeat),
                valid_cands, tune_cache, (kind,),
            )
            model = train_one(
                kind, split, graph, cfg,
                RngStream(seed, f"relation_ablation/train/{kind}/{kind_name}", repeat),
                valid_cands,
            )
            cells.extend(
                _eval_cells(
                    config, "relation_ablation", kind, kind_name, 0.0, 0, repeat, model, test_cands
                )
            )
    return cells


def _repeat_cells(
    config: ExperimentConfig, ds: InteractionDataset, kg: KnowledgeGraph | None, repeat: int
) -> list[Cell]:
    if config.suite == "rq1":
        return _repeat_rq1(config, ds, kg, repeat)
    if config.suite in _SWEEP_OPS:
        return _repeat_sweep(config, ds, kg, repeat)
    if config.suite == "relation_ablation":
        return _repeat_ablation(config, ds, kg, repeat)
    raise ValueError(f"suite {config.suite!r} is not a per-repeat suite")


def _worker(args: tuple[dict, int]) -> list[Cell]:
    config_dict, repeat = args
    config = ExperimentConfig.from_dict(config_dict)
    ds, kg = load_source(config.dataset, config.master_seed)
    return _repeat_cells(config, ds, kg, repeat)


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Run one suite end to end and return its report."""
    if config.suite == "rq5":
        return run_rq5(config, jobs=jobs)
    ds, kg = load_source(config.dataset, config.master_seed)
    if kg is None:
        raise ValueError(f"suite {config.suite} needs a knowledge graph")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(_worker, [(config.to_dict(), r) for r in range(config.repeats)]))
    else:
        chunks = [_repeat_cells(config, ds, kg, r) for r in range(config.repeats)]
    cells = [c for chunk in chunks for c in chunk]
    return ExperimentReport(config=config.to_dict(), cells=cells)


def mean_abs_contribution(report: ExperimentReport, ratio: float) -> dict[str, float]:
    """Mean |contribution| per model (plus "all") at one sweep ratio."""
    per_model: dict[str, list[float]] = {}
    for model, kind, r, t, delta, base_vals, pert_vals in _contribution_pairs(report):
        if r != ratio:
            continue
        vals = [abs(kger(b, p, delta)) for b, p in zip(base_vals, pert_vals)]
        per_model.setdefault(model, []).extend(vals)
        per_model.setdefault("all", []).extend(vals)
    return {m: float(np.mean(v)) for m, v in per_model.items() if v}


def _reference_ratio(ratios: list[float]) -> float:
    positive = sorted(r for r in ratios if r > 0)
    if not positive:
        raise ValueError("need at least one ratio above zero")
    return min(positive, key=lambda r: (abs(r - 0.5), r))


def run_rq5(
    config: ExperimentConfig,
    reports: dict[str, ExperimentReport] | None = None,
    jobs: int = 1,
) -> ExperimentReport:
    """Mean |contribution| comparison grid over the four sweep regimes.

    ``reports`` may carry already-computed rq2/rq3_facts/rq4_false/
    rq4_decrease reports; anything missing is computed here.
    """
    reports = dict(reports or {})
    missing = [s for s in RQ5_REGIMES.values() if s not in reports]
    for suite in missing:
        sub = ExperimentConfig.from_dict({**config.to_dict(), "suite": suite})
        reports[suite] = run_experiment(sub, jobs=jobs)
    absent = [s for s in RQ5_REGIMES.values() if not reports[s].cells]
    if absent:
        raise ValueError(f"rq5 inputs missing cells for: {absent}")
    cells: list[Cell] = []
    for regime, suite in RQ5_REGIMES.items():
        ratio = _reference_ratio([c.ratio for c in reports[suite].cells] or [0.5])
        for model, value in sorted(mean_abs_contribution(reports[suite], ratio).items()):
            cells.append(
                Cell("rq5", model, regime, ratio, 0, 0, "mean_abs_kger", value)
            )
    return ExperimentReport(config=config.to_dict(), cells=cells)


def replay(manifest: dict, jobs: int = 1) -> ExperimentReport:
    """Re-run an experiment from an emitted manifest."""
    if "config" not in manifest:
        raise ValueError("manifest has no 'config' entry")
    return run_experiment(ExperimentConfig.from_dict(manifest["config"]), jobs=jobs)
