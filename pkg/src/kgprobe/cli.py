"""Command line interface.

Subcommands mirror the library's stages: ``preprocess`` filters raw files,
``perturb`` damages a graph and records how, ``train``/``eval`` handle single
models, ``experiment`` runs a whole suite, and ``report`` rebuilds the derived
tables from a ``raw.csv``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

from .data import (
    dataset_stats,
    filter_by_rating,
    k_core_filter,
    link_all_items,
    load_dataset,
    save_interactions,
    save_kg,
    save_links,
)
from .models import evaluate, load_model, save_model
from .perturb import PERTURB_KINDS, PerturbSpec, apply_spec
from .report import emit_report, load_raw_csv, ExperimentReport
from .rng import RngStream
from .runner import DataSource, ExperimentConfig, load_source, run_experiment, train_one
from .split import random_split, sample_negatives

log = logging.getLogger(__name__)


def _dataset_flags(p: argparse.ArgumentParser, inter_required: bool = True) -> None:
    p.add_argument("--inter", required=inter_required, help="interactions file (.inter)")
    p.add_argument("--kg", help="knowledge graph file (.kg)")
    p.add_argument("--link", help="item-to-entity link file (.link)")
    p.add_argument("--min-rating", type=float, help="keep interactions rated at least this")
    p.add_argument("--k-core", type=int, help="iteratively drop users/items with <= K interactions")


def _source(args: argparse.Namespace) -> DataSource:
    return DataSource(
        inter=args.inter,
        kg=args.kg,
        link=args.link,
        min_rating=args.min_rating,
        k_core=args.k_core,
    )


def _ensure_out(args: argparse.Namespace) -> str:
    out = args.out or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_preprocess(args: argparse.Namespace) -> int:
    ds, kg = load_dataset(args.inter, args.kg, args.link)
    if args.min_rating is not None:
        ds = filter_by_rating(ds, args.min_rating)
    if args.k_core is not None:
        ds = k_core_filter(ds, args.k_core)
    out = _ensure_out(args)
    save_interactions(ds, os.path.join(out, "interactions.inter"))
    if kg is not None:
        save_kg(kg, os.path.join(out, "graph.kg"))
        save_links(ds, kg, os.path.join(out, "links.link"))
    stats = dataset_stats(ds)._asdict()
    if kg is not None:
        stats["n_entities"] = kg.entity_count
        stats["n_relations"] = kg.relation_count
        stats["n_facts"] = kg.n_facts
        stats["n_links"] = len(ds.links)
    _write_json(os.path.join(out, "stats.json"), stats)
    print(json.dumps(stats, indent=2, sort_keys=True))
    return 0


def cmd_perturb(args: argparse.Namespace) -> int:
    spec = PerturbSpec(args.kind, ratio=args.ratio, target_relation=args.relation)
    seed = args.seed if args.seed is not None else 0
    kwargs: dict = {}
    if args.kind in ("interaction_kg", "self_kg"):
        if args.inter is None:
            raise ValueError(f"--inter is required for kind={args.kind}")
        ds, kg = load_source(_source(args), seed)
        if kg is None:
            raise ValueError("--kg is required so item links resolve to graph entities")
        kwargs = {
            "train_users": ds.users,
            "train_items": ds.items,
            "links": ds.links,
            "n_users": ds.n_users,
        }
    else:
        if args.kg is None:
            raise ValueError("--kg is required")
        ds, kg = load_source(_source(args), seed) if args.inter else (None, None)
        if kg is None:
            from .data import load_kg

            kg = load_kg(args.kg)
    tag = f"perturb/{args.kind}" + (f"/ratio={args.ratio!r}" if args.ratio is not None else "")
    stream = RngStream(seed, tag)
    perturbed = apply_spec(kg, spec, stream, **kwargs)
    if perturbed.entity_tokens is None and kg is not None and kg.entity_tokens is not None:
        # the replacement builders work on dense ids only; restore the source
        # vocabulary so the written file stays human-readable
        tokens = list(kg.entity_tokens)
        if args.kind == "interaction_kg":
            tokens += [f"user:{t}" for t in ds.user_tokens]
        if len(tokens) == perturbed.entity_count:
            perturbed = dataclasses.replace(perturbed, entity_tokens=tokens)
    out = _ensure_out(args)
    save_kg(perturbed, os.path.join(out, "perturbed.kg"))
    _write_json(
        os.path.join(out, "perturb_manifest.json"),
        {"spec": spec.to_dict(), "seed": seed, "stream": tag, "source_kg": args.kg},
    )
    print(f"wrote {perturbed.n_facts} facts to {os.path.join(out, 'perturbed.kg')}")
    return 0


def _model_config(args: argparse.Namespace):
    from .models import ModelConfig

    overrides = {
        "embedding_dim": args.dim,
        "learning_rate": args.lr,
        "max_epochs": args.epochs,
        "patience": args.patience,
        "margin": args.margin,
        "l2_weight": args.l2,
    }
    return ModelConfig(**{k: v for k, v in overrides.items() if v is not None})


def cmd_train(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else 0
    ds, kg = load_source(_source(args), seed)
    split = random_split(ds, stream=RngStream(seed, "cli/split"))
    config = _model_config(args)
    model = train_one(
        args.model, split, kg, config, RngStream(seed, f"cli/train/{args.model}"), None
    )
    out = _ensure_out(args)
    ckpt = os.path.join(out, f"{args.model}.kgpm")
    save_model(model, ckpt)
    _write_json(
        os.path.join(out, "train_log.json"),
        {
            "model": args.model,
            "seed": seed,
            "epochs": [s._asdict() for s in model.training_log],
        },
    )
    best = max((s.valid_mrr for s in model.training_log), default=float("nan"))
    print(f"saved {ckpt} (best validation MRR {best:.4f})")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else 0
    model = load_model(args.checkpoint)
    ds, _ = load_source(_source(args), seed)
    if (ds.n_users, ds.n_items) != (model.n_users, model.n_items):
        raise ValueError(
            f"checkpoint was trained on {model.n_users} users x {model.n_items} items, "
            f"but this dataset has {ds.n_users} x {ds.n_items}"
        )
    split = random_split(ds, stream=RngStream(seed, "cli/split"))
    candidates = sample_negatives(split, args.negatives, RngStream(seed, "cli/eval"))
    results = evaluate(model, candidates)
    from .metrics import hit_at_k, mrr, ndcg_at_k, precision_at_k, recall_at_k

    k = args.top_k
    metrics = {
        "mrr": mrr(results),
        f"hit@{k}": hit_at_k(results, k),
        f"ndcg@{k}": ndcg_at_k(results, k),
        f"precision@{k}": precision_at_k(results, k),
        f"recall@{k}": recall_at_k(results, k),
        "n_users": len(results),
    }
    if args.out:
        _write_json(os.path.join(_ensure_out(args), "metrics.json"), metrics)
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config_dict = json.load(fh)
    if "suite" not in config_dict and "config" in config_dict:
        # a manifest.json from a previous run replays as-is
        config_dict = config_dict["config"]
    if args.seed is not None:
        config_dict["seed"] = args.seed
    config = ExperimentConfig.from_dict(config_dict)
    report = run_experiment(config, jobs=args.jobs or 1)
    out = _ensure_out(args)
    paths = emit_report(report, out)
    for p in paths.values():
        print(p)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    cells = load_raw_csv(args.raw)
    manifest_path = os.path.join(os.path.dirname(os.path.abspath(args.raw)), "manifest.json")
    config = {}
    if os.path.exists(manifest_path):
        with open(manifest_path, encoding="utf-8") as fh:
            config = json.load(fh).get("config", {})
    report = ExperimentReport(config=config, cells=cells)
    paths = emit_report(report, _ensure_out(args))
    for p in paths.values():
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    common.add_argument("--out", default=None, help="output directory (default ./out)")
    common.add_argument("--jobs", type=int, default=None, help="parallel repeats (default 1)")
    common.add_argument("-v", "--verbose", action="store_true", help="info-level logging")

    parser = argparse.ArgumentParser(
        prog="kgprobe",
        description="Measure how much a knowledge graph contributes to a recommender.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", parents=[common], help="filter and re-emit a dataset")
    _dataset_flags(p)
    p.set_defaults(fn=cmd_preprocess)

    p = sub.add_parser("perturb", parents=[common], help="apply one perturbation to a graph")
    _dataset_flags(p, inter_required=False)
    p.add_argument("--kind", required=True, choices=PERTURB_KINDS)
    p.add_argument("--ratio", type=float, help="perturbation strength in [0, 1]")
    p.add_argument("--relation", type=int, help="relation id for kind=remove_relation")
    p.set_defaults(fn=cmd_perturb)

    p = sub.add_parser("train", parents=[common], help="train one model on a fixed split")
    _dataset_flags(p)
    p.add_argument("--model", required=True, choices=["bpr_mf", "cfkg_lite", "kgcn_lite"])
    p.add_argument("--dim", type=int, help="embedding dimension")
    p.add_argument("--lr", type=float, help="learning rate")
    p.add_argument("--epochs", type=int, help="maximum training epochs")
    p.add_argument("--patience", type=int, help="early-stopping patience")
    p.add_argument("--margin", type=float, help="ranking margin (cfkg_lite)")
    p.add_argument("--l2", type=float, help="L2 penalty weight")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint")
    _dataset_flags(p)
    p.add_argument("--checkpoint", required=True, help="model file written by train")
    p.add_argument("--negatives", type=int, default=50, help="sampled negatives per positive")
    p.add_argument("--top-k", type=int, default=10, help="cutoff for top-K metrics")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("experiment", parents=[common], help="run a full suite from a JSON config")
    p.add_argument("--config", required=True, help="experiment config (JSON)")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("report", parents=[common], help="rebuild tables from a raw.csv")
    p.add_argument("--raw", required=True, help="raw.csv from a previous run")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
