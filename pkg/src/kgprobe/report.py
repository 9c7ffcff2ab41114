"""Experiment result assembly and file emission.

A run produces a flat list of :class:`Cell` observations (one metric value
per trained model per repeat). From those, this module derives:

* ``raw.csv``  -- every cell, in generation order;
* ``agg.csv``  -- mean/std/n over repeats;
* ``kger.csv`` -- knowledge-contribution ratios per sweep point, computed
  per repeat against that repeat's baseline and then averaged; the
  ratio-of-means variant is emitted alongside;
* ``kgus.csv`` -- the unscaled companion;
* ``plots.json`` -- per-(model, kind) series of mean/std against ratio;
* ``manifest.json`` -- the full config; rerunning from it reproduces
  ``raw.csv`` byte for byte.

Baselines: in the regime-comparison suite the baseline is the ``original``
kind; in ratio sweeps it is the same kind at ratio 0. Contribution ratios
are computed from MRR with ``delta`` equal to the swept ratio (1 for regime
swaps and whole-relation removals).
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .metrics import kger, kgus

BASELINE_KIND = "original"
RAW_COLUMNS = ["suite", "model", "kind", "ratio", "t_budget", "repeat", "metric", "value"]


@dataclass(frozen=True)
class Cell:
    suite: str
    model: str
    kind: str
    ratio: float
    t_budget: int
    repeat: int
    metric: str
    value: float


@dataclass
class ExperimentReport:
    config: dict
    cells: list[Cell]

    def metric_cells(self, metric: str) -> list[Cell]:
        return [c for c in self.cells if c.metric == metric]


def _fmt(x: float) -> str:
    return repr(float(x))


def aggregate(cells: Iterable[Cell]) -> list[dict]:
    groups: dict[tuple, list[float]] = {}
    for c in cells:
        groups.setdefault((c.suite, c.model, c.kind, c.ratio, c.t_budget, c.metric), []).append(c.value)
    rows = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3], k[4], k[5])):
        vals = np.asarray(groups[key], dtype=np.float64)
        rows.append(
            {
                "suite": key[0],
                "model": key[1],
                "kind": key[2],
                "ratio": key[3],
                "t_budget": key[4],
                "metric": key[5],
                "mean": float(vals.mean()),
                "std": float(vals.std(ddof=0)),
                "n": len(vals),
            }
        )
    return rows


def _contribution_pairs(report: ExperimentReport) -> list[tuple]:
    """(model, kind, ratio, t_budget, delta, base_values, pert_values) tuples.

    ``base_values``/``pert_values`` are per-repeat MRR lists with matching
    repeat indices, so ratios are computed within a seed family.
    """
    by_key: dict[tuple, dict[int, float]] = {}
    suites = set()
    for c in report.metric_cells("mrr"):
        suites.add(c.suite)
        by_key.setdefault((c.model, c.kind, c.ratio, c.t_budget), {})[c.repeat] = c.value
    out = []
    for (model, kind, ratio, t), per_repeat in sorted(by_key.items()):
        if kind == BASELINE_KIND:
            continue
        if ratio > 0:
            base = by_key.get((model, kind, 0.0, t))
            delta = ratio
        else:
            base = by_key.get((model, BASELINE_KIND, 0.0, t))
            delta = 1.0
        if not base:
            continue
        repeats = sorted(set(per_repeat) & set(base))
        if not repeats:
            continue
        out.append(
            (
                model,
                kind,
                ratio,
                t,
                delta,
                [base[r] for r in repeats],
                [per_repeat[r] for r in repeats],
            )
        )
    return out


def contribution_rows(report: ExperimentReport, scaled: bool = True) -> list[dict]:
    """Per-sweep-point contribution ratios, repeat-paired then averaged."""
    suite = report.cells[0].suite if report.cells else ""
    rows = []
    for model, kind, ratio, t, delta, base_vals, pert_vals in _contribution_pairs(report):
        if scaled:
            per_repeat = [kger(b, p, delta) for b, p in zip(base_vals, pert_vals)]
            of_means = kger(float(np.mean(base_vals)), float(np.mean(pert_vals)), delta)
        else:
            per_repeat = [kgus(b, p) for b, p in zip(base_vals, pert_vals)]
            of_means = kgus(float(np.mean(base_vals)), float(np.mean(pert_vals)))
        arr = np.asarray(per_repeat, dtype=np.float64)
        rows.append(
            {
                "suite": suite,
                "model": model,
                "kind": kind,
                "ratio": ratio,
                "t_budget": t,
                "delta": delta,
                "mean": float(arr.mean()),
                "std": float(arr.std(ddof=0)),
                "of_means": float(of_means),
                "n": len(per_repeat),
            }
        )
    return rows


def plot_series(report: ExperimentReport) -> list[dict]:
    agg = aggregate(c for c in report.cells if c.metric == "mrr")
    series: dict[tuple, dict] = {}
    for row in agg:
        key = (row["suite"], row["model"], row["kind"], row["t_budget"])
        entry = series.setdefault(
            key,
            {
                "suite": row["suite"],
                "model": row["model"],
                "kind": row["kind"],
                "t_budget": row["t_budget"],
                "metric": "mrr",
                "x": [],
                "mean": [],
                "std": [],
            },
        )
        entry["x"].append(row["ratio"])
        entry["mean"].append(row["mean"])
        entry["std"].append(row["std"])
    return [series[k] for k in sorted(series)]


def _write_csv(path: str, header: list[str], rows: Iterable[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def emit_report(report: ExperimentReport, out_dir: str) -> dict[str, str]:
    """Write all report files; returns name -> path."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    paths["raw"] = os.path.join(out_dir, "raw.csv")
    _write_csv(
        paths["raw"],
        RAW_COLUMNS,
        (
            [c.suite, c.model, c.kind, _fmt(c.ratio), str(c.t_budget), str(c.repeat), c.metric, _fmt(c.value)]
            for c in report.cells
        ),
    )

    paths["agg"] = os.path.join(out_dir, "agg.csv")
    _write_csv(
        paths["agg"],
        ["suite", "model", "kind", "ratio", "t_budget", "metric", "mean", "std", "n"],
        (
            [r["suite"], r["model"], r["kind"], _fmt(r["ratio"]), str(r["t_budget"]), r["metric"], _fmt(r["mean"]), _fmt(r["std"]), str(r["n"])]
            for r in aggregate(report.cells)
        ),
    )

    for name, scaled in (("kger", True), ("kgus", False)):
        paths[name] = os.path.join(out_dir, f"{name}.csv")
        _write_csv(
            paths[name],
            ["suite", "model", "kind", "ratio", "t_budget", "delta", "mean", "std", "of_means", "n"],
            (
                [r["suite"], r["model"], r["kind"], _fmt(r["ratio"]), str(r["t_budget"]), _fmt(r["delta"]), _fmt(r["mean"]), _fmt(r["std"]), _fmt(r["of_means"]), str(r["n"])]
                for r in contribution_rows(report, scaled=scaled)
            ),
        )

    paths["plots"] = os.path.join(out_dir, "plots.json")
    with open(paths["plots"], "w", encoding="utf-8") as fh:
        json.dump({"series": plot_series(report)}, fh, indent=2, sort_keys=True)
        fh.write("\n")

    paths["manifest"] = os.path.join(out_dir, "manifest.json")
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump({"format": 1, "config": report.config}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def load_raw_csv(path: str) -> list[Cell]:
    cells = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RAW_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path} is not a raw.csv: missing columns {sorted(missing)}")
        for row in reader:
            cells.append(
                Cell(
                    suite=row["suite"],
                    model=row["model"],
                    kind=row["kind"],
                    ratio=float(row["ratio"]),
                    t_budget=int(row["t_budget"]),
                    repeat=int(row["repeat"]),
                    metric=row["metric"],
                    value=float(row["value"]),
                )
            )
    return cells
