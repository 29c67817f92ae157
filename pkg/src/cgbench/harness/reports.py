"""Deterministic CSV emission from evaluation records."""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable, Sequence

from .. import analysis
from .datasets import size_label
from .evaluate import EvalRecord


def _write(path: Path, fieldnames: Sequence[str], rows: Iterable[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(fieldnames))
        w.writeheader()
        for row in rows:
            w.writerow(row)


def accuracy_by_size_rows(records: Sequence[EvalRecord]) -> list[dict]:
    agg: dict[tuple, list[int]] = defaultdict(lambda: [0, 0])
    for r in records:
        cell = agg[(r.task, size_label(r.task, r.size), r.prompt_mode)]
        cell[0] += r.exact_match
        cell[1] += 1
    return [
        {"task": t, "size": s, "prompt_mode": m, "accuracy": f"{hits / n:.6f}", "count": n}
        for (t, s, m), (hits, n) in sorted(agg.items())
    ]


def accuracy_by_split_rows(records: Sequence[EvalRecord]) -> list[dict]:
    agg: dict[tuple, list[int]] = defaultdict(lambda: [0, 0])
    for r in records:
        cell = agg[(r.task, r.split)]
        cell[0] += r.exact_match
        cell[1] += 1
    return [
        {"task": t, "split": s, "accuracy": f"{hits / n:.6f}", "count": n}
        for (t, s), (hits, n) in sorted(agg.items())
    ]


def error_layer_rows(records: Sequence[EvalRecord]) -> list[dict]:
    """Fig-7-schema rows: per-layer category ratios (present nodes sum to 1;
    the absent ratio is over all nodes of the layer)."""
    counts: Counter = Counter()
    for r in records:
        for category, layer in r.node_categories.values():
            counts[(r.task, size_label(r.task, r.size), layer, category)] += 1
    present: dict[tuple, int] = defaultdict(int)
    total: dict[tuple, int] = defaultdict(int)
    for (task, size, layer, category), n in counts.items():
        if category != "absent":
            present[(task, size, layer)] += n
        total[(task, size, layer)] += n
    rows = []
    for (task, size, layer, category), n in sorted(counts.items()):
        denom = present[(task, size, layer)] if category != "absent" else total[(task, size, layer)]
        rows.append(
            {
                "task": task,
                "size": size,
                "layer": layer,
                "category": category,
                "ratio": f"{(n / denom) if denom else 0.0:.6f}",
                "count": n,
            }
        )
    return rows


def surface_rows(records: Sequence[EvalRecord]) -> list[dict]:
    items = []
    for r in records:
        internal = None
        if r.node_categories:
            internal = any(c != "fully-correct" for c, _ in r.node_categories.values())
        items.append(
            {
                "task": r.task,
                "size": size_label(r.task, r.size),
                "exact": r.exact_match,
                "metrics": r.partial,
                "internal_error": internal,
            }
        )
    return analysis.surface_pattern_report(items)


def report(records: Sequence[EvalRecord], out_dir: str | Path) -> dict[str, Path]:
    """Emit the CSV bundle; aggregation is deterministic in record order."""
    out = Path(out_dir)
    paths = {
        "accuracy_by_size": out / "accuracy_by_size.csv",
        "accuracy_by_split": out / "accuracy_by_split.csv",
        "error_layers": out / "error_layers.csv",
        "surface": out / "surface.csv",
    }
    _write(paths["accuracy_by_size"], ("task", "size", "prompt_mode", "accuracy", "count"), accuracy_by_size_rows(records))
    _write(paths["accuracy_by_split"], ("task", "split", "accuracy", "count"), accuracy_by_split_rows(records))
    _write(paths["error_layers"], ("task", "size", "layer", "category", "ratio", "count"), error_layer_rows(records))
    _write(paths["surface"], ("task", "size", "metric", "value", "count"), surface_rows(records))
    return paths
