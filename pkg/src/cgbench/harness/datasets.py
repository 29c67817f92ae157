"""Dataset construction: enumeration/sampling, splits, JSONL persistence."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

from ..codec import render_response
from ..graph import ComputationGraph, graph_from_json, graph_stats, graph_to_json
from ..tasks import dp as dp_task
from ..tasks import multiplication as mult_task
from ..tasks import puzzle as puzzle_task

SPLITS = ("train", "valid", "test", "ood")


@dataclass
class DatasetRecord:
    instance_id: str
    task: str
    size: dict[str, int]
    question: str
    answer: str
    scratchpad: str
    graph_json: str
    stats: dict[str, Any]
    split: str

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_line(line: str) -> "DatasetRecord":
        return DatasetRecord(**json.loads(line))

    def graph(self) -> ComputationGraph:
        return graph_from_json(self.graph_json)

    @property
    def size_label(self) -> str:
        return size_label(self.task, self.size)


def size_label(task: str, size: Mapping[str, int]) -> str:
    if task == mult_task.TASK:
        return f"{size['k1']}x{size['k2']}"
    if task == dp_task.TASK:
        return str(size["n"])
    return f"{size['k']}x{size['m']}"


def _record(task: str, instance, split: str) -> DatasetRecord:
    if task == mult_task.TASK:
        graph = mult_task.build_graph(instance)
        question = mult_task.question_text(instance)
        answer = mult_task.answer_text(instance)
        size = {"k1": instance.spec.k1, "k2": instance.spec.k2}
    elif task == dp_task.TASK:
        graph = dp_task.build_graph(instance)
        question = dp_task.question_text(instance)
        answer = dp_task.answer_text(instance)
        size = {"n": instance.n}
    elif task == puzzle_task.TASK:
        from ..codec import puzzle as puzzle_codec

        graph = puzzle_task.greedy_solve(instance)
        question = puzzle_codec.question_text(instance.attributes, instance.clues, instance.k)
        answer = "\n".join(puzzle_codec._table_rows(instance, _solution_cells(instance)))
        size = {"k": instance.k, "m": instance.m}
    else:
        raise ValueError(f"unknown task {task!r}")
    stats = graph_stats(graph).to_json()
    return DatasetRecord(
        instance_id=instance.instance_id,
        task=task,
        size=size,
        question=question,
        answer=answer,
        scratchpad=render_response(graph),
        graph_json=graph_to_json(graph),
        stats=stats,
        split=split,
    )


def _solution_cells(instance: puzzle_task.PuzzleInstance) -> dict[tuple[int, str], str]:
    return {
        (h + 1, a.key): instance.solution[a.key][h]
        for a in instance.attributes
        for h in range(instance.k)
    }


def _stable_int(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _instances_for_size(task: str, size: Mapping[str, int], seed: int, sample: int | None, limit: int | None):
    if task == mult_task.TASK:
        spec = mult_task.MultSpec(size["k1"], size["k2"])
        total = mult_task.count_instances(spec)
        if sample is None and (limit is None or total <= limit):
            return list(mult_task.enumerate_instances(spec))
        rng = np.random.default_rng([seed, _stable_int(f"mult{size}")])
        n = sample if sample is not None else (limit or total)
        xs = rng.integers(10 ** (spec.k1 - 1), 10**spec.k1, size=n)
        ys = rng.integers(10 ** (spec.k2 - 1), 10**spec.k2, size=n)
        return [mult_task.MultInstance(int(x), int(y)) for x, y in zip(xs, ys)]
    if task == dp_task.TASK:
        n = size["n"]
        total = dp_task.count_instances(n)
        if sample is None and (limit is None or total <= limit):
            return list(dp_task.enumerate_instances(n))
        rng = np.random.default_rng([seed, _stable_int(f"dp{size}")])
        count = sample if sample is not None else (limit or total)
        lo, hi = dp_task.VALUE_RANGE
        rows = rng.integers(lo, hi + 1, size=(count, n))
        return [dp_task.DpInstance(tuple(int(v) for v in row)) for row in rows]
    if task == puzzle_task.TASK:
        count = sample if sample is not None else 50
        out = []
        for i in range(count):
            spec = puzzle_task.PuzzleSpec(size["k"], size["m"], seed=seed * 100_003 + i)
            out.append(puzzle_task.generate(spec))
        return out
    raise ValueError(f"unknown task {task!r}")


def build_dataset(
    task: str,
    sizes: Sequence[Mapping[str, int]],
    out_path: str | Path,
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
    ood_sizes: Sequence[Mapping[str, int]] = (),
    sample: int | None = None,
    limit: int | None = 2_000_000,
    allow_unit_dp: bool = False,
) -> dict[str, int]:
    """Build a JSONL dataset with deterministic train/valid/test/ood splits.

    In-domain sizes are partitioned per size with the given fractions
    (honored to within one instance); ood sizes are tagged "ood" wholesale
    and never enter the training split. DP datasets start at n = 2 unless
    ``allow_unit_dp`` opts the degenerate single-element lists in.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("split fractions must sum to 1")
    if task == dp_task.TASK and not allow_unit_dp:
        for size in list(sizes) + list(ood_sizes):
            if size.get("n", 0) < 2:
                raise ValueError("dp datasets need n >= 2 (pass allow_unit_dp=True to include n=1)")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    counts = {s: 0 for s in SPLITS}
    with open(out_path, "w") as f:
        for size in sizes:
            instances = _instances_for_size(task, size, seed, sample, limit)
            n = len(instances)
            rng = np.random.default_rng([seed, _stable_int(f"{task}-split-{sorted(size.items())}")])
            perm = rng.permutation(n)
            n_train = int(round(fractions[0] * n))
            n_valid = int(round(fractions[1] * n))
            tags = np.empty(n, dtype=object)
            tags[perm[:n_train]] = "train"
            tags[perm[n_train : n_train + n_valid]] = "valid"
            tags[perm[n_train + n_valid :]] = "test"
            for inst, tag in zip(instances, tags):
                rec = _record(task, inst, str(tag))
                counts[rec.split] += 1
                f.write(rec.to_line() + "\n")
        for size in ood_sizes:
            for inst in _instances_for_size(task, size, seed, sample, limit):
                rec = _record(task, inst, "ood")
                counts["ood"] += 1
                f.write(rec.to_line() + "\n")
    return counts


def read_dataset(path: str | Path) -> Iterator[DatasetRecord]:
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                yield DatasetRecord.from_line(line)


def split_by_graph_stat(
    records: Iterable[DatasetRecord], stat: str, threshold: float
) -> Iterator[DatasetRecord]:
    """Retag: records whose graph stat exceeds the threshold become ood."""
    key = {"size": "node_count", "depth": "depth", "width": "width"}.get(stat)
    if key is None:
        raise ValueError(f"unknown stat {stat!r} (use size, depth or width)")
    for rec in records:
        value = rec.stats[key]
        if value > threshold and rec.split != "ood":
            rec = DatasetRecord(**{**asdict(rec), "split": "ood"})
        yield rec
