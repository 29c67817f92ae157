"""Evaluation: prompt assembly, cached model calls, per-instance records."""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .. import analysis
from ..codec import extract_final_answer, parse_document, render_document, shape_of
from ..graph import NodeValue
from ..tasks import dp as dp_task
from ..tasks import multiplication as mult_task
from ..tasks import puzzle as puzzle_task
from .datasets import DatasetRecord

PROMPT_MODES = ("zero-shot", "few-shot-qa", "few-shot-scratchpad")

MULT_INSTRUCTION = (
    "To multiply two numbers, start by multiplying the rightmost digit of the multiplicand"
    " by each digit of the multiplier, writing down the products and carrying over any remainders. "
    " Repeat this process for each digit of the multiplicand, and then add up all the partial products"
    " to obtain the final result."
)


@dataclass
class EvalRecord:
    instance_id: str
    model_id: str
    prompt_mode: str
    task: str
    size: dict[str, int]
    split: str
    raw_response: str
    extracted: Any
    exact_match: int
    partial: dict[str, int] = field(default_factory=dict)
    # address -> [category, truth layer]
    node_categories: dict[str, list] = field(default_factory=dict)
    error: str = ""
    seconds: float = 0.0

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_line(line: str) -> "EvalRecord":
        return EvalRecord(**json.loads(line))


def build_prompt(record: DatasetRecord, mode: str, exemplars: Sequence[DatasetRecord]) -> str:
    if mode == "zero-shot":
        if record.task == mult_task.TASK:
            return f"{MULT_INSTRUCTION}\n\nQuestions: {record.question} Answer"
        return record.question
    if mode == "few-shot-qa":
        if record.task == mult_task.TASK:
            shots = "\n".join(f"Questions: {e.question} Answer {e.answer}." for e in exemplars)
            return f"{MULT_INSTRUCTION}\n\n{shots}\nQuestions: {record.question} Answer"
        shots = "\n\n".join(f"{e.question}\nAnswer: {e.answer}" for e in exemplars)
        return f"{shots}\n\n{record.question}\nAnswer:"
    if mode == "few-shot-scratchpad":
        shots = "\n\n".join(render_document(e.graph()).rstrip() for e in exemplars)
        if record.task == puzzle_task.TASK:
            return f"{shots}\n\n{record.question}\nReasoning: "
        return f"{shots}\n\nQuestion: {record.question}\n\nScratchpad:"
    raise ValueError(f"unknown prompt mode {mode!r}")


def pick_exemplars(pool: Sequence[DatasetRecord], count: int, seed: int, exclude_id: str) -> list[DatasetRecord]:
    candidates = [r for r in pool if r.instance_id != exclude_id]
    if count <= 0 or not candidates:
        return []
    rng = np.random.default_rng([seed, 0xE8])
    idx = rng.choice(len(candidates), size=min(count, len(candidates)), replace=False)
    return [candidates[i] for i in sorted(int(i) for i in idx)]


def _truth_answer(record: DatasetRecord):
    if record.task == mult_task.TASK:
        return record.graph().nodes["product"].value.payload
    if record.task == dp_task.TASK:
        g = record.graph()
        return tuple(g.nodes["output"].value.payload)
    g = record.graph()
    return g.nodes[g.sink].value


def _match(task: str, extracted, truth) -> int:
    if extracted is None:
        return 0
    if task == dp_task.TASK:
        return int(tuple(extracted) == tuple(truth))
    if task == puzzle_task.TASK:
        return int(isinstance(extracted, NodeValue) and extracted == truth)
    return int(extracted == truth)


def evaluate(
    model,
    records: Iterable[DatasetRecord],
    prompt_mode: str = "few-shot-scratchpad",
    exemplar_pool: Sequence[DatasetRecord] = (),
    exemplar_count: int = 5,
    seed: int = 0,
    cache_dir: str | Path | None = None,
    workers: int = 1,
    classify: bool = True,
) -> list[EvalRecord]:
    """Evaluate every record; endpoint/transport errors are recorded per
    instance and never abort the run. Responses are cached by
    (model id, prompt hash) so reruns make no model calls."""
    if prompt_mode not in PROMPT_MODES:
        raise ValueError(f"unknown prompt mode {prompt_mode!r}")
    records = list(records)
    cache = Path(cache_dir) if cache_dir is not None else None
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)

    def run_one(record: DatasetRecord) -> EvalRecord:
        started = time.monotonic()
        exemplars = pick_exemplars(exemplar_pool, exemplar_count, seed, record.instance_id)
        prompt = build_prompt(record, prompt_mode, exemplars)
        key = hashlib.sha256(f"{model.model_id}\x00{prompt}".encode()).hexdigest()
        response, error = "", ""
        cached = cache / f"{key}.json" if cache is not None else None
        if cached is not None and cached.exists():
            response = json.loads(cached.read_text())["response"]
        else:
            try:
                response = model.generate(record, prompt, prompt_mode)
            except Exception as exc:
                error = str(exc)
            if cached is not None and not error:
                cached.write_text(json.dumps({"response": response}))
        return _score(record, response, error, prompt_mode, started)

    def _score(record: DatasetRecord, response: str, error: str, mode: str, started: float) -> EvalRecord:
        truth = _truth_answer(record)
        extracted = None
        if not error:
            if record.task == puzzle_task.TASK:
                from ..codec import puzzle as puzzle_codec

                extracted = puzzle_codec.extract_final_answer_with_shape(response, shape_of(record.graph()))
            else:
                extracted = extract_final_answer(response, record.task)
        partial: dict[str, int] = {}
        node_categories: dict[str, list] = {}
        if mode == "few-shot-scratchpad" and classify and not error:
            graph = record.graph()
            pred = parse_document(response, record.task, shape_of(graph))
            if record.task == puzzle_task.TASK:
                extracted = pred.final_answer
            classifications = analysis.classify_nodes(graph, pred)
            node_categories = {nid: [cl.category, cl.layer] for nid, cl in classifications.items()}
        if record.task == mult_task.TASK:
            partial = mult_task.partial_metrics(extracted if isinstance(extracted, int) else None, truth)
        elif record.task == dp_task.TASK:
            vec = dp_task.per_position_accuracy(extracted, truth)
            partial = {f"o{i + 1}": v for i, v in enumerate(vec)}
        exact = _match(record.task, extracted, truth)
        return EvalRecord(
            instance_id=record.instance_id,
            model_id=model.model_id,
            prompt_mode=mode,
            task=record.task,
            size=dict(record.size),
            split=record.split,
            raw_response=response,
            extracted=_jsonable(extracted),
            exact_match=exact,
            partial=partial,
            node_categories=node_categories,
            error=error,
            seconds=round(time.monotonic() - started, 6),
        )

    if workers <= 1:
        return [run_one(r) for r in records]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, records))


def _jsonable(value):
    if isinstance(value, NodeValue):
        return value.to_json()
    if isinstance(value, tuple):
        return list(value)
    return value


def write_records(records: Sequence[EvalRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for r in records:
            f.write(r.to_line() + "\n")


def read_records(path: str | Path) -> list[EvalRecord]:
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(EvalRecord.from_line(line))
    return out
