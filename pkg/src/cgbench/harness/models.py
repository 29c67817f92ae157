"""Model backends: the simulated noisy oracle and a generic HTTP endpoint."""

from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..codec import render_response
from ..graph import KIND_BOOL, KIND_DIGIT, KIND_DIGITS, KIND_TABLE, ComputationGraph, NodeValue, evaluate_op, linearize
from ..tasks import dp as dp_task
from ..tasks import multiplication as mult_task
from .datasets import DatasetRecord


@dataclass(frozen=True)
class ModelSpec:
    kind: str  # "noisy-oracle" | "http-endpoint"
    model_id: str = "oracle"
    # oracle parameters
    epsilon: float = 0.0
    c: float = 0.0
    seed: int = 0
    # http parameters
    url: str = ""
    token_env: str = ""  # environment variable holding the auth token
    response_path: str = "choices.0.message.content"
    temperature: float = 1.0
    top_p: float = 0.7  # nucleus sampling default

    def build(self):
        if self.kind == "noisy-oracle":
            return NoisyOracleModel(self)
        if self.kind == "http-endpoint":
            if not self.url:
                raise ValueError("http-endpoint models need a url")
            return HttpModel(self)
        raise ValueError(f"unknown model kind {self.kind!r}")


def _stable_int(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


# ---------------------------------------------------------------------------
# Noisy oracle
# ---------------------------------------------------------------------------


def wrong_value(
    value: NodeValue, node, graph: ComputationGraph, rng: np.random.Generator, avoid: NodeValue | None = None
) -> NodeValue:
    """A uniformly random wrong value from the node's codomain.

    The draw avoids both ``value`` (the computed result) and ``avoid`` (the
    true value), so accidental restorations happen only through the explicit
    recovery channel, never through the corruption itself.
    """
    for _ in range(64):
        candidate = _wrong_draw(value, node, graph, rng)
        if candidate != value and (avoid is None or candidate != avoid):
            return candidate
    return candidate


def _wrong_draw(value: NodeValue, node, graph: ComputationGraph, rng: np.random.Generator) -> NodeValue:
    kind = value.kind
    if kind == "clue":
        return value  # clue sources are never corrupted
    if kind == KIND_BOOL:
        return NodeValue.boolean(not value.payload)
    if kind == KIND_DIGIT:
        if node.op.startswith("dp.select"):
            return NodeValue.digit(3 - value.payload)  # selection codomain is {1, 2}
        return NodeValue.digit(int((value.payload + rng.integers(1, 10)) % 10))
    if kind == KIND_DIGITS:
        seq = list(value.payload)
        i = int(rng.integers(0, len(seq)))
        seq[i] = 1 if seq[i] == 2 else 2
        return NodeValue.digits(seq)
    if kind == KIND_TABLE:
        cells = list(value.payload)
        if not cells:
            return value
        i = int(rng.integers(0, len(cells)))
        house, key, cur = cells[i]
        values = next((a["values"] for a in graph.meta.get("attributes", []) if a["key"] == key), None)
        if not values or len(values) < 2:
            return value
        options = [v for v in values if v != cur]
        cells[i] = (house, key, options[int(rng.integers(0, len(options)))])
        return NodeValue.table(cells)
    # integers: bound the draw by the op's natural codomain
    return NodeValue.integer(_wrong_int(value.payload, node.op, graph, rng))


def _wrong_int(current: int, op: str, graph: ComputationGraph, rng: np.random.Generator) -> int:
    if op.startswith("mul.digit_mul"):
        lo, hi = 0, 90
    elif op.startswith("mul.concat"):
        lo, hi = 0, 10 ** (graph.meta.get("k1", 3) + 1)
    elif op.startswith("mul.shift") or op.startswith("mul.sum"):
        lo, hi = 0, 10 ** (graph.meta.get("k1", 3) + graph.meta.get("k2", 3))
    elif op.startswith("dp."):
        n = graph.meta.get("n", 5)
        lo, hi = 0, 5 * ((n + 1) // 2) + 1
    else:
        lo, hi = current - 9, current + 10
    for _ in range(64):
        draw = int(rng.integers(lo, max(hi, lo + 2)))
        if draw != current:
            return draw
    return current + 1


def corrupt_claims(
    graph: ComputationGraph, epsilon: float, c: float, rng: np.random.Generator
) -> dict[str, NodeValue]:
    """Claimed values for every node under the (epsilon, c) error model.

    Sources are restated faithfully. Each non-source computation is applied
    to the *claimed* parent values; with probability ``c`` a node whose
    parents went wrong emits the true value instead (the restoration
    channel); with probability ``epsilon`` the emitted value is corrupted to
    a uniformly random wrong value of the step's codomain.
    """
    claims: dict[str, NodeValue] = {}
    for nid in linearize(graph):
        node = graph.nodes[nid]
        if node.is_source:
            claims[nid] = node.value
            continue
        parents_ok = all(claims[p] == graph.nodes[p].value for p in node.parents)
        if not parents_ok and rng.random() < c:
            claims[nid] = node.value
            continue
        try:
            value = evaluate_op(node.op, [claims[p] for p in node.parents], graph)
        except Exception:
            value = node.value
        if rng.random() < epsilon:
            value = wrong_value(value, node, graph, rng, avoid=node.value)
        claims[nid] = value
    return claims


def answer_text_from_value(task: str, value: NodeValue, graph: ComputationGraph) -> str:
    if task == mult_task.TASK:
        return str(value.payload)
    if task == dp_task.TASK:
        return dp_task.format_list(list(value.payload))
    # puzzle: render the final table rows from the claimed sink
    from ..codec import puzzle as puzzle_codec
    from ..tasks import puzzle as puzzle_task

    inst = puzzle_task.instance_from_meta(graph.meta)
    cells = {(h, key): v for h, key, v in value.payload}
    return "\n".join(puzzle_codec._table_rows(inst, cells))


class NoisyOracleModel:
    """Executes the true algorithm with per-step corruption; emits well-formed
    scratchpad text (or just the answer in question-answer modes)."""

    def __init__(self, spec: ModelSpec) -> None:
        self.spec = spec

    @property
    def model_id(self) -> str:
        return f"{self.spec.model_id}-eps{self.spec.epsilon}-c{self.spec.c}-s{self.spec.seed}"

    def generate(self, record: DatasetRecord, prompt: str, mode: str) -> str:
        graph = record.graph()
        rng = np.random.default_rng([self.spec.seed, _stable_int(record.instance_id)])
        claims = corrupt_claims(graph, self.spec.epsilon, self.spec.c, rng)
        if mode in ("zero-shot", "few-shot-qa"):
            return answer_text_from_value(record.task, claims[graph.sink], graph)
        return render_response(graph, claims)


# ---------------------------------------------------------------------------
# HTTP endpoint
# ---------------------------------------------------------------------------


@dataclass
class HttpModel:
    """Chat-completions-style JSON POST transport with retries.

    The request body is {model, messages, temperature, top_p}; the response
    text is located by ``response_path`` (dot-separated keys / list indices).
    """

    spec: ModelSpec
    max_retries: int = 3
    timeout: float = 60.0
    _session: Any = field(default=None, repr=False)

    @property
    def model_id(self) -> str:
        return self.spec.model_id

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.spec.token_env:
            token = os.environ.get(self.spec.token_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def generate(self, record: DatasetRecord, prompt: str, mode: str) -> str:
        import requests

        if self._session is None:
            self._session = requests.Session()
        body = {
            "model": self.spec.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.spec.temperature,
            "top_p": self.spec.top_p,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                resp = self._session.post(self.spec.url, json=body, headers=self._headers(), timeout=self.timeout)
                if resp.status_code >= 500:
                    raise RuntimeError(f"server error {resp.status_code}")
                resp.raise_for_status()
                return _follow_path(resp.json(), self.spec.response_path)
            except Exception as exc:  # transient transport failures retry
                last_error = exc
                time.sleep(min(2.0**attempt, 8.0))
        raise RuntimeError(f"endpoint failed after {self.max_retries} attempts: {last_error}")


def _follow_path(obj: Any, path: str) -> str:
    cur = obj
    for part in path.split("."):
        if isinstance(cur, Mapping):
            cur = cur[part]
        else:
            cur = cur[int(part)]
    return str(cur)
