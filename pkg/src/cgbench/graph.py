"""Computation graphs of algorithm runs.

A graph records every intermediate value an algorithm produces: nodes carry a
value and a primitive-op tag, edges are the (ordered) arguments of that op,
sources are the inputs and the single leaf is the output. Task modules build
ground-truth graphs with canonical node addresses (e.g. ``digitmult[0][1]``)
so that predicted graphs parsed from model text can be aligned node-by-node
without any graph matching.

Everything here is pure: graphs are treated as immutable after construction
and all metric functions are side-effect free.
"""

from __future__ import annotations

import heapq
import json
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping

SOURCE = "SOURCE"

# NodeValue kinds.
KIND_INT = "int"
KIND_BOOL = "bool"
KIND_DIGIT = "digit"
KIND_DIGITS = "digits"
KIND_CELL = "cell"
KIND_TABLE = "table"
KIND_CLUE = "clue"

_KINDS = (KIND_INT, KIND_BOOL, KIND_DIGIT, KIND_DIGITS, KIND_CELL, KIND_TABLE, KIND_CLUE)


class GraphError(ValueError):
    """Raised for structurally unusable graphs (e.g. cycles in linearize)."""


@dataclass(frozen=True)
class NodeValue:
    """Tagged value carried by a node.

    ``payload`` is canonical immutable data per kind:

    - int:    Python int (arbitrary precision)
    - bool:   bool
    - digit:  int in [0, 9]
    - digits: tuple[int, ...]
    - cell:   (house, attribute, value) with a 1-based house index
    - table:  tuple of cell triples, sorted
    - clue:   (kind, args tuple)
    """

    kind: str
    payload: Any

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown value kind {self.kind!r}")
        if self.kind == KIND_DIGIT and not (isinstance(self.payload, int) and 0 <= self.payload <= 9):
            raise ValueError(f"digit out of range: {self.payload!r}")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def integer(v: int) -> "NodeValue":
        return NodeValue(KIND_INT, int(v))

    @staticmethod
    def boolean(v: bool) -> "NodeValue":
        return NodeValue(KIND_BOOL, bool(v))

    @staticmethod
    def digit(v: int) -> "NodeValue":
        return NodeValue(KIND_DIGIT, int(v))

    @staticmethod
    def digits(vs: Iterable[int]) -> "NodeValue":
        return NodeValue(KIND_DIGITS, tuple(int(v) for v in vs))

    @staticmethod
    def cell(house: int, attribute: str, value: str) -> "NodeValue":
        return NodeValue(KIND_CELL, (int(house), str(attribute), str(value)))

    @staticmethod
    def table(cells: Iterable[tuple[int, str, str]]) -> "NodeValue":
        return NodeValue(KIND_TABLE, tuple(sorted((int(h), str(a), str(v)) for h, a, v in cells)))

    @staticmethod
    def clue(kind: str, args: Iterable[Any]) -> "NodeValue":
        return NodeValue(KIND_CLUE, (str(kind), tuple(args)))

    # -- JSON ----------------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        payload: Any = self.payload
        if self.kind == KIND_DIGITS:
            payload = list(payload)
        elif self.kind == KIND_CELL:
            payload = list(payload)
        elif self.kind == KIND_TABLE:
            payload = [list(c) for c in payload]
        elif self.kind == KIND_CLUE:
            payload = {"kind": payload[0], "args": list(payload[1])}
        return {"kind": self.kind, "payload": payload}

    @staticmethod
    def from_json(obj: Mapping[str, Any]) -> "NodeValue":
        kind, payload = obj["kind"], obj["payload"]
        if kind == KIND_INT:
            return NodeValue.integer(payload)
        if kind == KIND_BOOL:
            return NodeValue.boolean(payload)
        if kind == KIND_DIGIT:
            return NodeValue.digit(payload)
        if kind == KIND_DIGITS:
            return NodeValue.digits(payload)
        if kind == KIND_CELL:
            return NodeValue.cell(*payload)
        if kind == KIND_TABLE:
            return NodeValue.table(tuple(c) for c in payload)
        if kind == KIND_CLUE:
            return NodeValue.clue(payload["kind"], payload["args"])
        raise ValueError(f"unknown value kind {kind!r}")


@dataclass(frozen=True)
class Node:
    id: str
    value: NodeValue
    op: str
    parents: tuple[str, ...] = ()

    @property
    def is_source(self) -> bool:
        return self.op == SOURCE


@dataclass
class ComputationGraph:
    """Labeled DAG of one algorithm run.

    ``meta`` carries task parameters needed for self-contained re-evaluation
    and rendering (puzzle attribute domains, greedy trace, sizes); it is
    serialized with the graph.
    """

    task: str
    nodes: dict[str, Node]
    sink: str
    meta: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: str) -> Node:
        return self.nodes[node_id]

    def sources(self) -> list[str]:
        return [n.id for n in self.nodes.values() if n.is_source]

    def children_index(self) -> dict[str, list[str]]:
        children: dict[str, list[str]] = {nid: [] for nid in self.nodes}
        for node in self.nodes.values():
            for p in node.parents:
                if p in children:
                    children[p].append(node.id)
        return children


# ---------------------------------------------------------------------------
# Op registry
# ---------------------------------------------------------------------------
#
# Op tags are namespaced ("mul.digit_mul", "dp.max_step", "puzzle.eliminate").
# A tag may carry an integer parameter after a colon ("mul.shift:2"). Arity
# None means variadic (>= 1 parent).

OpFn = Callable[[list[NodeValue], int | None, "ComputationGraph"], NodeValue]


@dataclass(frozen=True)
class OpSpec:
    arity: int | None
    fn: OpFn


_OP_REGISTRY: dict[str, OpSpec] = {}


def register_op(tag: str, arity: int | None, fn: OpFn) -> None:
    _OP_REGISTRY[tag] = OpSpec(arity, fn)


def split_op_tag(tag: str) -> tuple[str, int | None]:
    if ":" in tag:
        base, param = tag.split(":", 1)
        return base, int(param)
    return tag, None


def op_spec(tag: str) -> OpSpec | None:
    base, _ = split_op_tag(tag)
    return _OP_REGISTRY.get(base)


def evaluate_op(tag: str, args: list[NodeValue], graph: "ComputationGraph") -> NodeValue:
    """Recompute a node value from its op tag and argument values."""
    base, param = split_op_tag(tag)
    spec = _OP_REGISTRY.get(base)
    if spec is None:
        raise KeyError(f"unregistered op {tag!r}")
    return spec.fn(args, param, graph)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    check: str
    node_id: str | None
    message: str


@dataclass
class ValidationReport:
    ok: bool
    violations: list[Violation]

    def __bool__(self) -> bool:
        return self.ok


def validate(graph: ComputationGraph, reevaluate: bool = True) -> ValidationReport:
    """Check the definitional constraints of a computation graph.

    Reports acyclicity, single-sink reachability, SOURCE/parents coherence,
    op arity, and (with ``reevaluate``, for ground-truth graphs) that every
    non-source value is reproduced by its op over its parents.
    """
    violations: list[Violation] = []

    for node in graph.nodes.values():
        for p in node.parents:
            if p not in graph.nodes:
                violations.append(Violation("parents", node.id, f"missing parent {p!r}"))
        if node.is_source and node.parents:
            violations.append(Violation("source", node.id, "SOURCE node has parents"))
        if not node.is_source and not node.parents:
            violations.append(Violation("source", node.id, "non-SOURCE node has no parents"))

    if graph.sink not in graph.nodes:
        violations.append(Violation("sink", None, f"sink {graph.sink!r} not in graph"))
        return ValidationReport(False, violations)

    order = _topological_order(graph)
    if order is None:
        violations.append(Violation("acyclic", None, "graph contains a cycle"))
        return ValidationReport(False, violations)

    children = graph.children_index()
    leaves = [nid for nid, ch in children.items() if not ch]
    if leaves != [graph.sink]:
        extra = [nid for nid in leaves if nid != graph.sink]
        for nid in extra:
            violations.append(Violation("single-sink", nid, "leaf node is not the sink"))
        if graph.sink not in leaves:
            violations.append(Violation("single-sink", graph.sink, "sink has children"))

    # Every node must reach the sink: walk the reverse graph from the sink.
    reached = {graph.sink}
    stack = [graph.sink]
    while stack:
        nid = stack.pop()
        for p in graph.nodes[nid].parents:
            if p in graph.nodes and p not in reached:
                reached.add(p)
                stack.append(p)
    for nid in graph.nodes:
        if nid not in reached:
            violations.append(Violation("reach-sink", nid, "node does not reach the sink"))

    for node in graph.nodes.values():
        if node.is_source:
            continue
        spec = op_spec(node.op)
        if spec is None:
            violations.append(Violation("op", node.id, f"unregistered op {node.op!r}"))
            continue
        if spec.arity is not None and len(node.parents) != spec.arity:
            violations.append(
                Violation("arity", node.id, f"op {node.op!r} expects {spec.arity} parents, got {len(node.parents)}")
            )
        elif spec.arity is None and not node.parents:
            violations.append(Violation("arity", node.id, f"variadic op {node.op!r} has no parents"))

    if reevaluate and not violations:
        for nid in order:
            node = graph.nodes[nid]
            if node.is_source:
                continue
            args = [graph.nodes[p].value for p in node.parents]
            try:
                recomputed = evaluate_op(node.op, args, graph)
            except Exception as exc:  # op raised on malformed args
                violations.append(Violation("reevaluate", nid, f"op {node.op!r} failed: {exc}"))
                continue
            if recomputed != node.value:
                violations.append(
                    Violation("reevaluate", nid, f"stored {node.value} but op gives {recomputed}")
                )

    return ValidationReport(not violations, violations)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def _topological_order(graph: ComputationGraph) -> list[str] | None:
    """Kahn order (insertion-based tie-break); None if the graph is cyclic."""
    indegree = {nid: len(n.parents) for nid, n in graph.nodes.items()}
    children = graph.children_index()
    queue = deque(nid for nid, d in indegree.items() if d == 0)
    order: list[str] = []
    while queue:
        nid = queue.popleft()
        order.append(nid)
        for c in children[nid]:
            indegree[c] -= 1
            if indegree[c] == 0:
                queue.append(c)
    if len(order) != len(graph.nodes):
        return None
    return order


# Per-task canonical order keys, registered by the task modules so that
# linearize() reproduces the scratchpad step sequence.
_ORDER_KEYS: dict[str, Callable[[str], tuple]] = {}


def register_order_key(task: str, key: Callable[[str], tuple]) -> None:
    _ORDER_KEYS[task] = key


def linearize(graph: ComputationGraph) -> list[str]:
    """Deterministic topological order matching the task's scratchpad order.

    Ties are broken by the task's canonical address key (falling back to the
    raw id), so the order is independent of dict insertion order.
    """
    keyfn = _ORDER_KEYS.get(graph.task)

    def sort_key(nid: str) -> tuple:
        return keyfn(nid) if keyfn is not None else (nid,)

    indegree = {nid: len(n.parents) for nid, n in graph.nodes.items()}
    children = graph.children_index()
    heap = [(sort_key(nid), nid) for nid, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        _, nid = heapq.heappop(heap)
        order.append(nid)
        for c in children[nid]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(heap, (sort_key(c), c))
    if len(order) != len(graph.nodes):
        raise GraphError("cannot linearize a cyclic graph")
    return order


def layer_numbers(graph: ComputationGraph) -> dict[str, int]:
    """Longest path length from any source, per node (sources map to 0)."""
    order = _topological_order(graph)
    if order is None:
        raise GraphError("cannot compute layers of a cyclic graph")
    layers: dict[str, int] = {}
    for nid in order:
        node = graph.nodes[nid]
        layers[nid] = 0 if node.is_source else 1 + max(layers[p] for p in node.parents)
    return layers


def reasoning_depth(graph: ComputationGraph) -> int:
    return max(layer_numbers(graph).values())


def source_distances(graph: ComputationGraph) -> dict[str, int]:
    """Shortest directed distance from any source to each node (BFS)."""
    children = graph.children_index()
    dist = {nid: 0 for nid in graph.sources()}
    queue = deque(dist)
    while queue:
        nid = queue.popleft()
        for c in children[nid]:
            if c not in dist:
                dist[c] = dist[nid] + 1
                queue.append(c)
    return dist


def reasoning_width(graph: ComputationGraph) -> int:
    """Mode of the source-distance multiset; smallest value on ties.

    Sources are included at distance 0.
    """
    counts = Counter(source_distances(graph).values())
    best = max(counts.values())
    return min(d for d, c in counts.items() if c == best)


def average_parallelism(graph: ComputationGraph) -> Fraction:
    """|V| / reasoning depth, exact; defined as |V| for depth-0 graphs."""
    depth = reasoning_depth(graph)
    if depth == 0:
        return Fraction(len(graph.nodes))
    return Fraction(len(graph.nodes), depth)


@dataclass(frozen=True)
class GraphStats:
    node_count: int
    depth: int
    width: int
    average_parallelism: Fraction

    def to_json(self) -> dict[str, Any]:
        return {
            "node_count": self.node_count,
            "depth": self.depth,
            "width": self.width,
            "average_parallelism": float(self.average_parallelism),
        }


def graph_stats(graph: ComputationGraph) -> GraphStats:
    return GraphStats(
        node_count=len(graph.nodes),
        depth=reasoning_depth(graph),
        width=reasoning_width(graph),
        average_parallelism=average_parallelism(graph),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def graph_to_json_obj(graph: ComputationGraph) -> dict[str, Any]:
    return {
        "task": graph.task,
        "sink": graph.sink,
        "meta": graph.meta,
        "nodes": [
            {
                "id": n.id,
                "op": n.op,
                "value": n.value.to_json(),
                "parents": list(n.parents),
            }
            for n in sorted(graph.nodes.values(), key=lambda n: n.id)
        ],
    }


def graph_to_json(graph: ComputationGraph) -> str:
    """Canonical JSON: sorted node order, sorted keys, compact separators."""
    return json.dumps(graph_to_json_obj(graph), sort_keys=True, separators=(",", ":"))


def graph_from_json_obj(obj: Mapping[str, Any]) -> ComputationGraph:
    nodes = {
        n["id"]: Node(
            id=n["id"],
            value=NodeValue.from_json(n["value"]),
            op=n["op"],
            parents=tuple(n["parents"]),
        )
        for n in obj["nodes"]
    }
    return ComputationGraph(task=obj["task"], nodes=nodes, sink=obj["sink"], meta=dict(obj.get("meta", {})))


def graph_from_json(text: str) -> ComputationGraph:
    return graph_from_json_obj(json.loads(text))
