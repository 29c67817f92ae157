"""Scratchpad codec: render graphs to text and parse text back to claims.

``render_document`` produces the full question + scratchpad text for a
ground-truth graph (optionally with a claimed-value override map, which is
how the noisy oracle emits corrupted but well-formed scratchpads).

``parse_document`` is total: any input yields a :class:`PredictedGraph`
whose node claims are anchored on the fixed template skeleton. Lines that do
not match degrade to absent nodes plus diagnostics, never exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from ..graph import ComputationGraph, NodeValue
from ..tasks import dp as dp_task
from ..tasks import multiplication as mult_task
from ..tasks import puzzle as puzzle_task


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "warning" | "error"
    message: str
    line: int | None = None


@dataclass
class NodeClaim:
    """What the text claims about one canonical node address."""

    present: bool = False
    value: NodeValue | None = None
    args: tuple[NodeValue | None, ...] | None = None  # computation as written


@dataclass
class PredictedGraph:
    task: str
    claims: dict[str, NodeClaim] = field(default_factory=dict)
    final_answer: Any = None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def claim(self, address: str) -> NodeClaim:
        return self.claims.get(address, NodeClaim())

    def set_claim(
        self,
        address: str,
        value: NodeValue | None,
        args: tuple[NodeValue | None, ...] | None = None,
    ) -> None:
        self.claims[address] = NodeClaim(present=True, value=value, args=args)


# ---------------------------------------------------------------------------
# Shapes: the per-instance template parameters a parser needs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultShape:
    k1: int
    k2: int


@dataclass(frozen=True)
class DpShape:
    n: int


@dataclass(frozen=True)
class PuzzleShape:
    k: int
    m: int
    attributes: tuple[puzzle_task.AttributeDef, ...]
    clues: tuple[puzzle_task.Clue, ...]
    n_steps: int


def shape_of(graph: ComputationGraph):
    if graph.task == mult_task.TASK:
        return MultShape(graph.meta["k1"], graph.meta["k2"])
    if graph.task == dp_task.TASK:
        return DpShape(graph.meta["n"])
    if graph.task == puzzle_task.TASK:
        inst = puzzle_task.instance_from_meta(graph.meta)
        return PuzzleShape(inst.k, inst.m, inst.attributes, inst.clues, len(graph.meta.get("steps", [])))
    raise ValueError(f"unknown task {graph.task!r}")


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

from . import dp as dp_codec  # noqa: E402
from . import multiplication as mult_codec  # noqa: E402
from . import puzzle as puzzle_codec  # noqa: E402

_CODECS = {
    mult_task.TASK: mult_codec,
    dp_task.TASK: dp_codec,
    puzzle_task.TASK: puzzle_codec,
}


def render_document(graph: ComputationGraph, values: Mapping[str, NodeValue] | None = None) -> str:
    """Full question + scratchpad document for a graph.

    ``values`` overrides node values (claimed values); the template skeleton
    always follows the graph structure.
    """
    return _codec(graph.task).render_document(graph, values)


def render_response(graph: ComputationGraph, values: Mapping[str, NodeValue] | None = None) -> str:
    """The scratchpad portion only (what a model would emit)."""
    return _codec(graph.task).render_response(graph, values)


def parse_document(text: str, task: str, shape) -> PredictedGraph:
    if not isinstance(text, str):
        text = "" if text is None else str(text)
    return _codec(task).parse_document(text, shape)


def extract_final_answer(text: str, task: str):
    """Last well-formed answer-shaped token sequence, or None."""
    if not isinstance(text, str):
        return None
    return _codec(task).extract_final_answer(text)


def _codec(task: str):
    try:
        return _CODECS[task]
    except KeyError:
        raise ValueError(f"unknown task {task!r}") from None
