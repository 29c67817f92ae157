"""Render/parse the puzzle prompt, reasoning trace and final table."""

from __future__ import annotations

import re
from typing import Mapping, Sequence

from ..graph import KIND_TABLE, ComputationGraph, NodeValue
from ..tasks import puzzle as task
from . import Diagnostic, PredictedGraph, PuzzleShape

INSTRUCTION = (
    "Let's think step by step. Please first briefly talk about your reasoning"
    " and show your final solution by filling the blanks in the below table."
)


def question_text(attributes: Sequence[task.AttributeDef], clues: Sequence[task.Clue], k: int) -> str:
    lines = [
        f"This is a logic puzzle. There are {k} houses (numbered 1 on the left, {k} on the right)."
        " Each has a different person in them. They have different characteristics:"
    ]
    for a in attributes:
        lines.append("- " + a.bullet.format(values=", ".join(a.values)))
    lines.append("")
    for i, clue in enumerate(clues, start=1):
        lines.append(f"{i}. {clue.text}")
    lines.append("")
    lines.append(INSTRUCTION)
    lines.append("")
    skeleton = "$ House: ___ " + "".join(f"$ {a.column}: ___ " for a in attributes)
    lines.extend([skeleton] * k)
    return "\n".join(lines) + "\n"


def render_document(graph: ComputationGraph, values: Mapping[str, NodeValue] | None = None) -> str:
    inst = task.instance_from_meta(graph.meta)
    return question_text(inst.attributes, inst.clues, inst.k) + "\n" + render_response(graph, values)


def render_response(graph: ComputationGraph, values: Mapping[str, NodeValue] | None = None) -> str:
    inst = task.instance_from_meta(graph.meta)
    steps = graph.meta.get("steps", [])
    attr_order = {a.key: i for i, a in enumerate(inst.attributes)}

    def cells_of(nid: str) -> dict[tuple[int, str], str]:
        v = values.get(nid) if values is not None else None
        if v is None:
            v = graph.nodes[nid].value
        if v.kind != KIND_TABLE:
            return {}
        return {(h, key): val for h, key, val in v.payload}

    lines = ["Reasoning: "]
    prev: dict[tuple[int, str], str] = {}
    for t, step in enumerate(steps, start=1):
        cur = cells_of(f"step[{t}]")
        fills = sorted(
            (addr for addr in cur if prev.get(addr) != cur[addr]),
            key=lambda addr: (addr[0], attr_order.get(addr[1], 99)),
        )
        sentences = " ".join(f"The {key} in house {h} is {cur[(h, key)]}." for h, key in fills)
        prefix = "First" if t == 1 else "Then"
        clue_ids = step["clues"]
        if len(clue_ids) == 1:
            clause = f"apply clue <{inst.clues[clue_ids[0] - 1].text}>"
            if step["closure"]:
                clause += " and Unique Values"
        else:
            quoted = " ".join(f"<{inst.clues[i - 1].text}>" for i in sorted(clue_ids, reverse=True))
            clause = f"combine clues: {quoted}  Unique Values Rules and the fixed table structure."
        lines.append(f"Step {t}: {prefix} {clause} We know that {sentences}")
        prev = cur
    lines.append("The puzzle is solved.")
    lines.append("")
    lines.append("Final solution:")
    lines.extend(_table_rows(inst, cells_of(graph.sink)))
    return "\n".join(lines) + "\n"


def _table_rows(inst: task.PuzzleInstance, cells: Mapping[tuple[int, str], str]) -> list[str]:
    shorts: dict[str, dict[int, str]] = {}
    for a in inst.attributes:
        shorts[a.key] = {}
        for h in range(1, inst.k + 1):
            value = cells.get((h, a.key))
            shorts[a.key][h] = a.shorts.get(value, "___") if value is not None else "___"
    widths = {a.key: max(len(s) for s in shorts[a.key].values()) for a in inst.attributes}
    rows = []
    for h in range(1, inst.k + 1):
        row = f"$ House: {h} "
        for idx, a in enumerate(inst.attributes):
            s = shorts[a.key][h]
            if idx < len(inst.attributes) - 1:
                s = s.ljust(widths[a.key])
            row += f"$ {a.column}: {s} "
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_STEP_RE = re.compile(r"^Step (\d+):(.*)$")
_FILL_RE = re.compile(r"The (\w+) in house (\d+) is ([^.<>]+)\.")
_QUOTE_RE = re.compile(r"<([^<>]*)>")
_ROW_RE = re.compile(r"^\$ House: (\d+) \$ (.*)$")


def parse_document(text: str, shape: PuzzleShape) -> PredictedGraph:
    pred = PredictedGraph(task=task.TASK)
    attr_by_key = {a.key: a for a in shape.attributes}
    clue_by_text = {c.text: i for i, c in enumerate(shape.clues, start=1)}

    cells: dict[tuple[int, str], str] = {}
    prev_value: NodeValue | None = None
    cited_any: set[int] = set()
    in_final = False
    final_rows: list[tuple[int, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if line.startswith("Final solution:"):
            in_final = True
            continue
        m = _ROW_RE.match(line)
        if m:
            final_rows.append((int(m.group(1)), m.group(2)))
            continue
        if line.startswith("$ House:"):
            if not line.startswith("$ House: ___"):  # the prompt's blank skeleton is fine
                pred.diagnostics.append(Diagnostic("error", "malformed table row", lineno))
            continue
        m = _STEP_RE.match(line)
        if m is None:
            continue
        t, rest = int(m.group(1)), m.group(2)
        if not (1 <= t <= shape.n_steps):
            pred.diagnostics.append(Diagnostic("error", f"step {t} outside the {shape.n_steps}-step trace", lineno))
            continue
        clue_args: list[NodeValue | None] = []
        for quoted in _QUOTE_RE.findall(rest):
            idx = clue_by_text.get(quoted.strip())
            if idx is None:
                pred.diagnostics.append(Diagnostic("warning", f"step {t} cites an unknown clue", lineno))
                clue_args.append(None)
            else:
                cited_any.add(idx)
                clue_args.append(shape.clues[idx - 1].to_value())
        fills = _FILL_RE.findall(rest)
        if not fills and not clue_args:
            pred.diagnostics.append(Diagnostic("error", f"step {t} carries no clue or fill", lineno))
        for key, house, value in fills:
            value = value.strip()
            attr = attr_by_key.get(key)
            if attr is None or value not in attr.values or not (1 <= int(house) <= shape.k):
                pred.diagnostics.append(Diagnostic("warning", f"step {t} fills an unknown cell", lineno))
                continue
            cells[(int(house), key)] = value
        step_value = NodeValue.table((h, key, v) for (h, key), v in cells.items())
        args = ([prev_value] if t > 1 else []) + clue_args
        pred.set_claim(f"step[{t}]", step_value, tuple(args))
        prev_value = step_value

    for idx in sorted(cited_any):
        pred.set_claim(f"clue[{idx}]", shape.clues[idx - 1].to_value())

    if in_final or final_rows:
        answer = _parse_table(final_rows, shape, pred)
        pred.final_answer = answer
    else:
        pred.final_answer = extract_final_answer_with_shape(text, shape)
    return pred


def _parse_table(rows: Sequence[tuple[int, str]], shape: PuzzleShape, pred: PredictedGraph | None) -> NodeValue | None:
    reverse: dict[str, dict[str, str]] = {}
    column_to_key = {}
    for a in shape.attributes:
        column_to_key[a.column] = a.key
        reverse[a.key] = {a.shorts[v].lower(): v for v in a.values}
        reverse[a.key].update({v.lower(): v for v in a.values})
    cells = []
    for house, rest in rows[-shape.k :] if rows else []:
        if not (1 <= house <= shape.k):
            continue
        for field in rest.split("$"):
            field = field.strip()
            if not field or ":" not in field:
                continue
            label, display = (s.strip() for s in field.split(":", 1))
            key = column_to_key.get(label)
            if key is None:
                continue
            value = reverse[key].get(display.lower())
            if value is not None:
                cells.append((house, key, value))
            elif display != "___" and pred is not None:
                pred.diagnostics.append(Diagnostic("warning", f"unknown table entry {display!r} for {label}"))
    if not cells:
        return None
    return NodeValue.table(cells)


def extract_final_answer_with_shape(text: str, shape: PuzzleShape) -> NodeValue | None:
    rows = [(int(m.group(1)), m.group(2)) for m in (_ROW_RE.match(l) for l in text.splitlines()) if m]
    if not rows:
        return None
    return _parse_table(rows, shape, None)


def extract_final_answer(text: str) -> list[tuple[int, str, str]] | None:
    """Shape-free extraction: raw (house, column-label, display) triples."""
    rows = [(int(m.group(1)), m.group(2)) for m in (_ROW_RE.match(l) for l in text.splitlines()) if m]
    if not rows:
        return None
    out = []
    for house, rest in rows:
        for field in rest.split("$"):
            field = field.strip()
            if field and ":" in field:
                label, display = (s.strip() for s in field.split(":", 1))
                out.append((house, label, display))
    return out or None
