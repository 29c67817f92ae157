"""Render/parse the DP scratchpad."""

from __future__ import annotations

import re
from typing import Mapping

from ..graph import ComputationGraph, NodeValue
from ..tasks import dp as task
from . import Diagnostic, DpShape, PredictedGraph

_RECONSTRUCT_PREAMBLE = (
    "Finally, we reconstruct the lexicographically smallest subsequence that fulfills"
    ' the task objective by selecting numbers as follows. We store the result on a list named "output".'
)


def render_document(graph: ComputationGraph, values: Mapping[str, NodeValue] | None = None) -> str:
    question = task.format_list(graph.meta["input"])
    return f"Question: Let's solve input = {question}.\n\n" + render_response(graph, values)


def render_response(graph: ComputationGraph, values: Mapping[str, NodeValue] | None = None) -> str:
    n = graph.meta["n"]

    def val(nid: str):
        v = values.get(nid) if values is not None else None
        if v is None:
            v = graph.nodes[nid].value
        return v.payload

    lines: list[str] = []
    lines.append(f"Scratchpad: dp[{n - 1}] = max(input[{n - 1}], 0) = max({val(f'input[{n - 1}]')}, 0) = {val(f'dp[{n - 1}]')}")
    if n >= 2:
        lines.append(
            f"dp[{n - 2}] = max(input[{n - 2}], input[{n - 1}], 0)"
            f" = max({val(f'input[{n - 2}]')}, {val(f'input[{n - 1}]')}, 0) = {val(f'dp[{n - 2}]')}"
        )
    for i in range(n - 3, -1, -1):
        lines.append(
            f"dp[{i}] = max(dp[{i + 1}], input[{i}] + dp[{i + 2}], 0)"
            f" = max({val(f'dp[{i + 1}]')}, {val(f'input[{i}]')} + {val(f'dp[{i + 2}]')}, 0) = {val(f'dp[{i}]')}"
        )
    lines.append("")
    lines.append(_RECONSTRUCT_PREAMBLE)
    lines.append("")
    lines.append("Let can_use_next_item = True.")

    for i in range(n):
        o = val(f"output[{i}]")
        boundary = i >= n - 2
        if boundary:
            cond = (
                f"dp[{i}] == input[{i}] ({val(f'dp[{i}]')} == {val(f'input[{i}]')}) and can_use_next_item == True"
                if o == 1
                else f"dp[{i}] != input[{i}] ({val(f'dp[{i}]')} != {val(f'input[{i}]')}) or can_use_next_item == False"
            )
        else:
            lhs = f"dp[{i}]"
            rhs = f"input[{i}] + dp[{i + 2}]"
            nums = f"{val(f'dp[{i}]')} {'==' if o == 1 else '!='} {val(f'input[{i}]')} + {val(f'dp[{i + 2}]')}"
            cond = (
                f"{lhs} == {rhs} ({nums}) and can_use_next_item == True"
                if o == 1
                else f"{lhs} != {rhs} ({nums}) or can_use_next_item == False"
            )
        line = f"Since {cond}, we store output[{i}] = {o}."
        if i < n - 1:
            line += f" We update can_use_next_item = {val(f'canuse[{i + 1}]')}."
        lines.append(line)

    lines.append("")
    lines.append(f"Reconstructing all together, output={task.format_list(list(val('output')))}.")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_DP_LAST_RE = re.compile(
    r"^(?:Scratchpad: )?dp\[(\d+)\] = max\(input\[(\d+)\], 0\) = max\((-?\d+), 0\) = (-?\d+)$"
)
_DP_PAIR_RE = re.compile(
    r"^(?:Scratchpad: )?dp\[(\d+)\] = max\(input\[(\d+)\], input\[(\d+)\], 0\)"
    r" = max\((-?\d+), (-?\d+), 0\) = (-?\d+)$"
)
_DP_STEP_RE = re.compile(
    r"^(?:Scratchpad: )?dp\[(\d+)\] = max\(dp\[(\d+)\], input\[(\d+)\] \+ dp\[(\d+)\], 0\)"
    r" = max\((-?\d+), (-?\d+) \+ (-?\d+), 0\) = (-?\d+)$"
)
_SINCE_RE = re.compile(
    r"^Since dp\[(\d+)\] (?:==|!=) input\[(\d+)\]( \+ dp\[(\d+)\])?"
    r" \((-?\d+) (?:==|!=) (-?\d+)(?: \+ (-?\d+))?\)"
    r" (?:and can_use_next_item == True|or can_use_next_item == False),"
    r" we store output\[(\d+)\] = (1|2)\.(?: We update can_use_next_item = (True|False)\.)?$"
)
_OUTPUT_RE = re.compile(r"Reconstructing all together, output=\[([^\]]*)\]\.")
_LIST_RE = re.compile(r"\[\s*(?:-?\d+\s*(?:,\s*-?\d+\s*)*)?\]")
_LOOSE_RE = re.compile(r"^(?:(?:Scratchpad: )?dp\[|Since )")


def _digitish(v: int) -> NodeValue:
    return NodeValue.digit(v) if 0 <= v <= 9 else NodeValue.integer(v)


def parse_document(text: str, shape: DpShape) -> PredictedGraph:
    n = shape.n
    pred = PredictedGraph(task=task.TASK)
    updates: dict[int, bool] = {}  # canuse index -> claimed flag
    since_rows: list[tuple[int, tuple[int, ...], int, int | None]] = []

    def claim_input(idx: int, v: int) -> None:
        addr = f"input[{idx}]"
        if addr not in pred.claims:
            pred.set_claim(addr, NodeValue.integer(v))
        elif pred.claims[addr].value.payload != v:
            pred.diagnostics.append(Diagnostic("warning", f"conflicting restatement of {addr}"))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line:
            continue
        m = _DP_LAST_RE.match(line)
        if m:
            i, a_idx, a, v = (int(m.group(g)) for g in range(1, 5))
            if i != n - 1:
                pred.diagnostics.append(Diagnostic("error", f"dp[{i}] has the base-case form but n={n}", lineno))
                continue
            if a_idx != i:
                pred.diagnostics.append(Diagnostic("warning", f"dp[{i}] reads input[{a_idx}]", lineno))
            claim_input(i, a)
            pred.set_claim(f"dp[{i}]", NodeValue.integer(v), (NodeValue.integer(a),))
            continue
        m = _DP_PAIR_RE.match(line)
        if m:
            i, ia, ib, a, b, v = (int(m.group(g)) for g in range(1, 7))
            if i != n - 2:
                pred.diagnostics.append(Diagnostic("error", f"dp[{i}] has the pair form but n={n}", lineno))
                continue
            if (ia, ib) != (i, i + 1):
                pred.diagnostics.append(Diagnostic("warning", f"dp[{i}] reads inputs {ia},{ib}", lineno))
            claim_input(i, a)
            claim_input(i + 1, b)
            pred.set_claim(f"dp[{i}]", NodeValue.integer(v), (NodeValue.integer(a), NodeValue.integer(b)))
            continue
        m = _DP_STEP_RE.match(line)
        if m:
            i, idp1, ia, idp2, dp1, a, dp2, v = (int(m.group(g)) for g in range(1, 9))
            if not (0 <= i <= n - 3):
                pred.diagnostics.append(Diagnostic("error", f"dp[{i}] outside shape n={n}", lineno))
                continue
            if (idp1, ia, idp2) != (i + 1, i, i + 2):
                pred.diagnostics.append(Diagnostic("warning", f"dp[{i}] reads dp[{idp1}], input[{ia}], dp[{idp2}]", lineno))
            claim_input(i, a)
            pred.set_claim(
                f"dp[{i}]",
                NodeValue.integer(v),
                (NodeValue.integer(dp1), NodeValue.integer(a), NodeValue.integer(dp2)),
            )
            continue
        m = _SINCE_RE.match(line)
        if m:
            i, ia = int(m.group(1)), int(m.group(2))
            out_i, o = int(m.group(8)), int(m.group(9))
            if i != out_i or ia != out_i:
                pred.diagnostics.append(Diagnostic("warning", f"selection line mixes indices for output[{out_i}]", lineno))
            if not (0 <= out_i < n):
                pred.diagnostics.append(Diagnostic("error", f"output[{out_i}] outside shape n={n}", lineno))
                continue
            has_dp2 = m.group(3) is not None
            if has_dp2 and int(m.group(4)) != out_i + 2:
                pred.diagnostics.append(Diagnostic("warning", f"selection line reads dp[{m.group(4)}]", lineno))
            boundary_expected = out_i >= n - 2
            if has_dp2 == boundary_expected:
                pred.diagnostics.append(Diagnostic("error", f"selection line for output[{out_i}] has the wrong form", lineno))
                continue
            dp_v, a_v = int(m.group(5)), int(m.group(6))
            dp2_v = int(m.group(7)) if m.group(7) is not None else None
            since_rows.append((out_i, (dp_v, a_v), o, dp2_v))
            if m.group(10) is not None:
                updates[out_i + 1] = m.group(10) == "True"
            continue
        if _LOOSE_RE.match(line):
            pred.diagnostics.append(Diagnostic("error", "malformed template line", lineno))
        elif line.startswith("Reconstructing") and not _OUTPUT_RE.search(line):
            pred.diagnostics.append(Diagnostic("error", "malformed output line", lineno))

    for idx, flag in updates.items():
        if 1 <= idx <= n - 1:
            pred.set_claim(f"canuse[{idx}]", NodeValue.boolean(flag), (pred.claim(f"output[{idx - 1}]").value,))

    for out_i, (dp_v, a_v), o, dp2_v in since_rows:
        boundary = out_i >= n - 2
        args: list[NodeValue | None] = [NodeValue.integer(dp_v), NodeValue.integer(a_v)]
        if not boundary:
            args.append(NodeValue.integer(dp2_v) if dp2_v is not None else None)
        if out_i > 0:
            args.append(pred.claim(f"canuse[{out_i}]").value)
        pred.set_claim(f"output[{out_i}]", NodeValue.digit(o), tuple(args))

    for idx, flag in updates.items():
        if 1 <= idx <= n - 1:
            pred.set_claim(f"canuse[{idx}]", NodeValue.boolean(flag), (pred.claim(f"output[{idx - 1}]").value,))

    m = None
    for m in _OUTPUT_RE.finditer(text):
        pass
    if m is not None:
        items = [int(s) for s in re.findall(r"-?\d+", m.group(1))]
        value = NodeValue.digits(items) if all(0 <= v <= 9 for v in items) else None
        # the stated computation gathers the stored per-position selections
        args = tuple(pred.claim(f"output[{i}]").value for i in range(n))
        pred.set_claim("output", value, args)

    pred.final_answer = extract_final_answer(text)
    return pred


def extract_final_answer(text: str) -> tuple[int, ...] | None:
    last = None
    for m in _LIST_RE.finditer(text):
        last = m.group(0)
    if last is None:
        return None
    return tuple(int(s) for s in re.findall(r"-?\d+", last))
