"""Render/parse the long-form multiplication scratchpad."""

from __future__ import annotations

import re
from typing import Mapping

from ..graph import ComputationGraph, NodeValue
from ..tasks import multiplication as task
from . import Diagnostic, MultShape, PredictedGraph

PLACES = ("ones", "tens", "hundreds", "thousands", "ten thousands")
SHIFT_WORDS = ("", "one", "two", "three", "four")


def _value_lookup(graph: ComputationGraph, values: Mapping[str, NodeValue] | None):
    def val(nid: str) -> int:
        v = values.get(nid) if values is not None else None
        if v is None:
            v = graph.nodes[nid].value
        return v.payload

    return val


def render_document(graph: ComputationGraph, values: Mapping[str, NodeValue] | None = None) -> str:
    x, y = graph.meta["x"], graph.meta["y"]
    return f"Question: What is {x} times {y}?\n\n" + render_response(graph, values)


def render_response(graph: ComputationGraph, values: Mapping[str, NodeValue] | None = None) -> str:
    k1, k2 = graph.meta["k1"], graph.meta["k2"]
    val = _value_lookup(graph, values)
    x_disp = "".join(str(val(f"x[{j}]")) for j in range(k1 - 1, -1, -1))
    y_disp = "".join(str(val(f"y[{i}]")) for i in range(k2 - 1, -1, -1))

    lines: list[str] = ["Scratchpad: Let's perform the multiplication step by step:", ""]
    step_no = 0
    for i in range(k2):
        yd = val(f"y[{i}]")
        if i == 0:
            lines.append(f"Let's multiply {x_disp} by the digit in the ones place of {y_disp}, which is {yd}.")
        else:
            lines.append(
                f"Now, let's multiply {x_disp} by the digit in the {PLACES[i]} place of {y_disp}, which is {yd}."
            )
        lines.append("")
        for j in range(k1):
            step_no += 1
            xd = val(f"x[{j}]")
            t = val(f"digitmult[{i}][{j}]")
            carry_in = val(f"carry[{i}][{j - 1}]") if j > 0 else 0
            head = f"{step_no}. Multiply {yd} by the digit in the {PLACES[j]} place of {x_disp}, which is {xd}."
            if j > 0 and carry_in != 0:
                gives = (
                    " Add the carryover from the previous step to account for this."
                    f" This gives ({xd} x {yd}) + {carry_in} = {t}."
                )
            else:
                gives = f" This gives {xd} x {yd} = {t}."
            if j < k1 - 1:
                w, c = val(f"partial-digit[{i}][{j}]"), val(f"carry[{i}][{j}]")
                if c != 0:
                    write = f" Write down the result {w} and carry over the {c} to the next step."
                else:
                    write = f" Write down the result {w}."
            else:
                write = f" Write down the result {t}."
            lines.append(head + gives + write)
        step_no += 1
        letter = chr(ord("A") + i)
        pp = val(f"partial-product[{i}]")
        lines.append(
            f"{step_no}. The partial product for this step is {letter}={pp}"
            " which is the concatenation of the digits we found in each step."
        )
        lines.append("")

    letters = [chr(ord("A") + i) for i in range(k2)]
    descs = []
    for i in range(k2):
        pp, yd = val(f"partial-product[{i}]"), val(f"y[{i}]")
        if i == 0:
            descs.append(f"{letters[i]}={pp} (from multiplication by {yd})")
        else:
            shifted = val(f"shifted[{i}]")
            place = "one place" if i == 1 else f"{SHIFT_WORDS[i]} places"
            descs.append(
                f"{letters[i]}={pp} (from multiplication by {yd}"
                f" but shifted {place} to the left, so it becomes {shifted})"
            )
    terms = " + ".join(f"{val(f'partial-product[{i}]')} x {10 ** i}" for i in range(k2))
    sums = " + ".join(str(val(f"shifted[{i}]")) for i in range(k2))
    total = val("product")
    lines.append(
        f"Now, let's sum the {k2} partial products {_join(letters)}, and take into account"
        f" the position of each digit: {_join(descs)}."
        f" The final answer is {terms} = {sums} = {total}."
    )
    return "\n".join(lines) + "\n"


def _join(items: list[str]) -> str:
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " and " + items[-1]


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_STEP_RE = re.compile(
    r"^(\d+)\. Multiply (\d) by the digit in the ([a-z ]+) place of (\d+), which is (\d)\."
    r"(?: Add the carryover from the previous step to account for this\."
    r" This gives \((\d) x (\d)\) \+ (\d+) = (\d+)\."
    r"| This gives (\d) x (\d) = (\d+)\.)"
    r" Write down the result (\d+)(?: and carry over the (\d+) to the next step)?\.$"
)
_PP_RE = re.compile(
    r"^(\d+)\. The partial product for this step is ([A-Z])=(\d+)"
    r" which is the concatenation of the digits we found in each step\.$"
)
_SECTION_RE = re.compile(
    r"^(?:Let's|Now, let's) multiply (\d+) by the digit in the ([a-z ]+) place of (\d+), which is (\d)\.$"
)
_SUM_COUNT_RE = re.compile(r"Now, let's sum the (\d+) partial products")
_DESC_RE = re.compile(
    r"([A-Z])=(\d+) \(from multiplication by (\d)"
    r"(?: but shifted [a-z ]+ places? to the left, so it becomes (\d+))?\)"
)
_FINAL_RE = re.compile(r"The final answer is (.+?) = (.+?) = (\d+)\.")
_INT_RE = re.compile(r"-?\d+")

# Loose anchors: a line that looks like a template line but fails its strict
# regex is flagged as malformed rather than silently skipped.
_LOOSE_RES = (
    re.compile(r"^\d+\. Multiply "),
    re.compile(r"^\d+\. The partial product "),
    re.compile(r"^(?:Let's|Now, let's) multiply "),
)


def _digit_value(raw: int) -> NodeValue:
    return NodeValue.digit(raw) if 0 <= raw <= 9 else NodeValue.integer(raw)


def parse_document(text: str, shape: MultShape) -> PredictedGraph:
    k1, k2 = shape.k1, shape.k2
    pred = PredictedGraph(task=task.TASK)
    written: dict[tuple[int, int], int] = {}
    x_displays: list[tuple[int, str]] = []  # restated whole-x strings, cross-checked at the end
    y_displays: list[tuple[int, str]] = []

    def claim_source(addr: str, digit: int, lineno: int) -> None:
        if addr not in pred.claims:
            pred.set_claim(addr, _digit_value(digit))
        elif pred.claims[addr].value != _digit_value(digit):
            pred.diagnostics.append(Diagnostic("warning", f"conflicting restatement of {addr}", lineno))

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            place, yd = m.group(2), int(m.group(4))
            x_displays.append((lineno, m.group(1)))
            y_displays.append((lineno, m.group(3)))
            if place in PLACES:
                section_i = PLACES.index(place)
                if section_i < k2:
                    claim_source(f"y[{section_i}]", yd, lineno)
                else:
                    pred.diagnostics.append(Diagnostic("error", f"section beyond shape: {place}", lineno))
            else:
                pred.diagnostics.append(Diagnostic("error", f"unknown place {place!r}", lineno))
            continue
        m = _STEP_RE.match(line)
        if m:
            n = int(m.group(1))
            i, j = (n - 1) // (k1 + 1), (n - 1) % (k1 + 1)
            if not (0 <= i < k2 and 0 <= j < k1):
                pred.diagnostics.append(Diagnostic("error", f"step {n} outside the {k1}x{k2} shape", lineno))
                continue
            xd = int(m.group(5))
            claim_source(f"x[{j}]", xd, lineno)
            claim_source(f"y[{i}]", int(m.group(2)), lineno)
            x_displays.append((lineno, m.group(4)))
            if m.group(6) is not None:  # carry clause present
                axd, ayd, cin, t = int(m.group(6)), int(m.group(7)), int(m.group(8)), int(m.group(9))
            else:
                axd, ayd, t = int(m.group(10)), int(m.group(11)), int(m.group(12))
                cin = 0
            dm = f"digitmult[{i}][{j}]"
            if j == 0:
                pred.set_claim(dm, NodeValue.integer(t), (_digit_value(axd), _digit_value(ayd)))
            else:
                pred.set_claim(dm, NodeValue.integer(t), (_digit_value(axd), _digit_value(ayd), _digit_value(cin)))
            w = int(m.group(13))
            carry_out = int(m.group(14)) if m.group(14) is not None else 0
            if j < k1 - 1:
                pred.set_claim(f"partial-digit[{i}][{j}]", _digit_value(w), (NodeValue.integer(t),))
                pred.set_claim(f"carry[{i}][{j}]", _digit_value(carry_out), (NodeValue.integer(t),))
                written[(i, j)] = w
            else:
                written[(i, j)] = w
                if w != t:
                    pred.diagnostics.append(Diagnostic("warning", f"step {n} writes {w} but computed {t}", lineno))
            continue
        m = _PP_RE.match(line)
        if m:
            n, i = int(m.group(1)), ord(m.group(2)) - ord("A")
            if not (0 <= i < k2):
                pred.diagnostics.append(Diagnostic("error", f"partial product {m.group(2)} outside shape", lineno))
                continue
            if n != i * (k1 + 1) + k1 + 1:
                pred.diagnostics.append(Diagnostic("warning", f"partial product {m.group(2)} numbered {n}", lineno))
            args = tuple(
                NodeValue.integer(written[(i, j)]) if (i, j) in written else None
                for j in range(k1 - 1, -1, -1)
            )
            pred.set_claim(f"partial-product[{i}]", NodeValue.integer(int(m.group(3))), args)
            continue
        if any(r.match(line) for r in _LOOSE_RES):
            pred.diagnostics.append(Diagnostic("error", "malformed template line", lineno))
        elif line.startswith("Now, let's sum"):
            mc = _SUM_COUNT_RE.search(line)
            if mc is not None and int(mc.group(1)) != k2:
                pred.diagnostics.append(Diagnostic("warning", f"sum line claims {mc.group(1)} partial products", lineno))
            if not _FINAL_RE.search(line):
                pred.diagnostics.append(Diagnostic("error", "malformed final paragraph", lineno))

    for lineno, disp in x_displays:
        claimed = "".join(
            str(pred.claim(f"x[{j}]").value.payload) if pred.claim(f"x[{j}]").present else "?"
            for j in range(k1 - 1, -1, -1)
        )
        if disp != claimed:
            pred.diagnostics.append(Diagnostic("warning", f"restated operand {disp} != digits {claimed}", lineno))
    for lineno, disp in y_displays:
        claimed = "".join(
            str(pred.claim(f"y[{i}]").value.payload) if pred.claim(f"y[{i}]").present else "?"
            for i in range(k2 - 1, -1, -1)
        )
        if disp != claimed:
            pred.diagnostics.append(Diagnostic("warning", f"restated operand {disp} != digits {claimed}", lineno))

    # Final paragraph: partial-product restatements feed the shift claims,
    # the middle sum carries the shifted values, the tail is the product.
    pp_restated: dict[int, int] = {}
    for m in _DESC_RE.finditer(text):
        i = ord(m.group(1)) - ord("A")
        if 0 <= i < k2:
            pp_restated[i] = int(m.group(2))
            pp_claim = pred.claim(f"partial-product[{i}]")
            if pp_claim.present and pp_claim.value != NodeValue.integer(int(m.group(2))):
                pred.diagnostics.append(
                    Diagnostic("warning", f"partial product {m.group(1)} restated as {m.group(2)}")
                )
            claim_source(f"y[{i}]", int(m.group(3)), 0)
            if m.group(4) is not None:
                pred.set_claim(f"shifted[{i}]", NodeValue.integer(int(m.group(4))), (NodeValue.integer(int(m.group(2))),))
    m = _FINAL_RE.search(text)
    if m:
        terms = m.group(1).split(" + ")
        for i, term in enumerate(terms[:k2]):
            tm = re.fullmatch(r"(\d+) x (\d+)", term.strip())
            if tm is None:
                pred.diagnostics.append(Diagnostic("warning", f"malformed sum term {term.strip()!r}"))
                continue
            if int(tm.group(2)) != 10**i:
                pred.diagnostics.append(Diagnostic("warning", f"term {i} shifted by {tm.group(2)}"))
            if i in pp_restated and int(tm.group(1)) != pp_restated[i]:
                pred.diagnostics.append(Diagnostic("warning", f"term {i} restates partial product {tm.group(1)}"))
        parts = m.group(2).split(" + ")
        shifted_claims: list[NodeValue | None] = []
        for i in range(k2):
            if i < len(parts) and _INT_RE.fullmatch(parts[i].strip()):
                sv = NodeValue.integer(int(parts[i]))
                arg = NodeValue.integer(pp_restated[i]) if i in pp_restated else None
                existing = pred.claims.get(f"shifted[{i}]")
                if existing is not None and existing.value is not None and existing.value != sv:
                    pred.diagnostics.append(Diagnostic("warning", f"shifted[{i}] restated inconsistently"))
                pred.set_claim(f"shifted[{i}]", sv, (arg,))
                shifted_claims.append(sv)
            else:
                shifted_claims.append(pred.claim(f"shifted[{i}]").value)
        pred.set_claim("product", NodeValue.integer(int(m.group(3))), tuple(shifted_claims))

    pred.final_answer = extract_final_answer(text)
    return pred


def extract_final_answer(text: str) -> int | None:
    matches = _INT_RE.findall(text)
    if not matches:
        return None
    value = int(matches[-1])
    return value if value >= 0 else None
