"""Long-form multiplication instances and their computation graphs.

Node addressing (i indexes a digit of y, j a digit of x, both 0-based from
the ones place):

- ``x[j]``, ``y[i]``          source digits
- ``digitmult[i][j]``         x_j * y_i + carry_in (the value the scratchpad
                              verbalizes: "This gives (3 x 9) + 4 = 31")
- ``partial-digit[i][j]``     digitmult mod 10, written down (j < k1-1 only;
                              the leftmost column is written whole)
- ``carry[i][j]``             digitmult div 10, carried to column j+1
- ``partial-product[i]``      concatenation of the written digits
- ``shifted[i]``              partial-product * 10^i
- ``product``                 sum of the shifted partial products (sink)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from ..graph import (
    ComputationGraph,
    Node,
    NodeValue,
    register_op,
    register_order_key,
)

TASK = "multiplication"

MAX_DIGITS = 5


@dataclass(frozen=True)
class MultSpec:
    k1: int
    k2: int

    def __post_init__(self) -> None:
        if not (1 <= self.k1 <= MAX_DIGITS and 1 <= self.k2 <= MAX_DIGITS):
            raise ValueError(f"digit counts must be in [1, {MAX_DIGITS}]: {self}")


@dataclass(frozen=True)
class MultInstance:
    x: int
    y: int

    def __post_init__(self) -> None:
        if self.x <= 0 or self.y <= 0:
            raise ValueError("operands must be positive (no leading zeros)")

    @property
    def spec(self) -> MultSpec:
        return MultSpec(len(str(self.x)), len(str(self.y)))

    @property
    def product(self) -> int:
        return self.x * self.y

    @property
    def instance_id(self) -> str:
        return f"mult-{self.x}x{self.y}"


def digits_lsf(value: int, width: int) -> tuple[int, ...]:
    """Digits of ``value`` from the ones place, zero-padded to ``width``."""
    s = str(value).zfill(width)
    return tuple(int(c) for c in reversed(s))


def count_instances(spec: MultSpec) -> int:
    """9 * 10^(k-1) choices per operand (no leading zeros)."""
    return 9 * 10 ** (spec.k1 - 1) * 9 * 10 ** (spec.k2 - 1)


def enumerate_instances(spec: MultSpec) -> Iterator[MultInstance]:
    """All instances of a spec in lexicographic (x, y) order. Streaming."""
    x_lo, x_hi = 10 ** (spec.k1 - 1), 10**spec.k1
    y_lo, y_hi = 10 ** (spec.k2 - 1), 10**spec.k2
    for x in range(x_lo, x_hi):
        for y in range(y_lo, y_hi):
            yield MultInstance(x, y)


def question_text(instance: MultInstance) -> str:
    return f"What is {instance.x} times {instance.y}?"


def answer_text(instance: MultInstance) -> str:
    return str(instance.product)


# ---------------------------------------------------------------------------
# Graph construction
# ---------------------------------------------------------------------------


def build_graph(instance: MultInstance) -> ComputationGraph:
    k1, k2 = instance.spec.k1, instance.spec.k2
    xd = digits_lsf(instance.x, k1)
    yd = digits_lsf(instance.y, k2)

    nodes: dict[str, Node] = {}

    def add(node: Node) -> None:
        nodes[node.id] = node

    for j, d in enumerate(xd):
        add(Node(f"x[{j}]", NodeValue.digit(d), "SOURCE"))
    for i, d in enumerate(yd):
        add(Node(f"y[{i}]", NodeValue.digit(d), "SOURCE"))

    for i in range(k2):
        carry = 0
        written: list[str] = []  # written-digit node ids, ones place first
        for j in range(k1):
            t = xd[j] * yd[i] + carry
            dm = f"digitmult[{i}][{j}]"
            if j == 0:
                add(Node(dm, NodeValue.integer(t), "mul.digit_mul", (f"x[{j}]", f"y[{i}]")))
            else:
                add(
                    Node(
                        dm,
                        NodeValue.integer(t),
                        "mul.digit_mul_add",
                        (f"x[{j}]", f"y[{i}]", f"carry[{i}][{j - 1}]"),
                    )
                )
            if j < k1 - 1:
                add(Node(f"partial-digit[{i}][{j}]", NodeValue.digit(t % 10), "mul.mod10", (dm,)))
                add(Node(f"carry[{i}][{j}]", NodeValue.digit(t // 10), "mul.carry10", (dm,)))
                written.append(f"partial-digit[{i}][{j}]")
                carry = t // 10
            else:
                # Leftmost column: the whole value (including its carry) is
                # written down and heads the concatenation.
                written.append(dm)

        pp_parents = tuple(reversed(written))  # most significant first
        pp_value = int("".join(str(nodes[p].value.payload) for p in pp_parents))
        add(Node(f"partial-product[{i}]", NodeValue.integer(pp_value), "mul.concat", pp_parents))
        add(
            Node(
                f"shifted[{i}]",
                NodeValue.integer(pp_value * 10**i),
                f"mul.shift:{i}",
                (f"partial-product[{i}]",),
            )
        )

    add(
        Node(
            "product",
            NodeValue.integer(instance.product),
            "mul.sum",
            tuple(f"shifted[{i}]" for i in range(k2)),
        )
    )

    return ComputationGraph(
        task=TASK,
        nodes=nodes,
        sink="product",
        meta={"k1": k1, "k2": k2, "x": instance.x, "y": instance.y},
    )


# ---------------------------------------------------------------------------
# Partial-correctness metrics
# ---------------------------------------------------------------------------

PARTIAL_METRICS = ("first_digit", "first_two", "last_digit", "last_two", "digit_count", "trailing_zeros")


def _trailing_zeros(s: str) -> int:
    return len(s) - len(s.rstrip("0")) if s.strip("0") != "" else len(s)


def partial_metrics(predicted: int | str | None, truth: int) -> dict[str, int]:
    """Binary surface metrics of a predicted product against the truth.

    Unparseable predictions score 0 on every metric. Total function.
    """
    if truth <= 0:
        raise ValueError("truth must be positive")
    if isinstance(predicted, str):
        stripped = predicted.strip().rstrip(".")
        try:
            predicted = int(stripped)
        except ValueError:
            predicted = None
    if predicted is None or predicted < 0:
        return {m: 0 for m in PARTIAL_METRICS}

    p, t = str(predicted), str(truth)
    return {
        "first_digit": int(p[0] == t[0]),
        "first_two": int(p[:2] == t[:2]),
        "last_digit": int(p[-1] == t[-1]),
        "last_two": int(p[-2:] == t[-2:]),
        "digit_count": int(len(p) == len(t)),
        "trailing_zeros": int(_trailing_zeros(p) == _trailing_zeros(t)),
    }


# ---------------------------------------------------------------------------
# Op registration and canonical ordering
# ---------------------------------------------------------------------------


def _op_digit_mul(args, _param, _graph):
    return NodeValue.integer(args[0].payload * args[1].payload)


def _op_digit_mul_add(args, _param, _graph):
    return NodeValue.integer(args[0].payload * args[1].payload + args[2].payload)


def _op_mod10(args, _param, _graph):
    return NodeValue.digit(args[0].payload % 10)


def _op_carry10(args, _param, _graph):
    return NodeValue.digit(args[0].payload // 10)


def _op_concat(args, _param, _graph):
    return NodeValue.integer(int("".join(str(a.payload) for a in args)))


def _op_shift(args, param, _graph):
    return NodeValue.integer(args[0].payload * 10 ** (param or 0))


def _op_sum(args, _param, _graph):
    return NodeValue.integer(sum(a.payload for a in args))


register_op("mul.digit_mul", 2, _op_digit_mul)
register_op("mul.digit_mul_add", 3, _op_digit_mul_add)
register_op("mul.mod10", 1, _op_mod10)
register_op("mul.carry10", 1, _op_carry10)
register_op("mul.concat", None, _op_concat)
register_op("mul.shift", 1, _op_shift)
register_op("mul.sum", None, _op_sum)


def _order_key(node_id: str) -> tuple:
    # Stage order mirrors the scratchpad: sources, then each y-digit section
    # (digitmult, written digit, carry per column, then the partial product),
    # then the shifts and the final sum.
    name, idx = _parse_address(node_id)
    if name == "x":
        return (0, idx[0])
    if name == "y":
        return (1, idx[0])
    if name == "digitmult":
        return (2, idx[0], idx[1], 0)
    if name == "partial-digit":
        return (2, idx[0], idx[1], 1)
    if name == "carry":
        return (2, idx[0], idx[1], 2)
    if name == "partial-product":
        return (2, idx[0], 1 << 20, 0)
    if name == "shifted":
        return (3, idx[0])
    return (4, 0)


def _parse_address(node_id: str) -> tuple[str, tuple[int, ...]]:
    if "[" not in node_id:
        return node_id, ()
    name, rest = node_id.split("[", 1)
    idx = tuple(int(part.rstrip("]")) for part in rest.split("["))
    return name, idx


register_order_key(TASK, _order_key)
