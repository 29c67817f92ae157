"""Maximum-weight non-adjacent subsequence (the DP task).

The solver mirrors the fixed-topology recursion so every input of a given
length yields the same graph shape:

    dp[n-1] = max(a[n-1], 0)
    dp[n-2] = max(a[n-2], a[n-1], 0)
    dp[i]   = max(dp[i+1], a[i] + dp[i+2], 0)

Reconstruction walks left to right choosing position i iff the max came from
taking a[i] and the previous position was not chosen; output uses 1 for
chosen and 2 for unchosen, which makes the lexicographically smallest
optimal selection.

Node addressing: ``input[i]``, ``dp[i]``, ``output[i]``, ``canuse[i]`` (the
can_use_next_item flag entering position i, materialized for i >= 1), and
the sink ``output`` concatenating the selections.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iter_product
from typing import Iterator, Sequence

from ..graph import (
    ComputationGraph,
    Node,
    NodeValue,
    register_op,
    register_order_key,
)

TASK = "dp"

VALUE_RANGE = (-5, 5)
MAX_N = 10


@dataclass(frozen=True)
class DpInstance:
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise ValueError("empty input list")
        lo, hi = VALUE_RANGE
        for v in self.values:
            if not (lo <= v <= hi):
                raise ValueError(f"element {v} outside [{lo}, {hi}]")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def instance_id(self) -> str:
        return "dp-" + ",".join(str(v) for v in self.values)


@dataclass(frozen=True)
class DpSolution:
    dp: tuple[int, ...]
    output: tuple[int, ...]

    @property
    def best_sum(self) -> int:
        return self.dp[0]


def solve_dp(instance: DpInstance) -> DpSolution:
    a = instance.values
    n = len(a)
    if n == 1:
        dp = (max(a[0], 0),)
        return DpSolution(dp, (1,) if dp[0] == a[0] else (2,))

    dp = [0] * n
    dp[n - 1] = max(a[n - 1], 0)
    dp[n - 2] = max(a[n - 2], a[n - 1], 0)
    for i in range(n - 3, -1, -1):
        dp[i] = max(dp[i + 1], a[i] + dp[i + 2], 0)

    output: list[int] = []
    can_use = True
    for i in range(n - 2):
        if dp[i] == a[i] + dp[i + 2] and can_use:
            output.append(1)
            can_use = False
        else:
            output.append(2)
            can_use = True
    for i in (n - 2, n - 1):
        if dp[i] == a[i] and can_use:
            output.append(1)
            can_use = False
        else:
            output.append(2)
            can_use = True
    return DpSolution(tuple(dp), tuple(output))


_VALID_MASKS: dict[int, list[tuple[tuple[int, ...], tuple[int, ...]]]] = {}


def _valid_masks(n: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(picked indices, selection string) for every non-adjacent subset of n
    positions; enumerated once per n from all 2**n masks and cached."""
    if n not in _VALID_MASKS:
        out = []
        for mask in range(1 << n):
            if mask & (mask << 1):
                continue  # adjacent picks
            picked = tuple(i for i in range(n) if mask >> i & 1)
            selection = tuple(1 if mask >> i & 1 else 2 for i in range(n))
            out.append((picked, selection))
        _VALID_MASKS[n] = out
    return _VALID_MASKS[n]


def brute_force_dp(instance: DpInstance) -> tuple[int, ...]:
    """Independent oracle: enumerate all subsets, filter adjacency, maximize
    the sum, break ties toward the lexicographically smallest 1/2 string."""
    a = instance.values
    n = len(a)
    if n > 20:
        raise ValueError("brute force capped at n <= 20")
    best: tuple[int, ...] | None = None
    best_sum: int | None = None
    for picked, selection in _valid_masks(n):
        total = sum(a[i] for i in picked)
        if best_sum is None or total > best_sum or (total == best_sum and selection < best):
            best, best_sum = selection, total
    assert best is not None
    return best


def count_instances(n: int) -> int:
    lo, hi = VALUE_RANGE
    return (hi - lo + 1) ** n


def enumerate_instances(n: int) -> Iterator[DpInstance]:
    """All 11^n instances of length n, lexicographic over element values."""
    if not (1 <= n <= MAX_N):
        raise ValueError(f"n must be in [1, {MAX_N}]")
    lo, hi = VALUE_RANGE
    for combo in iter_product(range(lo, hi + 1), repeat=n):
        yield DpInstance(combo)


def question_text(instance: DpInstance) -> str:
    return (
        "Given a sequence of integers, find a subsequence with the highest sum, "
        "such that no two numbers in the subsequence are adjacent in the original sequence.\n"
        "\n"
        'Output a list with "1" for chosen numbers and "2" for unchosen ones. '
        "If multiple solutions exist, select the lexicographically smallest. "
        f"input = {format_list(instance.values)}."
    )


def answer_text(instance: DpInstance) -> str:
    return format_list(solve_dp(instance).output)


def format_list(values: Sequence[int]) -> str:
    return "[" + ", ".join(str(v) for v in values) + "]"


def per_position_accuracy(predicted: Sequence[int] | None, truth: Sequence[int]) -> list[int]:
    """Elementwise {0,1} agreement; positions past the predicted length score 0."""
    if predicted is None:
        return [0] * len(truth)
    return [int(i < len(predicted) and predicted[i] == truth[i]) for i in range(len(truth))]


# ---------------------------------------------------------------------------
# Graph construction
# ---------------------------------------------------------------------------


def build_graph(instance: DpInstance) -> ComputationGraph:
    a = instance.values
    n = len(a)
    sol = solve_dp(instance)

    nodes: dict[str, Node] = {}

    def add(node: Node) -> None:
        nodes[node.id] = node

    for i, v in enumerate(a):
        add(Node(f"input[{i}]", NodeValue.integer(v), "SOURCE"))

    if n == 1:
        add(Node("dp[0]", NodeValue.integer(sol.dp[0]), "dp.max_last", ("input[0]",)))
        add(Node("output[0]", NodeValue.digit(sol.output[0]), "dp.select_bound_first", ("dp[0]", "input[0]")))
        add(Node("output", NodeValue.digits(sol.output), "dp.emit", ("output[0]",)))
    else:
        add(Node(f"dp[{n - 1}]", NodeValue.integer(sol.dp[n - 1]), "dp.max_last", (f"input[{n - 1}]",)))
        add(
            Node(
                f"dp[{n - 2}]",
                NodeValue.integer(sol.dp[n - 2]),
                "dp.max_pair",
                (f"input[{n - 2}]", f"input[{n - 1}]"),
            )
        )
        for i in range(n - 3, -1, -1):
            add(
                Node(
                    f"dp[{i}]",
                    NodeValue.integer(sol.dp[i]),
                    "dp.max_step",
                    (f"dp[{i + 1}]", f"input[{i}]", f"dp[{i + 2}]"),
                )
            )

        flags = _flag_values(sol.output)
        for i in range(n):
            boundary = i >= n - 2
            if i == 0:
                op = "dp.select_bound_first" if boundary else "dp.select_first"
                parents = (f"dp[{i}]", f"input[{i}]") if boundary else (f"dp[{i}]", f"input[{i}]", f"dp[{i + 2}]")
            else:
                op = "dp.select_bound" if boundary else "dp.select"
                parents = (
                    (f"dp[{i}]", f"input[{i}]", f"canuse[{i}]")
                    if boundary
                    else (f"dp[{i}]", f"input[{i}]", f"dp[{i + 2}]", f"canuse[{i}]")
                )
            add(Node(f"output[{i}]", NodeValue.digit(sol.output[i]), op, parents))
            if i + 1 < n:
                add(Node(f"canuse[{i + 1}]", NodeValue.boolean(flags[i + 1]), "dp.flag", (f"output[{i}]",)))

        add(Node("output", NodeValue.digits(sol.output), "dp.emit", tuple(f"output[{i}]" for i in range(n))))

    return ComputationGraph(task=TASK, nodes=nodes, sink="output", meta={"n": n, "input": list(a)})


def _flag_values(output: Sequence[int]) -> list[bool]:
    """can_use_next_item entering each position (index 0 is the initial True)."""
    flags = [True]
    for o in output[:-1]:
        flags.append(o == 2)
    return flags


# ---------------------------------------------------------------------------
# Op registration and canonical ordering
# ---------------------------------------------------------------------------


def _op_max_last(args, _param, _graph):
    return NodeValue.integer(max(args[0].payload, 0))


def _op_max_pair(args, _param, _graph):
    return NodeValue.integer(max(args[0].payload, args[1].payload, 0))


def _op_max_step(args, _param, _graph):
    dp1, a, dp2 = (v.payload for v in args)
    return NodeValue.integer(max(dp1, a + dp2, 0))


def _op_select_first(args, _param, _graph):
    dp0, a, dp2 = (v.payload for v in args)
    return NodeValue.digit(1 if dp0 == a + dp2 else 2)


def _op_select(args, _param, _graph):
    dpi, a, dp2, can_use = (v.payload for v in args)
    return NodeValue.digit(1 if dpi == a + dp2 and can_use else 2)


def _op_select_bound_first(args, _param, _graph):
    dpi, a = (v.payload for v in args)
    return NodeValue.digit(1 if dpi == a else 2)


def _op_select_bound(args, _param, _graph):
    dpi, a, can_use = (v.payload for v in args)
    return NodeValue.digit(1 if dpi == a and can_use else 2)


def _op_flag(args, _param, _graph):
    return NodeValue.boolean(args[0].payload == 2)


def _op_emit(args, _param, _graph):
    return NodeValue.digits(a.payload for a in args)


register_op("dp.max_last", 1, _op_max_last)
register_op("dp.max_pair", 2, _op_max_pair)
register_op("dp.max_step", 3, _op_max_step)
register_op("dp.select_first", 3, _op_select_first)
register_op("dp.select", 4, _op_select)
register_op("dp.select_bound_first", 2, _op_select_bound_first)
register_op("dp.select_bound", 3, _op_select_bound)
register_op("dp.flag", 1, _op_flag)
register_op("dp.emit", None, _op_emit)


def _order_key(node_id: str) -> tuple:
    # Scratchpad order: inputs, dp from the right end down to dp[0], then the
    # reconstruction interleaving output[i] with the flag it updates.
    if node_id == "output":
        return (3, 0, 0)
    name, rest = node_id.split("[", 1)
    idx = int(rest.rstrip("]"))
    if name == "input":
        return (0, idx, 0)
    if name == "dp":
        return (1, -idx, 0)
    if name == "output":
        return (2, idx, 0)
    return (2, idx - 1, 1)  # canuse[i] right after output[i-1]


register_order_key(TASK, _order_key)
