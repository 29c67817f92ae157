"""Error taxonomy, per-layer error ratios, and relative information gain.

The taxonomy compares a parsed :class:`~cgbench.codec.PredictedGraph` to the
ground-truth graph node by node:

- a node's *value* is correct iff the claimed value equals the truth value;
- its *computation* is correct iff applying the truth op to the argument
  values as written reproduces the claimed value (for sources: iff the
  restated input equals the true input);
- *fully correct* nodes have correct values and computations along their
  whole ancestry.

The four error categories are assigned with the precedence fully-correct,
then restoration (correct value, tainted), then local (wrong value from
correct parents), then propagation, which makes them a partition of the
present nodes; absent nodes form their own category and count as incorrect
for every descendant's ancestor checks.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .codec import PredictedGraph
from .graph import ComputationGraph, layer_numbers, op_spec, evaluate_op
from .tasks import dp as dp_task
from .tasks import multiplication as mult_task

CATEGORIES = ("fully-correct", "local-error", "propagation-error", "restoration-error")


class AddressSpaceError(ValueError):
    pass


@dataclass(frozen=True)
class NodeClassification:
    category: str
    layer: int
    value_correct: bool
    computation_correct: bool


def classify_nodes(truth: ComputationGraph, predicted: PredictedGraph) -> dict[str, NodeClassification]:
    unknown = [a for a in predicted.claims if a not in truth.nodes]
    if unknown:
        raise AddressSpaceError(f"claims outside the ground-truth address space: {unknown[:5]}")

    layers = layer_numbers(truth)
    value_ok: dict[str, bool] = {}
    comp_ok: dict[str, bool] = {}
    for nid, node in truth.nodes.items():
        claim = predicted.claim(nid)
        value_ok[nid] = claim.present and claim.value == node.value
        if node.is_source:
            comp_ok[nid] = value_ok[nid]
        elif not claim.present or claim.value is None or claim.args is None or any(a is None for a in claim.args):
            comp_ok[nid] = False
        else:
            spec = op_spec(node.op)
            if spec is not None and spec.arity is not None and len(claim.args) != spec.arity:
                comp_ok[nid] = False
            else:
                try:
                    comp_ok[nid] = evaluate_op(node.op, list(claim.args), truth) == claim.value
                except Exception:
                    comp_ok[nid] = False

    fully: dict[str, bool] = {}

    def fc(nid: str) -> bool:
        if nid not in fully:
            node = truth.nodes[nid]
            fully[nid] = value_ok[nid] and comp_ok[nid] and all(fc(p) for p in node.parents)
        return fully[nid]

    out: dict[str, NodeClassification] = {}
    for nid, node in truth.nodes.items():
        claim = predicted.claim(nid)
        layer = layers[nid]
        if not claim.present:
            category = "absent"
        elif fc(nid):
            category = "fully-correct"
        elif value_ok[nid]:
            category = "restoration-error"
        elif all(value_ok[p] for p in node.parents):
            category = "local-error"
        else:
            category = "propagation-error"
        out[nid] = NodeClassification(category, layer, value_ok[nid], comp_ok[nid])
    return out


@dataclass
class LayerRatios:
    """Per-layer category ratios over a corpus of classifications.

    The four error/correct categories are ratios over the *present* nodes of
    a layer (they sum to 1); the additional "absent" row is the absent share
    of all nodes at that layer.
    """

    counts: Counter = field(default_factory=Counter)  # (layer, category) -> n

    def add(self, classifications: Mapping[str, NodeClassification]) -> None:
        for cl in classifications.values():
            self.counts[(cl.layer, cl.category)] += 1

    def rows(self) -> list[dict]:
        layers = sorted({layer for layer, _ in self.counts})
        rows = []
        for layer in layers:
            present = sum(self.counts[(layer, c)] for c in CATEGORIES)
            total = present + self.counts[(layer, "absent")]
            for c in CATEGORIES:
                rows.append(
                    {
                        "layer": layer,
                        "category": c,
                        "ratio": self.counts[(layer, c)] / present if present else 0.0,
                        "count": self.counts[(layer, c)],
                    }
                )
            rows.append(
                {
                    "layer": layer,
                    "category": "absent",
                    "ratio": self.counts[(layer, "absent")] / total if total else 0.0,
                    "count": self.counts[(layer, "absent")],
                }
            )
        return rows


def layer_error_ratios(classifications: Iterable[Mapping[str, NodeClassification]]) -> LayerRatios:
    agg = LayerRatios()
    for cl in classifications:
        agg.add(cl)
    return agg


# ---------------------------------------------------------------------------
# Relative information gain
# ---------------------------------------------------------------------------


@dataclass
class DistributionSpec:
    """A task as a joint distribution over input/output variables.

    Multiplication of k1 x k2 digits exposes x1..x{k1}, y1..y{k2} and the
    zero-padded output digits z1..z{k1+k2} (index 1 is the most significant
    digit). The DP task of size n exposes a1..an and o1..on. Exhaustive mode
    materializes the whole instance space (capped at 10**7); sampled mode
    draws uniformly with a seed.
    """

    task: str
    sizes: tuple[int, ...]
    mode: str = "exhaustive"  # "exhaustive" | "sample"
    sample_count: int = 200_000
    seed: int = 0

    EXHAUSTIVE_CAP = 10**7

    def __post_init__(self) -> None:
        self._vars: dict[str, np.ndarray] | None = None

    def input_labels(self) -> list[str]:
        if self.task == mult_task.TASK:
            k1, k2 = self.sizes
            return [f"x{i}" for i in range(1, k1 + 1)] + [f"y{i}" for i in range(1, k2 + 1)]
        if self.task == dp_task.TASK:
            return [f"a{i}" for i in range(1, self.sizes[0] + 1)]
        raise ValueError(f"no enumerable distribution for task {self.task!r}")

    def output_labels(self) -> list[str]:
        if self.task == mult_task.TASK:
            k1, k2 = self.sizes
            return [f"z{i}" for i in range(1, k1 + k2 + 1)]
        if self.task == dp_task.TASK:
            return [f"o{i}" for i in range(1, self.sizes[0] + 1)]
        raise ValueError(f"no enumerable distribution for task {self.task!r}")

    def variables(self) -> dict[str, np.ndarray]:
        if self._vars is None:
            if self.task == mult_task.TASK:
                self._vars = _mult_variables(self)
            elif self.task == dp_task.TASK:
                self._vars = _dp_variables(self)
            else:
                raise ValueError(f"no enumerable distribution for task {self.task!r}")
        return self._vars


def _mult_variables(dist: DistributionSpec) -> dict[str, np.ndarray]:
    k1, k2 = dist.sizes
    x_lo, x_hi = 10 ** (k1 - 1), 10**k1
    y_lo, y_hi = 10 ** (k2 - 1), 10**k2
    if dist.mode == "exhaustive":
        n = (x_hi - x_lo) * (y_hi - y_lo)
        if n > dist.EXHAUSTIVE_CAP:
            raise ValueError(f"exhaustive enumeration of {n} instances exceeds the cap")
        x = np.repeat(np.arange(x_lo, x_hi, dtype=np.int64), y_hi - y_lo)
        y = np.tile(np.arange(y_lo, y_hi, dtype=np.int64), x_hi - x_lo)
    else:
        rng = np.random.default_rng(dist.seed)
        x = rng.integers(x_lo, x_hi, size=dist.sample_count, dtype=np.int64)
        y = rng.integers(y_lo, y_hi, size=dist.sample_count, dtype=np.int64)
    z = x * y
    out: dict[str, np.ndarray] = {}
    for i in range(1, k1 + 1):  # digit 1 = most significant
        out[f"x{i}"] = (x // 10 ** (k1 - i)) % 10
    for i in range(1, k2 + 1):
        out[f"y{i}"] = (y // 10 ** (k2 - i)) % 10
    for i in range(1, k1 + k2 + 1):
        out[f"z{i}"] = (z // 10 ** (k1 + k2 - i)) % 10
    return out


def _dp_variables(dist: DistributionSpec) -> dict[str, np.ndarray]:
    (n,) = dist.sizes
    lo, hi = dp_task.VALUE_RANGE
    base = hi - lo + 1
    if dist.mode == "exhaustive":
        total = base**n
        if total > dist.EXHAUSTIVE_CAP:
            raise ValueError(f"exhaustive enumeration of {total} instances exceeds the cap")
        idx = np.arange(total, dtype=np.int64)
        a = np.empty((total, n), dtype=np.int64)
        for i in range(n):  # lexicographic: a1 is the most significant digit
            a[:, i] = (idx // base ** (n - 1 - i)) % base + lo
    else:
        rng = np.random.default_rng(dist.seed)
        a = rng.integers(lo, hi + 1, size=(dist.sample_count, n), dtype=np.int64)
    o = solve_dp_batch(a)
    out = {f"a{i}": a[:, i - 1] for i in range(1, n + 1)}
    out.update({f"o{i}": o[:, i - 1] for i in range(1, n + 1)})
    return out


def solve_dp_batch(a: np.ndarray) -> np.ndarray:
    """Vectorized solve_dp over rows of ``a``; returns the 1/2 selections."""
    m, n = a.shape
    if n == 1:
        dp0 = np.maximum(a[:, 0], 0)
        return np.where(dp0 == a[:, 0], 1, 2).reshape(m, 1).astype(np.int64)
    dp = np.zeros((m, n), dtype=np.int64)
    dp[:, n - 1] = np.maximum(a[:, n - 1], 0)
    dp[:, n - 2] = np.maximum(np.maximum(a[:, n - 2], a[:, n - 1]), 0)
    for i in range(n - 3, -1, -1):
        dp[:, i] = np.maximum(np.maximum(dp[:, i + 1], a[:, i] + dp[:, i + 2]), 0)
    out = np.full((m, n), 2, dtype=np.int64)
    can_use = np.ones(m, dtype=bool)
    for i in range(n):
        take = (dp[:, i] == (a[:, i] + dp[:, i + 2] if i < n - 2 else a[:, i])) & can_use
        out[take, i] = 1
        can_use = ~take
    return out


def _entropy_terms(counts: np.ndarray) -> float:
    return float(np.sum(counts * np.log(counts)))


def _codes(dist: DistributionSpec, labels: Sequence[str]) -> np.ndarray:
    vars_ = dist.variables()
    code = None
    for label in labels:
        if label not in vars_:
            raise KeyError(f"unknown variable {label!r} for {dist.task} {dist.sizes}")
        col = vars_[label]
        col = col - col.min() if col.min() < 0 else col
        width = int(col.max()) + 1
        code = col.astype(np.int64) if code is None else code * width + col
    if code is None:
        raise ValueError("empty variable set")
    return code


def relative_ig(dist: DistributionSpec, x_labels: Sequence[str], y_label: str) -> float:
    """(H(Yj) - H(Yj | X)) / H(Yj) over the uniform instance distribution.

    Counting is exact (integer count tables); logarithms enter only in the
    final entropy evaluation. Returns 1.0 when H(Yj) = 0 (a constant output
    is trivially predicted).
    """
    y = _codes(dist, [y_label])
    n = y.shape[0]
    if n == 0:
        raise ValueError("empty distribution")
    _, y_counts = np.unique(y, return_counts=True)
    h_y = math.log(n) - _entropy_terms(y_counts) / n
    if h_y <= 0.0:
        return 1.0
    x = _codes(dist, list(x_labels))
    _, x_counts = np.unique(x, return_counts=True)
    joint = np.stack([x, y], axis=1)
    _, xy_counts = np.unique(joint, axis=0, return_counts=True)
    # MI = H(X) + H(Y) - H(XY) with H(.) = log n - sum(c log c)/n
    mi = math.log(n) + (_entropy_terms(xy_counts) - _entropy_terms(x_counts) - _entropy_terms(y_counts)) / n
    return max(0.0, min(1.0, mi / h_y))


def relative_ig_ci(
    dist: DistributionSpec, x_labels: Sequence[str], y_label: str, subsamples: int = 10
) -> tuple[float, float]:
    """Sampled-mode RelativeIG with a 3-sigma CI over disjoint subsamples.

    The point estimate comes from the full sample; the half-width is three
    standard errors of the per-subsample estimates (sampling variability
    only; small-sample entropy bias is not corrected).
    """
    value = relative_ig(dist, x_labels, y_label)
    vars_ = dist.variables()
    n = next(iter(vars_.values())).shape[0]
    chunk = n // subsamples
    estimates = []
    for s in range(subsamples):
        sub = DistributionSpec(dist.task, dist.sizes, mode=dist.mode, sample_count=chunk, seed=dist.seed)
        sub._vars = {k: v[s * chunk : (s + 1) * chunk] for k, v in vars_.items()}
        estimates.append(relative_ig(sub, x_labels, y_label))
    spread = float(np.std(estimates, ddof=1)) if len(estimates) > 1 else 0.0
    return value, 3.0 * spread / math.sqrt(subsamples)


def ig_table_rows(dist: DistributionSpec, pairs: Sequence[tuple[Sequence[str], str]]) -> list[dict]:
    rows = []
    for x_labels, y_label in pairs:
        rows.append(
            {
                "task": dist.task,
                "size": "x".join(str(s) for s in dist.sizes),
                "x": "+".join(x_labels),
                "y": y_label,
                "value": relative_ig(dist, x_labels, y_label),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# Surface-pattern aggregation
# ---------------------------------------------------------------------------


def surface_pattern_report(items: Iterable[Mapping]) -> list[dict]:
    """Aggregate per-metric accuracies by (task, size).

    Each item is a mapping with "task", "size", "exact" (0/1) and a "metrics"
    mapping of metric name to 0/1; an optional "internal_error" flag (final
    answer correct but some graph node wrong) feeds the
    final-correct-with-internal-error statistic.
    """
    sums: dict[tuple[str, str, str], list[int]] = {}
    for item in items:
        key_base = (item["task"], str(item["size"]))
        for metric, v in dict(item.get("metrics", {}), exact=item["exact"]).items():
            k = key_base + (metric,)
            sums.setdefault(k, [0, 0])
            sums[k][0] += int(v)
            sums[k][1] += 1
        if item.get("internal_error") is not None and item["exact"]:
            k = key_base + ("internal_error_given_correct",)
            sums.setdefault(k, [0, 0])
            sums[k][0] += int(item["internal_error"])
            sums[k][1] += 1
    rows = []
    for (task, size, metric), (hits, total) in sorted(sums.items()):
        rows.append({"task": task, "size": size, "metric": metric, "value": hits / total, "count": total})
    return rows
