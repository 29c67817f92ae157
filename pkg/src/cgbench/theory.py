"""Monte Carlo verification of the error-propagation bounds.

Modes:

- ``width``: n independent noisy applications of a step combined by an
  almost-injective combiner with collision rate c_n (exact by construction,
  or beta * alpha**n). Failure lower bound: 1 - c_n - (1-eps)**n * (1-c_n).
- ``depth``: n iterated applications; a correct-input step fails with
  probability eps, a wrong-input step recovers with probability exactly c.
  Failure lower bound: 1 - b**(n-1) * (1-eps-c/(c+eps)) - c/(c+eps) with
  b = 1-eps-c; the limit is 1 - c/(c+eps).
- ``state-transition``: the same chain framed as a valid/invalid Markov
  chain; the closed-form invalidity probability is the oracle.
- ``shifted-addition``: measures the collision rate of the
  shifted-addition combiner over (m+1)-digit summands against beta*alpha**n
  with alpha = 0.1 and beta = 10**m.
- ``task-step``: runs the real task step functions (m-by-1 multiplication as
  an m-fold chain; the DP recursion plus reconstruction) with per-step
  corruption, measuring end-to-end failure and the emergent recovery rate.

All empirical curves derive from per-trial uniforms pre-drawn from a seeded
PCG64 generator, so results are reproducible bit-for-bit and independent of
the kernel path.

Bound checks always run in the direction the propositions state: empirical
failure must dominate the lower bound minus the 3-sigma binomial CI.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._kernels import chain_success_counts, width_failure_counts

MODES = ("width", "depth", "state-transition", "shifted-addition", "task-step")

Z = 3.0  # all intervals are 3-sigma binomial


class UnsupportedTaskError(ValueError):
    pass


@dataclass(frozen=True)
class SimulationSpec:
    mode: str
    ns: tuple[int, ...]
    epsilon: float
    c: float | None = None
    alpha: float | None = None  # width mode: c_n = beta * alpha**n
    beta: float | None = None
    domain: int | None = None  # |Im(g)| for the collision check
    task: str | None = None  # task-step mode
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not (0.0 <= self.epsilon < 1.0):
            raise ValueError("epsilon must be in [0, 1)")
        if self.mode in ("depth", "state-transition"):
            c = self.c if self.c is not None else 0.0
            if not (0.0 <= c < 1.0) or c + self.epsilon >= 1.0:
                raise ValueError("depth/state modes need 0 <= c and c + epsilon < 1")
        if not self.ns or any(n < 1 for n in self.ns):
            raise ValueError("ns must be positive")


@dataclass(frozen=True)
class SimulationRow:
    n: int
    empirical: float
    ci_low: float
    ci_high: float
    bound: float
    satisfied: bool


@dataclass
class SimulationReport:
    spec: SimulationSpec
    rows: list[SimulationRow]
    extras: dict = field(default_factory=dict)

    def row(self, n: int) -> SimulationRow:
        return next(r for r in self.rows if r.n == n)

    def all_satisfied(self) -> bool:
        return all(r.satisfied for r in self.rows)


def _ci(p: float, trials: int) -> float:
    return Z * math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def _row(n: int, p: float, trials: int, bound: float, satisfied: bool | None = None) -> SimulationRow:
    hw = _ci(p, trials)
    if satisfied is None:
        satisfied = p >= bound - hw
    return SimulationRow(n, p, max(0.0, p - hw), min(1.0, p + hw), bound, satisfied)


def simulate(spec: SimulationSpec) -> SimulationReport:
    if spec.mode == "width":
        return simulate_width(spec)
    if spec.mode == "depth":
        return simulate_depth(spec)
    if spec.mode == "state-transition":
        return simulate_state_transition(spec)
    if spec.mode == "shifted-addition":
        return simulate_shifted_addition(spec)
    if spec.mode == "task-step":
        return simulate_task_step(spec)
    raise ValueError(spec.mode)


# ---------------------------------------------------------------------------
# Width
# ---------------------------------------------------------------------------


def _width_cn(spec: SimulationSpec, n: int) -> float:
    if spec.alpha is not None:
        return min(1.0, (spec.beta if spec.beta is not None else 1.0) * spec.alpha**n)
    return spec.c if spec.c is not None else 0.0


def simulate_width(spec: SimulationSpec) -> SimulationReport:
    rng = np.random.default_rng([spec.seed, 0x71D7])
    max_n = max(spec.ns)
    u = rng.random((spec.trials, max_n))
    coll = rng.random((spec.trials, len(spec.ns)))
    ns = np.asarray(spec.ns, dtype=np.int64)
    cns = np.asarray([_width_cn(spec, int(n)) for n in spec.ns], dtype=np.float64)
    fails = width_failure_counts(u, coll, spec.epsilon, ns, cns)
    rows = []
    for k, n in enumerate(spec.ns):
        p = fails[k] / spec.trials
        cn = float(cns[k])
        bound = 1.0 - cn - (1.0 - spec.epsilon) ** n * (1.0 - cn)
        rows.append(_row(int(n), p, spec.trials, bound))
    report = SimulationReport(spec, rows)
    report.extras["configured_cn"] = {int(n): float(c) for n, c in zip(spec.ns, cns)}
    if spec.epsilon > 0 and all(_width_cn(spec, int(n)) == 0.0 for n in spec.ns):
        report.extras["log_linear_r2"] = _log_linear_r2(rows)
    return report


def _log_linear_r2(rows: Sequence[SimulationRow]) -> float:
    """R^2 of log(1 - failure) against n, for the pure-exponential regimes."""
    pts = [(r.n, 1.0 - r.empirical) for r in rows if 0.0 < r.empirical < 1.0]
    if len(pts) < 3:
        return 1.0
    xs = np.array([p[0] for p in pts], dtype=float)
    ys = np.log(np.array([p[1] for p in pts], dtype=float))
    slope, intercept = np.polyfit(xs, ys, 1)
    fit = slope * xs + intercept
    ss_res = float(np.sum((ys - fit) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    return 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot


# ---------------------------------------------------------------------------
# Depth / state transition
# ---------------------------------------------------------------------------


def depth_failure_bound(n: int, eps: float, c: float) -> float:
    """Lower bound on P(f_n != f_n_hat): 1 - b**(n-1)*(1-eps-c/(c+eps)) - c/(c+eps)."""
    if eps == 0.0:
        return 0.0
    b = 1.0 - eps - c
    ratio = c / (c + eps)
    return 1.0 - b ** (n - 1) * (1.0 - eps - ratio) - ratio


def depth_failure_limit(eps: float, c: float) -> float:
    return 1.0 - c / (c + eps) if eps > 0 else 0.0


def _chain_report(spec: SimulationSpec, closed_form_oracle: bool) -> SimulationReport:
    c = spec.c if spec.c is not None else 0.0
    rng = np.random.default_rng([spec.seed, 0xC4A1])
    max_n = max(spec.ns)
    u = rng.random((spec.trials, max_n))
    successes = chain_success_counts(u, spec.epsilon, c)
    rows = []
    for n in spec.ns:
        p_fail = 1.0 - successes[n - 1] / spec.trials
        if closed_form_oracle:
            bound = _two_state_invalid_probability(n, spec.epsilon, c)
            # two-sided agreement check; take the CI at the oracle value with a
            # 1/N floor so degenerate p ~ 1 cases are not spuriously rejected
            hw = max(_ci(p_fail, spec.trials), _ci(bound, spec.trials)) + 1.0 / spec.trials
            rows.append(_row(n, p_fail, spec.trials, bound, satisfied=abs(p_fail - bound) <= hw))
        else:
            rows.append(_row(n, p_fail, spec.trials, depth_failure_bound(n, spec.epsilon, c)))
    report = SimulationReport(spec, rows)
    report.extras["limit"] = depth_failure_limit(spec.epsilon, c)
    report.extras["stationary_invalidity"] = spec.epsilon / (spec.epsilon + c) if spec.epsilon + c > 0 else 0.0
    # Recursion check: s_n vs (1-eps-c) * s_{n-1} + c, which holds with
    # equality in expectation for the exact-c chain.
    s = successes / spec.trials
    resid = []
    for n in spec.ns:
        if n >= 2:
            predicted = (1.0 - spec.epsilon - c) * s[n - 2] + c
            resid.append(abs(float(s[n - 1]) - predicted))
    report.extras["max_recursion_residual"] = max(resid) if resid else 0.0
    if c == 0.0 and spec.epsilon > 0:
        report.extras["log_linear_r2"] = _log_linear_r2(rows)
    return report


def simulate_depth(spec: SimulationSpec) -> SimulationReport:
    return _chain_report(spec, closed_form_oracle=False)


def simulate_state_transition(spec: SimulationSpec) -> SimulationReport:
    return _chain_report(spec, closed_form_oracle=True)


def _two_state_invalid_probability(n: int, eps: float, c: float) -> float:
    """Closed form for the valid->invalid chain started valid."""
    if eps + c == 0.0:
        return 0.0
    stationary = eps / (eps + c)
    return stationary * (1.0 - (1.0 - eps - c) ** n)


# ---------------------------------------------------------------------------
# Shifted-addition collision
# ---------------------------------------------------------------------------


def simulate_shifted_addition(spec: SimulationSpec) -> SimulationReport:
    """Collision rate of h_n(x) = sum x_i * 10**(n-i) over (m+1)-digit values.

    ``domain`` carries m (the digit count of the left operand); the bound is
    beta * alpha**n with alpha = 0.1 and beta = 10**m.
    """
    m = spec.domain if spec.domain is not None else 2
    alpha = spec.alpha if spec.alpha is not None else 0.1
    beta = spec.beta if spec.beta is not None else float(10**m)
    hi = 10 ** (m + 1)
    rng = np.random.default_rng([spec.seed, 0x5A1D])
    rows = []
    for n in spec.ns:
        x = rng.integers(0, hi, size=(spec.trials, n), dtype=np.int64)
        y = x.copy()
        corrupt = rng.random((spec.trials, n)) < spec.epsilon
        offsets = rng.integers(1, hi, size=(spec.trials, n), dtype=np.int64)
        y[corrupt] = (x[corrupt] + offsets[corrupt]) % hi
        differ = (x != y).any(axis=1)
        weights = np.array([10 ** (n - i) for i in range(1, n + 1)], dtype=object)
        hx = (x.astype(object) * weights).sum(axis=1)
        hy = (y.astype(object) * weights).sum(axis=1)
        n_differ = int(differ.sum())
        n_coll = int(((hx == hy) & differ).sum())
        p = n_coll / n_differ if n_differ else 0.0
        bound = min(1.0, beta * alpha**n)
        hw = _ci(p, max(n_differ, 1))
        rows.append(SimulationRow(n, p, max(0.0, p - hw), min(1.0, p + hw), bound, p <= bound + hw))
    return SimulationReport(spec, rows, extras={"alpha": alpha, "beta": beta, "m": m})


# ---------------------------------------------------------------------------
# Task-step simulations (emergent collisions on the real steps)
# ---------------------------------------------------------------------------


def simulate_task_step(spec: SimulationSpec) -> SimulationReport:
    if spec.task in ("multiplication", "mult"):
        return _task_step_mult(spec)
    if spec.task == "dp":
        return _task_step_dp(spec)
    raise UnsupportedTaskError(f"task-step mode supports multiplication and dp, not {spec.task!r}")


def _task_step_mult(spec: SimulationSpec) -> SimulationReport:
    """m-by-1 multiplication as m applications of the digit-mul-carry step."""
    rng = np.random.default_rng([spec.seed, 0x30AD])
    rows = []
    recovered_at: dict[int, float] = {}
    for m in spec.ns:
        digits = rng.integers(0, 10, size=(spec.trials, m), dtype=np.int64)
        digits[:, -1] = rng.integers(1, 10, size=spec.trials)  # leading digit nonzero
        y = rng.integers(1, 10, size=spec.trials, dtype=np.int64)
        corrupt = rng.random((spec.trials, m)) < spec.epsilon
        # A corrupted step replaces its (digit, carry) output with a uniform
        # wrong pair from the step codomain (10 digits x 9 carries).
        wrong_pair = rng.integers(1, 90, size=(spec.trials, m), dtype=np.int64)
        carry = np.zeros(spec.trials, dtype=np.int64)
        out_digits = np.zeros((spec.trials, m), dtype=np.int64)
        for i in range(m):
            t = digits[:, i] * y + carry
            d, cy = t % 10, t // 10
            code = (d * 9 + cy + wrong_pair[:, i]) % 90
            bad = corrupt[:, i]
            d = np.where(bad, code % 10, d)
            cy = np.where(bad, code // 10, cy)
            out_digits[:, i] = d
            carry = cy
        powers = 10 ** np.arange(m, dtype=np.int64)
        got = (out_digits * powers).sum(axis=1) + carry * 10**m
        x = (digits * powers).sum(axis=1)
        truth = x * y
        fail = got != truth
        erred = corrupt.any(axis=1)
        p = float(fail.mean())
        recovered = float((erred & ~fail).mean())
        recovered_at[int(m)] = recovered
        bound = 1.0 - (1.0 - spec.epsilon) ** m - recovered
        rows.append(_row(int(m), p, spec.trials, bound))
    return SimulationReport(spec, rows, extras={"recovered": recovered_at})


def _task_step_dp(spec: SimulationSpec) -> SimulationReport:
    """DP recursion + reconstruction with per-step corruption."""
    from .analysis import solve_dp_batch
    from .tasks.dp import VALUE_RANGE

    lo, hi = VALUE_RANGE
    rng = np.random.default_rng([spec.seed, 0xD9])
    rows = []
    recovered_at: dict[int, float] = {}
    for n in spec.ns:
        if n < 2:
            raise UnsupportedTaskError("dp task-step needs n >= 2")
        a = rng.integers(lo, hi + 1, size=(spec.trials, n), dtype=np.int64)
        truth = solve_dp_batch(a)
        dp_hi = hi * ((n + 1) // 2)  # max attainable dp value
        dp = np.zeros((spec.trials, n), dtype=np.int64)
        corrupt_dp = rng.random((spec.trials, n)) < spec.epsilon
        offsets = rng.integers(1, dp_hi + 1, size=(spec.trials, n), dtype=np.int64)

        def noisy(i: int, value: np.ndarray) -> np.ndarray:
            bad = corrupt_dp[:, i]
            return np.where(bad, (value + offsets[:, i]) % (dp_hi + 1), value)

        dp[:, n - 1] = noisy(n - 1, np.maximum(a[:, n - 1], 0))
        dp[:, n - 2] = noisy(n - 2, np.maximum(np.maximum(a[:, n - 2], a[:, n - 1]), 0))
        for i in range(n - 3, -1, -1):
            dp[:, i] = noisy(i, np.maximum(np.maximum(dp[:, i + 1], a[:, i] + dp[:, i + 2]), 0))

        corrupt_sel = rng.random((spec.trials, n)) < spec.epsilon
        out = np.full((spec.trials, n), 2, dtype=np.int64)
        can_use = np.ones(spec.trials, dtype=bool)
        for i in range(n):
            cond = dp[:, i] == (a[:, i] + dp[:, i + 2] if i < n - 2 else a[:, i])
            take = cond & can_use
            take = np.where(corrupt_sel[:, i], ~take, take)  # corrupted selection flips
            out[take, i] = 1
            can_use = ~take
        fail = (out != truth).any(axis=1)
        erred = corrupt_dp.any(axis=1) | corrupt_sel.any(axis=1)
        p = float(fail.mean())
        recovered = float((erred & ~fail).mean())
        recovered_at[int(n)] = recovered
        steps = 2 * n  # n dp steps + n selection steps carry the corruption
        bound = 1.0 - (1.0 - spec.epsilon) ** steps - recovered
        rows.append(_row(int(n), p, spec.trials, bound))
    return SimulationReport(spec, rows, extras={"recovered": recovered_at})


# ---------------------------------------------------------------------------
# Collision-rate check: c ~ eps / |Im(g)|
# ---------------------------------------------------------------------------


def empirical_collision_check(domain: int, epsilon: float, trials: int = 100_000, seed: int = 0) -> SimulationReport:
    """Measure the recovery-by-chance rate of a uniform-error estimator.

    g is the identity on Z_domain; on a wrong input y != x, the estimator
    errs with probability eps to a uniform draw over the image, so the
    chance of landing exactly on g(x) is eps / domain.
    """
    if domain < 2:
        raise ValueError("domain must be >= 2")
    rng = np.random.default_rng([seed, 0xC0 + domain])
    x = rng.integers(0, domain, size=trials, dtype=np.int64)
    y = (x + rng.integers(1, domain, size=trials, dtype=np.int64)) % domain
    err = rng.random(trials) < epsilon
    draw = rng.integers(0, domain, size=trials, dtype=np.int64)
    ghat = np.where(err, draw, y)
    measured = float((ghat == x).mean())
    predicted = epsilon / domain
    hw = _ci(measured, trials)
    spec = SimulationSpec("depth", (1,), epsilon, c=0.0, domain=domain, trials=trials, seed=seed)
    row = SimulationRow(1, measured, max(0.0, measured - hw), measured + hw, predicted, abs(measured - predicted) <= hw)
    return SimulationReport(spec, [row], extras={"predicted_c": predicted, "domain": domain})


# ---------------------------------------------------------------------------
# CSV report
# ---------------------------------------------------------------------------

CSV_FIELDS = ("mode", "n", "epsilon", "c", "trials", "empirical", "ci_low", "ci_high", "bound", "satisfied")


def report_to_csv(reports: Sequence[SimulationReport], path: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=CSV_FIELDS)
        w.writeheader()
        for report in reports:
            for r in report.rows:
                w.writerow(
                    {
                        "mode": report.spec.mode,
                        "n": r.n,
                        "epsilon": report.spec.epsilon,
                        "c": report.spec.c if report.spec.c is not None else "",
                        "trials": report.spec.trials,
                        "empirical": f"{r.empirical:.6f}",
                        "ci_low": f"{r.ci_low:.6f}",
                        "ci_high": f"{r.ci_high:.6f}",
                        "bound": f"{r.bound:.6f}",
                        "satisfied": int(r.satisfied),
                    }
                )
