"""Hot Monte Carlo kernels: numba-jitted with a pure-numpy fallback.

Set ``CGBENCH_NUMBA=0`` to force the numpy path. Both paths consume the same
pre-drawn uniform arrays and use identical comparisons, so results are
bit-identical regardless of which one runs (benchmarks/bench_kernels.py
compares their speed).
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("CGBENCH_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _FLAG not in {"0", "false", "off", "no"}

try:
    if not NUMBA_REQUESTED:
        raise ImportError("disabled via CGBENCH_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def chain_success_counts_numpy(u: np.ndarray, eps: float, c: float) -> np.ndarray:
    """Two-state correctness chain over pre-drawn uniforms (trials x steps).

    A correct state stays correct when u >= eps; an incorrect state recovers
    when u < c. Returns the number of correct trials after each step.
    """
    trials, steps = u.shape
    correct = np.ones(trials, dtype=np.bool_)
    out = np.empty(steps, dtype=np.int64)
    for n in range(steps):
        col = u[:, n]
        correct = np.where(correct, col >= eps, col < c)
        out[n] = int(correct.sum())
    return out


def width_failure_counts_numpy(u: np.ndarray, coll: np.ndarray, eps: float, ns: np.ndarray, cns: np.ndarray) -> np.ndarray:
    """Failures of the n-branch estimator for each n in ``ns``.

    A trial fails at width n iff any of its first n branches erred
    (u < eps) and the combiner collision coin (coll < c_n) did not rescue it.
    """
    err = u < eps
    any_err = err.any(axis=1)
    first = np.where(any_err, err.argmax(axis=1), u.shape[1])
    out = np.empty(len(ns), dtype=np.int64)
    for k in range(len(ns)):
        fail = (first < ns[k]) & (coll[:, k] >= cns[k])
        out[k] = int(fail.sum())
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def _chain_success_counts_numba(u, eps, c):  # pragma: no cover - numba
        trials, steps = u.shape
        out = np.zeros(steps, dtype=np.int64)
        for t in range(trials):
            correct = True
            for n in range(steps):
                x = u[t, n]
                if correct:
                    correct = x >= eps
                else:
                    correct = x < c
                if correct:
                    out[n] += 1
        return out

    @njit(cache=True)
    def _width_failure_counts_numba(u, coll, eps, ns, cns):  # pragma: no cover - numba
        trials, steps = u.shape
        out = np.zeros(len(ns), dtype=np.int64)
        for t in range(trials):
            first = steps
            for n in range(steps):
                if u[t, n] < eps:
                    first = n
                    break
            for k in range(len(ns)):
                if first < ns[k] and coll[t, k] >= cns[k]:
                    out[k] += 1
        return out

    chain_success_counts = _chain_success_counts_numba
    width_failure_counts = _width_failure_counts_numba
else:
    chain_success_counts = chain_success_counts_numpy
    width_failure_counts = width_failure_counts_numpy
