"""Property-based checks over the task invariants."""

from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from cgbench.codec import parse_document, render_document, shape_of
from cgbench.graph import validate
from cgbench.tasks import dp as dp_task
from cgbench.tasks import multiplication as mult_task

dp_lists = st.lists(st.integers(-5, 5), min_size=1, max_size=10)
operands = st.tuples(st.integers(1, 99999), st.integers(1, 99999))


@given(dp_lists)
@settings(max_examples=200, deadline=None)
def test_solver_always_matches_brute_force(values):
    inst = dp_task.DpInstance(tuple(values))
    assert dp_task.solve_dp(inst).output == dp_task.brute_force_dp(inst)


@given(dp_lists)
@settings(max_examples=100, deadline=None)
def test_selection_never_adjacent_and_sum_optimal(values):
    inst = dp_task.DpInstance(tuple(values))
    sol = dp_task.solve_dp(inst)
    picks = [i for i, o in enumerate(sol.output) if o == 1]
    assert all(b - a > 1 for a, b in zip(picks, picks[1:]))
    assert sum(values[i] for i in picks) == sol.best_sum


@given(operands)
@settings(max_examples=100, deadline=None)
def test_mult_graph_sink_and_validity(xy):
    x, y = xy
    graph = mult_task.build_graph(mult_task.MultInstance(x, y))
    assert graph.nodes["product"].value.payload == x * y
    assert validate(graph, reevaluate=True).ok


@given(st.one_of(st.integers(-100, 10**7), st.text(max_size=12)), st.integers(1, 10**6))
@settings(max_examples=200, deadline=None)
def test_partial_metrics_total(pred, truth):
    out = mult_task.partial_metrics(pred, truth)
    assert set(out) == set(mult_task.PARTIAL_METRICS)
    assert all(v in (0, 1) for v in out.values())


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=8))
@settings(max_examples=60, deadline=None)
def test_dp_document_round_trip(values):
    graph = dp_task.build_graph(dp_task.DpInstance(tuple(values)))
    pred = parse_document(render_document(graph), graph.task, shape_of(graph))
    for nid, node in graph.nodes.items():
        assert pred.claim(nid).present and pred.claim(nid).value == node.value


@given(st.text(max_size=400))
@settings(max_examples=150, deadline=None)
def test_parsers_total_on_arbitrary_text(text):
    from cgbench.codec import DpShape, MultShape

    parse_document(text, "multiplication", MultShape(2, 2))
    parse_document(text, "dp", DpShape(5))
