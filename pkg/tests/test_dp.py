from __future__ import annotations

import numpy as np
import pytest

from cgbench import graph as G
from cgbench.tasks import dp as D


def test_worked_example():
    sol = D.solve_dp(D.DpInstance((3, 2, 1, 5, 2)))
    assert sol.dp == (8, 7, 5, 5, 2)
    assert sol.output == (1, 2, 2, 1, 2)
    assert D.brute_force_dp(D.DpInstance((3, 2, 1, 5, 2))) == (1, 2, 2, 1, 2)


def test_edge_cases():
    assert D.solve_dp(D.DpInstance((0,))).output == (1,)  # choosing 0 is lexicographically smaller
    assert D.brute_force_dp(D.DpInstance((-1,))) == (2,)  # never choose a lone negative
    assert D.solve_dp(D.DpInstance((5, 5))).output == (1, 2)  # tie broken toward the earlier pick


def test_empty_and_range_rejected():
    with pytest.raises(ValueError):
        D.DpInstance(())
    with pytest.raises(ValueError):
        D.DpInstance((6,))
    with pytest.raises(ValueError):
        D.DpInstance((-6, 0))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_exhaustive_agreement_with_brute_force(n):
    for inst in D.enumerate_instances(n):
        assert D.solve_dp(inst).output == D.brute_force_dp(inst)


def test_seeded_random_agreement_n5_to_10():
    rng = np.random.default_rng(101)
    for _ in range(2000):
        n = int(rng.integers(5, 11))
        inst = D.DpInstance(tuple(int(v) for v in rng.integers(-5, 6, size=n)))
        assert D.solve_dp(inst).output == D.brute_force_dp(inst)


def test_solution_invariants_random_sweep():
    rng = np.random.default_rng(55)
    for _ in range(500):
        n = int(rng.integers(1, 11))
        inst = D.DpInstance(tuple(int(v) for v in rng.integers(-5, 6, size=n)))
        sol = D.solve_dp(inst)
        picks = [i for i, o in enumerate(sol.output) if o == 1]
        assert all(b - a > 1 for a, b in zip(picks, picks[1:]))  # no adjacent picks
        assert sum(inst.values[i] for i in picks) == sol.best_sum


def test_enumeration_counts():
    assert D.count_instances(1) == 11
    assert len(list(D.enumerate_instances(1))) == 11
    assert D.count_instances(3) == 1331
    assert len(list(D.enumerate_instances(3))) == 1331
    total_1_to_5 = sum(D.count_instances(n) for n in range(1, 6))
    assert total_1_to_5 == 177_155
    assert round(0.8 * total_1_to_5) == 141_724  # the ~142K training share


def test_enumeration_order_is_lexicographic():
    insts = list(D.enumerate_instances(2))
    assert insts[0].values == (-5, -5)
    assert insts[1].values == (-5, -4)
    assert insts[-1].values == (5, 5)


def test_graph_topology_fixed_per_length():
    a = D.build_graph(D.DpInstance((3, 2, 1, 5, 2)))
    b = D.build_graph(D.DpInstance((-5, 5, 0, -1, 2)))
    assert set(a.nodes) == set(b.nodes)
    assert {n.id: (n.op, n.parents) for n in a.nodes.values()} == {
        n.id: (n.op, n.parents) for n in b.nodes.values()
    }


def test_graph_dp_values_match_worked_example_and_validate():
    g = D.build_graph(D.DpInstance((3, 2, 1, 5, 2)))
    assert [g.nodes[f"dp[{i}]"].value.payload for i in range(5)] == [8, 7, 5, 5, 2]
    assert G.validate(g, reevaluate=True).ok
    assert g.nodes["output"].value == G.NodeValue.digits([1, 2, 2, 1, 2])


def test_graph_depth_matches_independent_oracle():
    g = D.build_graph(D.DpInstance((3, 2, 1, 5, 2)))

    def longest(nid, memo={}):
        node = g.nodes[nid]
        if not node.parents:
            return 0
        return 1 + max(longest(p) for p in node.parents)

    assert G.reasoning_depth(g) == max(longest(nid) for nid in g.nodes)


def test_graphs_validate_over_random_sweep():
    rng = np.random.default_rng(9)
    for _ in range(100):
        n = int(rng.integers(2, 11))
        inst = D.DpInstance(tuple(int(v) for v in rng.integers(-5, 6, size=n)))
        assert G.validate(D.build_graph(inst), reevaluate=True).ok


def test_n1_graph_behind_base_case():
    g = D.build_graph(D.DpInstance((4,)))
    assert G.validate(g, reevaluate=True).ok
    assert g.nodes["output"].value == G.NodeValue.digits([1])


def test_per_position_accuracy():
    assert D.per_position_accuracy([1, 2, 2], [1, 2, 2]) == [1, 1, 1]
    assert D.per_position_accuracy([1, 2, 2], [1, 2, 1]) == [1, 1, 0]
    assert D.per_position_accuracy([1, 2], [1, 2, 2, 1, 2]) == [1, 1, 0, 0, 0]
    assert D.per_position_accuracy(None, [1, 2]) == [0, 0]


def test_question_text_matches_template():
    q = D.question_text(D.DpInstance((3, 2, 1, 5, 2)))
    assert q.startswith("Given a sequence of integers, find a subsequence with the highest sum")
    assert q.endswith("input = [3, 2, 1, 5, 2].")
    assert '"1" for chosen numbers and "2" for unchosen ones' in q
    assert D.answer_text(D.DpInstance((3, 2, 1, 5, 2))) == "[1, 2, 2, 1, 2]"
