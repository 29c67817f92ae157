from __future__ import annotations

from itertools import islice

import numpy as np
import pytest

from cgbench.graph import validate
from cgbench.tasks import multiplication as M


def test_worked_examples():
    g = M.build_graph(M.MultInstance(7, 49))
    assert g.nodes["product"].value.payload == 343

    g = M.build_graph(M.MultInstance(35, 90))
    assert g.nodes["product"].value.payload == 3150
    assert g.nodes["partial-product[0]"].value.payload == 0  # A=0
    assert g.nodes["partial-product[1]"].value.payload == 315  # B=315

    assert M.build_graph(M.MultInstance(22, 2)).nodes["product"].value.payload == 44


def test_enumeration_counts_and_order():
    ones = list(M.enumerate_instances(M.MultSpec(1, 1)))
    assert len(ones) == 81
    assert (ones[0].x, ones[0].y) == (1, 1)
    assert (ones[-1].x, ones[-1].y) == (9, 9)
    assert M.count_instances(M.MultSpec(2, 2)) == 8100
    assert M.count_instances(M.MultSpec(3, 3)) == 810_000
    assert M.count_instances(M.MultSpec(5, 5)) == 8_100_000_000
    # 5x5 streams without materializing
    head = list(islice(M.enumerate_instances(M.MultSpec(5, 5)), 3))
    assert [h.x for h in head] == [10000, 10000, 10000]


@pytest.mark.parametrize("k1,k2", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_exhaustive_sink_equals_product(k1, k2):
    for inst in M.enumerate_instances(M.MultSpec(k1, k2)):
        g = M.build_graph(inst)
        assert g.nodes["product"].value.payload == inst.x * inst.y


def test_sampled_large_instances_validate():
    rng = np.random.default_rng(11)
    for _ in range(60):
        k1, k2 = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        x = int(rng.integers(10 ** (k1 - 1), 10**k1))
        y = int(rng.integers(10 ** (k2 - 1), 10**k2))
        g = M.build_graph(M.MultInstance(x, y))
        assert g.nodes["product"].value.payload == x * y
        assert validate(g, reevaluate=True).ok


def test_thousand_sampled_sinks():
    rng = np.random.default_rng(12)
    ks = rng.integers(1, 6, size=(1000, 2))
    for k1, k2 in ks:
        x = int(rng.integers(10 ** (k1 - 1), 10**k1))
        y = int(rng.integers(10 ** (k2 - 1), 10**k2))
        assert M.build_graph(M.MultInstance(x, y)).nodes["product"].value.payload == x * y


def test_topology_depends_only_on_spec():
    a = M.build_graph(M.MultInstance(321, 45))
    b = M.build_graph(M.MultInstance(999, 10))
    assert set(a.nodes) == set(b.nodes)
    assert {n.id: n.parents for n in a.nodes.values()} == {n.id: n.parents for n in b.nodes.values()}
    assert {n.id: n.op for n in a.nodes.values()} == {n.id: n.op for n in b.nodes.values()}


def test_commuted_inputs_same_product_different_graph():
    a = M.build_graph(M.MultInstance(321, 45))
    b = M.build_graph(M.MultInstance(45, 321))
    assert a.nodes["product"].value == b.nodes["product"].value
    assert set(a.nodes) != set(b.nodes)


def test_operand_validation():
    with pytest.raises(ValueError):
        M.MultInstance(0, 5)
    with pytest.raises(ValueError):
        M.MultSpec(0, 3)
    with pytest.raises(ValueError):
        M.MultSpec(6, 1)


def test_question_answer_text():
    inst = M.MultInstance(35, 90)
    assert M.question_text(inst) == "What is 35 times 90?"
    assert M.answer_text(inst) == "3150"  # not zero-padded


# -- partial metrics ----------------------------------------------------------


def test_partial_metrics_exact_match_all_ones():
    assert M.partial_metrics(3150, 3150) == {m: 1 for m in M.PARTIAL_METRICS}


def test_partial_metrics_hand_derived():
    got = M.partial_metrics(3140, 3150)
    # 3140 and 3150 agree on the leading digits, the last digit, the digit
    # count and the (single) trailing zero; they differ on the last two.
    assert got == {
        "first_digit": 1,
        "first_two": 1,
        "last_digit": 1,
        "last_two": 0,
        "digit_count": 1,
        "trailing_zeros": 1,
    }
    assert M.partial_metrics(3400, 3040, )["trailing_zeros"] == 0  # 2 vs 1 trailing zeros
    assert M.partial_metrics(314, 3150)["trailing_zeros"] == 0  # 0 vs 1


def test_partial_metrics_unparseable_is_all_zero():
    assert M.partial_metrics("unknown", 44) == {m: 0 for m in M.PARTIAL_METRICS}
    assert M.partial_metrics(None, 44) == {m: 0 for m in M.PARTIAL_METRICS}


def test_partial_metrics_total_on_junk_strings():
    for junk in ["", " 12 ", "12.", "-5", "1e3", "twelve"]:
        out = M.partial_metrics(junk, 100)
        assert set(out) == set(M.PARTIAL_METRICS)
        assert all(v in (0, 1) for v in out.values())


def test_partial_metrics_rejects_nonpositive_truth():
    with pytest.raises(ValueError):
        M.partial_metrics(1, 0)
