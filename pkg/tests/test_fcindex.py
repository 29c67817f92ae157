from __future__ import annotations

import random
from pathlib import Path

import pytest

from cgbench import fcindex as F
from cgbench.graph import ComputationGraph, Node, layer_numbers
from cgbench.tasks import dp as dp_task
from cgbench.tasks import multiplication as mult_task


def relabel(graph: ComputationGraph, seed: int) -> ComputationGraph:
    rng = random.Random(seed)
    mapping = {nid: f"r{rng.getrandbits(40):010x}" for nid in graph.nodes}
    return ComputationGraph(
        graph.task,
        {
            mapping[n.id]: Node(mapping[n.id], n.value, n.op, tuple(mapping[p] for p in n.parents))
            for n in graph.nodes.values()
        },
        mapping[graph.sink],
        meta=dict(graph.meta),
    )


def test_full_computation_source_and_sink():
    g = mult_task.build_graph(mult_task.MultInstance(35, 90))
    fc = F.full_computation(g, "x[0]")
    assert set(fc.nodes) == {"x[0]"}
    assert set(F.full_computation(g, g.sink).nodes) == set(g.nodes)
    with pytest.raises(KeyError):
        F.full_computation(g, "nope")


def test_full_computation_partial_product_hand_enumerated():
    g = mult_task.build_graph(mult_task.MultInstance(35, 90))
    fc = F.full_computation(g, "partial-product[1]")
    expected = {
        "partial-product[1]",
        "digitmult[1][1]",
        "partial-digit[1][0]",
        "carry[1][0]",
        "digitmult[1][0]",
        "x[0]",
        "x[1]",
        "y[1]",
    }
    assert set(fc.nodes) == expected


def test_fingerprint_relabeling_invariance():
    g = dp_task.build_graph(dp_task.DpInstance((3, 2, 1, 5, 2)))
    other = relabel(g, 3)
    assert F.fingerprint(g).digest == F.fingerprint(other).digest
    assert F.fingerprint(g).depth == F.fingerprint(other).depth


def test_fingerprint_value_sensitivity_and_ops_only_mode():
    a = dp_task.build_graph(dp_task.DpInstance((3, 2, 1, 5, 2)))
    b = dp_task.build_graph(dp_task.DpInstance((3, 2, 1, 5, 3)))  # one leaf changed
    assert F.fingerprint(a).digest != F.fingerprint(b).digest
    # ops-only mode ignores values: same topology => same fingerprint
    assert F.fingerprint(a, include_values=False).digest == F.fingerprint(b, include_values=False).digest


def test_cross_instance_containment():
    inside = mult_task.build_graph(mult_task.MultInstance(7, 49))
    standalone = mult_task.build_graph(mult_task.MultInstance(7, 9))
    fps_in = F.graph_fingerprints(inside)
    fps_alone = F.graph_fingerprints(standalone)
    assert fps_in["digitmult[0][0]"].digest == fps_alone["digitmult[0][0]"].digest
    assert F.fc_equal(inside, "digitmult[0][0]", standalone, "digitmult[0][0]")


def test_fc_depth_equals_layer_number():
    g = mult_task.build_graph(mult_task.MultInstance(321, 45))
    layers = layer_numbers(g)
    for nid, fp in F.graph_fingerprints(g).items():
        assert fp.depth == layers[nid]


def test_collision_verifier_on_equal_fingerprints():
    graphs = [mult_task.build_graph(inst) for inst in mult_task.enumerate_instances(mult_task.MultSpec(1, 1))]
    by_digest: dict[bytes, list] = {}
    for g in graphs:
        for nid, fp in F.graph_fingerprints(g).items():
            by_digest.setdefault(fp.digest, []).append((g, nid))
    checked = 0
    for entries in by_digest.values():
        first_g, first_n = entries[0]
        for g, nid in entries[1:]:
            assert F.fc_equal(first_g, first_n, g, nid)
            checked += 1
    assert checked > 0  # shared digits guarantee real collisions to verify


def test_fc_equal_rejects_value_mismatch():
    a = mult_task.build_graph(mult_task.MultInstance(3, 4))
    b = mult_task.build_graph(mult_task.MultInstance(3, 5))
    assert not F.fc_equal(a, "digitmult[0][0]", b, "digitmult[0][0]")
    assert F.fc_equal(a, "digitmult[0][0]", b, "digitmult[0][0]", include_values=False)


def test_index_self_containment_and_counts():
    g = dp_task.build_graph(dp_task.DpInstance((1, -2, 3)))
    index = F.build_index([g], corpus_id="self")
    assert index.total == len(g.nodes)
    report = F.match_frequency(g, index)
    assert all(count >= 1 for count in report.per_node.values())
    assert all(mean >= 1.0 for mean in report.per_depth_mean.values())


def test_train_small_test_large_frequencies():
    train = [mult_task.build_graph(inst) for inst in mult_task.enumerate_instances(mult_task.MultSpec(1, 1))]
    index = F.build_index(train, corpus_id="1x1")
    query = mult_task.build_graph(mult_task.MultInstance(35, 92))
    report = F.match_frequency(query, index)
    # nonzero-digit sources and the first-column digit multiplications hit
    assert report.per_node["x[0]"] >= 1
    assert report.per_node["digitmult[0][0]"] >= 1
    assert report.per_node["digitmult[1][0]"] >= 1
    # deeper layers exceed anything the 1x1 corpus contains
    max_train_depth = max(F.fingerprint(g).depth for g in train)
    for nid, fp in F.graph_fingerprints(query).items():
        if fp.depth > max_train_depth:
            assert report.per_node[nid] == 0


def test_disjoint_corpora_all_zero():
    index = F.build_index([dp_task.build_graph(dp_task.DpInstance((1, 2)))])
    query = mult_task.build_graph(mult_task.MultInstance(7, 9))
    report = F.match_frequency(query, index)
    assert all(v == 0 for v in report.per_node.values())


def test_determinism_across_runs():
    g = mult_task.build_graph(mult_task.MultInstance(47, 13))
    assert F.fingerprint(g).digest == F.fingerprint(g).digest
    a = F.build_index([g]).counts
    b = F.build_index([g]).counts
    assert a == b


def test_persistence_round_trip(tmp_path: Path):
    graphs = [mult_task.build_graph(mult_task.MultInstance(x, 7)) for x in (3, 5, 9, 12)]
    index = F.build_index(graphs, corpus_id="round-trip")
    path = tmp_path / "fc.bin"
    index.dump(str(path))
    loaded = F.FingerprintIndex.load(str(path))
    assert loaded.counts == index.counts
    assert loaded.depths == index.depths
    assert loaded.corpus_id == "round-trip"
    assert loaded.include_values == index.include_values


def test_frequency_rows_schema():
    train = [mult_task.build_graph(mult_task.MultInstance(x, y)) for x in (2, 3) for y in (4, 5)]
    index = F.build_index(train)
    rows = F.frequency_rows([(train[0], True), (train[1], False)], index)
    assert {r["answer_correct"] for r in rows} == {0, 1}
    assert all(set(r) == {"depth", "answer_correct", "mean_frequency", "count"} for r in rows)
