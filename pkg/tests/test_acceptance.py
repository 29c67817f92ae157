"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from cgbench import analysis, fcindex, golden, theory
from cgbench.codec import parse_document, render_document, shape_of
from cgbench.graph import evaluate_op, linearize
from cgbench.harness import datasets as D
from cgbench.harness import reports
from cgbench.harness.evaluate import evaluate
from cgbench.harness.models import ModelSpec, wrong_value
from cgbench.tasks import dp as dp_task
from cgbench.tasks import multiplication as mult_task
from cgbench.tasks import puzzle as puzzle_task

GOLDEN = Path(__file__).parent / "golden"


def _report(num: int, detail: str) -> None:
    print(f"\nACCEPTANCE {num}: PASS - {detail}")


def test_criterion_1_relative_ig_multiplication():
    started = time.monotonic()
    d22 = analysis.DistributionSpec("multiplication", (2, 2))
    d33 = analysis.DistributionSpec("multiplication", (3, 3))
    checks = [
        (analysis.relative_ig(d22, ["x2"], "z4"), 0.223),
        (analysis.relative_ig(d22, ["x2", "y2"], "z4"), 1.000),
        (analysis.relative_ig(d22, ["x1"], "z1"), 0.198),
        (analysis.relative_ig(d22, ["x1", "y1"], "z1"), 0.788),
        (analysis.relative_ig(d33, ["x3"], "z6"), 0.223),
        (analysis.relative_ig(d33, ["x3", "y3"], "z6"), 1.000),
        (analysis.relative_ig(d33, ["x1"], "z1"), 0.199),
    ]
    for got, want in checks:
        assert abs(got - want) <= 0.001, (got, want)
    elapsed = time.monotonic() - started
    assert elapsed < 120
    _report(1, f"exhaustive 2x2/3x3 multiplication relative-IG anchors reproduced to +/-0.001 in {elapsed:.1f}s")


def test_criterion_2_relative_ig_dp():
    started = time.monotonic()
    d2 = analysis.DistributionSpec("dp", (2,))
    d3 = analysis.DistributionSpec("dp", (3,))
    checks = [
        (analysis.relative_ig(d2, ["a1"], "o1"), 0.64),
        (analysis.relative_ig(d3, ["a1"], "o1"), 0.71),
        (analysis.relative_ig(d2, ["a1"], "o2"), 0.15),
    ]
    for got, want in checks:
        assert abs(got - want) <= 0.005, (got, want)
    elapsed = time.monotonic() - started
    assert elapsed < 60
    _report(2, f"exhaustive DP relative-IG anchors reproduced to +/-0.005 in {elapsed:.1f}s")


def test_criterion_3_enumeration_counts():
    assert mult_task.count_instances(mult_task.MultSpec(1, 1)) == 81
    assert len(list(mult_task.enumerate_instances(mult_task.MultSpec(1, 1)))) == 81
    assert mult_task.count_instances(mult_task.MultSpec(2, 2)) == 8100
    assert len(list(mult_task.enumerate_instances(mult_task.MultSpec(2, 2)))) == 8100
    assert mult_task.count_instances(mult_task.MultSpec(3, 3)) == 810_000
    _report(3, "enumeration counts 81 / 8100 / 810000 exact")


def test_criterion_4_golden_scratchpads():
    cases = [
        (mult_task.build_graph(golden.multiplication_example()), "multiplication_35x90.txt"),
        (dp_task.build_graph(golden.dp_example()), "dp_3_2_1_5_2.txt"),
        (puzzle_task.greedy_solve(golden.puzzle_example()), "puzzle_3house.txt"),
    ]
    for graph, filename in cases:
        assert render_document(graph) == (GOLDEN / filename).read_text(), filename
    assert golden.multiplication_example().product == 3150
    assert dp_task.solve_dp(golden.dp_example()).output == (1, 2, 2, 1, 2)
    _report(4, "golden documents byte-exact for 35x90, the 3-house puzzle, [3,2,1,5,2]")


def test_criterion_5_dp_oracle_equivalence():
    started = time.monotonic()
    total = 0
    for n in (2, 3, 4):
        for inst in dp_task.enumerate_instances(n):
            assert dp_task.solve_dp(inst).output == dp_task.brute_force_dp(inst)
            total += 1
    assert total == 16_093
    rng = np.random.default_rng(20_240_601)
    for _ in range(10_000):
        n = int(rng.integers(5, 11))
        inst = dp_task.DpInstance(tuple(int(v) for v in rng.integers(-5, 6, size=n)))
        assert dp_task.solve_dp(inst).output == dp_task.brute_force_dp(inst)
    elapsed = time.monotonic() - started
    assert elapsed < 60
    _report(5, f"solver == brute force on 16093 exhaustive + 10000 sampled lists in {elapsed:.1f}s")


def test_criterion_6_puzzle_soundness():
    started = time.monotonic()
    per_size = 200
    checked = 0
    for k in range(2, 5):
        for m in range(2, 5):
            for seed in range(per_size):
                inst = puzzle_task.generate(puzzle_task.PuzzleSpec(k, m, seed=seed))
                assert puzzle_task.count_solutions(inst.clues, inst.attributes, inst.k) == 1
                g = puzzle_task.greedy_solve(inst)
                assert g.nodes[g.sink].value == puzzle_task.solution_value(inst)
                checked += 1
    elapsed = time.monotonic() - started
    assert checked == 1800
    assert elapsed < 600
    _report(6, f"{checked} generated puzzles unique + greedy round-trip in {elapsed:.0f}s")


def _recompute(graph, overrides):
    claims = {}
    for nid in linearize(graph):
        node = graph.nodes[nid]
        if nid in overrides:
            claims[nid] = overrides[nid]
        elif not node.parents:
            claims[nid] = node.value
        else:
            claims[nid] = evaluate_op(node.op, [claims[p] for p in node.parents], graph)
    return claims


def _classify_claims(graph, claims):
    pred = parse_document(render_document(graph, claims), graph.task, shape_of(graph))
    return analysis.classify_nodes(graph, pred)


def _pick_restoration_site(graph, rng):
    """A (child, corrupted parent claim) pair whose stated computation is false.

    Retries until the corrupted argument actually changes the child's stated
    computation (a collision would leave the child fully correct instead).
    """
    internal = [nid for nid, n in graph.nodes.items() if n.parents]
    for _ in range(50):
        child = internal[int(rng.integers(0, len(internal)))]
        parents = [p for p in graph.nodes[child].parents if graph.nodes[p].value.kind != "clue"]
        if not parents:
            continue
        parent = parents[int(rng.integers(0, len(parents)))]
        wrong_parent = wrong_value(
            graph.nodes[parent].value, graph.nodes[parent], graph, rng, avoid=graph.nodes[parent].value
        )
        if wrong_parent == graph.nodes[parent].value:
            continue
        args = [
            wrong_parent if p == parent else graph.nodes[p].value for p in graph.nodes[child].parents
        ]
        try:
            stated = evaluate_op(graph.nodes[child].op, args, graph)
        except Exception:
            continue
        if stated != graph.nodes[child].value:
            return child, parent, wrong_parent
    return None  # e.g. a one-step puzzle whose only parents are clue sources


def _injection_sweep(graphs, trials, seed):
    """Alternate local and restoration injections; verify recovered categories."""
    rng = np.random.default_rng(seed)
    local = restoration = 0
    for t in range(trials):
        graph = graphs[t % len(graphs)]
        internal = [nid for nid, n in graph.nodes.items() if n.parents]
        if t % 2 == 0:
            target = internal[int(rng.integers(0, len(internal)))]
            node = graph.nodes[target]
            claims = _recompute(graph, {target: wrong_value(node.value, node, graph, rng, avoid=node.value)})
            cl = _classify_claims(graph, claims)
            assert cl[target].category == "local-error", (graph.task, target, cl[target])
            for nid, c in cl.items():
                if nid != target and claims[nid] != graph.nodes[nid].value:
                    assert c.category == "propagation-error", (graph.task, nid, c)
            local += 1
        else:
            site = None
            for offset in range(len(graphs)):
                graph = graphs[(t + offset) % len(graphs)]
                site = _pick_restoration_site(graph, rng)
                if site is not None:
                    break
            assert site is not None, "no graph in the pool admits a restoration site"
            child, parent, wrong_parent = site
            claims = _recompute(graph, {parent: wrong_parent, child: graph.nodes[child].value})
            cl = _classify_claims(graph, claims)
            assert cl[child].category == "restoration-error", (graph.task, child, cl[child])
            assert cl[parent].category == "local-error", (graph.task, parent, cl[parent])
            for nid, c in cl.items():
                if nid not in (parent, child) and claims[nid] != graph.nodes[nid].value:
                    assert c.category == "propagation-error", (graph.task, nid, c)
            restoration += 1
    return local, restoration


def test_criterion_7_error_taxonomy_oracle(generated_puzzles):
    started = time.monotonic()
    rng = np.random.default_rng(77)
    mult_graphs = [
        mult_task.build_graph(
            mult_task.MultInstance(int(rng.integers(10, 1000)), int(rng.integers(10, 1000)))
        )
        for _ in range(24)
    ]
    dp_graphs = [
        dp_task.build_graph(dp_task.DpInstance(tuple(int(v) for v in rng.integers(-5, 6, size=int(rng.integers(3, 9))))))
        for _ in range(24)
    ]
    puzzle_graphs = [puzzle_task.greedy_solve(inst) for inst in generated_puzzles]
    totals = {}
    seeds = {"multiplication": 701, "dp": 702, "puzzle": 703}
    for name, graphs in [("multiplication", mult_graphs), ("dp", dp_graphs), ("puzzle", puzzle_graphs)]:
        totals[name] = _injection_sweep(graphs, trials=1000, seed=seeds[name])
    elapsed = time.monotonic() - started
    detail = ", ".join(f"{k}: {v[0]} local + {v[1]} restoration" for k, v in totals.items())
    for name, (nl, nr) in totals.items():
        assert nl == 500 and nr == 500, (name, nl, nr)
    _report(7, f"injected categories recovered at 100% over 1000 corrupted scratchpads per task ({detail}; {elapsed:.0f}s)")


def test_criterion_8_subgraph_index():
    train = [mult_task.build_graph(i) for i in mult_task.enumerate_instances(mult_task.MultSpec(1, 1))]
    index = fcindex.build_index(train, corpus_id="1x1")

    # self-containment: every node of every training graph has frequency >= 1
    for g in train[:20]:
        report = fcindex.match_frequency(g, index)
        assert all(v >= 1 for v in report.per_node.values())

    # cross-containment: standalone 1x1 FCs equal the embedded ones in 2x2
    embedded = mult_task.build_graph(mult_task.MultInstance(35, 92))
    fps = fcindex.graph_fingerprints(embedded)
    standalone = fcindex.graph_fingerprints(mult_task.build_graph(mult_task.MultInstance(5, 2)))
    assert fps["digitmult[0][0]"].digest == standalone["digitmult[0][0]"].digest

    # train-on-small / test-on-large: frequency 0 beyond the training depth
    max_depth = max(fcindex.fingerprint(g).depth for g in train)
    report = fcindex.match_frequency(embedded, index)
    hits = {nid: v for nid, v in report.per_node.items()}
    assert hits["digitmult[0][0]"] >= 1 and hits["digitmult[1][0]"] >= 1
    deep = [nid for nid, fp in fps.items() if fp.depth > max_depth]
    assert deep and all(hits[nid] == 0 for nid in deep)
    _report(8, "self-containment, 1x1-in-2x2 containment, zero hits beyond training depth")


def test_criterion_9_theory_bounds():
    started = time.monotonic()
    trials = 100_000
    width = theory.simulate_width(
        theory.SimulationSpec("width", tuple(range(1, 41)), 0.05, c=0.0, trials=trials, seed=90)
    )
    assert width.all_satisfied()

    depth = theory.simulate_depth(
        theory.SimulationSpec("depth", tuple(range(1, 201)), 0.1, c=0.01, trials=trials, seed=91)
    )
    assert depth.all_satisfied()
    assert depth.row(200).empirical >= 0.90
    assert abs(theory.depth_failure_limit(0.1, 0.01) - 0.90909) < 1e-4

    state = theory.simulate_state_transition(
        theory.SimulationSpec("state-transition", (1, 10, 50, 100, 200), 0.1, c=0.1, trials=trials, seed=92)
    )
    assert state.all_satisfied()

    for domain, expected in ((10, 0.01), (2, 0.05)):
        check = theory.empirical_collision_check(domain, 0.1, trials=trials, seed=93)
        assert check.rows[0].satisfied
        assert abs(check.rows[0].empirical - expected) <= 3 * (expected * (1 - expected) / trials) ** 0.5 + 1e-9

    elapsed = time.monotonic() - started
    assert elapsed < 300
    _report(9, f"all lower bounds dominated within 3 sigma; depth failure {depth.row(200).empirical:.4f} >= 0.90 at n=200 ({elapsed:.0f}s)")


def test_criterion_10_pipeline_determinism(tmp_path):
    def run(workers: int, out: Path) -> dict:
        data = out / "data.jsonl"
        counts = D.build_dataset(
            "multiplication",
            [{"k1": 1, "k2": 1}, {"k1": 2, "k2": 2}],
            data,
            seed=1234,
            sample=120,
            ood_sizes=[],
        )
        records = list(D.read_dataset(data))[:240]
        model = ModelSpec("noisy-oracle", epsilon=0.1, c=0.01, seed=7).build()
        evals = evaluate(model, records, prompt_mode="few-shot-scratchpad", workers=workers)
        paths = reports.report(evals, out / "csv")
        return {k: p.read_bytes() for k, p in paths.items()} | {"dataset": data.read_bytes(), "counts": str(counts).encode()}

    a = run(1, tmp_path / "w1")
    b = run(8, tmp_path / "w8")
    assert set(a) == set(b)
    for key in a:
        assert a[key] == b[key], f"{key} differs between 1 and 8 workers"
    _report(10, "gen -> eval(oracle) -> classify -> report byte-identical across 1 and 8 workers")
