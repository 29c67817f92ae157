from __future__ import annotations

import numpy as np
import pytest

from cgbench import theory
from cgbench.harness import datasets as D
from cgbench.harness import reports
from cgbench.harness.evaluate import build_prompt, evaluate, read_records, write_records
from cgbench.harness.models import ModelSpec, corrupt_claims


def test_split_fractions_to_within_one(tmp_path):
    counts = D.build_dataset("multiplication", [{"k1": 1, "k2": 1}], tmp_path / "d.jsonl", seed=0)
    assert counts["train"] in (64, 65, 66)
    assert counts["valid"] in (7, 8, 9)
    assert counts["test"] in (7, 8, 9)
    assert counts["train"] + counts["valid"] + counts["test"] == 81


def test_bad_fractions_rejected(tmp_path):
    with pytest.raises(ValueError):
        D.build_dataset("multiplication", [{"k1": 1, "k2": 1}], tmp_path / "d.jsonl", fractions=(0.8, 0.1, 0.2))


def test_dataset_determinism_and_disjointness(tmp_path):
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for p in (p1, p2):
        D.build_dataset("dp", [{"n": 2}, {"n": 3}], p, seed=5, ood_sizes=[{"n": 4}])
    assert p1.read_bytes() == p2.read_bytes()
    seen: dict[str, str] = {}
    for rec in D.read_dataset(p1):
        assert rec.instance_id not in seen
        seen[rec.instance_id] = rec.split
        if rec.size == {"n": 4}:
            assert rec.split == "ood"
    assert set(seen.values()) == {"train", "valid", "test", "ood"}


def test_record_contents_round_trip(tmp_path):
    D.build_dataset("multiplication", [{"k1": 2, "k2": 1}], tmp_path / "d.jsonl", seed=1)
    rec = next(D.read_dataset(tmp_path / "d.jsonl"))
    g = rec.graph()
    assert g.nodes[g.sink].value.payload == int(rec.answer)
    assert rec.question.startswith("What is")
    assert rec.stats["depth"] >= 1
    assert "Scratchpad:" in rec.scratchpad


def test_split_by_graph_stat(tmp_path):
    D.build_dataset("dp", [{"n": 2}, {"n": 4}], tmp_path / "d.jsonl", seed=2)
    records = list(D.read_dataset(tmp_path / "d.jsonl"))
    unchanged = list(D.split_by_graph_stat(records, "depth", float("inf")))
    assert [r.split for r in unchanged] == [r.split for r in records]
    all_ood = list(D.split_by_graph_stat(records, "depth", 0))
    assert all(r.split == "ood" for r in all_ood)
    depth_n2 = next(r.stats["depth"] for r in records if r.size == {"n": 2})
    mixed = list(D.split_by_graph_stat(records, "depth", depth_n2))
    for r in mixed:
        if r.size == {"n": 4}:
            assert r.split == "ood"
    with pytest.raises(ValueError):
        list(D.split_by_graph_stat(records, "nonsense", 1))


def test_puzzle_dataset_records(tmp_path):
    counts = D.build_dataset("puzzle", [{"k": 2, "m": 2}], tmp_path / "p.jsonl", seed=3, sample=6)
    assert sum(counts.values()) == 6
    rec = next(D.read_dataset(tmp_path / "p.jsonl"))
    assert rec.question.startswith("This is a logic puzzle.")
    assert "$ House:" in rec.answer


# -- noisy oracle ---------------------------------------------------------------


def oracle_records(tmp_path, eps=0.0, c=0.0, sizes=({"k1": 1, "k2": 1},), sample=None):
    path = tmp_path / "m.jsonl"
    D.build_dataset("multiplication", list(sizes), path, seed=7, sample=sample)
    records = list(D.read_dataset(path))
    model = ModelSpec("noisy-oracle", epsilon=eps, c=c, seed=11).build()
    return records, model


def test_oracle_eps_zero_exact_match(tmp_path):
    records, model = oracle_records(tmp_path)
    evals = evaluate(model, records[:30], prompt_mode="few-shot-scratchpad")
    assert all(e.exact_match == 1 for e in evals)
    assert all(all(c == "fully-correct" for c, _ in e.node_categories.values()) for e in evals)


def test_oracle_eps_one_all_nonsource_wrong(tmp_path):
    records, _ = oracle_records(tmp_path, sizes=({"k1": 2, "k2": 2},), sample=60)
    rng = np.random.default_rng(0)
    for rec in records[:10]:
        g = rec.graph()
        claims = corrupt_claims(g, 1.0, 0.0, rng)
        for nid, node in g.nodes.items():
            if node.is_source:
                assert claims[nid] == node.value
            else:
                assert claims[nid] != node.value, nid


def test_oracle_determinism_and_qa_mode(tmp_path):
    records, model = oracle_records(tmp_path, eps=0.3)
    a = evaluate(model, records[:15], prompt_mode="few-shot-scratchpad")
    b = evaluate(model, records[:15], prompt_mode="few-shot-scratchpad")
    assert [x.raw_response for x in a] == [y.raw_response for y in b]
    qa = evaluate(model, records[:15], prompt_mode="zero-shot")
    assert all("\n" not in e.raw_response for e in qa)  # answers only


def test_oracle_restoration_channel(tmp_path):
    records, _ = oracle_records(tmp_path, sizes=({"k1": 3, "k2": 2},), sample=60)
    rng = np.random.default_rng(3)
    saw_restoration = False
    for rec in records[:40]:
        g = rec.graph()
        claims = corrupt_claims(g, 0.3, 0.5, rng)
        for nid, node in g.nodes.items():
            parents_wrong = any(claims[p] != g.nodes[p].value for p in node.parents)
            if parents_wrong and claims[nid] == node.value:
                saw_restoration = True
    assert saw_restoration


def test_oracle_matches_depth_chain_within_ci(tmp_path):
    """Sink-correctness of the 1x1 oracle corpus tracks the 4-step chain."""
    eps = 0.1
    records, model = oracle_records(tmp_path, eps=eps)
    evals = evaluate(model, records, prompt_mode="few-shot-scratchpad")
    rate = sum(e.exact_match for e in evals) / len(evals)
    # the 1x1 graph is a 4-node chain after the sources
    sim = theory.simulate_depth(theory.SimulationSpec("depth", (4,), eps, c=0.0, trials=100_000, seed=1))
    expected = 1.0 - sim.row(4).empirical
    hw = 3 * (expected * (1 - expected) / len(evals)) ** 0.5
    assert abs(rate - expected) <= hw + 0.01


def test_cache_prevents_regeneration(tmp_path):
    records, _ = oracle_records(tmp_path)

    class CountingModel:
        model_id = "counting"
        calls = 0

        def generate(self, record, prompt, mode):
            CountingModel.calls += 1
            return record.scratchpad

    model = CountingModel()
    evaluate(model, records[:10], prompt_mode="few-shot-scratchpad", cache_dir=tmp_path / "cache")
    first = CountingModel.calls
    evaluate(model, records[:10], prompt_mode="few-shot-scratchpad", cache_dir=tmp_path / "cache")
    assert CountingModel.calls == first  # cached rerun makes zero model calls


def test_transport_errors_recorded_not_raised(tmp_path):
    records, _ = oracle_records(tmp_path)

    class FailingModel:
        model_id = "broken"

        def generate(self, record, prompt, mode):
            raise RuntimeError("boom")

    evals = evaluate(FailingModel(), records[:5], prompt_mode="zero-shot")
    assert all(e.error == "boom" for e in evals)
    assert all(e.exact_match == 0 for e in evals)


def test_eval_records_jsonl_round_trip(tmp_path):
    records, model = oracle_records(tmp_path, eps=0.2)
    evals = evaluate(model, records[:8], prompt_mode="few-shot-scratchpad")
    path = tmp_path / "evals.jsonl"
    write_records(evals, path)
    again = read_records(path)
    assert [e.instance_id for e in again] == [e.instance_id for e in evals]
    assert [e.node_categories for e in again] == [{k: list(v) for k, v in e.node_categories.items()} for e in evals]


def test_worker_count_does_not_change_results(tmp_path):
    records, model = oracle_records(tmp_path, eps=0.25)
    a = evaluate(model, records[:40], prompt_mode="few-shot-scratchpad", workers=1)
    b = evaluate(model, records[:40], prompt_mode="few-shot-scratchpad", workers=8)
    strip = lambda e: (e.instance_id, e.raw_response, e.exact_match, e.partial, e.node_categories)
    assert [strip(e) for e in a] == [strip(e) for e in b]


def test_prompt_modes(tmp_path):
    records, _ = oracle_records(tmp_path)
    exemplars = records[:3]
    zero = build_prompt(records[5], "zero-shot", [])
    assert zero.startswith("To multiply two numbers")
    few = build_prompt(records[5], "few-shot-qa", exemplars)
    assert few.count("Questions:") == 4  # 3 exemplars + the query
    scratch = build_prompt(records[5], "few-shot-scratchpad", exemplars)
    assert scratch.count("Scratchpad:") == 4
    assert scratch.rstrip().endswith("Scratchpad:")


def test_http_model_follow_path_and_headers(monkeypatch):
    from cgbench.harness.models import _follow_path

    payload = {"choices": [{"message": {"content": "42"}}]}
    assert _follow_path(payload, "choices.0.message.content") == "42"
    spec = ModelSpec("http-endpoint", model_id="m", url="http://example.invalid", token_env="CG_TOKEN")
    model = spec.build()
    monkeypatch.setenv("CG_TOKEN", "sekrit")
    assert model._headers()["Authorization"] == "Bearer sekrit"


def test_report_csvs_deterministic(tmp_path):
    records, model = oracle_records(tmp_path, eps=0.15)
    evals = evaluate(model, records[:30], prompt_mode="few-shot-scratchpad")
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    p1 = reports.report(evals, d1)
    p2 = reports.report(evals, d2)
    for key in p1:
        assert p1[key].read_bytes() == p2[key].read_bytes()
    surface = (d1 / "surface.csv").read_text()
    assert "last_digit" in surface and "internal_error_given_correct" in surface


def test_noisy_corpus_last_digit_beats_exact(tmp_path):
    records, model = oracle_records(tmp_path, eps=0.15, sizes=({"k1": 2, "k2": 2},), sample=300)
    evals = evaluate(model, records[:300], prompt_mode="few-shot-scratchpad")
    exact = sum(e.exact_match for e in evals) / len(evals)
    last = sum(e.partial["last_digit"] for e in evals) / len(evals)
    assert last >= exact


def test_end_to_end_thousand_instances(tmp_path):
    """gen -> eval(oracle, eps=0.1) -> classify consumes 1000 records with
    zero pipeline errors."""
    path = tmp_path / "mix.jsonl"
    D.build_dataset("multiplication", [{"k1": 2, "k2": 2}], path, seed=13, sample=500)
    D.build_dataset("dp", [{"n": 4}], tmp_path / "dp.jsonl", seed=13, sample=500)
    records = list(D.read_dataset(path)) + list(D.read_dataset(tmp_path / "dp.jsonl"))
    assert len(records) == 1000
    model = ModelSpec("noisy-oracle", epsilon=0.1, c=0.01, seed=21).build()
    evals = evaluate(model, records, prompt_mode="few-shot-scratchpad", workers=4)
    assert len(evals) == 1000
    assert all(not e.error for e in evals)
    assert all(e.node_categories for e in evals)
