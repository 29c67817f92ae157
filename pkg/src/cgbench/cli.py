"""Command-line interface.

Subcommands: gen, stats, ig, eval, classify, index, sim, report. A YAML
config file may supply defaults per subcommand (``--config``); explicit
flags win. All outputs are CSV or JSONL.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import analysis, fcindex, theory
from .harness import datasets, models, reports
from .harness.evaluate import PROMPT_MODES, evaluate as run_evaluation, read_records, write_records
from .tasks import dp as dp_task
from .tasks import multiplication as mult_task
from .tasks import puzzle as puzzle_task

TASKS = (mult_task.TASK, puzzle_task.TASK, dp_task.TASK)


def _parse_size(task: str, text: str) -> dict[str, int]:
    if task == mult_task.TASK:
        k1, k2 = text.lower().split("x")
        return {"k1": int(k1), "k2": int(k2)}
    if task == dp_task.TASK:
        return {"n": int(text)}
    k, m = text.lower().split("x")
    return {"k": int(k), "m": int(m)}


def _parse_sizes(task: str, text: str) -> list[dict[str, int]]:
    return [_parse_size(task, part) for part in text.split(",") if part]


def _parse_ns(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = part.split(":")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


def _write_csv(path: str, fieldnames, rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(fieldnames))
        w.writeheader()
        for row in rows:
            w.writerow(row)


def _load_config(argv):
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return {}
    import yaml

    with open(known.config) as f:
        loaded = yaml.safe_load(f) or {}
    if not isinstance(loaded, dict):
        raise SystemExit("config file must hold a mapping of subcommand -> options")
    return loaded


def build_parser(config: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgbench", description=__doc__, allow_abbrev=False)
    parser.add_argument("--config", default=None, help="YAML file with per-subcommand defaults")
    sub = parser.add_subparsers(dest="cmd", required=True)
    pending_defaults: list[tuple[argparse.ArgumentParser, dict]] = []

    def cmd(name: str, **kwargs):
        p = sub.add_parser(name, **kwargs)
        pending_defaults.append((p, config.get(name, {})))
        return p

    p = cmd("gen", help="build a dataset with splits")
    p.add_argument("--task", choices=TASKS, required=True)
    p.add_argument("--sizes", required=True, help="e.g. 1x1,2x2 (mult/puzzle) or 2,3,4 (dp)")
    p.add_argument("--ood-sizes", default="", help="sizes tagged ood and excluded from train")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fractions", default="0.8,0.1,0.1")
    p.add_argument("--sample", type=int, default=None, help="sample this many instances per size")
    p.add_argument("--allow-unit-dp", action="store_true", help="allow dp datasets with n = 1")
    p.add_argument("--split-stat", default=None, choices=["size", "depth", "width"])
    p.add_argument("--split-threshold", type=float, default=None)

    p = cmd("stats", help="per-record graph metrics CSV")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)

    p = cmd("ig", help="relative information gain tables")
    p.add_argument("--task", choices=(mult_task.TASK, dp_task.TASK), required=True)
    p.add_argument("--size", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", default="exhaustive", choices=["exhaustive", "sample"])
    p.add_argument("--sample-count", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x", default=None, help="comma-joined input variables (custom pair)")
    p.add_argument("--y", default=None, help="output variable (custom pair)")

    p = cmd("eval", help="evaluate a model over a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", default="noisy-oracle", choices=["noisy-oracle", "http-endpoint"])
    p.add_argument("--model-id", default="oracle")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--url", default="")
    p.add_argument("--token-env", default="")
    p.add_argument("--response-path", default="choices.0.message.content")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--top-p", type=float, default=0.7)
    p.add_argument("--mode", default="few-shot-scratchpad", choices=list(PROMPT_MODES))
    p.add_argument("--exemplars", type=int, default=5)
    p.add_argument("--split", default=None, help="evaluate only this split")
    p.add_argument("--limit", type=int, default=500, help="evaluation sample size per run (0 = all)")
    p.add_argument("--cache", default=None)
    p.add_argument("--workers", type=int, default=1)

    p = cmd("classify", help="aggregate per-layer error ratios from eval records")
    p.add_argument("--evals", required=True)
    p.add_argument("--out", required=True)

    p = cmd("index", help="build/query the full-computation fingerprint index")
    isub = p.add_subparsers(dest="index_cmd", required=True)
    b = isub.add_parser("build")
    pending_defaults.append((b, config.get("index", {})))
    b.add_argument("--dataset", required=True)
    b.add_argument("--split", default="train")
    b.add_argument("--out", required=True)
    b.add_argument("--ops-only", action="store_true", help="ignore node values in fingerprints")
    q = isub.add_parser("query")
    pending_defaults.append((q, config.get("index", {})))
    q.add_argument("--dataset", required=True)
    q.add_argument("--index", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--evals", default=None, help="eval records supplying answer-correct flags")

    p = cmd("sim", help="error-propagation simulations")
    p.add_argument("--mode", choices=list(theory.MODES) + ["collision-check"], required=True)
    p.add_argument("--ns", default="1:50", help="e.g. 1:200 or 1,2,5,10")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--domain", type=int, default=None)
    p.add_argument("--task", default=None)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = cmd("report", help="CSV bundle from eval records")
    p.add_argument("--evals", required=True)
    p.add_argument("--out-dir", required=True)

    # config-supplied defaults override argument defaults (but not flags)
    for sub_parser, defaults in pending_defaults:
        if defaults:
            sub_parser.set_defaults(**defaults)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    config = _load_config(argv)
    args = build_parser(config).parse_args(argv)

    if args.cmd == "gen":
        fractions = tuple(float(x) for x in args.fractions.split(","))
        counts = datasets.build_dataset(
            args.task,
            _parse_sizes(args.task, args.sizes),
            args.out,
            fractions=fractions,  # type: ignore[arg-type]
            seed=args.seed,
            ood_sizes=_parse_sizes(args.task, args.ood_sizes) if args.ood_sizes else (),
            sample=args.sample,
            allow_unit_dp=args.allow_unit_dp,
        )
        if args.split_stat is not None:
            if args.split_threshold is None:
                raise SystemExit("--split-threshold required with --split-stat")
            recs = list(datasets.split_by_graph_stat(datasets.read_dataset(args.out), args.split_stat, args.split_threshold))
            with open(args.out, "w") as f:
                for r in recs:
                    f.write(r.to_line() + "\n")
            counts = {s: sum(1 for r in recs if r.split == s) for s in datasets.SPLITS}
        print(" ".join(f"{k}={v}" for k, v in counts.items()))
        return 0

    if args.cmd == "stats":
        rows = []
        for rec in datasets.read_dataset(args.dataset):
            rows.append(
                {
                    "instance_id": rec.instance_id,
                    "task": rec.task,
                    "size": rec.size_label,
                    "split": rec.split,
                    **rec.stats,
                }
            )
        _write_csv(args.out, ("instance_id", "task", "size", "split", "node_count", "depth", "width", "average_parallelism"), rows)
        print(f"wrote {len(rows)} rows to {args.out}")
        return 0

    if args.cmd == "ig":
        sizes = tuple(_parse_size(args.task, args.size).values())
        dist = analysis.DistributionSpec(args.task, sizes, mode=args.mode, sample_count=args.sample_count, seed=args.seed)
        if args.x and args.y:
            pairs = [(tuple(args.x.split(",")), args.y)]
        else:
            pairs = default_ig_pairs(args.task, sizes)
        rows = analysis.ig_table_rows(dist, pairs)
        fields = ["task", "size", "x", "y", "value"]
        if args.mode == "sample":
            fields.append("ci_half_width")
            for row, (x_labels, y_label) in zip(rows, pairs):
                _, hw = analysis.relative_ig_ci(dist, x_labels, y_label)
                row["ci_half_width"] = f"{hw:.4f}"
        for row in rows:
            row["value"] = f"{row['value']:.3f}"
        _write_csv(args.out, fields, rows)
        print(f"wrote {len(rows)} rows to {args.out}")
        return 0

    if args.cmd == "eval":
        records = list(datasets.read_dataset(args.dataset))
        pool = [r for r in records if r.split == "train"]
        targets = [r for r in records if args.split is None or r.split == args.split]
        if args.limit:
            targets = targets[: args.limit]
        spec = models.ModelSpec(
            kind=args.model,
            model_id=args.model_id,
            epsilon=args.epsilon,
            c=args.c,
            seed=args.seed,
            url=args.url,
            token_env=args.token_env,
            response_path=args.response_path,
            temperature=args.temperature,
            top_p=args.top_p,
        )
        evals = run_evaluation(
            spec.build(),
            targets,
            prompt_mode=args.mode,
            exemplar_pool=pool,
            exemplar_count=args.exemplars,
            seed=args.seed,
            cache_dir=args.cache,
            workers=args.workers,
        )
        write_records(evals, args.out)
        acc = sum(e.exact_match for e in evals) / len(evals) if evals else 0.0
        print(f"evaluated {len(evals)} instances, exact-match {acc:.3f}")
        return 0

    if args.cmd == "classify":
        evals = read_records(args.evals)
        _write_csv(args.out, ("task", "size", "layer", "category", "ratio", "count"), reports.error_layer_rows(evals))
        print(f"wrote error-layer ratios to {args.out}")
        return 0

    if args.cmd == "index":
        if args.index_cmd == "build":
            graphs = (
                rec.graph() for rec in datasets.read_dataset(args.dataset) if rec.split == args.split
            )
            index = fcindex.build_index(graphs, corpus_id=f"{args.dataset}:{args.split}", include_values=not args.ops_only)
            index.dump(args.out)
            print(f"indexed {index.total} full computations ({len(index)} distinct) to {args.out}")
            return 0
        index = fcindex.FingerprintIndex.load(args.index)
        flags: dict[str, bool] = {}
        if args.evals:
            for e in read_records(args.evals):
                flags[e.instance_id] = bool(e.exact_match)
        pairs = [
            (rec.graph(), flags.get(rec.instance_id, True))
            for rec in datasets.read_dataset(args.dataset)
        ]
        rows = fcindex.frequency_rows(pairs, index)
        _write_csv(args.out, ("depth", "answer_correct", "mean_frequency", "count"), rows)
        print(f"wrote {len(rows)} rows to {args.out}")
        return 0

    if args.cmd == "sim":
        if args.mode == "collision-check":
            if args.domain is None:
                raise SystemExit("--domain required for collision-check")
            report = theory.empirical_collision_check(args.domain, args.epsilon, trials=args.trials, seed=args.seed)
        else:
            spec = theory.SimulationSpec(
                mode=args.mode,
                ns=_parse_ns(args.ns),
                epsilon=args.epsilon,
                c=args.c,
                alpha=args.alpha,
                beta=args.beta,
                domain=args.domain,
                task=args.task,
                trials=args.trials,
                seed=args.seed,
            )
            report = theory.simulate(spec)
        theory.report_to_csv([report], args.out)
        ok = report.all_satisfied()
        print(f"simulated {len(report.rows)} points, bounds {'satisfied' if ok else 'VIOLATED'}; wrote {args.out}")
        return 0 if ok else 1

    if args.cmd == "report":
        evals = read_records(args.evals)
        paths = reports.report(evals, args.out_dir)
        print("wrote: " + ", ".join(str(p) for p in paths.values()))
        return 0

    raise SystemExit(f"unknown command {args.cmd!r}")


def default_ig_pairs(task: str, sizes: tuple[int, ...]):
    if task == mult_task.TASK:
        k1, k2 = sizes
        zn = k1 + k2
        return [
            (("x" + str(k1),), f"z{zn}"),
            (("y" + str(k2),), f"z{zn}"),
            (("x1",), "z1"),
            (("y1",), "z1"),
            ((f"x{k1}", f"y{k2}"), f"z{zn}"),
            (("x1", "y1"), "z1"),
            (("x1", "y1"), "z2"),
            ((f"x{k1}", f"y{k2}"), f"z{zn - 1}"),
        ]
    n = sizes[0]
    pairs = [(("a1",), "o1"), (("a1",), "o2")]
    pairs += [((f"a{i}",), f"o{i}") for i in range(2, n + 1)]
    if n >= 3:
        pairs += [(("a1", "a2", "a3"), "o1"), (("a1", "a2", "a3"), "o2")]
    return pairs


if __name__ == "__main__":
    sys.exit(main())
