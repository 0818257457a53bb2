"""Command-line surface for reproducible runs.

Commands: train, eval, detect, generate, perturb, baseline, study.  Every
command is deterministic given its inputs, flags, and seed; outputs embed
the resolved configuration so a run can be reproduced from its artifacts.
Exit codes: 0 success, 1 input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io as tgio
from .baselines import count_based_graph
from .detection import detect_dataset, perturbation_study
from .evaluation import edge_prf
from .likelihood import DegenerateGraphError
from .sequences import (
    expand_dataset,
    merge_datasets,
    perturb,
    sample_topological_sorts,
)
from .training import NonFiniteLossError, TrainConfig, train_graph
from .graph import postprocess


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_train_flags(p: _Parser) -> None:
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--beta", type=float, default=0.005)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sa-target", type=float, default=0.95)
    p.add_argument("--sa-patience", type=int, default=25)
    p.add_argument("--threshold", type=float, default=None,
                   help="binarization cutoff (default 1/N, N = node count with terminals)")
    p.add_argument("--mode", choices=("standard", "omd"), default="standard")
    p.add_argument("--expansion-cap", type=int, default=256)


def build_parser() -> _Parser:
    parser = _Parser(prog="taskgraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[], help="learn a graph from a sequence dataset")
    p.add_argument("datasets", nargs="+", help="dataset file(s)")
    _add_train_flags(p)
    p.add_argument("--merge", action="store_true",
                   help="pool all datasets into one training run (taxonomies must match)")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers for independent per-dataset trainings")
    p.add_argument("--out", help="output graph file (single dataset or --merge)")
    p.add_argument("--out-dir", help="output directory for one graph per dataset")
    p.add_argument("--metrics", help="per-epoch csv stream (single dataset or --merge)")

    p = sub.add_parser("eval", help="edge-level comparison of two graph files")
    p.add_argument("predicted")
    p.add_argument("truth")
    p.add_argument("--out", help="optional JSON report file")

    p = sub.add_parser("detect", help="online mistake detection over a dataset")
    p.add_argument("graph")
    p.add_argument("dataset")
    p.add_argument("--out", help="optional JSON verdicts file")

    p = sub.add_parser("generate", help="sample topological sorts from a graph")
    p.add_argument("graph")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("perturb", help="apply insert/delete/replace noise to a dataset")
    p.add_argument("dataset")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("baseline", help="count-based graph construction")
    p.add_argument("dataset")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--mode", choices=("standard", "omd"), default="standard")
    p.add_argument("--expansion-cap", type=int, default=256)
    p.add_argument("--out", required=True)

    p = sub.add_parser("study", help="detection scores under increasing noise rates")
    p.add_argument("graph")
    p.add_argument("dataset")
    p.add_argument("--rates", required=True, help="comma-separated rates, e.g. 0,0.1,0.2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="optional csv file")

    return parser


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.learning_rate,
        max_epochs=args.max_epochs,
        beta=args.beta,
        seed=args.seed,
        sa_target=args.sa_target,
        sa_patience=args.sa_patience,
    )


def _run_training(raw_ds, source, args) -> tuple[str, str]:
    """Expand, train, post-process; returns (graph json text, metrics csv)."""
    ds = expand_dataset(raw_ds, cap=args.expansion_cap)
    config = _train_config(args)
    report = train_graph(ds, config)
    graph = postprocess(report.adjacency, ds.taxonomy, threshold=args.threshold, mode=args.mode)
    resolved = {
        "command": "train",
        "dataset": source,
        "merge": bool(args.merge),
        "learning_rate": config.learning_rate,
        "max_epochs": config.max_epochs,
        "beta": config.beta,
        "seed": config.seed,
        "sa_target": config.sa_target,
        "sa_patience": config.sa_patience,
        "threshold": args.threshold,
        "mode": args.mode,
        "expansion_cap": args.expansion_cap,
        "epochs_run": report.epochs,
        "stop_reason": report.stop_reason,
    }
    doc = json.dumps(tgio.graph_to_dict(graph, resolved), indent=2, sort_keys=True) + "\n"
    return doc, report.metrics_csv()


def _train_job(job: tuple[str, argparse.Namespace, str]) -> None:
    path, args, out_path = job
    doc, _ = _run_training(tgio.load_dataset(path), path, args)
    Path(out_path).write_text(doc)


def cmd_train(args) -> int:
    single_out = args.merge or len(args.datasets) == 1
    if single_out:
        if args.out is None:
            raise ValueError("--out is required for a single training run")
        if args.merge:
            raw = merge_datasets([tgio.load_dataset(p) for p in args.datasets])
            source: object = list(args.datasets)
        else:
            raw = tgio.load_dataset(args.datasets[0])
            source = args.datasets[0]
        doc, metrics = _run_training(raw, source, args)
        Path(args.out).write_text(doc)
        if args.metrics:
            Path(args.metrics).write_text(metrics)
        print(f"wrote {args.out}")
        return 0

    if args.out_dir is None:
        raise ValueError("--out-dir is required when training several datasets")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [
        (path, args, str(out_dir / (Path(path).stem + ".graph.json")))
        for path in args.datasets
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            list(pool.map(_train_job, jobs))
    else:
        for job in jobs:
            _train_job(job)
    for _, _, out_path in jobs:
        print(f"wrote {out_path}")
    return 0


def cmd_eval(args) -> int:
    predicted = tgio.load_graph(args.predicted)
    truth = tgio.load_graph(args.truth)
    report = edge_prf(predicted, truth)
    print(report.summary())
    if args.out:
        doc = {
            "config": {"command": "eval", "predicted": args.predicted, "truth": args.truth},
            "tp": report.tp,
            "fp": report.fp,
            "fn": report.fn,
            "precision": report.precision,
            "recall": report.recall,
            "f1": report.f1,
        }
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_detect(args) -> int:
    graph = tgio.load_graph(args.graph)
    ds = tgio.load_dataset(args.dataset)
    verdict_lists, report = detect_dataset(graph, ds)
    print(report.summary())
    if args.out:
        doc = {
            "config": {"command": "detect", "graph": args.graph, "dataset": args.dataset},
            "sequences": [
                [
                    {
                        "step": graph.taxonomy.name(step),
                        "verdict": v.label,
                        "missing_preconditions": sorted(
                            graph.taxonomy.name(p) for p in v.missing_preconditions
                        ),
                    }
                    for step, v in zip(seq.steps, verdicts)
                ]
                for seq, verdicts in zip(ds.sequences, verdict_lists)
            ],
            "report": {
                "average_f1": report.average_f1,
                "correct": vars(report.correct),
                "mistake": vars(report.mistake),
            },
        }
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_generate(args) -> int:
    graph = tgio.load_graph(args.graph)
    ds = sample_topological_sorts(graph, args.count, args.seed)
    resolved = {"command": "generate", "graph": args.graph, "count": args.count, "seed": args.seed}
    tgio.save_dataset(ds, args.out, config=resolved)
    print(f"wrote {args.out} ({len(ds.sequences)} sequences)")
    return 0


def cmd_perturb(args) -> int:
    ds = tgio.load_dataset(args.dataset)
    noisy = perturb(ds, args.rate, args.seed)
    resolved = {"command": "perturb", "dataset": args.dataset, "rate": args.rate, "seed": args.seed}
    tgio.save_dataset(noisy, args.out, config=resolved)
    print(f"wrote {args.out}")
    return 0


def cmd_baseline(args) -> int:
    ds = expand_dataset(tgio.load_dataset(args.dataset), cap=args.expansion_cap)
    graph = count_based_graph(ds, threshold=args.threshold, mode=args.mode)
    resolved = {
        "command": "baseline",
        "dataset": args.dataset,
        "threshold": args.threshold,
        "mode": args.mode,
        "expansion_cap": args.expansion_cap,
    }
    tgio.save_graph(graph, args.out, config=resolved)
    print(f"wrote {args.out} ({len(graph.edges)} edges)")
    return 0


def cmd_study(args) -> int:
    graph = tgio.load_graph(args.graph)
    ds = tgio.load_dataset(args.dataset)
    rates = [float(r) for r in args.rates.split(",") if r != ""]
    rows = perturbation_study(graph, ds, rates, args.seed)
    lines = ["rate,average_f1,correct_f1,mistake_f1"]
    for rate, report in rows:
        lines.append(f"{rate!r},{report.average_f1!r},{report.correct.f1!r},{report.mistake.f1!r}")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text)
    return 0


_COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "detect": cmd_detect,
    "generate": cmd_generate,
    "perturb": cmd_perturb,
    "baseline": cmd_baseline,
    "study": cmd_study,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (DegenerateGraphError, NonFiniteLossError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
