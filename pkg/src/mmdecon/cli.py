"""Command-line entry points.

Subcommands: run, sweep, report, flops, pareto, serve, validate. All flags
are long-form. Failures surface as one machine-readable JSON object on
stderr and exit code 2; progress events stream to stderr as JSON lines.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .calibrate import default_grid, profile_to_json, sweep_tau_t, validate_grid
from .cascade import run_cascade
from .config import EngineConfig, default_config, load_config
from .corpus import Corpus, load_corpus
from .embedstore import EmbeddingStore, load_store
from .errors import ConfigError, EngineError
from .flops import (
    efficiency_record,
    frontier_from_records,
    load_model_specs,
    records_to_json,
    records_to_tsv,
)
from .report import build_report, render_json, render_table, render_tsv
from .runio import load_matches_wire, read_manifest, utc_now, write_run, write_sweep
from .textnorm import excerpt

ENV_THREADS = "DECON_THREADS"


def _progress(event: dict) -> None:
    print(json.dumps(event), file=sys.stderr, flush=True)


def _resolve_threads(value: int | None) -> int:
    if value is None:
        raw = os.environ.get(ENV_THREADS)
        if raw is None:
            return 1
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{ENV_THREADS} must be an integer, got {raw!r}")
    if value < 1:
        raise ConfigError(f"thread count must be >= 1, got {value}")
    return value


def _load_cfg(path: str | None) -> EngineConfig:
    return load_config(path) if path else default_config()


def _manifest_path(demb: str, override: str | None) -> Path:
    if override:
        return Path(override)
    path = Path(demb)
    if path.suffix == ".demb":
        return path.with_suffix(".manifest.jsonl")
    return Path(str(path) + ".manifest.jsonl")


def _load_inputs(args) -> tuple[Corpus, Corpus, EmbeddingStore, EmbeddingStore]:
    training = load_corpus(args.train, "training", on_malformed=args.on_malformed)
    evals = load_corpus(args.eval, "eval", on_malformed=args.on_malformed)
    train_store = load_store(
        args.train_emb, _manifest_path(args.train_emb, args.train_emb_manifest)
    )
    eval_store = load_store(
        args.eval_emb, _manifest_path(args.eval_emb, args.eval_emb_manifest)
    )
    return training, evals, train_store, eval_store


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
            grid = default_grid(start, stop, step)
        else:
            grid = tuple(float(part) for part in text.split(","))
        return validate_grid(grid)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad sweep grid {text!r}: {exc}") from exc


def _cmd_run(args) -> int:
    started = utc_now()
    threads = _resolve_threads(args.threads)
    config = _load_cfg(args.config)
    training, evals, train_store, eval_store = _load_inputs(args)
    result = run_cascade(
        training, evals, train_store, eval_store, config,
        threads=threads, progress=_progress,
    )
    report = build_report(
        result.matches,
        total_training_docs=len(training.documents),
        tail_cutoff=args.tail_cutoff,
        top_k=args.top_k,
        benchmark_universe=args.benchmark_universe,
    )
    inputs = {
        "train": str(args.train),
        "eval": str(args.eval),
        "train_emb": str(args.train_emb),
        "eval_emb": str(args.eval_emb),
        "config": str(args.config) if args.config else "",
    }
    manifest = write_run(
        args.out, training, evals, result, report, config,
        inputs=inputs, started_at=started, threads=threads,
    )
    print(
        json.dumps(
            {
                "run_id": manifest.run_id,
                "out": str(args.out),
                "removed": manifest.counts["removed"],
                "training_docs": manifest.counts["training_docs"],
                "matches_logged": manifest.counts["matches_logged"],
            }
        )
    )
    return 0


def _cmd_sweep(args) -> int:
    config = _load_cfg(args.config)
    training, evals, train_store, eval_store = _load_inputs(args)
    grid = _parse_grid(args.grid) if args.grid else default_grid()
    benchmarks = args.benchmark or sorted(
        {doc.benchmark for doc in evals.documents if doc.benchmark}
    )
    docs_by_id = {doc.id: doc for doc in training.documents}
    docs_by_id.update({doc.id: doc for doc in evals.documents})

    def display(doc_id: str) -> dict:
        doc = docs_by_id[doc_id]
        return {
            "excerpt": excerpt(doc.question, doc.answer, config.strip_list),
            "image_ids": list(doc.image_ids),
        }

    for name in benchmarks:
        profile = sweep_tau_t(
            name, grid, training, evals, train_store, eval_store, config
        )
        obj = profile_to_json(
            profile, sample_k=args.sample_k, seed=args.seed, excerpt_for=display
        )
        path = write_sweep(args.out, name, obj)
        _progress(
            {
                "event": "sweep_done",
                "benchmark": name,
                "candidates": profile.candidate_count,
                "out": str(path),
            }
        )
    print(json.dumps({"out": str(args.out), "benchmarks": list(benchmarks)}))
    return 0


def _cmd_report(args) -> int:
    matches = load_matches_wire(args.matches)
    report = build_report(
        matches,
        total_training_docs=args.total,
        tail_cutoff=args.tail_cutoff,
        top_k=args.top_k,
        benchmark_universe=args.benchmark_universe,
    )
    if args.format == "json":
        text = json.dumps(render_json(report), indent=2, sort_keys=True) + "\n"
    elif args.format == "tsv":
        text = render_tsv(report)
    else:
        text = render_table(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _records(args):
    return [efficiency_record(spec) for spec in load_model_specs(args.specs)]


def _cmd_flops(args) -> int:
    records = _records(args)
    if args.format == "tsv":
        sys.stdout.write(records_to_tsv(records))
    else:
        print(json.dumps(records_to_json(records), indent=2))
    return 0


def _cmd_pareto(args) -> int:
    frontier = frontier_from_records(_records(args))
    rows = [
        {"name": p.name, "response_flops": p.cost, "accuracy": p.accuracy}
        for p in frontier
    ]
    if args.format == "tsv":
        lines = ["name\tresponse_flops\taccuracy"]
        lines += [f"{r['name']}\t{r['response_flops']:.3g}\t{r['accuracy']:g}" for r in rows]
        sys.stdout.write("\n".join(lines) + "\n")
    else:
        print(json.dumps(rows, indent=2))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    read_manifest(args.run)  # fail fast before binding
    app = create_app(args.run, specs_path=args.specs, assets_dir=args.assets)
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"--bind must be host:port, got {args.bind!r}")
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


def _cmd_validate(args) -> int:
    checked: list[str] = []
    training = evals = None
    train_store = eval_store = None
    if args.train:
        training = load_corpus(args.train, "training", on_malformed="fatal")
        checked.append(f"train corpus ({len(training.documents)} docs)")
    if args.eval:
        evals = load_corpus(args.eval, "eval", on_malformed="fatal")
        checked.append(f"eval corpus ({len(evals.documents)} docs)")
    if args.train_emb:
        train_store = load_store(
            args.train_emb, _manifest_path(args.train_emb, args.train_emb_manifest)
        )
        checked.append(f"train store ({train_store.count} vectors, dim {train_store.dim})")
    if args.eval_emb:
        eval_store = load_store(
            args.eval_emb, _manifest_path(args.eval_emb, args.eval_emb_manifest)
        )
        checked.append(f"eval store ({eval_store.count} vectors, dim {eval_store.dim})")
    if args.config:
        load_config(args.config)
        checked.append("config")
    for corpus, store, label in (
        (training, train_store, "training"),
        (evals, eval_store, "eval"),
    ):
        if corpus is not None and store is not None:
            for doc in corpus.documents:
                store.rows_for(doc.image_ids)
            checked.append(f"{label} image references")
    if not checked:
        raise ConfigError("nothing to validate: pass at least one input flag")
    print(json.dumps({"ok": True, "checked": checked}))
    return 0


def _add_corpus_flags(sub: argparse.ArgumentParser, required: bool = True) -> None:
    sub.add_argument("--train", required=required, help="training corpus (.jsonl file or shard dir)")
    sub.add_argument("--eval", required=required, help="eval corpus (.jsonl)")
    sub.add_argument("--train-emb", required=required, help="training image embeddings (.demb)")
    sub.add_argument("--eval-emb", required=required, help="eval image embeddings (.demb)")
    sub.add_argument("--train-emb-manifest", help="override for the training store manifest path")
    sub.add_argument("--eval-emb-manifest", help="override for the eval store manifest path")
    sub.add_argument("--config", help="policy config JSON (defaults apply when omitted)")
    sub.add_argument(
        "--on-malformed", choices=("skip", "fatal"), default="skip",
        help="treatment of malformed training corpus lines",
    )


def _add_report_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--tail-cutoff", type=float, default=0.0001,
                     help="share below which benchmarks fold into the tail bucket")
    sub.add_argument("--top-k", type=int, default=5,
                     help="always name this many top benchmarks regardless of cutoff")
    sub.add_argument("--benchmark-universe", type=int, default=None,
                     help="total benchmark count for the union row label")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmdecon",
        description="Two-stage image/text decontamination for multimodal training corpora",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="execute the cascade and write a run directory")
    _add_corpus_flags(run)
    run.add_argument("--out", required=True, help="run directory to create")
    run.add_argument("--threads", type=int, default=None,
                     help=f"worker threads (fallback: ${ENV_THREADS}, then 1)")
    _add_report_flags(run)
    run.set_defaults(func=_cmd_run)

    sweep = subs.add_parser("sweep", help="sweep the text threshold per benchmark")
    _add_corpus_flags(sweep)
    sweep.add_argument("--out", required=True, help="directory receiving sweeps/<benchmark>.json")
    sweep.add_argument("--benchmark", action="append",
                       help="benchmark to sweep (repeatable; default: all)")
    sweep.add_argument("--grid", help="'start:stop:step' or comma-separated thresholds")
    sweep.add_argument("--sample-k", type=int, default=None,
                       help="embed this many sampled flagged pairs per grid point")
    sweep.add_argument("--seed", type=int, default=0, help="sampling seed")
    sweep.set_defaults(func=_cmd_sweep)

    report = subs.add_parser("report", help="re-render a volume report from a match log")
    report.add_argument("--matches", required=True, help="matches.jsonl from a run directory")
    report.add_argument("--total", required=True, type=int, help="total training docs in the run")
    _add_report_flags(report)
    report.add_argument("--format", choices=("table", "tsv", "json"), default="table")
    report.add_argument("--out", help="write here instead of stdout")
    report.set_defaults(func=_cmd_report)

    flops = subs.add_parser("flops", help="training/response compute per model spec")
    flops.add_argument("--specs", required=True, help="model spec JSON list")
    flops.add_argument("--format", choices=("json", "tsv"), default="json")
    flops.set_defaults(func=_cmd_flops)

    pareto = subs.add_parser("pareto", help="response-compute/accuracy frontier")
    pareto.add_argument("--specs", required=True, help="model spec JSON list")
    pareto.add_argument("--format", choices=("json", "tsv"), default="json")
    pareto.set_defaults(func=_cmd_pareto)

    serve = subs.add_parser("serve", help="serve the review API over a run directory")
    serve.add_argument("--run", required=True, help="completed run directory")
    serve.add_argument("--bind", default="127.0.0.1:8000", help="host:port")
    serve.add_argument("--specs", help="model spec JSON for /frontier")
    serve.add_argument("--assets", help="static image directory for /assets")
    serve.set_defaults(func=_cmd_serve)

    validate = subs.add_parser("validate", help="schema-check corpora, stores, and configs")
    _add_corpus_flags(validate, required=False)
    validate.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EngineError as err:
        print(json.dumps(err.to_json()), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
