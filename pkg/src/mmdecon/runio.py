"""Run-directory persistence: artifact layout, manifest, writers, readers.

A completed run is a plain directory; the HTTP service is a read-only viewer
over these files. Layout:

    manifest.json           RunManifest
    config.resolved.json    full resolved policy config
    removed_ids.txt         sorted removed training-doc ids, one per line
    removals.jsonl          one wire record per removed doc (its remove match)
    matches.jsonl           every logged match with excerpts and image ids
    decontaminated.jsonl    surviving training documents
    report.json/.tsv/.txt   volume report renders
    audit.jsonl             side-channel audit entries
    benchmarks.json         per-benchmark summary for the service
    sweeps/<benchmark>.json threshold sweep profiles (written by `sweep`)
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

from . import __version__
from .cascade import AuditEntry, CascadeResult, ContaminationMatch
from .config import EngineConfig, config_hash, config_to_json
from .corpus import Corpus, Document, partition_by_benchmark, write_corpus
from .errors import EngineError
from .report import (
    VolumeReport,
    render_json,
    render_table,
    render_tsv,
    write_removal_manifest,
)
from .textnorm import excerpt

MANIFEST_FILE = "manifest.json"
CONFIG_FILE = "config.resolved.json"
REMOVED_IDS_FILE = "removed_ids.txt"
REMOVALS_FILE = "removals.jsonl"
MATCHES_FILE = "matches.jsonl"
DECONTAMINATED_FILE = "decontaminated.jsonl"
REPORT_JSON_FILE = "report.json"
REPORT_TSV_FILE = "report.tsv"
REPORT_TXT_FILE = "report.txt"
AUDIT_FILE = "audit.jsonl"
BENCHMARKS_FILE = "benchmarks.json"
SWEEPS_DIR = "sweeps"


@dataclass(frozen=True)
class RunManifest:
    run_id: str
    engine_version: str
    config_hash: str
    inputs: dict[str, str]
    counts: dict[str, int]
    started_at: str
    finished_at: str
    threads: int

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "engine_version": self.engine_version,
            "config_hash": self.config_hash,
            "inputs": dict(self.inputs),
            "counts": dict(self.counts),
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "threads": self.threads,
        }


def manifest_from_json(obj: dict) -> RunManifest:
    try:
        return RunManifest(
            run_id=obj["run_id"],
            engine_version=obj["engine_version"],
            config_hash=obj["config_hash"],
            inputs=dict(obj["inputs"]),
            counts=dict(obj["counts"]),
            started_at=obj["started_at"],
            finished_at=obj["finished_at"],
            threads=int(obj["threads"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise EngineError(f"malformed run manifest: {exc}") from exc


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_json(path: Path, obj: dict | list) -> None:
    path.write_text(
        json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_jsonl(path: Path, rows: Iterable[dict]) -> int:
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
            n += 1
    return n


def _read_json(path: Path) -> dict | list:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise EngineError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise EngineError(f"{path} is not valid JSON: {exc}") from exc


def match_to_wire(
    match: ContaminationMatch,
    training_by_id: dict[str, Document],
    eval_by_id: dict[str, Document],
    strip_list: tuple[str, ...],
) -> dict:
    """Full match record for review: scores plus excerpts and image ids."""
    train_doc = training_by_id[match.training_doc_id]
    eval_doc = eval_by_id[match.eval_doc_id]
    return {
        "training_doc_id": match.training_doc_id,
        "eval_doc_id": match.eval_doc_id,
        "benchmark": match.benchmark,
        "sim_img": match.sim_img,
        "c_text": match.c_text,
        "decision": match.decision,
        "stage_reached": match.stage_reached,
        "train_excerpt": excerpt(train_doc.question, train_doc.answer, strip_list),
        "eval_excerpt": excerpt(eval_doc.question, eval_doc.answer, strip_list),
        "train_image_ids": list(train_doc.image_ids),
        "eval_image_ids": list(eval_doc.image_ids),
    }


def _removal_wire(match: ContaminationMatch) -> dict:
    return {
        "id": match.training_doc_id,
        "benchmark": match.benchmark,
        "eval_id": match.eval_doc_id,
        "sim_img": match.sim_img,
        "c_text": match.c_text,
        "stage": match.stage_reached,
    }


def _audit_wire(entry: AuditEntry) -> dict:
    return {
        "kind": entry.kind,
        "subject_id": entry.subject_id,
        "benchmark": entry.benchmark,
        "detail": entry.detail,
    }


def benchmark_summaries(
    evals: Corpus, config: EngineConfig, result: CascadeResult, total_training: int
) -> list[dict]:
    by_benchmark = partition_by_benchmark(evals)
    flagged: dict[str, int] = {name: 0 for name in by_benchmark}
    removed_docs: dict[str, set[str]] = {name: set() for name in by_benchmark}
    for match in result.matches:
        flagged[match.benchmark] = flagged.get(match.benchmark, 0) + 1
        if match.decision == "remove":
            removed_docs.setdefault(match.benchmark, set()).add(match.training_doc_id)
    rows = []
    for name in sorted(by_benchmark):
        removed = len(removed_docs[name])
        rows.append(
            {
                "benchmark": name,
                "policy": config.policy_for(name).to_json(),
                "eval_docs": len(by_benchmark[name]),
                "flagged_matches": flagged[name],
                "removed_docs": removed,
                "removed_share": removed / total_training if total_training else 0.0,
            }
        )
    return rows


def write_run(
    out_dir: str | Path,
    training: Corpus,
    evals: Corpus,
    result: CascadeResult,
    report: VolumeReport,
    config: EngineConfig,
    inputs: dict[str, str],
    started_at: str,
    threads: int,
) -> RunManifest:
    """Persist a completed cascade as a run directory; returns its manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / SWEEPS_DIR).mkdir(exist_ok=True)

    cfg_hash = config_hash(config)
    _write_json(out / CONFIG_FILE, config_to_json(config))

    removed_sorted = sorted(result.removed)
    write_removal_manifest(removed_sorted, out / REMOVED_IDS_FILE)

    remove_matches = {
        m.training_doc_id: m for m in result.matches if m.decision == "remove"
    }
    _write_jsonl(
        out / REMOVALS_FILE,
        (_removal_wire(remove_matches[doc_id]) for doc_id in removed_sorted),
    )

    training_by_id = {doc.id: doc for doc in training.documents}
    eval_by_id = {doc.id: doc for doc in evals.documents}
    _write_jsonl(
        out / MATCHES_FILE,
        (
            match_to_wire(m, training_by_id, eval_by_id, config.strip_list)
            for m in result.matches
        ),
    )

    kept = [doc for doc in training.documents if doc.id not in result.removed]
    write_corpus(kept, out / DECONTAMINATED_FILE)

    _write_json(out / REPORT_JSON_FILE, render_json(report))
    (out / REPORT_TSV_FILE).write_text(render_tsv(report), encoding="utf-8")
    (out / REPORT_TXT_FILE).write_text(render_table(report), encoding="utf-8")

    _write_jsonl(out / AUDIT_FILE, (_audit_wire(e) for e in result.audit))
    _write_json(
        out / BENCHMARKS_FILE,
        benchmark_summaries(evals, config, result, len(training.documents)),
    )

    removal_digest = hashlib.sha256(
        "\n".join(removed_sorted).encode("utf-8")
    ).hexdigest()
    manifest = RunManifest(
        run_id=f"run-{hashlib.sha256((cfg_hash + removal_digest).encode()).hexdigest()[:12]}",
        engine_version=__version__,
        config_hash=cfg_hash,
        inputs=dict(inputs),
        counts={
            "training_docs": len(training.documents),
            "eval_docs": len(evals.documents),
            "benchmarks": len(partition_by_benchmark(evals)),
            "removed": len(result.removed),
            "matches_logged": len(result.matches),
        },
        started_at=started_at,
        finished_at=utc_now(),
        threads=threads,
    )
    _write_json(out / MANIFEST_FILE, manifest.to_json())
    return manifest


def write_sweep(out_dir: str | Path, benchmark: str, profile_json: dict) -> Path:
    sweeps = Path(out_dir) / SWEEPS_DIR
    sweeps.mkdir(parents=True, exist_ok=True)
    path = sweeps / f"{benchmark}.json"
    _write_json(path, profile_json)
    return path


def read_manifest(run_dir: str | Path) -> RunManifest:
    path = Path(run_dir) / MANIFEST_FILE
    if not path.is_file():
        raise EngineError(f"{run_dir} is not a completed run directory: no {MANIFEST_FILE}")
    obj = _read_json(path)
    if not isinstance(obj, dict):
        raise EngineError(f"{path} must hold a JSON object")
    return manifest_from_json(obj)


def read_benchmarks(run_dir: str | Path) -> list[dict]:
    obj = _read_json(Path(run_dir) / BENCHMARKS_FILE)
    if not isinstance(obj, list):
        raise EngineError(f"{BENCHMARKS_FILE} must hold a JSON list")
    return obj


def read_report(run_dir: str | Path) -> dict:
    obj = _read_json(Path(run_dir) / REPORT_JSON_FILE)
    if not isinstance(obj, dict):
        raise EngineError(f"{REPORT_JSON_FILE} must hold a JSON object")
    return obj


def iter_matches(run_dir: str | Path) -> Iterator[dict]:
    path = Path(run_dir) / MATCHES_FILE
    try:
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise EngineError(f"{path}:{lineno} bad match record: {exc}") from exc
    except OSError as exc:
        raise EngineError(f"cannot read {path}: {exc}") from exc


def load_matches_wire(path: str | Path) -> list[ContaminationMatch]:
    """Rebuild score-level matches from a matches.jsonl (for `report` re-render)."""
    matches = []
    source = Path(path)
    try:
        with source.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    matches.append(
                        ContaminationMatch(
                            training_doc_id=obj["training_doc_id"],
                            eval_doc_id=obj["eval_doc_id"],
                            benchmark=obj["benchmark"],
                            sim_img=float(obj["sim_img"]),
                            c_text=None if obj["c_text"] is None else float(obj["c_text"]),
                            decision=obj["decision"],
                            stage_reached=int(obj["stage_reached"]),
                        )
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise EngineError(f"{source}:{lineno} bad match record: {exc}") from exc
    except OSError as exc:
        raise EngineError(f"cannot read {source}: {exc}") from exc
    return matches


def read_sweep(run_dir: str | Path, benchmark: str) -> dict | None:
    path = Path(run_dir) / SWEEPS_DIR / f"{benchmark}.json"
    if not path.is_file():
        return None
    obj = _read_json(path)
    if not isinstance(obj, dict):
        raise EngineError(f"{path} must hold a JSON object")
    return obj
