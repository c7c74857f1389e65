"""Removal-volume accounting: per-benchmark counts, union, tail bucket.

A removed document counts once under every benchmark it matched, so
per-benchmark rows can sum to more than the unique union; the union is the
number a curation budget actually pays. Rendering names the largest rows and
folds the rest into a single tail line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .cascade import DECISION_REMOVE, ContaminationMatch

# A benchmark gets its own row when its share clears the cutoff or it ranks
# inside the top_k largest; everything else folds into the tail bucket.
DEFAULT_TAIL_CUTOFF = 0.0001  # share, i.e. 0.01%
DEFAULT_TOP_K = 5


@dataclass(frozen=True)
class VolumeReport:
    total_training_docs: int
    per_benchmark: dict[str, tuple[int, float]]  # name -> (count, share), share desc
    union_count: int
    union_share: float
    named: tuple[str, ...]
    tail_benchmarks: tuple[str, ...]
    long_tail_bucket: tuple[int, float]
    tail_cutoff: float
    benchmark_universe: int | None = None


def build_report(
    matches: Iterable[ContaminationMatch],
    total_training_docs: int,
    tail_cutoff: float = DEFAULT_TAIL_CUTOFF,
    top_k: int = DEFAULT_TOP_K,
    benchmark_universe: int | None = None,
) -> VolumeReport:
    """Aggregate remove-decision matches into a volume report.

    benchmark_universe, when given, is the number of evaluations the run
    decontaminated against; it only affects the union row label.
    """
    if total_training_docs <= 0:
        raise ValueError(f"total_training_docs must be positive, got {total_training_docs}")
    if not 0.0 <= tail_cutoff < 1.0:
        raise ValueError(f"tail_cutoff must lie in [0, 1), got {tail_cutoff}")

    docs_by_benchmark: dict[str, set[str]] = {}
    union: set[str] = set()
    for match in matches:
        if match.decision != DECISION_REMOVE:
            continue
        docs_by_benchmark.setdefault(match.benchmark, set()).add(match.training_doc_id)
        union.add(match.training_doc_id)

    ordered = sorted(
        docs_by_benchmark.items(), key=lambda item: (-len(item[1]), item[0])
    )
    per_benchmark = {
        name: (len(ids), len(ids) / total_training_docs) for name, ids in ordered
    }

    named: list[str] = []
    tail: list[str] = []
    for rank, (name, (count, share)) in enumerate(per_benchmark.items()):
        if share >= tail_cutoff or rank < top_k:
            named.append(name)
        else:
            tail.append(name)
    tail_count = sum(per_benchmark[name][0] for name in tail)

    return VolumeReport(
        total_training_docs=total_training_docs,
        per_benchmark=per_benchmark,
        union_count=len(union),
        union_share=len(union) / total_training_docs,
        named=tuple(named),
        tail_benchmarks=tuple(tail),
        long_tail_bucket=(tail_count, tail_count / total_training_docs),
        tail_cutoff=tail_cutoff,
        benchmark_universe=benchmark_universe,
    )


def _pct(share: float) -> str:
    return f"{share * 100:.3f}%"


def _union_label(report: VolumeReport) -> str:
    if report.benchmark_universe is not None:
        return f"Unique union ({report.benchmark_universe} evaluations)"
    return f"Unique union ({len(report.per_benchmark)} benchmarks)"


def _tail_label(report: VolumeReport) -> str:
    return f"Other benchmarks (each <{report.tail_cutoff * 100:g}%)"


def render_json(report: VolumeReport) -> dict:
    return {
        "total_training_docs": report.total_training_docs,
        "rows": [
            {"benchmark": name, "flagged": report.per_benchmark[name][0], "share": report.per_benchmark[name][1]}
            for name in report.named
        ],
        "tail": {
            "label": _tail_label(report),
            "benchmarks": list(report.tail_benchmarks),
            "flagged": report.long_tail_bucket[0],
            "share": report.long_tail_bucket[1],
        },
        "union": {
            "label": _union_label(report),
            "flagged": report.union_count,
            "share": report.union_share,
        },
        "per_benchmark": {
            name: {"flagged": count, "share": share}
            for name, (count, share) in report.per_benchmark.items()
        },
    }


def render_tsv(report: VolumeReport) -> str:
    lines = ["benchmark\tflagged\tshare"]
    for name in report.named:
        count, share = report.per_benchmark[name]
        lines.append(f"{name}\t{count}\t{_pct(share)}")
    if report.tail_benchmarks:
        lines.append(
            f"{_tail_label(report)}\t{report.long_tail_bucket[0]}\t{_pct(report.long_tail_bucket[1])}"
        )
    lines.append(f"{_union_label(report)}\t{report.union_count}\t{_pct(report.union_share)}")
    return "\n".join(lines) + "\n"


def render_table(report: VolumeReport) -> str:
    """Aligned text table: named rows by descending share, tail, union."""
    rows: list[tuple[str, str, str]] = []
    for name in report.named:
        count, share = report.per_benchmark[name]
        rows.append((name, str(count), _pct(share)))
    if report.tail_benchmarks:
        rows.append(
            (_tail_label(report), str(report.long_tail_bucket[0]), _pct(report.long_tail_bucket[1]))
        )
    rows.append((_union_label(report), str(report.union_count), _pct(report.union_share)))

    header = ("Benchmark", "Flagged", "Share")
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(3)
    ]
    out = [
        f"{header[0]:<{widths[0]}}  {header[1]:>{widths[1]}}  {header[2]:>{widths[2]}}",
        f"{'-' * widths[0]}  {'-' * widths[1]}  {'-' * widths[2]}",
    ]
    for name, count, share in rows:
        out.append(f"{name:<{widths[0]}}  {count:>{widths[1]}}  {share:>{widths[2]}}")
    return "\n".join(out) + "\n"


def write_removal_manifest(removed_ids: Iterable[str], path: str | Path) -> int:
    """Sorted removed ids, one per line; returns the count written."""
    ids = sorted(removed_ids)
    with open(path, "w", encoding="utf-8") as handle:
        for doc_id in ids:
            handle.write(doc_id + "\n")
    return len(ids)
