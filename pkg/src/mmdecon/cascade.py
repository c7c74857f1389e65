"""Two-stage decontamination cascade: image-recall gate, text-precision gate.

Stage 1 takes the max cosine similarity between a training document's images
and the eval images of each benchmark; benchmarks whose threshold is met
gate the document. Stage 2 computes directional n-gram containment from
every eval document of every gating benchmark into the training document and
removes on the first hit. Image-only benchmarks remove on Stage 1 alone.

A high image score with low text overlap is kept (same image, new question
is legitimate signal); high text overlap without the image gate is kept
(template questions). Only the conjunction removes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextlib import ExitStack
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .config import MODE_IMAGE_ONLY, BenchmarkPolicy, EngineConfig
from .corpus import Corpus, Document, partition_by_benchmark
from .embedstore import EmbeddingStore, block_ranges, group_max, similarity_block
from .errors import CorpusError
from .textnorm import (
    NgramSet,
    NormalizedText,
    containment,
    ngram_set,
    ngram_set_fixed,
    normalize,
    pick_n,
    qa_concat,
)

# Logging floor: a kept match is recorded when its image score is within
# REPORT_SIM_MARGIN below the gate or its containment reaches REPORT_C_FLOOR.
# Containment only exists for docs that passed the image gate, so every
# stage-2 pair clears the sim arm already and is logged unconditionally; the
# c-floor arm documents the contract floor for consumers of the match log
# (it is where calibration grids start).
REPORT_SIM_MARGIN = 0.02
REPORT_C_FLOOR = 0.4

# Training documents per work unit. Fixed so the output is identical no
# matter how many threads consume the blocks.
DOC_BLOCK = 256

DECISION_REMOVE = "remove"
DECISION_KEEP = "keep"

AUDIT_DOC_NO_IMAGES = "training_doc_no_images"
AUDIT_EVAL_UNGATEABLE = "eval_text_ungateable"
AUDIT_BENCH_NO_IMAGES = "benchmark_no_eval_images"


@dataclass(frozen=True)
class ContaminationMatch:
    training_doc_id: str
    eval_doc_id: str
    benchmark: str
    sim_img: float
    c_text: float | None
    decision: str
    stage_reached: int


@dataclass(frozen=True)
class AuditEntry:
    kind: str
    subject_id: str
    benchmark: str | None = None
    detail: str = ""


@dataclass
class CascadeResult:
    removed: set[str]
    matches: list[ContaminationMatch]
    audit: list[AuditEntry]


class EvalIndex:
    """Eval-side precompute: policies, n-gram sets, image column groups."""

    def __init__(self, evals: Corpus, eval_store: EmbeddingStore, config: EngineConfig):
        self.audit: list[AuditEntry] = []
        self.by_benchmark = partition_by_benchmark(evals)
        self.benchmarks = list(self.by_benchmark)
        self.policies: dict[str, BenchmarkPolicy] = {
            name: config.policy_for(name) for name in self.benchmarks
        }
        self.grams: dict[str, NgramSet] = {}
        self.groups: dict[str, np.ndarray] = {}
        # First eval doc (corpus order) owning each image, per benchmark;
        # used to attribute Stage-1 matches to a concrete eval document.
        self.image_owner: dict[str, dict[str, str]] = {}

        strip = config.strip_list
        for name in self.benchmarks:
            policy = self.policies[name]
            rows: list[int] = []
            seen_rows: set[int] = set()
            owner: dict[str, str] = {}
            for doc in self.by_benchmark[name]:
                text = qa_concat(normalize(doc.question, strip), normalize(doc.answer, strip))
                grams = ngram_set(text, policy.n_default, policy.short_threshold)
                self.grams[doc.id] = grams
                if grams.empty:
                    self.audit.append(
                        AuditEntry(
                            kind=AUDIT_EVAL_UNGATEABLE,
                            subject_id=doc.id,
                            benchmark=name,
                            detail="no text n-grams; containment is 0 for this doc",
                        )
                    )
                for image_id in doc.image_ids:
                    row = eval_store.manifest.get(image_id)
                    if row is None:
                        raise CorpusError(
                            f"eval doc {doc.id!r} references image {image_id!r} "
                            "missing from the eval store",
                            id=doc.id,
                            image_id=image_id,
                        )
                    owner.setdefault(image_id, doc.id)
                    if row not in seen_rows:
                        seen_rows.add(row)
                        rows.append(row)
            if not rows:
                self.audit.append(
                    AuditEntry(
                        kind=AUDIT_BENCH_NO_IMAGES,
                        subject_id=name,
                        benchmark=name,
                        detail="no eval images; image gate can never fire",
                    )
                )
            self.groups[name] = np.array(sorted(rows), dtype=np.int64)
            self.image_owner[name] = owner

        self.eval64 = eval_store.vectors.astype(np.float64)
        self.eval_row_ids = eval_store.row_ids
        self.group_list = [self.groups[name] for name in self.benchmarks]


def _validate_inputs(
    training: Corpus, evals: Corpus, train_store: EmbeddingStore, eval_store: EmbeddingStore
) -> None:
    if training.split != "training":
        raise CorpusError(f"expected a training corpus, got split {training.split!r}")
    if evals.split != "eval":
        raise CorpusError(f"expected an eval corpus, got split {evals.split!r}")
    collisions = training.ids() & evals.ids()
    if collisions:
        raise CorpusError(
            f"document id {sorted(collisions)[0]!r} appears in both corpora",
            ids=sorted(collisions)[:10],
        )
    for doc in training.documents:
        for image_id in doc.image_ids:
            if image_id not in train_store.manifest:
                raise CorpusError(
                    f"training doc {doc.id!r} references image {image_id!r} "
                    "missing from the training store",
                    id=doc.id,
                    image_id=image_id,
                )


class _TrainingText:
    """Lazy normalized Q+A and per-n gram sets for one training document."""

    __slots__ = ("doc", "strip", "_norm", "_grams")

    def __init__(self, doc: Document, strip: Sequence[str]):
        self.doc = doc
        self.strip = strip
        self._norm: NormalizedText | None = None
        self._grams: dict[int, NgramSet] = {}

    def grams(self, n: int) -> NgramSet:
        if self._norm is None:
            self._norm = qa_concat(
                normalize(self.doc.question, self.strip),
                normalize(self.doc.answer, self.strip),
            )
        if n not in self._grams:
            self._grams[n] = ngram_set_fixed(self._norm, n)
        return self._grams[n]


def _process_block(
    docs: Sequence[Document],
    train_store: EmbeddingStore,
    index: EvalIndex,
    config: EngineConfig,
) -> tuple[list[str], list[ContaminationMatch], list[AuditEntry]]:
    removed: list[str] = []
    matches: list[ContaminationMatch] = []
    audit: list[AuditEntry] = []

    doc_rows: list[list[int]] = [train_store.rows_for(d.image_ids) for d in docs]
    flat_rows = [r for rows in doc_rows for r in rows]
    if flat_rows and index.eval64.shape[0]:
        sims = similarity_block(train_store.vectors[np.array(flat_rows, dtype=np.int64)], index.eval64)
    else:
        sims = np.zeros((len(flat_rows), index.eval64.shape[0]))

    offset = 0
    for doc, rows in zip(docs, doc_rows):
        doc_sims = sims[offset : offset + len(rows)]
        offset += len(rows)
        if not rows:
            audit.append(
                AuditEntry(
                    kind=AUDIT_DOC_NO_IMAGES,
                    subject_id=doc.id,
                    detail="no images; Stage 1 cannot gate this doc",
                )
            )
            continue

        per_bench = group_max(doc_sims, index.group_list)
        text = _TrainingText(doc, config.strip_list)
        doc_removed = False
        for bench, (sim, argmax_col) in zip(index.benchmarks, per_bench):
            if sim is None:
                continue
            policy = index.policies[bench]
            argmax_image = index.eval_row_ids[argmax_col]
            owner_doc = index.image_owner[bench][argmax_image]
            if sim < policy.tau_i:
                if sim >= policy.tau_i - REPORT_SIM_MARGIN:
                    matches.append(
                        ContaminationMatch(doc.id, owner_doc, bench, sim, None, DECISION_KEEP, 1)
                    )
                continue
            if policy.mode == MODE_IMAGE_ONLY:
                matches.append(
                    ContaminationMatch(doc.id, owner_doc, bench, sim, None, DECISION_REMOVE, 1)
                )
                doc_removed = True
                break
            for ev in index.by_benchmark[bench]:
                eval_grams = index.grams[ev.id]
                c = containment(eval_grams, text.grams(eval_grams.n))
                hit = c >= policy.tau_t
                matches.append(
                    ContaminationMatch(
                        doc.id,
                        ev.id,
                        bench,
                        sim,
                        c,
                        DECISION_REMOVE if hit else DECISION_KEEP,
                        2,
                    )
                )
                if hit:
                    doc_removed = True
                    break
            if doc_removed:
                break
        if doc_removed:
            removed.append(doc.id)
    return removed, matches, audit


def run_cascade(
    training: Corpus,
    evals: Corpus,
    train_store: EmbeddingStore,
    eval_store: EmbeddingStore,
    config: EngineConfig,
    threads: int = 1,
    progress: Callable[[dict], None] | None = None,
) -> CascadeResult:
    """Run the cascade; output is independent of thread count and doc order.

    The removal decision for each document depends only on that document and
    the eval side, so work is partitioned into fixed blocks and merged in
    block order.
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    _validate_inputs(training, evals, train_store, eval_store)
    index = EvalIndex(evals, eval_store, config)

    docs = training.documents
    blocks = block_ranges(len(docs), DOC_BLOCK)
    tasks = [docs[lo:hi] for lo, hi in blocks]

    removed: set[str] = set()
    matches: list[ContaminationMatch] = []
    audit: list[AuditEntry] = list(index.audit)

    with ExitStack() as stack:
        if threads == 1:
            results = (_process_block(task, train_store, index, config) for task in tasks)
        else:
            pool = stack.enter_context(ThreadPoolExecutor(max_workers=threads))
            results = pool.map(lambda t: _process_block(t, train_store, index, config), tasks)
        # pool.map yields in block order as blocks finish, so the merge is
        # deterministic and progress still streams.
        for (lo, hi), (block_removed, block_matches, block_audit) in zip(blocks, results):
            removed.update(block_removed)
            matches.extend(block_matches)
            audit.extend(block_audit)
            if progress is not None:
                progress(
                    {
                        "event": "cascade_progress",
                        "docs_done": hi,
                        "docs_total": len(docs),
                        "removed_so_far": len(removed),
                    }
                )
    return CascadeResult(removed=removed, matches=matches, audit=audit)


def brute_force_oracle(
    training: Corpus,
    evals: Corpus,
    train_store: EmbeddingStore,
    eval_store: EmbeddingStore,
    config: EngineConfig,
) -> set[str]:
    """Reference removal set computed the slow way.

    Per-pair dot products, windows re-enumerated for every pair, no caching,
    no short-circuiting, no blocking. Exists to check run_cascade, so it
    deliberately shares none of its machinery.
    """
    by_benchmark = partition_by_benchmark(evals)
    strip = config.strip_list

    def words(doc: Document) -> list[str]:
        return list(normalize(doc.question, strip).tokens) + list(
            normalize(doc.answer, strip).tokens
        )

    bench_images: dict[str, list[str]] = {
        name: list(dict.fromkeys(i for d in docs for i in d.image_ids))
        for name, docs in by_benchmark.items()
    }

    removed: set[str] = set()
    for tdoc in training.documents:
        twords = words(tdoc)
        gating: list[str] = []
        for bench in sorted(by_benchmark):
            policy = config.policy_for(bench)
            best = None
            for timg in tdoc.image_ids:
                tvec = train_store.vectors[train_store.manifest[timg]].astype(np.float64)
                for eimg in bench_images[bench]:
                    evec = eval_store.vectors[eval_store.manifest[eimg]].astype(np.float64)
                    sim = float(np.dot(tvec, evec))
                    if best is None or sim > best:
                        best = sim
            if best is not None and best >= policy.tau_i:
                gating.append(bench)

        hit = False
        for bench in gating:
            policy = config.policy_for(bench)
            if policy.mode == MODE_IMAGE_ONLY:
                hit = True
                continue
            for edoc in by_benchmark[bench]:
                ewords = words(edoc)
                n = pick_n(len(ewords), policy.n_default, policy.short_threshold)
                egrams = {tuple(ewords[i : i + n]) for i in range(len(ewords) - n + 1)}
                if not egrams:
                    continue
                tgrams = [tuple(twords[i : i + n]) for i in range(len(twords) - n + 1)]
                score = sum(1 for g in egrams if g in tgrams) / len(egrams)
                if score >= policy.tau_t:
                    hit = True
        if hit:
            removed.add(tdoc.id)
    return removed
