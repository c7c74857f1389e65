"""Text-threshold sweeps over cached stage-2 scores, with pair sampling.

A sweep fixes one benchmark, runs Stage 1 once at that benchmark's image
threshold, computes containment once per (candidate, eval doc) pair, then
reads flagged counts for every grid value off the cached scores. Sampling
draws a deterministic subset of flagged pairs per grid point for manual
review.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cascade import DECISION_REMOVE, ContaminationMatch, EvalIndex
from .config import EngineConfig
from .corpus import Corpus, Document
from .embedstore import EmbeddingStore, block_ranges, group_max, similarity_block
from .errors import CorpusError
from .textnorm import NgramSet, containment, ngram_set_fixed, normalize, qa_concat

AXIS_TAU_T = "tau_t"


def default_grid(start: float = 0.4, stop: float = 1.0, step: float = 0.05) -> tuple[float, ...]:
    """Inclusive grid, rounded to avoid float accumulation drift."""
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


def validate_grid(grid: Sequence[float]) -> tuple[float, ...]:
    if not grid:
        raise ValueError("sweep grid is empty")
    out = tuple(float(g) for g in grid)
    for g in out:
        if not 0.0 < g <= 1.0:
            raise ValueError(f"grid value {g} outside (0, 1]")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError("grid values must be strictly ascending")
    return out


@dataclass(frozen=True)
class SweepProfile:
    benchmark: str
    axis: str
    grid: tuple[float, ...]
    flagged_counts: tuple[int, ...]
    pairs_per_point: tuple[tuple[ContaminationMatch, ...], ...]
    tau_i: float
    mode: str
    candidate_count: int
    eval_doc_count: int
    containment_computations: int


def sweep_tau_t(
    benchmark: str,
    grid: Sequence[float],
    training: Corpus,
    evals: Corpus,
    train_store: EmbeddingStore,
    eval_store: EmbeddingStore,
    config: EngineConfig,
) -> SweepProfile:
    """Flagged-count profile for one benchmark across text thresholds.

    Counts are documents the benchmark would remove on its own at each grid
    value. Image-only benchmarks are swept as if joint, which is exactly the
    question calibration asks of them. Containment runs once per
    (candidate, eval) pair; the profile records the computation count.
    """
    grid = validate_grid(grid)
    bench_docs = [d for d in evals.documents if d.benchmark == benchmark]
    if not bench_docs:
        raise CorpusError(f"benchmark {benchmark!r} has no docs in the eval corpus")
    restricted = Corpus(tuple(bench_docs), "eval", evals.source_path)
    index = EvalIndex(restricted, eval_store, config)
    policy = index.policies[benchmark]
    cols = index.groups[benchmark]

    docs = training.documents
    doc_rows = [train_store.rows_for(d.image_ids) for d in docs]

    # Stage 1 once: per-doc max against this benchmark's images.
    candidates: list[tuple[Document, float]] = []
    if cols.size:
        flat: list[int] = [r for rows in doc_rows for r in rows]
        flat_arr = np.array(flat, dtype=np.int64)
        sims_cols: list[np.ndarray] = []
        for lo, hi in block_ranges(len(flat_arr)):
            sims_cols.append(
                similarity_block(train_store.vectors[flat_arr[lo:hi]], index.eval64[cols])
            )
        all_sims = (
            np.concatenate(sims_cols, axis=0) if sims_cols else np.zeros((0, cols.size))
        )
        offset = 0
        for doc, rows in zip(docs, doc_rows):
            doc_sims = all_sims[offset : offset + len(rows)]
            offset += len(rows)
            if not rows:
                continue
            best = float(doc_sims.max())
            if best >= policy.tau_i:
                candidates.append((doc, best))

    # Stage 2 once per pair.
    computations = 0
    scored: list[tuple[Document, float, list[tuple[Document, float]]]] = []
    strip = config.strip_list
    for doc, sim in candidates:
        norm_qa = qa_concat(normalize(doc.question, strip), normalize(doc.answer, strip))
        gram_cache: dict[int, NgramSet] = {}
        row: list[tuple[Document, float]] = []
        for ev in bench_docs:
            eval_grams = index.grams[ev.id]
            if eval_grams.n not in gram_cache:
                gram_cache[eval_grams.n] = ngram_set_fixed(norm_qa, eval_grams.n)
            score = containment(eval_grams, gram_cache[eval_grams.n])
            computations += 1
            row.append((ev, score))
        scored.append((doc, sim, row))

    counts: list[int] = []
    pairs_per_point: list[tuple[ContaminationMatch, ...]] = []
    for tau_t in grid:
        flagged_docs = 0
        point_pairs: list[ContaminationMatch] = []
        for doc, sim, row in scored:
            hits = [
                ContaminationMatch(doc.id, ev.id, benchmark, sim, score, DECISION_REMOVE, 2)
                for ev, score in row
                if score >= tau_t
            ]
            if hits:
                flagged_docs += 1
                point_pairs.extend(hits)
        counts.append(flagged_docs)
        pairs_per_point.append(tuple(point_pairs))

    return SweepProfile(
        benchmark=benchmark,
        axis=AXIS_TAU_T,
        grid=grid,
        flagged_counts=tuple(counts),
        pairs_per_point=tuple(pairs_per_point),
        tau_i=policy.tau_i,
        mode=policy.mode,
        candidate_count=len(candidates),
        eval_doc_count=len(bench_docs),
        containment_computations=computations,
    )


def _point_sample(profile: SweepProfile, i: int, k: int, seed: int) -> list[ContaminationMatch]:
    # Each grid point gets its own stream derived from (seed, index), so
    # adding grid points does not reshuffle earlier ones.
    rng = random.Random(f"{seed}:{i}")
    pool = list(profile.pairs_per_point[i])
    return rng.sample(pool, min(k, len(pool)))


def sample_flagged(profile: SweepProfile, k: int, seed: int) -> list[ContaminationMatch]:
    """min(k, available) flagged pairs per grid point, seeded and stable."""
    if k < 1:
        raise ValueError(f"sample size must be >= 1, got {k}")
    out: list[ContaminationMatch] = []
    for i in range(len(profile.grid)):
        out.extend(_point_sample(profile, i, k, seed))
    return out


def profile_to_json(
    profile: SweepProfile,
    sample_k: int | None = None,
    seed: int = 0,
    excerpt_for: Callable[[str], dict] | None = None,
) -> dict:
    """Wire form of a sweep profile; optionally embeds sampled pairs.

    excerpt_for maps a document id to display fields (text excerpt, image
    ids) supplied by the caller that owns the corpora.
    """
    obj: dict = {
        "benchmark": profile.benchmark,
        "axis": profile.axis,
        "grid": list(profile.grid),
        "flagged_counts": list(profile.flagged_counts),
        "tau_i": profile.tau_i,
        "mode": profile.mode,
        "candidate_count": profile.candidate_count,
        "eval_doc_count": profile.eval_doc_count,
        "containment_computations": profile.containment_computations,
    }
    if sample_k is not None:
        if sample_k < 1:
            raise ValueError(f"sample size must be >= 1, got {sample_k}")
        samples = []
        for i, tau_t in enumerate(profile.grid):
            rows = []
            for m in _point_sample(profile, i, sample_k, seed):
                row = {
                    "id": m.training_doc_id,
                    "eval_id": m.eval_doc_id,
                    "sim_img": m.sim_img,
                    "c_text": m.c_text,
                    "stage": m.stage_reached,
                }
                if excerpt_for is not None:
                    row["training"] = excerpt_for(m.training_doc_id)
                    row["eval"] = excerpt_for(m.eval_doc_id)
                rows.append(row)
            samples.append({"tau_t": tau_t, "pairs": rows})
        obj["samples"] = samples
        obj["sample_seed"] = seed
    return obj
