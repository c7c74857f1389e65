"""Synthetic corpora and stores with planted contamination.

Ground truth is controlled through two disjoint vocabularies: eval texts
draw from one, background/filler text from the other, so text overlap exists
exactly where it is planted. Image similarity is controlled by copying eval
vectors (exact leaks) or mixing them with an orthogonal component to hit a
target cosine. Raw strings are decorated with role tags, stray punctuation,
and case noise that normalization must undo without disturbing the plants.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import BenchmarkPolicy, EngineConfig, PolicySet, config_to_json
from .corpus import Corpus, Document, write_corpus
from .embedstore import EmbeddingStore, write_store
from .textnorm import normalize, pick_n

_VOCAB_EVAL = tuple(f"ea{i}" for i in range(48))
_VOCAB_FILL = tuple(f"fb{i}" for i in range(64))

_BENCH_NAMES = ("alpha", "beta", "gamma", "delta", "epsilon", "zeta")


@dataclass
class SynthInstance:
    training: Corpus
    evals: Corpus
    train_store: EmbeddingStore
    eval_store: EmbeddingStore
    config: EngineConfig
    leak_ids: tuple[str, ...] = ()
    same_image_ids: tuple[str, ...] = ()
    template_ids: tuple[str, ...] = ()
    notes: dict = field(default_factory=dict)


def unit_vectors(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    vecs = rng.standard_normal((n, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return vecs.astype(np.float32)


def vector_at_cosine(rng: np.random.Generator, base: np.ndarray, cos: float) -> np.ndarray:
    """Unit vector at a chosen cosine to ``base`` (itself unit)."""
    base64 = base.astype(np.float64)
    w = rng.standard_normal(base64.shape)
    w -= (w @ base64) * base64
    w /= np.linalg.norm(w)
    return (cos * base64 + np.sqrt(max(0.0, 1.0 - cos * cos)) * w).astype(np.float32)


def make_store(vectors: np.ndarray, image_ids: list[str]) -> EmbeddingStore:
    """In-memory store with the same normalization the loader applies."""
    vecs = np.asarray(vectors, dtype=np.float32).copy()
    norms = np.linalg.norm(vecs.astype(np.float64), axis=1)
    vecs /= norms[:, None]
    return EmbeddingStore(
        dim=vecs.shape[1],
        vectors=vecs,
        manifest={image_id: row for row, image_id in enumerate(image_ids)},
        row_ids=tuple(image_ids),
        meta={},
    )


def _words(rng: np.random.Generator, vocab: tuple[str, ...], lo: int, hi: int) -> list[str]:
    k = int(rng.integers(lo, hi + 1))
    return [vocab[int(i)] for i in rng.integers(0, len(vocab), k)]


def _decorate(rng: np.random.Generator, words: list[str]) -> str:
    """Raw-string noise that normalization strips without touching tokens."""
    s = " ".join(words)
    r = float(rng.random())
    if r < 0.2:
        s = "USER: " + s
    elif r < 0.3:
        s = "<image>\n" + s
    if rng.random() < 0.2 and s:
        s = s + "?"
    if rng.random() < 0.1:
        s = s.upper()
    if rng.random() < 0.15:
        s = s.replace(" ", "  ", 1)
    return s


def build_instance(
    seed: int,
    n_train: int = 80,
    n_eval: int = 16,
    n_benchmarks: int = 3,
    dim: int = 32,
    n_leaks: int = 2,
    n_same_image: int = 1,
    n_template: int = 1,
    n_near: int = 4,
    randomize_policies: bool = False,
) -> SynthInstance:
    """Random instance with planted ground truth.

    leak_ids must be removed under default thresholds; same_image_ids (image
    match, disjoint text) and template_ids (verbatim text, unrelated image)
    must be kept.
    """
    rng = np.random.default_rng(seed)
    n_leaks = min(n_leaks, n_eval)  # leaks target distinct eval docs
    benches = list(_BENCH_NAMES[:n_benchmarks])

    overrides: dict[str, BenchmarkPolicy] = {}
    image_only_bench: str | None = None
    if randomize_policies and n_benchmarks >= 2:
        roll = float(rng.random())
        if roll < 0.35:
            image_only_bench = benches[-1]
            overrides[image_only_bench] = BenchmarkPolicy(
                benchmark=image_only_bench, tau_i=0.995, mode="image_only"
            ).validate()
        elif roll < 0.6:
            overrides[benches[0]] = BenchmarkPolicy(
                benchmark=benches[0], tau_t=0.6
            ).validate()
        elif roll < 0.75:
            overrides[benches[0]] = BenchmarkPolicy(
                benchmark=benches[0], tau_i=0.9
            ).validate()
    config = EngineConfig(
        policies=PolicySet(default=BenchmarkPolicy(benchmark="*"), overrides=overrides)
    )
    joint_benches = [b for b in benches if b != image_only_bench]

    # Eval side. The first n_leaks docs are leak targets: long text, has image.
    eval_docs: list[Document] = []
    eval_img_ids: list[str] = []
    eval_img_vecs: list[np.ndarray] = []
    img_counter = 0

    def new_eval_image() -> str:
        nonlocal img_counter
        image_id = f"eimg{img_counter:04d}"
        img_counter += 1
        eval_img_ids.append(image_id)
        eval_img_vecs.append(unit_vectors(rng, 1, dim)[0])
        return image_id

    for i in range(n_eval):
        if i < n_leaks:
            bench = joint_benches[i % len(joint_benches)] if joint_benches else benches[0]
            q = _words(rng, _VOCAB_EVAL, 9, 12)
            a = _words(rng, _VOCAB_EVAL, 5, 7)
            images = [new_eval_image()]
        else:
            bench = benches[i % len(benches)]
            r = float(rng.random())
            if r < 0.08:
                q, a = [], []  # text-ungateable
            elif r < 0.3:
                q, a = _words(rng, _VOCAB_EVAL, 2, 5), _words(rng, _VOCAB_EVAL, 0, 2)
            else:
                q, a = _words(rng, _VOCAB_EVAL, 5, 14), _words(rng, _VOCAB_EVAL, 1, 6)
            images = [new_eval_image() for _ in range(int(rng.integers(0, 3)))]
        eval_docs.append(
            Document(
                id=f"e{i:04d}",
                split="eval",
                question=_decorate(rng, q),
                answer=" ".join(a),
                image_ids=tuple(images),
                benchmark=bench,
            )
        )

    eval_store = (
        make_store(np.array(eval_img_vecs), eval_img_ids)
        if eval_img_ids
        else make_store(np.zeros((0, dim), dtype=np.float32), [])
    )

    def eval_tokens(doc: Document) -> list[str]:
        # Decoration is token-preserving, so normalizing recovers the plants.
        return list(normalize(doc.question).tokens) + list(normalize(doc.answer).tokens)

    # Training side.
    train_docs: list[Document] = []
    train_img_ids: list[str] = []
    train_img_vecs: list[np.ndarray] = []
    t_counter = 0

    def add_train_image(vec: np.ndarray) -> str:
        nonlocal t_counter
        image_id = f"timg{t_counter:05d}"
        t_counter += 1
        train_img_ids.append(image_id)
        train_img_vecs.append(vec)
        return image_id

    def add_doc(doc_id: str, words: list[str], images: list[str]) -> None:
        train_docs.append(
            Document(
                id=doc_id,
                split="training",
                question=_decorate(rng, words) if words else "",
                answer="",
                image_ids=tuple(images),
            )
        )

    for i in range(n_train):
        n_imgs = int(rng.integers(0, 4)) if rng.random() > 0.1 else 0
        images = [add_train_image(unit_vectors(rng, 1, dim)[0]) for _ in range(n_imgs)]
        words = _words(rng, _VOCAB_FILL, 5, 30)
        if rng.random() < 0.3:
            words += _words(rng, _VOCAB_EVAL, 1, 4)
        add_doc(f"t{i:05d}", words, images)

    evals_with_images = [d for d in eval_docs if d.image_ids]

    # Near-threshold plants: image cosine straddling the gate, text with a
    # partial contiguous overlap.
    near_cosines = (0.935, 0.9495, 0.9505, 0.97, 0.996)
    for j in range(n_near):
        if not evals_with_images:
            break
        target = evals_with_images[int(rng.integers(0, len(evals_with_images)))]
        base_row = eval_store.manifest[target.image_ids[0]]
        cos = near_cosines[int(rng.integers(0, len(near_cosines)))]
        image = add_train_image(vector_at_cosine(rng, eval_store.vectors[base_row], cos))
        toks = eval_tokens(target)
        policy = config.policy_for(target.benchmark or "")
        n = pick_n(len(toks), policy.n_default, policy.short_threshold)
        frac = float(rng.choice((0.3, 0.5, 0.8, 1.0)))
        k = min(len(toks), max(n, int(round(frac * len(toks)))))
        words = _words(rng, _VOCAB_FILL, 2, 6) + toks[:k] + _words(rng, _VOCAB_FILL, 2, 6)
        add_doc(f"near{j:03d}", words, [image])

    # Full leaks: exact image copy plus the eval text verbatim inside filler.
    leak_ids = []
    for j in range(n_leaks):
        target = eval_docs[j]
        if not target.image_ids:
            continue
        base_row = eval_store.manifest[target.image_ids[0]]
        image = add_train_image(eval_store.vectors[base_row].copy())
        toks = eval_tokens(target)
        words = (
            _words(rng, _VOCAB_FILL, 2 * len(toks), 2 * len(toks))
            + toks
            + _words(rng, _VOCAB_FILL, 2 * len(toks), 2 * len(toks))
        )
        doc_id = f"leak{j:03d}"
        add_doc(doc_id, words, [image])
        leak_ids.append(doc_id)

    # Image match with unrelated text: must be kept under joint mode.
    same_image_ids = []
    joint_eval_imgs = [d for d in evals_with_images if d.benchmark in joint_benches]
    for j in range(n_same_image):
        if not joint_eval_imgs:
            break
        target = joint_eval_imgs[int(rng.integers(0, len(joint_eval_imgs)))]
        base_row = eval_store.manifest[target.image_ids[0]]
        image = add_train_image(eval_store.vectors[base_row].copy())
        doc_id = f"same{j:03d}"
        add_doc(doc_id, _words(rng, _VOCAB_FILL, 8, 20), [image])
        same_image_ids.append(doc_id)

    # Verbatim text with an unrelated image: must be kept.
    template_ids = []
    long_evals = [d for d in eval_docs if len(eval_tokens(d)) >= 6]
    for j in range(n_template):
        if not long_evals:
            break
        target = long_evals[int(rng.integers(0, len(long_evals)))]
        image = add_train_image(unit_vectors(rng, 1, dim)[0])
        doc_id = f"tmpl{j:03d}"
        add_doc(doc_id, eval_tokens(target), [image])
        template_ids.append(doc_id)

    train_store = (
        make_store(np.array(train_img_vecs), train_img_ids)
        if train_img_ids
        else make_store(np.zeros((0, dim), dtype=np.float32), [])
    )
    return SynthInstance(
        training=Corpus(tuple(train_docs), "training", f"synthetic:{seed}"),
        evals=Corpus(tuple(eval_docs), "eval", f"synthetic:{seed}"),
        train_store=train_store,
        eval_store=eval_store,
        config=config,
        leak_ids=tuple(leak_ids),
        same_image_ids=tuple(same_image_ids),
        template_ids=tuple(template_ids),
        notes={"seed": seed},
    )


def lean_world(
    n_train: int,
    n_eval_docs: int,
    imgs_per_eval: int,
    dim: int,
    seed: int,
) -> tuple[Corpus, Corpus, EmbeddingStore, EmbeddingStore]:
    """Large corpus with realistic store shapes but trivially cheap text.

    For throughput measurement: no planted contamination, one image per
    training doc, short disjoint texts.
    """
    rng = np.random.default_rng(seed)
    eval_img_ids = [f"ei{i}" for i in range(n_eval_docs * imgs_per_eval)]
    eval_store = make_store(
        rng.standard_normal((len(eval_img_ids), dim)).astype(np.float32), eval_img_ids
    )
    eval_docs = [
        Document(
            id=f"e{i}",
            split="eval",
            question=f"what colour is object number {i} in the panel",
            answer=f"colour {i}",
            image_ids=tuple(eval_img_ids[i * imgs_per_eval : (i + 1) * imgs_per_eval]),
            benchmark=f"bench{i % 4}",
        )
        for i in range(n_eval_docs)
    ]
    train_img_ids = [f"ti{i}" for i in range(n_train)]
    train_store = make_store(
        rng.standard_normal((n_train, dim)).astype(np.float32), train_img_ids
    )
    train_docs = [
        Document(
            id=f"t{i}",
            split="training",
            question=f"caption for sample {i} with some words",
            answer="",
            image_ids=(train_img_ids[i],),
        )
        for i in range(n_train)
    ]
    return (
        Corpus(tuple(train_docs), "training", "lean"),
        Corpus(tuple(eval_docs), "eval", "lean"),
        train_store,
        eval_store,
    )


def write_instance(inst: SynthInstance, outdir: str | Path, train_shards: int = 1) -> dict[str, str]:
    """Materialize an instance on disk in the formats the CLI consumes."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, str] = {}

    if train_shards <= 1:
        train_path = outdir / "train.jsonl"
        write_corpus(inst.training.documents, train_path)
    else:
        train_path = outdir / "train_shards"
        train_path.mkdir(exist_ok=True)
        docs = inst.training.documents
        per = -(-len(docs) // train_shards)
        for s in range(train_shards):
            write_corpus(
                docs[s * per : (s + 1) * per], train_path / f"shard-{s:03d}.jsonl"
            )
    paths["train"] = str(train_path)

    eval_path = outdir / "eval.jsonl"
    write_corpus(inst.evals.documents, eval_path)
    paths["eval"] = str(eval_path)

    for name, store in (("train", inst.train_store), ("eval", inst.eval_store)):
        demb = outdir / f"{name}.demb"
        manifest = outdir / f"{name}.manifest.jsonl"
        write_store(demb, manifest, store.vectors, list(store.row_ids))
        paths[f"{name}_emb"] = str(demb)
        paths[f"{name}_manifest"] = str(manifest)

    config_path = outdir / "config.json"
    config_path.write_text(json.dumps(config_to_json(inst.config), indent=2) + "\n")
    paths["config"] = str(config_path)
    return paths
