"""Line-delimited document corpora: ingestion, validation, serialization.

A corpus is one JSONL file or a directory of ``*.jsonl`` shards concatenated
in shard-name order. Records carry id/split/question/answer/image_ids plus a
benchmark label on the eval side. Multi-turn conversations may arrive as a
``turns`` list and are flattened at ingestion: user text becomes the
question, assistant text the answer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import CorpusError

SPLITS = ("training", "eval")

_USER_ROLES = frozenset({"user", "human"})
_ASSISTANT_ROLES = frozenset({"assistant", "model", "gpt", "bot"})


@dataclass(frozen=True)
class Document:
    id: str
    split: str
    question: str
    answer: str
    image_ids: tuple[str, ...]
    benchmark: str | None = None
    meta: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    split: str
    source_path: str
    skipped_lines: int = 0

    def __len__(self) -> int:
        return len(self.documents)

    def ids(self) -> set[str]:
        return {d.id for d in self.documents}


class _Malformed(Exception):
    """Record-local parse failure; skippable in lenient mode."""


def _as_str(obj, key: str, default: str | None = None) -> str:
    value = obj.get(key, default)
    if value is None:
        raise _Malformed(f"missing field {key!r}")
    if not isinstance(value, str):
        raise _Malformed(f"field {key!r} must be a string")
    return value


def _flatten_turns(turns) -> tuple[str, str]:
    if not isinstance(turns, list):
        raise _Malformed("field 'turns' must be a list")
    questions: list[str] = []
    answers: list[str] = []
    for turn in turns:
        if not isinstance(turn, dict):
            raise _Malformed("each turn must be an object")
        role = turn.get("role")
        text = turn.get("text", turn.get("content"))
        if not isinstance(role, str) or not isinstance(text, str):
            raise _Malformed("each turn needs string 'role' and 'text'")
        role_key = role.lower()
        if role_key in _USER_ROLES:
            questions.append(text)
        elif role_key in _ASSISTANT_ROLES:
            answers.append(text)
        else:
            raise _Malformed(f"unknown turn role {role!r}")
    return " ".join(questions), " ".join(answers)


def parse_record(obj: dict, expected_split: str) -> Document:
    """Turn one decoded JSON object into a Document.

    Raises _Malformed for skippable per-record damage and CorpusError for
    violations that must abort the load (wrong split, eval without benchmark).
    """
    if not isinstance(obj, dict):
        raise _Malformed("record is not a JSON object")
    doc_id = _as_str(obj, "id")
    if not doc_id:
        raise _Malformed("empty id")

    split = obj.get("split", expected_split)
    if split not in SPLITS:
        raise _Malformed(f"unknown split {split!r}")
    if split != expected_split:
        raise CorpusError(
            f"record {doc_id!r} declares split {split!r} in a {expected_split} corpus",
            id=doc_id,
        )

    if "question" in obj or "answer" in obj or "turns" not in obj:
        question = _as_str(obj, "question", "")
        answer = _as_str(obj, "answer", "")
    else:
        question, answer = _flatten_turns(obj["turns"])

    raw_images = obj.get("image_ids", [])
    if not isinstance(raw_images, list) or any(not isinstance(i, str) for i in raw_images):
        raise _Malformed("field 'image_ids' must be a list of strings")

    benchmark = obj.get("benchmark")
    if benchmark is not None and not isinstance(benchmark, str):
        raise _Malformed("field 'benchmark' must be a string")
    if split == "eval" and not benchmark:
        raise CorpusError(f"eval record {doc_id!r} has no benchmark label", id=doc_id)

    meta = obj.get("meta", {})
    if not isinstance(meta, dict):
        raise _Malformed("field 'meta' must be an object")

    return Document(
        id=doc_id,
        split=split,
        question=question,
        answer=answer,
        image_ids=tuple(raw_images),
        benchmark=benchmark,
        meta=meta,
    )


def _input_files(path: Path) -> list[Path]:
    if path.is_dir():
        shards = sorted(p for p in path.glob("*.jsonl") if p.is_file())
        if not shards:
            raise CorpusError(f"no *.jsonl shards under {path}", path=str(path))
        return shards
    if not path.is_file():
        raise CorpusError(f"corpus path does not exist: {path}", path=str(path))
    return [path]


def _iter_lines(files: Iterable[Path]) -> Iterator[tuple[str, int, str]]:
    for file in files:
        try:
            with open(file, encoding="utf-8") as handle:
                for lineno, line in enumerate(handle, 1):
                    yield str(file), lineno, line
        except OSError as exc:
            raise CorpusError(f"cannot read {file}: {exc}", path=str(file)) from exc


def load_corpus(path: str | Path, split: str, on_malformed: str = "skip") -> Corpus:
    """Load a JSONL file or shard directory into a validated Corpus.

    Malformed lines are skipped and counted by default; pass
    on_malformed="fatal" to abort on the first one. Duplicate ids, split
    mismatches, and unlabeled eval records always abort.
    """
    if split not in SPLITS:
        raise CorpusError(f"unknown split {split!r}")
    if on_malformed not in ("skip", "fatal"):
        raise ValueError("on_malformed must be 'skip' or 'fatal'")

    path = Path(path)
    documents: list[Document] = []
    seen: dict[str, str] = {}
    skipped = 0

    for source, lineno, line in _iter_lines(_input_files(path)):
        if not line.strip():
            continue
        where = f"{source}:{lineno}"
        try:
            obj = json.loads(line)
            doc = parse_record(obj, split)
        except (json.JSONDecodeError, _Malformed) as exc:
            if on_malformed == "fatal":
                raise CorpusError(f"malformed record at {where}: {exc}", where=where) from exc
            skipped += 1
            continue
        if doc.id in seen:
            raise CorpusError(
                f"duplicate document id {doc.id!r} at {where} (first seen at {seen[doc.id]})",
                id=doc.id,
            )
        seen[doc.id] = where
        documents.append(doc)

    if not documents:
        raise CorpusError(f"corpus {path} contains no valid documents", path=str(path))
    return Corpus(
        documents=tuple(documents),
        split=split,
        source_path=str(path),
        skipped_lines=skipped,
    )


def document_to_json(doc: Document) -> dict:
    """Canonical wire form; benchmark and meta appear only when set."""
    obj: dict = {
        "id": doc.id,
        "split": doc.split,
    }
    if doc.benchmark is not None:
        obj["benchmark"] = doc.benchmark
    obj["question"] = doc.question
    obj["answer"] = doc.answer
    obj["image_ids"] = list(doc.image_ids)
    if doc.meta:
        obj["meta"] = dict(doc.meta)
    return obj


def write_corpus(documents: Iterable[Document], path: str | Path) -> int:
    """Serialize documents as JSONL; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for doc in documents:
            handle.write(json.dumps(document_to_json(doc), ensure_ascii=False) + "\n")
            count += 1
    return count


def partition_by_benchmark(corpus: Corpus) -> dict[str, list[Document]]:
    """Group an eval corpus by benchmark, keys in lexicographic order."""
    if corpus.split != "eval":
        raise CorpusError(
            f"partition_by_benchmark needs an eval corpus, got split {corpus.split!r}"
        )
    groups: dict[str, list[Document]] = {}
    for doc in corpus.documents:
        groups.setdefault(doc.benchmark, []).append(doc)  # type: ignore[arg-type]
    return {name: groups[name] for name in sorted(groups)}
