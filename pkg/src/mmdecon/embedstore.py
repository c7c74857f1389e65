"""Image-embedding store: binary vector file + JSONL manifest, exact search.

Vector file layout (little-endian): magic "DEMB", u16 version=1, u16
reserved=0, u32 dim, u64 count, then count*dim float32 values row-major.
The manifest maps image_id -> row; entry rows must cover [0, count) exactly.
A manifest line without an "image_id" key is store metadata (producers record
model and preprocessing there).

Vectors are L2-normalized at load, so cosine similarity is a dot product.
Search is exact brute force over blocked matrix products with float64
accumulation; no approximate index. The block partition is fixed so results
do not depend on how blocks are assigned to worker threads.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Document
from .errors import StoreFormatError

MAGIC = b"DEMB"
VERSION = 1
_HEADER = struct.Struct("<4sHHIQ")

# Rows per similarity block. Fixed (never derived from thread count) so the
# arithmetic per output element is identical under any parallel schedule.
BLOCK_ROWS = 2048


@dataclass
class EmbeddingStore:
    dim: int
    vectors: np.ndarray  # (count, dim) float32, rows L2-normalized
    manifest: dict[str, int]
    row_ids: tuple[str, ...]
    meta: dict

    @property
    def count(self) -> int:
        return int(self.vectors.shape[0])

    def rows_for(self, image_ids: Iterable[str]) -> list[int]:
        rows = []
        for image_id in image_ids:
            row = self.manifest.get(image_id)
            if row is None:
                raise StoreFormatError(
                    f"image id {image_id!r} not present in store manifest",
                    image_id=image_id,
                )
            rows.append(row)
        return rows


def _read_manifest(path: Path, count: int) -> tuple[dict[str, int], dict]:
    manifest: dict[str, int] = {}
    row_owner: dict[int, str] = {}
    meta: dict = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise StoreFormatError(f"cannot read manifest {path}: {exc}", path=str(path)) from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StoreFormatError(
                f"manifest {path}:{lineno} is not valid JSON", path=str(path)
            ) from exc
        if not isinstance(obj, dict):
            raise StoreFormatError(
                f"manifest {path}:{lineno} is not an object", path=str(path)
            )
        if "image_id" not in obj:
            meta.update(obj)
            continue
        image_id = obj.get("image_id")
        row = obj.get("row")
        if not isinstance(image_id, str) or not isinstance(row, int) or isinstance(row, bool):
            raise StoreFormatError(
                f"manifest {path}:{lineno} needs string image_id and integer row",
                path=str(path),
            )
        if not 0 <= row < count:
            raise StoreFormatError(
                f"manifest row {row} for {image_id!r} outside [0, {count})",
                image_id=image_id,
            )
        if image_id in manifest:
            raise StoreFormatError(f"duplicate image id {image_id!r} in manifest", image_id=image_id)
        if row in row_owner:
            raise StoreFormatError(
                f"row {row} claimed by both {row_owner[row]!r} and {image_id!r}",
                image_id=image_id,
            )
        manifest[image_id] = row
        row_owner[row] = image_id
    if len(manifest) != count:
        raise StoreFormatError(
            f"manifest covers {len(manifest)} of {count} rows", path=str(path)
        )
    return manifest, meta


def load_store(vectors_path: str | Path, manifest_path: str | Path) -> EmbeddingStore:
    """Load and validate a store; normalizes rows in place.

    Format violations, non-finite values, and zero-norm vectors are fatal;
    zero-norm errors name the offending image id.
    """
    vectors_path = Path(vectors_path)
    manifest_path = Path(manifest_path)
    try:
        blob = vectors_path.read_bytes()
    except OSError as exc:
        raise StoreFormatError(f"cannot read {vectors_path}: {exc}", path=str(vectors_path)) from exc

    if len(blob) < _HEADER.size:
        raise StoreFormatError(f"{vectors_path} shorter than header", path=str(vectors_path))
    magic, version, reserved, dim, count = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise StoreFormatError(f"bad magic {magic!r} in {vectors_path}", path=str(vectors_path))
    if version != VERSION:
        raise StoreFormatError(f"unsupported version {version}", path=str(vectors_path))
    if reserved != 0:
        raise StoreFormatError(f"reserved field must be 0, got {reserved}", path=str(vectors_path))
    if dim == 0:
        raise StoreFormatError("dim must be positive", path=str(vectors_path))

    expected = count * dim * 4
    payload = blob[_HEADER.size :]
    if len(payload) != expected:
        raise StoreFormatError(
            f"payload holds {len(payload)} bytes, header promises {expected}",
            path=str(vectors_path),
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(count, dim).astype(np.float32, copy=True)

    manifest, meta = _read_manifest(manifest_path, count)
    row_ids_arr: list[str] = [""] * count
    for image_id, row in manifest.items():
        row_ids_arr[row] = image_id

    bad = ~np.isfinite(vectors).all(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise StoreFormatError(
            f"non-finite values in vector for image {row_ids_arr[row]!r}",
            image_id=row_ids_arr[row],
        )
    norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
    zero = norms == 0.0
    if zero.any():
        row = int(np.flatnonzero(zero)[0])
        raise StoreFormatError(
            f"zero-norm vector for image {row_ids_arr[row]!r}", image_id=row_ids_arr[row]
        )
    vectors /= norms[:, None]

    return EmbeddingStore(
        dim=int(dim),
        vectors=vectors,
        manifest=manifest,
        row_ids=tuple(row_ids_arr),
        meta=meta,
    )


def write_store(
    vectors_path: str | Path,
    manifest_path: str | Path,
    vectors: np.ndarray,
    image_ids: Sequence[str],
    meta: dict | None = None,
) -> None:
    """Write a conforming store (row i belongs to image_ids[i])."""
    vectors = np.asarray(vectors, dtype=np.float32)
    if vectors.ndim != 2:
        raise ValueError("vectors must be a 2-D array")
    count, dim = vectors.shape
    if len(image_ids) != count:
        raise ValueError(f"{len(image_ids)} image ids for {count} rows")
    with open(vectors_path, "wb") as handle:
        handle.write(_HEADER.pack(MAGIC, VERSION, 0, dim, count))
        handle.write(np.ascontiguousarray(vectors, dtype="<f4").tobytes())
    with open(manifest_path, "w", encoding="utf-8") as handle:
        if meta:
            handle.write(json.dumps(meta, ensure_ascii=False) + "\n")
        for row, image_id in enumerate(image_ids):
            handle.write(json.dumps({"image_id": image_id, "row": row}) + "\n")


def block_ranges(total: int, block: int = BLOCK_ROWS) -> list[tuple[int, int]]:
    """Fixed tiling of [0, total); independent of worker count by design."""
    return [(lo, min(lo + block, total)) for lo in range(0, total, block)]


def similarity_block(train_rows: np.ndarray, eval_mat64: np.ndarray) -> np.ndarray:
    """Cosine matrix for one block: float64 accumulation over unit rows."""
    return train_rows.astype(np.float64) @ eval_mat64.T


@dataclass(frozen=True)
class DocSimilarity:
    """Max cosine between a training doc's images and any eval image.

    max_sim is None for docs with no images; argmax_eval_image_id records
    which eval image achieved the max, for review attribution only.
    """

    training_doc_id: str
    max_sim: float | None
    argmax_eval_image_id: str | None


def group_max(
    sims_rows: np.ndarray, col_groups: Sequence[np.ndarray]
) -> list[tuple[float | None, int | None]]:
    """Per column group: (max over all rows x group cols, argmax column).

    Ties resolve to the lowest row-major position, which is stable for a
    fixed store layout.
    """
    out: list[tuple[float | None, int | None]] = []
    for cols in col_groups:
        if sims_rows.size == 0 or cols.size == 0:
            out.append((None, None))
            continue
        sub = sims_rows[:, cols]
        flat = int(np.argmax(sub))
        col_pos = flat % cols.size
        out.append((float(sub.flat[flat]), int(cols[col_pos])))
    return out


def doc_max_similarity(
    training_docs: Sequence[Document],
    eval_store: EmbeddingStore,
    train_store: EmbeddingStore,
) -> list[DocSimilarity]:
    """Exact per-document max similarity against every eval image.

    Output order mirrors the input document order. Unresolvable image ids
    are fatal; run corpus/store validation first to get friendlier errors.
    """
    eval64 = eval_store.vectors.astype(np.float64)
    all_cols = np.arange(eval_store.count)
    out: list[DocSimilarity] = []
    for doc in training_docs:
        rows = train_store.rows_for(doc.image_ids)
        if not rows or eval_store.count == 0:
            out.append(DocSimilarity(doc.id, None, None))
            continue
        best_val: float | None = None
        best_col: int | None = None
        for lo, hi in block_ranges(len(rows)):
            sims = similarity_block(train_store.vectors[rows[lo:hi]], eval64)
            val, col = group_max(sims, [all_cols])[0]
            if val is not None and (best_val is None or val > best_val):
                best_val, best_col = val, col
        out.append(
            DocSimilarity(doc.id, best_val, eval_store.row_ids[best_col] if best_col is not None else None)
        )
    return out


def stage1_candidates(sims: Sequence[DocSimilarity], tau_i: float) -> set[str]:
    """Doc ids whose max similarity clears the image gate (inclusive)."""
    return {s.training_doc_id for s in sims if s.max_sim is not None and s.max_sim >= tau_i}
