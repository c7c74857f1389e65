"""DEMB file writing, independent of any consumer implementation.

Layout (little-endian): magic "DEMB", u16 version=1, u16 reserved=0,
u32 dim, u64 count, then count*dim float32 values row-major. The JSONL
manifest opens with one metadata line (no "image_id" key), then one
{"image_id", "row"} line per vector covering rows 0..count-1 in order.
Vectors are written as produced; consumers normalize at load.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"DEMB"
VERSION = 1
_HEADER = struct.Struct("<4sHHIQ")


class DembWriter:
    """Append-only vector file; header count patched on close."""

    def __init__(self, path: str | Path, dim: int):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        self.path = Path(path)
        self.dim = dim
        self.count = 0
        self._fh = self.path.open("wb")
        self._fh.write(_HEADER.pack(MAGIC, VERSION, 0, dim, 0))

    def append(self, batch: np.ndarray) -> None:
        batch = np.ascontiguousarray(batch, dtype="<f4")
        if batch.ndim != 2 or batch.shape[1] != self.dim:
            raise ValueError(
                f"batch shape {batch.shape} incompatible with dim {self.dim}"
            )
        self._fh.write(batch.tobytes())
        self.count += batch.shape[0]

    def close(self) -> None:
        self._fh.seek(0)
        self._fh.write(_HEADER.pack(MAGIC, VERSION, 0, self.dim, self.count))
        self._fh.close()

    def __enter__(self) -> "DembWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_manifest(path: str | Path, image_ids: list[str], meta: dict) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, sort_keys=True) + "\n")
        for row, image_id in enumerate(image_ids):
            fh.write(json.dumps({"image_id": image_id, "row": row}) + "\n")
