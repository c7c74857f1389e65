"""`embed` command: image directory -> DEMB vectors + manifest.

Images are discovered recursively, embedded in filename order (sorted
relative POSIX path, which is also the image id), and written in batches.
Undecodable images are skipped and logged; an empty job is an error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .encoder import DEFAULT_MODEL, build_encoder
from .errors import EmbedError
from .writer import DembWriter, write_manifest

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".webp", ".gif", ".bmp")


def discover_images(root: Path) -> list[tuple[str, Path]]:
    """(image_id, path) pairs in deterministic id order."""
    if not root.is_dir():
        raise EmbedError(f"image root {root} is not a directory")
    pairs = [
        (p.relative_to(root).as_posix(), p)
        for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    ]
    pairs.sort(key=lambda pair: pair[0])
    return pairs


def embed_directory(
    images_root: Path,
    out_path: Path,
    manifest_path: Path,
    model_id: str,
    batch_size: int,
) -> dict:
    if batch_size < 1:
        raise EmbedError(f"batch size must be >= 1, got {batch_size}")
    pairs = discover_images(images_root)
    if not pairs:
        raise EmbedError(f"no images under {images_root}")
    encoder = build_encoder(model_id)

    written_ids: list[str] = []
    skipped: list[str] = []
    with DembWriter(out_path, encoder.dim) as writer:
        batch_ids: list[str] = []
        batch_imgs: list[Image.Image] = []

        def flush() -> None:
            if not batch_imgs:
                return
            writer.append(encoder.encode_batch(batch_imgs))
            written_ids.extend(batch_ids)
            for img in batch_imgs:
                img.close()
            batch_ids.clear()
            batch_imgs.clear()

        for image_id, path in pairs:
            try:
                img = Image.open(path)
                img.load()
            except (UnidentifiedImageError, OSError) as exc:
                skipped.append(image_id)
                print(
                    json.dumps({"event": "skip", "image_id": image_id, "reason": str(exc)}),
                    file=sys.stderr,
                )
                continue
            batch_ids.append(image_id)
            batch_imgs.append(img)
            if len(batch_imgs) >= batch_size:
                flush()
        flush()

    if not written_ids:
        out_path.unlink(missing_ok=True)
        raise EmbedError(f"no decodable images under {images_root}")

    meta = {
        "model": model_id,
        "dim": encoder.dim,
        "preprocessing": "encoder-default",
        "source": str(images_root),
    }
    write_manifest(manifest_path, written_ids, meta)
    return {
        "out": str(out_path),
        "manifest": str(manifest_path),
        "model": model_id,
        "dim": encoder.dim,
        "embedded": len(written_ids),
        "skipped": skipped,
    }


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="embed", description="embed an image directory into a DEMB vector file"
    )
    ap.add_argument("--images", required=True, help="image directory (recursive)")
    ap.add_argument("--out", required=True, help="output .demb path")
    ap.add_argument("--manifest", required=True, help="output manifest .jsonl path")
    ap.add_argument("--model", default=DEFAULT_MODEL,
                    help=f"checkpoint id or moment:<dim> (default {DEFAULT_MODEL})")
    ap.add_argument("--batch", type=int, default=64)
    args = ap.parse_args(argv)
    try:
        summary = embed_directory(
            Path(args.images), Path(args.out), Path(args.manifest),
            args.model, args.batch,
        )
    except EmbedError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
