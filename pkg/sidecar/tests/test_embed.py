"""Sidecar output validated through the consumer's store loader."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from demb_embed.cli import embed_directory, main
from demb_embed.encoder import MomentProjectionEncoder, build_encoder
from demb_embed.errors import EmbedError

# The production package is the consumer; importing it here (tests only)
# closes the round trip without coupling the sidecar itself to it.
from mmdecon.embedstore import load_store

MODEL = "moment:64"


def paint(path: Path, seed: int, size=(40, 30)) -> None:
    rng = np.random.default_rng(seed)
    Image.fromarray(
        rng.integers(0, 256, (size[1], size[0], 3), dtype=np.uint8), "RGB"
    ).save(path)


@pytest.fixture()
def image_dir(tmp_path):
    root = tmp_path / "imgs"
    root.mkdir()
    for i in range(10):
        paint(root / f"img{i:02d}.png", seed=i)
    return root


def run_job(root: Path, tmp_path: Path, **kw):
    tmp_path.mkdir(exist_ok=True)
    out = tmp_path / "v.demb"
    manifest = tmp_path / "v.manifest.jsonl"
    summary = embed_directory(root, out, manifest, kw.pop("model", MODEL), kw.pop("batch", 4))
    return out, manifest, summary


class TestContract:
    def test_ten_images_full_round_trip(self, image_dir, tmp_path):
        out, manifest, summary = run_job(image_dir, tmp_path)
        assert summary["embedded"] == 10 and summary["skipped"] == []

        rows = [json.loads(l) for l in manifest.read_text().splitlines()]
        assert "image_id" not in rows[0] and rows[0]["model"] == MODEL
        assert [r["row"] for r in rows[1:]] == list(range(10))

        store = load_store(out, manifest)  # zero validation errors
        assert store.count == 10 and store.dim == 64
        assert store.meta["model"] == MODEL
        assert list(store.row_ids) == sorted(store.row_ids)  # filename order

    def test_duplicate_content_cosine(self, image_dir, tmp_path):
        (image_dir / "img00_copy.png").write_bytes((image_dir / "img00.png").read_bytes())
        out, manifest, _ = run_job(image_dir, tmp_path)
        store = load_store(out, manifest)
        a = store.vectors[store.manifest["img00.png"]]
        b = store.vectors[store.manifest["img00_copy.png"]]
        assert float(a @ b) >= 0.999

    def test_corrupt_image_skipped_and_logged(self, image_dir, tmp_path, capsys):
        (image_dir / "img03.png").write_bytes(b"not an image at all")
        out, manifest, summary = run_job(image_dir, tmp_path)
        assert summary["embedded"] == 9
        assert summary["skipped"] == ["img03.png"]
        logged = [json.loads(l) for l in capsys.readouterr().err.splitlines()]
        assert logged[0]["event"] == "skip" and logged[0]["image_id"] == "img03.png"
        store = load_store(out, manifest)
        assert store.count == 9
        assert "img03.png" not in store.manifest

    def test_zero_images_is_error(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        with pytest.raises(EmbedError, match="no images"):
            run_job(empty, tmp_path)

    def test_all_corrupt_is_error_and_no_output_left(self, tmp_path):
        root = tmp_path / "imgs"
        root.mkdir()
        (root / "a.png").write_bytes(b"junk")
        with pytest.raises(EmbedError, match="no decodable"):
            run_job(root, tmp_path)
        assert not (tmp_path / "v.demb").exists()


class TestDeterminism:
    def test_repeat_runs_byte_identical(self, image_dir, tmp_path):
        out1, man1, _ = run_job(image_dir, tmp_path / "a")
        out2, man2, _ = run_job(image_dir, tmp_path / "b")
        assert out1.read_bytes() == out2.read_bytes()
        assert man1.read_text() == man2.read_text()

    def test_batch_size_does_not_change_vectors(self, image_dir, tmp_path):
        out1, _, _ = run_job(image_dir, tmp_path / "a", batch=1)
        out2, _, _ = run_job(image_dir, tmp_path / "b", batch=64)
        assert out1.read_bytes() == out2.read_bytes()

    def test_subdirectories_use_relative_ids(self, image_dir, tmp_path):
        nested = image_dir / "sub"
        nested.mkdir()
        paint(nested / "deep.png", seed=99)
        _, manifest, summary = run_job(image_dir, tmp_path)
        assert summary["embedded"] == 11
        ids = [json.loads(l)["image_id"] for l in manifest.read_text().splitlines()[1:]]
        assert "sub/deep.png" in ids


class TestEncoder:
    def test_never_zero_vector(self):
        enc = MomentProjectionEncoder("moment:32", 32)
        black = Image.new("RGB", (16, 16), (0, 0, 0))
        vec = enc.encode_batch([black])[0]
        assert np.linalg.norm(vec) > 0

    def test_model_id_changes_projection(self):
        img = Image.new("RGB", (16, 16), (10, 80, 200))
        a = build_encoder("moment:32").encode_batch([img])
        b = MomentProjectionEncoder("moment-alt", 32).encode_batch([img])
        assert not np.allclose(a, b)

    def test_bad_moment_dim(self):
        with pytest.raises(EmbedError, match="integer"):
            build_encoder("moment:huge")
        with pytest.raises(EmbedError, match="positive"):
            build_encoder("moment:0")


class TestCli:
    def test_end_to_end(self, image_dir, tmp_path, capsys):
        out = tmp_path / "v.demb"
        rc = main(
            [
                "--images", str(image_dir),
                "--out", str(out),
                "--manifest", str(tmp_path / "m.jsonl"),
                "--model", MODEL,
                "--batch", "3",
            ]
        )
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["embedded"] == 10
        magic, version, _, dim, count = struct.unpack("<4sHHIQ", out.read_bytes()[:20])
        assert (magic, version, dim, count) == (b"DEMB", 1, 64, 10)

    def test_error_exit_code(self, tmp_path, capsys):
        rc = main(
            [
                "--images", str(tmp_path / "missing"),
                "--out", str(tmp_path / "v.demb"),
                "--manifest", str(tmp_path / "m.jsonl"),
                "--model", MODEL,
            ]
        )
        assert rc == 2
        assert "error" in json.loads(capsys.readouterr().err.splitlines()[-1])


def test_production_code_never_imports_consumer():
    src = Path(__file__).resolve().parents[1] / "src" / "demb_embed"
    for path in src.rglob("*.py"):
        assert "mmdecon" not in path.read_text(), path
