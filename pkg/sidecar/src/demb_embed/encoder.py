"""Image encoders.

Two families behind one interface:

- ``moment:<dim>``: self-contained deterministic encoder: fixed-resolution
  pixel statistics projected through a matrix seeded from the model id.
  Needs no weights or network; identical bytes give identical vectors, so
  duplicate detection downstream is exact. The projection input carries a
  constant component, so no image can embed to the zero vector.
- anything else: treated as a transformers checkpoint id (e.g. a DINOv2
  variant) and loaded lazily; unavailable frameworks or weights surface as
  a clear job error instead of an import-time crash.
"""

from __future__ import annotations

import hashlib

import numpy as np
from PIL import Image

from .errors import EmbedError

DEFAULT_MODEL = "facebook/dinov2-base"

_SIDE = 32  # analysis resolution for the moment encoder
_GRID = 8


class MomentProjectionEncoder:
    def __init__(self, model_id: str, dim: int):
        if dim <= 0:
            raise EmbedError(f"embedding dim must be positive, got {dim}")
        self.model_id = model_id
        self.dim = dim
        seed = int.from_bytes(
            hashlib.sha256(model_id.encode("utf-8")).digest()[:8], "big"
        )
        rng = np.random.default_rng(seed)
        # per-channel mean/std/skew-proxy/max (12) + 8x8 luma grid (64) + bias
        self._n_features = 12 + _GRID * _GRID + 1
        self._projection = rng.standard_normal((dim, self._n_features))

    def _features(self, image: Image.Image) -> np.ndarray:
        rgb = np.asarray(
            image.convert("RGB").resize((_SIDE, _SIDE), Image.BILINEAR),
            dtype=np.float64,
        ) / 255.0
        stats = []
        for c in range(3):
            chan = rgb[:, :, c]
            mu = chan.mean()
            stats.extend([mu, chan.std(), ((chan - mu) ** 3).mean(), chan.max()])
        luma = rgb.mean(axis=2)
        step = _SIDE // _GRID
        grid = luma.reshape(_GRID, step, _GRID, step).mean(axis=(1, 3))
        return np.concatenate([stats, grid.ravel(), [1.0]])

    def encode_batch(self, images: list[Image.Image]) -> np.ndarray:
        feats = np.stack([self._features(img) for img in images])
        return (feats @ self._projection.T).astype(np.float32)


class TransformersEncoder:
    """Pooled-output embeddings from a transformers vision checkpoint."""

    def __init__(self, model_id: str):
        try:
            import torch
            from transformers import AutoImageProcessor, AutoModel
        except ImportError as exc:
            raise EmbedError(
                f"model {model_id!r} needs torch + transformers installed"
            ) from exc
        try:
            self._processor = AutoImageProcessor.from_pretrained(model_id)
            self._model = AutoModel.from_pretrained(model_id).eval()
        except Exception as exc:
            raise EmbedError(f"cannot load model {model_id!r}: {exc}") from exc
        self._torch = torch
        self.model_id = model_id
        self.dim = int(self._model.config.hidden_size)

    def encode_batch(self, images: list[Image.Image]) -> np.ndarray:
        inputs = self._processor(
            [img.convert("RGB") for img in images], return_tensors="pt"
        )
        with self._torch.no_grad():
            out = self._model(**inputs)
        pooled = out.pooler_output if out.pooler_output is not None else (
            out.last_hidden_state[:, 0]
        )
        return pooled.cpu().numpy().astype(np.float32)


def build_encoder(model_id: str):
    if model_id.startswith("moment:"):
        raw = model_id.split(":", 1)[1]
        try:
            dim = int(raw)
        except ValueError:
            raise EmbedError(f"moment encoder dim must be an integer, got {raw!r}")
        return MomentProjectionEncoder(model_id, dim)
    return TransformersEncoder(model_id)
