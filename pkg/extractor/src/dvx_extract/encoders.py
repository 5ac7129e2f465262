"""Image/text encoders behind one small interface.

Two backends:

* a vision-language transformer checkpoint (the default,
  ``openai/clip-vit-base-patch32``), loaded lazily through the
  ``transformers`` library;
* ``pixelstat-<d>`` - a dependency-free luminance-grid encoder for
  offline runs and tests (d must be a perfect square). Text queries map
  to a deterministic unit vector derived from the query's SHA-256.

Both are deterministic: identical inputs yield identical vectors.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np
from PIL import Image

DEFAULT_CHECKPOINT = "openai/clip-vit-base-patch32"


class EncoderError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class PixelStatEncoder:
    """Luminance grid features: resize to sqrt(d) x sqrt(d) grayscale.

    A constant offset keeps solid-color images away from the zero vector.
    """

    def __init__(self, dim: int):
        side = int(math.isqrt(dim))
        if side * side != dim:
            raise EncoderError("ENCODER_LOAD_FAILURE", f"pixelstat dim {dim} is not a square")
        self.dim = dim
        self.side = side

    def encode_image(self, image: Image.Image) -> np.ndarray:
        gray = image.convert("L").resize((self.side, self.side), Image.BILINEAR)
        feat = np.asarray(gray, dtype=np.float64).reshape(-1) / 255.0 + 0.1
        return feat

    def encode_text(self, text: str) -> np.ndarray:
        seed = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")
        vec = np.random.default_rng(seed).normal(size=self.dim)
        return vec / np.linalg.norm(vec)


class ClipEncoder:
    """Vision-language checkpoint via the transformers library."""

    def __init__(self, checkpoint: str):
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except Exception as exc:  # transformers/torch not installed
            raise EncoderError("ENCODER_LOAD_FAILURE", f"cannot import encoder deps: {exc}")
        try:
            self._torch = torch
            self.model = CLIPModel.from_pretrained(checkpoint)
            self.processor = CLIPProcessor.from_pretrained(checkpoint)
            self.model.eval()
        except Exception as exc:
            raise EncoderError("ENCODER_LOAD_FAILURE", f"cannot load {checkpoint!r}: {exc}")

    def encode_image(self, image: Image.Image) -> np.ndarray:
        inputs = self.processor(images=image.convert("RGB"), return_tensors="pt")
        with self._torch.no_grad():
            feat = self.model.get_image_features(**inputs)
        return feat[0].numpy().astype(np.float64)

    def encode_text(self, text: str) -> np.ndarray:
        inputs = self.processor(text=[text], return_tensors="pt", padding=True)
        with self._torch.no_grad():
            feat = self.model.get_text_features(**inputs)
        vec = feat[0].numpy().astype(np.float64)
        return vec / np.linalg.norm(vec)


def load_encoder(checkpoint: str):
    if checkpoint.startswith("pixelstat-"):
        return PixelStatEncoder(int(checkpoint.split("-", 1)[1]))
    return ClipEncoder(checkpoint)
