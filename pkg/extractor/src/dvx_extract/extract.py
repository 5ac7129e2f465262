"""Batch extraction: image directory + query -> manifest, DVXE, DVXR."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .encoders import DEFAULT_CHECKPOINT, EncoderError, load_encoder
from .formats import write_embeddings, write_relevance

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp"}


class ExtractError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True)
class ExtractJob:
    image_dir: Path
    query: str
    out_dir: Path
    checkpoint: str = DEFAULT_CHECKPOINT


def _list_images(image_dir: Path) -> list[Path]:
    return sorted(
        p for p in image_dir.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )


def extract(job: ExtractJob) -> dict:
    """Encode every decodable image (filename order defines ids) and the
    query, then write manifest.json, embeddings.dvxe, and relevance.dvxr.

    Undecodable images are skipped with a warning and excluded from all
    three outputs consistently.
    """
    paths = _list_images(Path(job.image_dir))
    if not paths:
        raise ExtractError("NO_IMAGES", f"no decodable images under {job.image_dir}")
    try:
        encoder = load_encoder(job.checkpoint)
    except EncoderError as exc:
        raise ExtractError(exc.code, exc.message)

    rows, kept = [], []
    for path in paths:
        try:
            with Image.open(path) as img:
                rows.append(encoder.encode_image(img))
        except Exception as exc:
            warnings.warn(f"skipping {path.name}: {exc}")
            continue
        kept.append(path)
    if not rows:
        raise ExtractError("NO_IMAGES", f"no decodable images under {job.image_dir}")

    matrix = np.vstack(rows)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    matrix = matrix / norms
    query_vec = encoder.encode_text(job.query)
    scores = np.clip(matrix @ query_vec, -1.0, 1.0)

    out = Path(job.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = [
        {"id": path.stem, "uri": str(path.resolve()), "tags": []} for path in kept
    ]
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    write_embeddings(out / "embeddings.dvxe", matrix)
    write_relevance(out / "relevance.dvxr", scores)
    return {"n": len(kept), "d": matrix.shape[1], "skipped": len(paths) - len(kept)}
