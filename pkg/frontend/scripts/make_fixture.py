#!/usr/bin/env python3
"""Write synthetic corpora for the frontend integration tests.

Usage: make_fixture.py OUT_DIR

Creates OUT_DIR/demo (8 soft blobs, 64-dim, for stepwise sessions) and
OUT_DIR/blobs4 (4 well-separated blobs whose hierarchy root has exactly
4 children, for the variable fan-out check).
"""

import json
import sys
from pathlib import Path

import numpy as np

from dvx.clustering import build_hierarchy
from dvx.corpus import Corpus, ImageRecord, RelevanceVector, compute_relevance, normalize_rows
from dvx.formats import write_embeddings, write_relevance


def _corpus(points, query):
    emb = normalize_rows(points)
    records = tuple(
        ImageRecord(i, f"img-{i}", f"http://images.test/{i}.jpg") for i in range(emb.n)
    )
    return Corpus(records, emb, compute_relevance(emb, query / np.linalg.norm(query)))


def _write(corpus, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(
        json.dumps(
            [{"id": r.external_id, "uri": r.uri, "tags": list(r.tags)} for r in corpus.records]
        )
    )
    write_embeddings(out / "emb.dvxe", corpus.embeddings.rows)
    write_relevance(out / "rel.dvxr", corpus.relevance.scores)


def main(out_dir: str) -> None:
    out = Path(out_dir)

    rng = np.random.default_rng(12)
    centers = rng.normal(size=(8, 64))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    assign = rng.integers(0, 8, size=300)
    demo = _corpus(centers[assign] + 0.15 * rng.normal(size=(300, 64)), rng.normal(size=64))
    _write(demo, out / "demo")

    rng = np.random.default_rng(4)
    centers = rng.normal(size=(4, 32))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    assign = np.repeat(np.arange(4), 60)
    blobs4 = _corpus(centers[assign] + 0.08 * rng.normal(size=(240, 32)), rng.normal(size=32))
    fan_out = len(build_hierarchy(blobs4).children)
    assert fan_out == 4, f"fixture expects a 4-way root split, got {fan_out}"
    _write(blobs4, out / "blobs4")
    print(json.dumps({"demo": 300, "blobs4": 240, "blobs4_fan_out": fan_out}))


if __name__ == "__main__":
    main(sys.argv[1])
