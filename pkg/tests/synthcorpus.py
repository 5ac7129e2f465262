"""Synthetic corpus generators shared across the test suite."""

from __future__ import annotations

import numpy as np

from dvx.corpus import Corpus, ImageRecord, RelevanceVector, compute_relevance, normalize_rows


def _records(n: int) -> tuple[ImageRecord, ...]:
    return tuple(ImageRecord(i, f"img-{i}", f"http://images.test/{i}.jpg") for i in range(n))


def corpus_from_arrays(matrix: np.ndarray, scores: np.ndarray | None = None) -> Corpus:
    emb = normalize_rows(np.asarray(matrix, dtype=np.float64))
    if scores is None:
        scores = np.zeros(emb.n)
    return Corpus(_records(emb.n), emb, RelevanceVector(np.asarray(scores, dtype=np.float64)))


def angles_corpus(degrees, scores=None) -> Corpus:
    """2-D corpus of unit vectors at the given angles (degrees)."""
    rad = np.radians(np.asarray(degrees, dtype=np.float64))
    return corpus_from_arrays(np.stack([np.cos(rad), np.sin(rad)], axis=1), scores)


def blob_corpus(n=600, d=64, blobs=8, seed=0, spread=0.15) -> Corpus:
    """Isotropic Gaussian blobs with cosine relevance to a random query."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(blobs, d))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    assign = rng.integers(0, blobs, size=n)
    pts = centers[assign] + spread * rng.normal(size=(n, d))
    emb = normalize_rows(pts)
    query = rng.normal(size=d)
    query /= np.linalg.norm(query)
    return Corpus(_records(n), emb, compute_relevance(emb, query))


def nested_blob_corpus(n=600, d=64, seed=0, levels=6):
    """8 Gaussian blobs forming a multi-scale refinement chain.

    One loose background blob, one 'lobby' blob, and a chain of
    progressively tighter blobs strung from the lobby, each a short hop
    from the previous one. Relevance is highest for the two lobby points
    nearest the chain and ascends along the chain, so stepwise refinement
    walks into ever denser regions - the regime the decaying quantile
    schedule is built for. The chain is longer than any 4-step walk can
    consume, so no step ever sits at the terminal scale.

    Returns (corpus, labels) where labels[i] names the blob of image i.
    """
    rng = np.random.default_rng(seed)
    sigma_lobby = 0.05
    sigma_chain = tuple(0.012 * (1 / 3) ** i for i in range(levels))

    c_lobby = rng.normal(size=d)
    c_lobby /= np.linalg.norm(c_lobby)
    direction = rng.normal(size=d)
    direction -= (direction @ c_lobby) * c_lobby
    direction /= np.linalg.norm(direction)

    chain_centers = []
    cur = c_lobby.copy()
    for gap in [0.35] + [24.0 * s for s in sigma_chain[1:]]:
        cur = cur + gap * direction
        cur = cur / np.linalg.norm(cur)
        chain_centers.append(cur.copy())

    n_lobby, n_chain = 75, 12
    n_bg = n - n_lobby - levels * n_chain
    parts, labels, scores = [], [], []

    c_bg = rng.normal(size=d)
    c_bg /= np.linalg.norm(c_bg)
    parts.append(c_bg + 0.2 * rng.normal(size=(n_bg, d)))
    labels += ["bg"] * n_bg
    scores.append(0.05 + 0.01 * rng.standard_normal(n_bg))

    lobby_pts = c_lobby + sigma_lobby * rng.normal(size=(n_lobby, d))
    parts.append(lobby_pts)
    labels += ["lobby"] * n_lobby
    lobby_scores = 0.28 + 0.008 * rng.standard_normal(n_lobby)
    # the two lobby points nearest the chain carry the top scores
    front = np.argsort(np.linalg.norm(lobby_pts - chain_centers[0], axis=1))[:2]
    lobby_scores[front[0]] = 0.90
    lobby_scores[front[1]] = 0.89
    scores.append(lobby_scores)

    for level, (c, sig) in enumerate(zip(chain_centers, sigma_chain)):
        parts.append(c + sig * rng.normal(size=(n_chain, d)))
        labels += [f"chain{level}"] * n_chain
        scores.append(0.34 + 0.03 * level + 0.008 * rng.standard_normal(n_chain))

    matrix = np.vstack(parts)
    rel = np.clip(np.concatenate(scores), -1.0, 1.0)
    perm = rng.permutation(n)
    corpus = corpus_from_arrays(matrix[perm], rel[perm])
    labels = [labels[i] for i in perm]
    return corpus, labels


def separated_blob_corpus(n=600, d=64, blobs=4, seed=0, spread=0.08):
    """Well-separated equal blobs for clustering tests.

    Returns (corpus, true_labels).
    """
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(blobs, d))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    assign = np.repeat(np.arange(blobs), n // blobs)
    assign = np.concatenate([assign, rng.integers(0, blobs, size=n - assign.size)])
    pts = centers[assign] + spread * rng.normal(size=(n, d))
    emb = normalize_rows(pts)
    query = rng.normal(size=d)
    query /= np.linalg.norm(query)
    return Corpus(_records(n), emb, compute_relevance(emb, query)), assign
