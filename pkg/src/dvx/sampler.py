"""Greedy diversity-constrained subset sampling.

A sample of size k starts from a fixed root image and grows greedily: each
iteration scores every remaining pool candidate i by

    delta_i = relevance_weight * r_i + diversity_weight * div_i

where div_i is the log-det of the Gram restriction to the current selection
plus i, and picks the argmax among candidates whose div_i stays below a
per-step threshold. The threshold is an empirical quantile of the pairwise
diversities against the root, so a decaying quantile schedule walks the
samples from spread-out overviews to tight look-alike grids.

The candidate Schur complements are maintained incrementally (one
cross-column per selected element), so an iteration costs O(|pool| * (d + k))
instead of refactoring from scratch per candidate. Ties always break toward
the lowest index, which makes results replayable byte-for-byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .errors import DvxError
from .kernel import DET_FLOOR, NEG_INFINITY_FLOOR, CholeskyState, _schur_gain, extend

__all__ = [
    "SamplerWeights",
    "DiversitySchedule",
    "SampleResult",
    "make_schedule",
    "compute_threshold",
    "greedy_sample",
    "rerank_similar",
    "diversify_full_ranking",
    "relevance_ranking",
]

TUNED_EXPONENTIAL_QUANTILES = (1.0, 7e-2, 5e-3, 3e-4)
DEFAULT_GRID_SIZE = 16


@dataclass(frozen=True)
class SamplerWeights:
    """Non-negative relevance/diversity mixing weights (not both zero)."""

    relevance: float = 12.0
    diversity: float = 1.0

    def __post_init__(self):
        if self.relevance < 0 or self.diversity < 0:
            raise ValueError("weights must be non-negative")
        if self.relevance == 0 and self.diversity == 0:
            raise ValueError("weights must not both be zero")


@dataclass(frozen=True)
class DiversitySchedule:
    """Strictly decreasing per-step quantiles q_1..q_E with q_1 = 1."""

    quantiles: tuple[float, ...]

    def __post_init__(self):
        q = tuple(float(x) for x in self.quantiles)
        if len(q) < 1:
            raise DvxError("BAD_STEPS", "schedule needs at least one step")
        if q[0] != 1.0:
            raise ValueError(f"first quantile must be 1, got {q[0]}")
        for a, b in zip(q, q[1:]):
            if not b < a:
                raise ValueError(f"quantiles must strictly decrease, got {q}")
        if any(not 0.0 < x <= 1.0 for x in q):
            raise ValueError(f"quantiles must lie in (0, 1], got {q}")
        object.__setattr__(self, "quantiles", q)

    @property
    def steps(self) -> int:
        return len(self.quantiles)


def make_schedule(kind: str, steps: int) -> DiversitySchedule:
    """Build a decay schedule of ``steps`` quantiles.

    ``linear`` walks from 1 down to 0.1 in even decrements (computed as
    exact rationals so the 10-step schedule is 1.0, 0.9, ..., 0.1).
    ``exponential`` returns the tuned 4-step sequence (1, 7e-2, 5e-3, 3e-4)
    and interpolates geometrically between 1 and 3e-4 for other lengths.
    """
    if steps < 1:
        raise DvxError("BAD_STEPS", f"steps must be >= 1, got {steps}")
    if kind == "linear":
        if steps == 1:
            return DiversitySchedule((1.0,))
        denom = (steps - 1) * 10
        qs = tuple(((steps - 1) * 10 - (e - 1) * 9) / denom for e in range(1, steps + 1))
        return DiversitySchedule(qs)
    if kind == "exponential":
        if steps == 1:
            return DiversitySchedule((1.0,))
        if steps == 4:
            return DiversitySchedule(TUNED_EXPONENTIAL_QUANTILES)
        last = TUNED_EXPONENTIAL_QUANTILES[-1]
        qs = tuple(last ** ((e - 1) / (steps - 1)) for e in range(1, steps + 1))
        return DiversitySchedule(qs)
    raise ValueError(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class SampleResult:
    """Outcome of one greedy sample.

    ``subset`` is the selection order (root first); ``display_order`` is the
    same set reordered so similar images sit next to each other.
    """

    subset: tuple[int, ...]
    display_order: tuple[int, ...]
    subset_logdet: float
    threshold_used: float
    pool_size: int
    rank_exhausted: bool = False

    def to_json(self) -> dict:
        return {
            "subset": list(self.subset),
            "display_order": list(self.display_order),
            "subset_logdet": self.subset_logdet,
            "threshold_used": self.threshold_used,
            "pool_size": self.pool_size,
            "rank_exhausted": self.rank_exhausted,
        }


def _pairwise_divs(corpus: Corpus, root: int, candidates: np.ndarray) -> np.ndarray:
    rows = corpus.embeddings.rows
    c2 = np.square(rows[candidates] @ rows[root])
    divs = np.full(candidates.shape[0], NEG_INFINITY_FLOOR)
    ok = 1.0 - c2 >= DET_FLOOR
    divs[ok] = np.log1p(-c2[ok])
    return divs


def compute_threshold(
    corpus: Corpus,
    root: int,
    candidates: list[int] | tuple[int, ...],
    q: float,
    k_min: int = DEFAULT_GRID_SIZE,
) -> tuple[float, list[int]]:
    """Per-step diversity threshold and admissible pool.

    Computes div_i = pairwise diversity of every candidate against the root,
    sets the threshold at the empirical q-quantile (linear interpolation
    between order statistics; q=1 is the maximum, q->0 the minimum), and
    returns the candidates strictly below it. If fewer than ``k_min``
    survive, the pool is padded with the remaining candidates in increasing
    diversity order (most similar to the root first) so a full grid can
    always be drawn.
    """
    if len(candidates) == 0:
        raise DvxError("EMPTY_CANDIDATES", "threshold needs at least one candidate")
    if not 0.0 < q <= 1.0:
        raise ValueError(f"quantile must lie in (0, 1], got {q}")
    cand = np.asarray(candidates, dtype=np.intp)
    if np.any(cand == root):
        raise ValueError("root must not appear among candidates")
    divs = _pairwise_divs(corpus, root, cand)
    threshold = float(np.quantile(divs, q))
    below = divs < threshold
    pool = [int(i) for i in cand[below]]
    if len(pool) < k_min:
        rest_idx = np.flatnonzero(~below)
        order = np.lexsort((cand[rest_idx], divs[rest_idx]))
        for pos in order[: k_min - len(pool)]:
            pool.append(int(cand[rest_idx[pos]]))
    return threshold, pool


def _greedy_select(
    corpus: Corpus,
    root: int,
    k: int,
    weights: SamplerWeights,
    threshold: float,
    pool: np.ndarray,
) -> tuple[list[int], float, bool]:
    """Shared greedy loop: selection order, final log-det, rank flag."""
    rows = corpus.embeddings.rows
    rel = corpus.relevance.scores
    pool_rows = rows[pool]
    diag = np.einsum("ij,ij->i", pool_rows, pool_rows)

    gain0, prev_diag = _schur_gain(float(rows[root] @ rows[root]))
    logdet = gain0
    selected = [int(root)]
    rank_exhausted = False

    n_pool = pool.shape[0]
    cross = np.zeros((k - 1, n_pool)) if k > 1 else np.zeros((0, n_pool))
    di2 = diag.copy()
    alive = np.ones(n_pool, dtype=bool)
    prev_vec = rows[root]
    prev_cross = np.zeros(0)

    for t in range(k - 1):
        # Fold the newly selected element into every candidate's factor column.
        e = (pool_rows @ prev_vec - prev_cross @ cross[:t]) / prev_diag
        cross[t] = e
        di2 -= np.square(e)

        floored = di2 < DET_FLOOR
        with np.errstate(invalid="ignore"):
            gains = np.where(
                floored,
                NEG_INFINITY_FLOOR,
                np.minimum(0.0, np.log(np.maximum(di2, DET_FLOOR))),
            )
        if bool(np.all(floored[alive])):
            rank_exhausted = True
        div = logdet + gains
        delta = weights.relevance * rel[pool] + weights.diversity * div

        eligible = alive & (div < threshold)
        if eligible.any():
            pick = int(np.argmax(np.where(eligible, delta, -np.inf)))
        else:
            pick = int(np.argmin(np.where(alive, div, np.inf)))

        selected.append(int(pool[pick]))
        logdet += float(gains[pick])
        alive[pick] = False
        prev_vec = rows[pool[pick]]
        prev_cross = cross[: t + 1, pick].copy()
        schur = float(di2[pick])
        prev_diag = math.sqrt(DET_FLOOR) if schur < DET_FLOOR else math.sqrt(schur)

    return selected, logdet, rank_exhausted


def greedy_sample(
    corpus: Corpus,
    candidates: list[int] | tuple[int, ...],
    root: int,
    k: int,
    weights: SamplerWeights,
    threshold: float = math.inf,
    pool: list[int] | tuple[int, ...] | None = None,
) -> SampleResult:
    """Greedily grow a k-subset from ``root`` under a diversity threshold.

    Candidates outside ``pool`` (default: all of ``candidates``) are never
    considered. When no pool member passes the threshold at an iteration,
    the one with minimum joint log-det is taken instead, so a full grid is
    always produced. ``rank_exhausted`` is flagged when every remaining
    marginal sits at the sentinel (the selection has spanned all usable
    rank; remaining slots no longer discriminate by diversity).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 0 <= root < corpus.n:
        raise DvxError("INDEX_OUT_OF_RANGE", f"root {root} not in [0, {corpus.n})")
    if pool is None:
        pool = candidates
    if root in set(pool):
        raise ValueError("root must not appear in the pool")
    pool_arr = np.unique(np.asarray(pool, dtype=np.intp))
    if k - 1 > pool_arr.shape[0]:
        raise DvxError(
            "POOL_TOO_SMALL",
            f"need {k - 1} picks from a pool of {pool_arr.shape[0]}",
        )

    selected, logdet, rank_exhausted = _greedy_select(
        corpus, root, k, weights, threshold, pool_arr
    )
    display = rerank_similar(corpus, selected)
    return SampleResult(
        subset=tuple(selected),
        display_order=tuple(display),
        subset_logdet=logdet,
        threshold_used=threshold,
        pool_size=int(pool_arr.shape[0]),
        rank_exhausted=rank_exhausted,
    )


def rerank_similar(corpus: Corpus, subset: list[int] | tuple[int, ...]) -> list[int]:
    """Reorder a sampled subset so similar images end up adjacent.

    Greedy minimization: starting from the first element, repeatedly place
    the remaining element with the smallest marginal log-det gain against
    the already-placed prefix (ties to the lowest index).
    """
    subset = list(subset)
    if not subset:
        raise ValueError("subset must be non-empty")
    if len(set(subset)) != len(subset):
        raise DvxError("DUPLICATE_INDEX", f"subset has repeated indices: {subset}")
    state = CholeskyState(corpus)
    state, _ = extend(state, subset[0])
    placed = [subset[0]]
    remaining = sorted(subset[1:])
    while remaining:
        best_pos = 0
        best_gain = math.inf
        best_state = None
        for pos, i in enumerate(remaining):
            cand_state, gain = extend(state, i)
            if gain < best_gain:
                best_pos, best_gain, best_state = pos, gain, cand_state
        state = best_state
        placed.append(remaining.pop(best_pos))
    return placed


def relevance_ranking(corpus: Corpus) -> tuple[int, ...]:
    """All images sorted by descending relevance, ties by ascending index."""
    if corpus.n == 0:
        raise DvxError("CORPUS_EMPTY", "corpus has no images")
    order = np.argsort(-corpus.relevance.scores, kind="stable")
    return tuple(int(i) for i in order)


def diversify_full_ranking(
    corpus: Corpus, weights: SamplerWeights
) -> tuple[int, ...]:
    """Full diversity-and-relevance ordering of the corpus.

    Runs the greedy sampler over every image with no threshold, rooted at
    the most relevant one; once the selection spans the embedding dimension
    the remaining marginals all sit at the sentinel and the tail falls back
    to relevance order.
    """
    if corpus.n == 0:
        raise DvxError("CORPUS_EMPTY", "corpus has no images")
    root = int(np.argmax(corpus.relevance.scores))
    pool = np.asarray([i for i in range(corpus.n) if i != root], dtype=np.intp)
    selected, _, _ = _greedy_select(corpus, root, corpus.n, weights, math.inf, pool)
    return tuple(selected)
