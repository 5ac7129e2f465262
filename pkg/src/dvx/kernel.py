"""Similarity kernel and log-determinant machinery.

The kernel over unit-norm rows is the Gram matrix L_ij = <v_i, v_j>; the
log-determinant of a restriction L_S measures how well-spread the subset S
is (0 for orthonormal sets, sinking toward -inf as members align). Entries
are computed on demand from the embeddings; the full N x N matrix is never
materialized.

Rank-deficient restrictions are handled with a sentinel: any Schur
complement (equivalently, determinant) below ``DET_FLOOR`` maps to
``NEG_INFINITY_FLOOR``, which keeps the arithmetic total and makes such
candidates lose every argmax while winning every argmin deterministically.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_triangular

from .corpus import Corpus
from .errors import DvxError

NEG_INFINITY_FLOOR = -1e9
DET_FLOOR = 1e-12
_LOG_DET_FLOOR = math.log(DET_FLOOR)


def _check_index(corpus: Corpus, i: int) -> None:
    if not 0 <= i < corpus.n:
        raise DvxError("INDEX_OUT_OF_RANGE", f"index {i} not in [0, {corpus.n})")


def kernel_entry(corpus: Corpus, i: int, j: int) -> float:
    """Kernel value <v_i, v_j>; symmetric, unit diagonal."""
    _check_index(corpus, i)
    _check_index(corpus, j)
    rows = corpus.embeddings.rows
    return float(rows[i] @ rows[j])


def logdet_subset(corpus: Corpus, subset: list[int] | tuple[int, ...]) -> float:
    """Log-determinant of the Gram restriction to ``subset``, by direct
    factorization.

    This is the naive oracle: O(|S|^2 d + |S|^3), no incremental state.
    Returns ``NEG_INFINITY_FLOOR`` when the determinant is at or below
    ``DET_FLOOR``. The empty subset has log-det 0 (det of nothing is 1).
    """
    subset = list(subset)
    if len(set(subset)) != len(subset):
        raise DvxError("DUPLICATE_INDEX", f"subset has repeated indices: {subset}")
    for i in subset:
        _check_index(corpus, i)
    if not subset:
        return 0.0
    rows = corpus.embeddings.rows[subset]
    gram = rows @ rows.T
    sign, logdet = np.linalg.slogdet(gram)
    if sign <= 0 or logdet <= _LOG_DET_FLOOR:
        return NEG_INFINITY_FLOOR
    return float(logdet)


def pairwise_div(corpus: Corpus, root: int, i: int) -> float:
    """Diversity of the pair {root, i}: ln(1 - <v_root, v_i>^2).

    Matches ``logdet_subset(corpus, [root, i])`` up to factorization noise;
    identical (or antipodal) vectors hit the sentinel.
    """
    if i == root:
        raise DvxError("SELF_PAIR", f"pairwise diversity needs two distinct indices, got {i}")
    c = kernel_entry(corpus, root, i)
    s = 1.0 - c * c
    if s < DET_FLOOR:
        return NEG_INFINITY_FLOOR
    return math.log1p(-c * c)


def _schur_gain(schur: float) -> tuple[float, float]:
    """Map a Schur complement to (marginal log-det gain, new factor diagonal).

    Gains are clamped to be non-positive so an extension never raises the
    log-det; complements below the floor return the sentinel gain and a
    floor-level diagonal that keeps later triangular solves finite.
    """
    if schur < DET_FLOOR:
        return NEG_INFINITY_FLOOR, math.sqrt(DET_FLOOR)
    return min(0.0, math.log(schur)), math.sqrt(schur)


class CholeskyState:
    """Incrementally factored Gram restriction for a growing selection.

    Holds the ordered selection S, the lower-triangular Cholesky factor of
    L_S, and the running log-det (sum of 2*log of the factor diagonal).
    Values are immutable; :func:`extend` returns a new state.
    """

    __slots__ = ("corpus", "selected", "logdet", "_factor")

    def __init__(self, corpus: Corpus):
        self.corpus = corpus
        self.selected: tuple[int, ...] = ()
        self.logdet: float = 0.0
        self._factor = np.zeros((0, 0))

    @classmethod
    def _advance(
        cls, prev: "CholeskyState", i: int, factor: np.ndarray, logdet: float
    ) -> "CholeskyState":
        state = cls.__new__(cls)
        state.corpus = prev.corpus
        state.selected = prev.selected + (i,)
        state.logdet = logdet
        state._factor = factor
        return state

    def __len__(self) -> int:
        return len(self.selected)


def extend(state: CholeskyState, i: int) -> tuple[CholeskyState, float]:
    """Append element ``i`` to the selection, returning the new state and
    the marginal log-det gain (log of the Schur complement of L_S w.r.t. i).
    """
    _check_index(state.corpus, i)
    if i in state.selected:
        raise DvxError("ALREADY_SELECTED", f"index {i} already in selection {state.selected}")
    rows = state.corpus.embeddings.rows
    m = len(state.selected)
    l_ii = float(rows[i] @ rows[i])
    if m == 0:
        y = np.zeros(0)
        schur = l_ii
    else:
        b = rows[list(state.selected)] @ rows[i]
        y = solve_triangular(state._factor, b, lower=True, check_finite=False)
        schur = l_ii - float(y @ y)
    gain, diag = _schur_gain(schur)

    factor = np.zeros((m + 1, m + 1))
    factor[:m, :m] = state._factor
    factor[m, :m] = y
    factor[m, m] = diag
    return CholeskyState._advance(state, i, factor, state.logdet + gain), gain
