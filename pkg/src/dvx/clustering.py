"""Adaptive agglomerative hierarchy (the stepwise-similarity baseline).

Each node is split with Ward/Euclidean linkage; the number of clusters is
chosen per node by a composite quality score (cosine silhouette, weighted
Calinski-Harabasz, a root-level bonus for extra clusters, and a fan-out
penalty). Splits whose silhouette falls under the gate stay leaves, except
at the root where one split is mandatory. Representatives are the most
relevant member of each cluster.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage
from sklearn.metrics import calinski_harabasz_score, silhouette_score

from .corpus import Corpus, RelevanceVector
from .errors import DvxError

__all__ = [
    "ClusterParams",
    "SplitQuality",
    "ClusterNode",
    "build_hierarchy",
    "score_split",
    "pick_representative",
    "grid_for_node",
]


@dataclass(frozen=True)
class ClusterParams:
    max_depth: int = 5
    min_cluster_size: int = 5
    max_cluster_size: int = 50
    min_subcluster_size: int = 40
    min_silhouette: float = 0.1
    root_min_k: int = 3
    root_max_k: int = 16
    nonroot_min_k: int = 2
    nonroot_max_k: int = 10
    root_cluster_bonus: float = 0.02
    root_penalty: float = 0.02
    nonroot_penalty: float = 0.1
    ch_divisor: float = 1000.0
    random_state: int = 42

    def __post_init__(self):
        if self.root_min_k > self.root_max_k or self.nonroot_min_k > self.nonroot_max_k:
            raise ValueError("cluster count bounds out of order")
        if min(self.max_depth, self.min_cluster_size, self.min_subcluster_size) < 1:
            raise ValueError("counts must be positive")

    @property
    def root_effective_min_size(self) -> int:
        return max(3, self.min_cluster_size // 2)


@dataclass(frozen=True)
class SplitQuality:
    silhouette: float
    calinski_harabasz: float
    composite: float
    k: int


@dataclass(frozen=True)
class ClusterNode:
    members: tuple[int, ...]
    representative: int
    children: tuple["ClusterNode", ...]
    depth: int
    quality: SplitQuality | None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def to_dict(self) -> dict:
        return {
            "members": list(self.members),
            "representative": self.representative,
            "depth": self.depth,
            "quality": None
            if self.quality is None
            else {
                "silhouette": self.quality.silhouette,
                "calinski_harabasz": self.quality.calinski_harabasz,
                "composite": self.quality.composite,
                "k": self.quality.k,
            },
            "children": [child.to_dict() for child in self.children],
        }


def pick_representative(members: list[int] | tuple[int, ...], relevance: RelevanceVector) -> int:
    """Most relevant member; ties resolve to the lowest index."""
    if not members:
        raise ValueError("members must be non-empty")
    scores = relevance.scores
    return min(members, key=lambda m: (-scores[m], m))


def _split_metrics(
    labels: np.ndarray, rows: np.ndarray, is_root: bool, params: ClusterParams
) -> tuple[float, float, float]:
    uniq = np.unique(labels)
    k = uniq.size
    if k < 2:
        raise DvxError("SINGLETON_PARTITION", "a split needs at least two clusters")
    with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
        warnings.simplefilter("ignore")
        sil = float(silhouette_score(rows, labels, metric="cosine"))
        ch = float(calinski_harabasz_score(rows, labels))
    if is_root:
        bonus = params.root_cluster_bonus * (k - params.root_min_k)
        penalty = params.root_penalty * (k / params.root_max_k)
    else:
        bonus = 0.0
        penalty = params.nonroot_penalty * (k / params.nonroot_max_k)
    composite = sil + ch / params.ch_divisor + bonus - penalty
    return sil, ch, composite


def score_split(
    labels: np.ndarray | list[int],
    embeddings: np.ndarray,
    is_root: bool,
    params: ClusterParams,
) -> float:
    """Composite quality of one candidate partition (higher is better)."""
    labels = np.asarray(labels)
    rows = np.asarray(embeddings, dtype=np.float64)
    _, _, composite = _split_metrics(labels, rows, is_root, params)
    return composite


def _merge_undersized_root(labels: np.ndarray, rows: np.ndarray, params: ClusterParams) -> np.ndarray:
    """Fold root clusters below the effective minimum into their nearest
    sibling (by centroid distance), never dropping below root_min_k clusters."""
    labels = labels.copy()
    min_size = params.root_effective_min_size
    while True:
        uniq, counts = np.unique(labels, return_counts=True)
        if uniq.size <= params.root_min_k:
            break
        small = uniq[counts < min_size]
        if small.size == 0:
            break
        victim = small[np.argmin(counts[np.isin(uniq, small)])]
        centroids = {u: rows[labels == u].mean(axis=0) for u in uniq}
        others = [u for u in uniq if u != victim]
        target = min(
            others,
            key=lambda u: (float(np.linalg.norm(centroids[victim] - centroids[u])), u),
        )
        labels[labels == victim] = target
    return labels


def _choose_split(
    rows: np.ndarray, is_root: bool, params: ClusterParams
) -> tuple[np.ndarray, SplitQuality] | None:
    """Best gated partition of ``rows``, or None when nothing passes."""
    n = rows.shape[0]
    k_min = params.root_min_k if is_root else params.nonroot_min_k
    k_max = min(params.root_max_k if is_root else params.nonroot_max_k, n)
    if k_max < k_min:
        return None
    link = linkage(rows, method="ward")
    ks = list(range(k_min, k_max + 1))
    cuts = cut_tree(link, n_clusters=ks)
    best: tuple[np.ndarray, SplitQuality] | None = None
    for col, k in enumerate(ks):
        labels = cuts[:, col]
        _, counts = np.unique(labels, return_counts=True)
        if counts.min() < 2:
            continue  # singleton clusters fail the silhouette gate outright
        sil, ch, composite = _split_metrics(labels, rows, is_root, params)
        if not np.isfinite(sil) or sil < params.min_silhouette:
            continue
        if best is None or composite > best[1].composite:
            best = (labels, SplitQuality(sil, ch, composite, k))
    return best


def _build_node(
    corpus: Corpus, members: np.ndarray, depth: int, params: ClusterParams
) -> ClusterNode:
    rows = corpus.embeddings.rows[members]
    is_root = depth == 0
    rep = pick_representative([int(m) for m in members], corpus.relevance)

    may_split = is_root or (
        members.size >= max(params.min_subcluster_size, 2 * params.min_cluster_size)
        and depth < params.max_depth
    )
    chosen = _choose_split(rows, is_root, params) if may_split else None
    if chosen is None and is_root:
        # The first split is mandatory even on degenerate geometry.
        link = linkage(rows, method="ward")
        labels = cut_tree(link, n_clusters=min(params.root_min_k, members.size)).ravel()
        chosen = (labels, None)
    if chosen is None:
        return ClusterNode(tuple(int(m) for m in members), rep, (), depth, None)

    labels, quality = chosen
    if is_root:
        labels = _merge_undersized_root(labels, rows, params)

    groups: dict[int, list[int]] = {}
    for pos, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(int(members[pos]))
    ordered = sorted(groups.values(), key=min)
    children = tuple(
        _build_node(corpus, np.asarray(group, dtype=np.intp), depth + 1, params)
        for group in ordered
    )
    return ClusterNode(tuple(int(m) for m in members), rep, children, depth, quality)


def build_hierarchy(corpus: Corpus, params: ClusterParams | None = None) -> ClusterNode:
    """Cluster the whole corpus into a navigable tree.

    The root split always happens (forced at the minimum fan-out when no
    candidate passes the quality gate); children recurse while they hold at
    least ``min_subcluster_size`` members and the depth budget lasts.
    """
    params = params or ClusterParams()
    if corpus.n < params.root_min_k:
        raise DvxError(
            "TOO_FEW_IMAGES", f"need at least {params.root_min_k} images, got {corpus.n}"
        )
    return _build_node(corpus, np.arange(corpus.n, dtype=np.intp), 0, params)


def grid_for_node(node: ClusterNode, k: int, relevance: RelevanceVector) -> list[int]:
    """Images to display for a node: child representatives (however many
    children exist), or for leaves the up-to-k most relevant members."""
    if node.children:
        return [child.representative for child in node.children]
    scores = relevance.scores
    ranked = sorted(node.members, key=lambda m: (-scores[m], m))
    return ranked[:k]
