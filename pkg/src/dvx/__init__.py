"""Diversity-controlled stock image exploration toolkit."""

from .corpus import (
    Corpus,
    EmbeddingMatrix,
    ImageRecord,
    RelevanceVector,
    compute_relevance,
    load_corpus,
    normalize_rows,
    validate_embedding_file,
)
from .errors import DvxError
from .kernel import (
    DET_FLOOR,
    NEG_INFINITY_FLOOR,
    CholeskyState,
    extend,
    kernel_entry,
    logdet_subset,
    pairwise_div,
)
from .sampler import (
    DiversitySchedule,
    SampleResult,
    SamplerWeights,
    compute_threshold,
    diversify_full_ranking,
    greedy_sample,
    make_schedule,
    relevance_ranking,
    rerank_similar,
)
from .clustering import (
    ClusterNode,
    ClusterParams,
    build_hierarchy,
    grid_for_node,
    pick_representative,
    score_split,
)
from .session import (
    SessionConfig,
    SessionState,
    ToolKind,
    back,
    choose,
    export_log,
    replay_log,
    see_more,
    start_session,
    top,
)

__version__ = "0.1.0"
