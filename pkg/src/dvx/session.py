"""Stepwise exploration sessions for the four tools.

A session is a serialized unit of interaction state: the current grid, a
history stack for Back/Top, and an append-only event log detailed enough to
replay every grid deterministically against the same corpus.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .clustering import ClusterNode, ClusterParams, build_hierarchy, grid_for_node
from .corpus import Corpus
from .errors import DvxError
from .sampler import (
    DiversitySchedule,
    SamplerWeights,
    compute_threshold,
    diversify_full_ranking,
    greedy_sample,
    make_schedule,
    relevance_ranking,
)

__all__ = [
    "ToolKind",
    "SessionConfig",
    "SessionState",
    "start_session",
    "see_more",
    "choose",
    "back",
    "top",
    "export_log",
    "replay_log",
]


class ToolKind(str, Enum):
    SCROLL = "scroll"
    SCROLL_DIV = "scroll_div"
    CLUSTERING = "clustering"
    DIVERXPLORER = "diverxplorer"

    @property
    def is_stepwise(self) -> bool:
        return self in (ToolKind.CLUSTERING, ToolKind.DIVERXPLORER)


@dataclass(frozen=True)
class SessionConfig:
    tool: ToolKind
    k: int = 16
    schedule: DiversitySchedule = field(default_factory=lambda: make_schedule("exponential", 4))
    weights: SamplerWeights = field(default_factory=SamplerWeights)
    cluster_params: ClusterParams = field(default_factory=ClusterParams)

    def __post_init__(self):
        if self.k < 1:
            raise DvxError("BAD_CONFIG", f"grid size must be >= 1, got {self.k}")


@dataclass(frozen=True)
class Frame:
    """One history entry: everything needed to redisplay a past step."""

    step: int
    root: int | None
    grid: tuple[int, ...]
    subset_logdet: float | None = None
    threshold: float | None = None
    pool_size: int | None = None
    node: ClusterNode | None = None


class SessionState:
    """Mutable interaction state for one session (owned by one caller)."""

    def __init__(self, corpus: Corpus, config: SessionConfig, session_id: str | None = None):
        self.corpus = corpus
        self.config = config
        self.session_id = session_id or uuid.uuid4().hex
        self.status = "exploring"
        self.chosen_image: int | None = None
        self.history: list[Frame] = []
        self.events: list[dict] = []
        self.tree: ClusterNode | None = None

    @property
    def step(self) -> int:
        return self.history[-1].step

    @property
    def frame(self) -> Frame:
        return self.history[-1]

    @property
    def grid(self) -> tuple[int, ...]:
        return self.history[-1].grid

    @property
    def can_back(self) -> bool:
        return self.status == "exploring" and self.step > 1

    @property
    def can_see_more(self) -> bool:
        if self.status != "exploring" or not self.config.tool.is_stepwise:
            return False
        if self.config.tool is ToolKind.DIVERXPLORER:
            return self.step < self.config.schedule.steps
        return not self.frame.node.is_leaf

    def _log(self, kind: str, selected: int | None = None) -> None:
        self.events.append(
            {
                "type": kind,
                "timestamp_ms": int(time.time() * 1000),
                "step": self.step,
                "grid": list(self.grid),
                "selected": selected,
                "subset_logdet": self.frame.subset_logdet,
            }
        )


def _sample_step(
    corpus: Corpus, config: SessionConfig, root: int, used_roots: set[int], step: int
) -> Frame:
    q = config.schedule.quantiles[step - 1]
    candidates = [i for i in range(corpus.n) if i != root and i not in used_roots]
    threshold, pool = compute_threshold(corpus, root, candidates, q, k_min=config.k)
    result = greedy_sample(
        corpus, candidates, root, config.k, config.weights, threshold, pool
    )
    return Frame(
        step=step,
        root=root,
        grid=result.display_order,
        subset_logdet=result.subset_logdet,
        threshold=result.threshold_used,
        pool_size=result.pool_size,
    )


def start_session(
    corpus: Corpus, config: SessionConfig, session_id: str | None = None
) -> SessionState:
    """Open a session and produce the step-1 display for its tool."""
    if corpus.n == 0:
        raise DvxError("CORPUS_EMPTY", "cannot explore an empty corpus")
    state = SessionState(corpus, config, session_id)
    tool = config.tool
    if tool is ToolKind.SCROLL:
        state.history.append(Frame(step=1, root=None, grid=relevance_ranking(corpus)))
    elif tool is ToolKind.SCROLL_DIV:
        state.history.append(
            Frame(step=1, root=None, grid=diversify_full_ranking(corpus, config.weights))
        )
    elif tool is ToolKind.CLUSTERING:
        state.tree = build_hierarchy(corpus, config.cluster_params)
        grid = grid_for_node(state.tree, config.k, corpus.relevance)
        state.history.append(Frame(step=1, root=None, grid=tuple(grid), node=state.tree))
    else:
        if config.k >= corpus.d:
            raise DvxError(
                "BAD_CONFIG",
                f"grid size {config.k} must be smaller than embedding dimension {corpus.d}",
            )
        root = int(np.argmax(corpus.relevance.scores))
        state.history.append(_sample_step(corpus, config, root, set(), 1))
    state._log("start")
    return state


def _require_exploring(state: SessionState) -> None:
    if state.status != "exploring":
        raise DvxError("ALREADY_CHOSEN", "session is terminal; image already chosen")


def see_more(state: SessionState, selected: int) -> SessionState:
    """Advance one step, conditioned on the selected image."""
    _require_exploring(state)
    tool = state.config.tool
    if not tool.is_stepwise:
        raise DvxError("NOT_STEPWISE_TOOL", f"{tool.value} has no stepwise refinement")

    if tool is ToolKind.DIVERXPLORER:
        if state.step >= state.config.schedule.steps:
            raise DvxError("STEP_LIMIT", f"already at final step {state.step}")
        if selected not in state.grid:
            raise DvxError("SELECTION_NOT_IN_GRID", f"image {selected} is not displayed")
        used_roots = {f.root for f in state.history if f.root is not None}
        frame = _sample_step(
            state.corpus, state.config, selected, used_roots, state.step + 1
        )
        state.history.append(frame)
    else:
        node = state.frame.node
        if node.is_leaf:
            raise DvxError("STEP_LIMIT", "reached a leaf cluster; no finer level exists")
        if selected not in state.grid:
            raise DvxError("SELECTION_NOT_IN_GRID", f"image {selected} is not displayed")
        child = next(c for c in node.children if c.representative == selected)
        grid = grid_for_node(child, state.config.k, state.corpus.relevance)
        state.history.append(
            Frame(step=state.step + 1, root=selected, grid=tuple(grid), node=child)
        )
    state._log("see_more", selected)
    return state


def choose(state: SessionState, selected: int) -> SessionState:
    """Finalize the session on one displayed image."""
    _require_exploring(state)
    if selected not in state.grid:
        raise DvxError("SELECTION_NOT_IN_GRID", f"image {selected} is not displayed")
    state.status = "chosen"
    state.chosen_image = selected
    state._log("choose", selected)
    return state


def back(state: SessionState) -> SessionState:
    """Return to the previous step, restoring its stored grid verbatim."""
    _require_exploring(state)
    if state.step <= 1:
        raise DvxError("AT_FIRST_STEP", "cannot go back from the first step")
    state.history.pop()
    state._log("back")
    return state


def top(state: SessionState) -> SessionState:
    """Reset to step 1 with the original grid."""
    _require_exploring(state)
    state.history = [state.history[0]]
    state._log("top")
    return state


def export_log(state: SessionState) -> dict:
    """Interaction log: config plus every event, sufficient for replay."""
    return {
        "session_id": state.session_id,
        "tool": state.config.tool.value,
        "config": {
            "k": state.config.k,
            "quantiles": list(state.config.schedule.quantiles),
            "relevance_weight": state.config.weights.relevance,
            "diversity_weight": state.config.weights.diversity,
        },
        "status": state.status,
        "chosen_image": state.chosen_image,
        "events": state.events,
    }


def replay_log(corpus: Corpus, log: dict) -> SessionState:
    """Re-run a logged session against a corpus, verifying every grid.

    Raises ``REPLAY_MISMATCH`` if any reproduced grid differs from the
    logged one.
    """
    cfg = log["config"]
    config = SessionConfig(
        tool=ToolKind(log["tool"]),
        k=cfg["k"],
        schedule=DiversitySchedule(tuple(cfg["quantiles"])),
        weights=SamplerWeights(cfg["relevance_weight"], cfg["diversity_weight"]),
    )
    state: SessionState | None = None
    for event in log["events"]:
        kind = event["type"]
        if kind == "start":
            state = start_session(corpus, config, session_id=log["session_id"])
        elif kind == "see_more":
            see_more(state, event["selected"])
        elif kind == "choose":
            choose(state, event["selected"])
        elif kind == "back":
            back(state)
        elif kind == "top":
            top(state)
        else:
            raise DvxError("REPLAY_MISMATCH", f"unknown event type {kind!r}")
        if list(state.grid) != event["grid"]:
            raise DvxError(
                "REPLAY_MISMATCH",
                f"grid diverged at event {kind} (step {event['step']})",
            )
    if state is None:
        raise DvxError("REPLAY_MISMATCH", "log has no start event")
    return state
