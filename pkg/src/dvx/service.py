"""HTTP JSON service exposing corpora and exploration sessions.

Sessions live in memory keyed by random 128-bit ids; every action on one
session runs under that session's lock, so concurrent requests linearize.
Views expose only image ids, uris, and log-det summaries, never embeddings.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse, RedirectResponse
from pydantic import BaseModel

from .corpus import Corpus, load_corpus
from .errors import DvxError
from .session import (
    SessionConfig,
    SessionState,
    ToolKind,
    back,
    choose,
    export_log,
    see_more,
    start_session,
    top,
)
from .sampler import SamplerWeights, make_schedule

CONFLICT_CODES = frozenset(
    {
        "STEP_LIMIT",
        "AT_FIRST_STEP",
        "ALREADY_CHOSEN",
        "SELECTION_NOT_IN_GRID",
        "NOT_STEPWISE_TOOL",
    }
)


class CorpusRequest(BaseModel):
    manifest: str
    embeddings: str
    relevance: str | None = None
    query: list[float] | None = None
    id: str | None = None


class SessionRequest(BaseModel):
    corpus_id: str | None = None
    tool: str
    k: int | None = None
    steps: int | None = None
    schedule: str | None = None
    wr: float | None = None
    wd: float | None = None


class ActionRequest(BaseModel):
    action: str
    selected: int | None = None


@dataclass
class _SessionEntry:
    state: SessionState
    corpus_id: str
    lock: threading.Lock = field(default_factory=threading.Lock)


def build_config(req: SessionRequest) -> SessionConfig:
    try:
        tool = ToolKind(req.tool)
    except ValueError:
        raise DvxError("BAD_TOOL", f"unknown tool {req.tool!r}")
    kind = {"exp": "exponential", "linear": "linear"}.get(
        req.schedule or "exp", req.schedule
    )
    return SessionConfig(
        tool=tool,
        k=req.k if req.k is not None else 16,
        schedule=make_schedule(kind, req.steps if req.steps is not None else 4),
        weights=SamplerWeights(
            req.wr if req.wr is not None else 12.0,
            req.wd if req.wd is not None else 1.0,
        ),
    )


def session_view(entry: _SessionEntry, corpus: Corpus, page: int = 0) -> dict:
    state = entry.state
    tool = state.config.tool
    grid = list(state.grid)
    total = len(grid)
    if not tool.is_stepwise:
        k = state.config.k
        grid = grid[page * k : (page + 1) * k]
    root = state.frame.root if tool is ToolKind.DIVERXPLORER else None
    cells = [
        {"id": i, "uri": corpus.records[i].uri, "is_root": i == root and root is not None}
        for i in grid
    ]
    if tool is ToolKind.DIVERXPLORER:
        max_steps = state.config.schedule.steps
    elif tool is ToolKind.CLUSTERING:
        max_steps = state.config.cluster_params.max_depth + 1
    else:
        max_steps = 1
    return {
        "session_id": state.session_id,
        "tool": tool.value,
        "step": state.step,
        "max_steps": max_steps,
        "grid": cells,
        "can_see_more": state.can_see_more,
        "can_back": state.can_back,
        "status": state.status,
        "chosen_image": state.chosen_image,
        "subset_logdet": state.frame.subset_logdet,
        "page": page,
        "total_count": total,
    }


def create_app(
    log_dir: str | Path | None = None,
    token: str | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="dvx exploration service")
    corpora: dict[str, Corpus] = {}
    sessions: dict[str, _SessionEntry] = {}
    app.state.corpora = corpora
    app.state.sessions = sessions
    app.state.log_dir = Path(log_dir) if log_dir else None

    def _error(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"code": code, "message": message})

    @app.exception_handler(DvxError)
    async def _dvx_handler(request: Request, exc: DvxError):
        status = 409 if exc.code in CONFLICT_CODES else 400
        return _error(status, exc.code, exc.message)

    @app.middleware("http")
    async def _token_guard(request: Request, call_next):
        if token and request.headers.get("x-dvx-token") != token:
            return _error(401, "UNAUTHORIZED", "missing or invalid X-DVX-Token header")
        return await call_next(request)

    def _get_corpus(corpus_id: str | None) -> tuple[str, Corpus] | None:
        if corpus_id is None:
            if len(corpora) == 1:
                return next(iter(corpora.items()))
            return None
        if corpus_id in corpora:
            return corpus_id, corpora[corpus_id]
        return None

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/corpora", status_code=201)
    def create_corpus(req: CorpusRequest):
        source = req.relevance if req.relevance is not None else req.query
        if source is None:
            raise DvxError("BAD_CONFIG", "provide either a relevance file or a query vector")
        try:
            corpus = load_corpus(req.manifest, req.embeddings, source, name=req.id or "corpus")
        except OSError as exc:
            raise DvxError("IO_ERROR", str(exc))
        corpus_id = req.id or uuid.uuid4().hex
        corpora[corpus_id] = corpus
        return {"corpus_id": corpus_id, "n": corpus.n, "d": corpus.d}

    @app.post("/sessions", status_code=201)
    def create_session(req: SessionRequest):
        found = _get_corpus(req.corpus_id)
        if found is None:
            return _error(404, "UNKNOWN_CORPUS", f"no corpus {req.corpus_id!r}")
        corpus_id, corpus = found
        config = build_config(req)
        state = start_session(corpus, config)
        entry = _SessionEntry(state=state, corpus_id=corpus_id)
        sessions[state.session_id] = entry
        return session_view(entry, corpus)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str, page: int = 0):
        entry = sessions.get(session_id)
        if entry is None:
            return _error(404, "UNKNOWN_SESSION", f"no session {session_id!r}")
        with entry.lock:
            return session_view(entry, corpora[entry.corpus_id], page)

    @app.post("/sessions/{session_id}/action")
    def session_action(session_id: str, req: ActionRequest):
        entry = sessions.get(session_id)
        if entry is None:
            return _error(404, "UNKNOWN_SESSION", f"no session {session_id!r}")
        with entry.lock:
            state = entry.state
            if req.action == "see_more":
                see_more(state, req.selected)
            elif req.action == "choose":
                choose(state, req.selected)
                _flush_log(app, state)
            elif req.action == "back":
                back(state)
            elif req.action == "top":
                top(state)
            else:
                raise DvxError("BAD_ACTION", f"unknown action {req.action!r}")
            return session_view(entry, corpora[entry.corpus_id])

    @app.get("/sessions/{session_id}/log")
    def session_log(session_id: str):
        entry = sessions.get(session_id)
        if entry is None:
            return _error(404, "UNKNOWN_SESSION", f"no session {session_id!r}")
        with entry.lock:
            return export_log(entry.state)

    @app.get("/images/{image_id}")
    def get_image(image_id: int, corpus_id: str | None = None):
        found = _get_corpus(corpus_id)
        if found is None:
            return _error(404, "UNKNOWN_CORPUS", f"no corpus {corpus_id!r}")
        _, corpus = found
        if not 0 <= image_id < corpus.n:
            return _error(404, "UNKNOWN_IMAGE", f"no image {image_id}")
        uri = corpus.records[image_id].uri
        if uri.startswith("http://") or uri.startswith("https://"):
            return RedirectResponse(uri, status_code=302)
        path = Path(uri)
        if not path.is_file():
            return _error(404, "UNKNOWN_IMAGE", f"asset for image {image_id} not found")
        return FileResponse(path)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _flush_log(app: FastAPI, state: SessionState) -> None:
    log_dir: Path | None = app.state.log_dir
    if log_dir is None:
        return
    log_dir.mkdir(parents=True, exist_ok=True)
    out = log_dir / f"{state.session_id}.json"
    out.write_text(json.dumps(export_log(state), sort_keys=True), encoding="utf-8")
