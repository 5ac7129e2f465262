"""Command line interface: ingest, sample, trace, cluster, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .clustering import build_hierarchy
from .corpus import Corpus, load_corpus
from .errors import DvxError
from .formats import write_embeddings, write_relevance
from .sampler import SamplerWeights, compute_threshold, greedy_sample, make_schedule
from .session import SessionConfig, ToolKind, see_more, start_session

_SCHEDULE_KINDS = {"exp": "exponential", "exponential": "exponential", "linear": "linear"}


def _corpus_options(fn):
    fn = click.option("--manifest", required=True, type=click.Path(exists=True))(fn)
    fn = click.option("--embeddings", required=True, type=click.Path(exists=True))(fn)
    fn = click.option("--relevance", type=click.Path(exists=True), default=None)(fn)
    fn = click.option(
        "--query",
        type=click.Path(exists=True),
        default=None,
        help="JSON file holding a query embedding vector",
    )(fn)
    return fn


def _load(manifest: str, embeddings: str, relevance: str | None, query: str | None) -> Corpus:
    if relevance is None and query is None:
        raise DvxError("BAD_CONFIG", "provide --relevance or --query")
    if relevance is not None:
        return load_corpus(manifest, embeddings, relevance)
    vector = np.asarray(json.loads(Path(query).read_text(encoding="utf-8")), dtype=np.float64)
    return load_corpus(manifest, embeddings, vector)


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, sort_keys=True))


@click.group()
def main():
    """Diversity-controlled image exploration toolkit."""


def _fail(exc: Exception) -> None:
    code = exc.code if isinstance(exc, DvxError) else "ERROR"
    message = exc.message if isinstance(exc, DvxError) else str(exc)
    click.echo(json.dumps({"error": code, "message": message}), err=True)
    sys.exit(1)


@main.command()
@_corpus_options
@click.option("--out-dir", type=click.Path(), default=None, help="write a normalized bundle")
def ingest(manifest, embeddings, relevance, query, out_dir):
    """Validate corpus inputs and optionally write a normalized bundle."""
    try:
        corpus = _load(manifest, embeddings, relevance, query)
        if out_dir:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            write_embeddings(out / "embeddings.dvxe", corpus.embeddings.rows)
            write_relevance(out / "relevance.dvxr", corpus.relevance.scores)
            (out / "manifest.json").write_text(
                json.dumps(
                    [
                        {"id": r.external_id, "uri": r.uri, "tags": list(r.tags)}
                        for r in corpus.records
                    ]
                ),
                encoding="utf-8",
            )
        _emit(
            {
                "n": corpus.n,
                "d": corpus.d,
                "relevance_min": float(corpus.relevance.scores.min()),
                "relevance_max": float(corpus.relevance.scores.max()),
            }
        )
    except Exception as exc:  # surface one diagnostic line, exit 1
        _fail(exc)


@main.command()
@_corpus_options
@click.option("--root", default="auto", help="root image id, or 'auto' for most relevant")
@click.option("--k", default=16, show_default=True)
@click.option("--wr", default=12.0, show_default=True)
@click.option("--wd", default=1.0, show_default=True)
@click.option("--q", default=1.0, show_default=True, help="diversity quantile for the threshold")
def sample(manifest, embeddings, relevance, query, root, k, wr, wd, q):
    """Draw one diversity-constrained sample and print it as JSON."""
    try:
        corpus = _load(manifest, embeddings, relevance, query)
        root_id = int(np.argmax(corpus.relevance.scores)) if root == "auto" else int(root)
        candidates = [i for i in range(corpus.n) if i != root_id]
        threshold, pool = compute_threshold(corpus, root_id, candidates, q, k_min=k)
        result = greedy_sample(
            corpus, candidates, root_id, k, SamplerWeights(wr, wd), threshold, pool
        )
        _emit(result.to_json())
    except Exception as exc:
        _fail(exc)


@main.command()
@_corpus_options
@click.option("--root", default="auto")
@click.option("--root-path", default=None, help="comma-separated image ids selected per step")
@click.option("--steps", default=4, show_default=True)
@click.option("--schedule", default="exp", type=click.Choice(sorted(_SCHEDULE_KINDS)))
@click.option("--k", default=16, show_default=True)
@click.option("--wr", default=12.0, show_default=True)
@click.option("--wd", default=1.0, show_default=True)
def trace(manifest, embeddings, relevance, query, root, root_path, steps, schedule, k, wr, wd):
    """Walk a full root path and report per-step diversity values.

    At each step the next root is the grid's most relevant non-root image
    unless --root-path overrides the walk.
    """
    try:
        corpus = _load(manifest, embeddings, relevance, query)
        config = SessionConfig(
            tool=ToolKind.DIVERXPLORER,
            k=k,
            schedule=make_schedule(_SCHEDULE_KINDS[schedule], steps),
            weights=SamplerWeights(wr, wd),
        )
        state = start_session(corpus, config)
        if root != "auto":
            raise DvxError("BAD_CONFIG", "custom first roots arrive via --root-path")
        forced = [int(x) for x in root_path.split(",")] if root_path else []
        records = []
        scores = corpus.relevance.scores
        for step in range(1, steps + 1):
            frame = state.frame
            records.append(
                {
                    "step": step,
                    "q": config.schedule.quantiles[step - 1],
                    "threshold": frame.threshold,
                    "pool_size": frame.pool_size,
                    "subset_logdet": frame.subset_logdet,
                }
            )
            if step == steps:
                break
            if forced:
                pick = forced.pop(0)
            else:
                others = [i for i in state.grid if i != frame.root]
                pick = min(others, key=lambda m: (-scores[m], m))
            see_more(state, pick)
        for rec in records:
            click.echo(
                f"step {rec['step']}: q={rec['q']:.6g} threshold={rec['threshold']:.6f} "
                f"pool={rec['pool_size']} logdet={rec['subset_logdet']:.4f}",
                err=True,
            )
        _emit({"records": records})
    except Exception as exc:
        _fail(exc)


@main.command()
@_corpus_options
@click.option("--out", type=click.Path(), default=None)
def cluster(manifest, embeddings, relevance, query, out):
    """Build the cluster hierarchy and print it as JSON."""
    try:
        corpus = _load(manifest, embeddings, relevance, query)
        tree = build_hierarchy(corpus)
        payload = json.dumps(tree.to_dict(), sort_keys=True)
        if out:
            Path(out).write_text(payload, encoding="utf-8")
        click.echo(payload)
    except Exception as exc:
        _fail(exc)


@main.command()
@_corpus_options
@click.option("--corpus-id", default="default", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--log-dir", envvar="DVX_LOG_DIR", default=None)
@click.option("--token", envvar="DVX_TOKEN", default=None)
@click.option("--static-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="also serve a browser UI from this directory")
def serve(manifest, embeddings, relevance, query, corpus_id, host, port, log_dir, token, static_dir):
    """Serve the exploration API with one preloaded corpus."""
    try:
        import uvicorn

        from .service import create_app

        corpus = _load(manifest, embeddings, relevance, query)
        app = create_app(log_dir=log_dir, token=token, static_dir=static_dir)
        app.state.corpora[corpus_id] = corpus
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except Exception as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
