"""Command line entry point for batch extraction."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .encoders import DEFAULT_CHECKPOINT
from .extract import ExtractError, ExtractJob, extract


@click.command()
@click.option("--images", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--query", required=True, help="task text scored against every image")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--checkpoint", default=DEFAULT_CHECKPOINT, show_default=True)
def main(images, query, out, checkpoint):
    """Encode an image directory and write manifest.json, embeddings.dvxe,
    and relevance.dvxr into the output directory."""
    try:
        summary = extract(ExtractJob(Path(images), query, Path(out), checkpoint))
    except ExtractError as exc:
        click.echo(json.dumps({"error": exc.code, "message": exc.message}), err=True)
        sys.exit(1)
    click.echo(json.dumps(summary, sort_keys=True))


if __name__ == "__main__":
    main()
