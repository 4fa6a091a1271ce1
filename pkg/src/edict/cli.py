"""Command line front end.

Every failure prints one JSON object on stderr and exits nonzero, so
wrapping scripts never have to scrape tracebacks.
"""

from __future__ import annotations

import json
import sys

import click

from .document import DocumentState
from .dsl import parse_program, print_canonical
from .dsl.execute import execute
from .errors import EdictError
from .pipeline import Pipeline
from .trajectory import (
    GoldTagger,
    corpus_stats,
    evaluate,
    load_trajectory,
    replay_gold,
)


def _fail(err: Exception, code: int = 1):
    payload = {"error": type(err).__name__, "message": str(err)}
    for attr in ("position", "path", "segment_index", "constraint"):
        if hasattr(err, attr):
            payload[attr] = getattr(err, attr)
    click.echo(json.dumps(payload), err=True)
    sys.exit(code)


def _read_source(source: str) -> str:
    return sys.stdin.read() if source == "-" else source


def _load(path: str):
    try:
        return load_trajectory(path)
    except (OSError, ValueError, EdictError) as err:
        _fail(err, 2)


@click.group()
def main():
    """Interactive dictation engine tools."""


@main.command()
@click.argument("source")
def parse(source):
    """Parse a command program and print its canonical form.

    SOURCE is program text, or - to read it from stdin.
    """
    try:
        program = parse_program(_read_source(source))
    except EdictError as err:
        _fail(err)
    click.echo(print_canonical(program))


@main.command(name="exec")
@click.argument("source")
@click.option("--doc", default="", help="Document content to act on.")
@click.option(
    "--selection",
    default=None,
    help="anchor,focus pair; defaults to a cursor at the end.",
)
def exec_(source, doc, selection):
    """Execute a command program against a document; print the result."""
    if selection is None:
        sel = (len(doc), len(doc))
    else:
        try:
            anchor, focus = (int(x) for x in selection.split(","))
        except ValueError as err:
            _fail(err, 2)
        sel = (anchor, focus)
    try:
        program = parse_program(_read_source(source))
        result = execute(program, DocumentState(doc, sel))
    except EdictError as err:
        _fail(err)
    click.echo(json.dumps(result.to_json(), ensure_ascii=False))


@main.command()
@click.argument("paths", nargs=-1, required=True)
def replay(paths):
    """Replay trajectories under their gold labels and audit every segment."""
    for path in paths:
        trajectory = _load(path)
        try:
            records = replay_gold(trajectory)
        except EdictError as err:
            _fail(err)
        click.echo(
            json.dumps({"file": path, "segments": len(records), "ok": True})
        )


@main.command(name="eval")
@click.argument("paths", nargs=-1, required=True)
@click.option("--csv", "csv_path", default=None, help="Also write per-window rows.")
def eval_(paths, csv_path):
    """Re-predict gold segments with the shipped stages and score them."""
    pairs = [(path, _load(path)) for path in paths]
    try:
        report = evaluate(pairs)
    except EdictError as err:
        _fail(err)
    if csv_path:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
    click.echo(json.dumps(report.to_json(), indent=2))


@main.command()
@click.argument("path")
def simulate(path):
    """Feed a recorded stream through the live pipeline, event by event."""
    trajectory = _load(path)
    tagger = GoldTagger(trajectory)
    pipeline = Pipeline(trajectory.initial_state, tagger=tagger)
    for i, event in enumerate(trajectory.events):
        tagger.set_version(i)
        try:
            view = pipeline.on_event(event)
        except EdictError as err:
            _fail(err)
        click.echo(
            json.dumps(
                {
                    "event": i,
                    "kind": event.kind,
                    "visible": view.visible_state.content,
                    "committed": view.committed_state.content,
                    "confidence": round(view.confidence, 4),
                    "committed_now": view.committed_now,
                    "finals_open": view.finals_open,
                },
                ensure_ascii=False,
            )
        )


@main.command()
@click.argument("paths", nargs=-1, required=True)
def stats(paths):
    """Corpus counts over one or more trajectory files."""
    pairs = [(path, _load(path)) for path in paths]
    click.echo(json.dumps(corpus_stats(pairs), indent=2))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.option("--store", default="trajectories", help="Trajectory directory.")
def serve(host, port, store):
    """Run the annotation service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(store), host=host, port=port)


if __name__ == "__main__":
    main()
