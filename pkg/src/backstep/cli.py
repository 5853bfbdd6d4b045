"""Command line entry points.

serve   start the HTTP debug service for a team file
run     execute a team's fixture task headlessly and export the session
replay  re-execute an exported session and report any divergence
teams   list the scenario files shipped with the package

Teams are named either by a filesystem path or by the basename of a shipped
fixture (see ``backstep teams``).
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .checkpoints import CheckpointStore
from .errors import BackstepError
from .replay import replay_file
from .service import create_app
from .teamfile import build_team, list_fixture_teams, load_team, seed_task

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_UNKNOWN = 2
EXIT_LOAD = 3

STATUS_EXIT = {"pass": EXIT_PASS, "fail": EXIT_FAIL, "unknown": EXIT_UNKNOWN}


def _load(team: str):
    try:
        return load_team(team)
    except BackstepError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(EXIT_LOAD)


@click.group()
@click.version_option(package_name="backstep", prog_name="backstep")
def cli():
    """Multi-agent runtime with checkpoint-based time-travel debugging."""


@cli.command()
def teams():
    """List the scenario teams shipped with the package."""
    for name in list_fixture_teams():
        click.echo(name)


@cli.command()
@click.option("--team", required=True, help="Team file path or shipped team name.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option(
    "--checkpoint-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Persist checkpoints under this directory (default: in memory only).",
)
def serve(team: str, host: str, port: int, checkpoint_dir: str | None):
    """Serve the debug API for a team; runs until interrupted.

    The runtime starts paused with an empty queue; send the task from a
    client (the team's declared task is published at /api/v1/team).
    """
    import uvicorn

    spec = _load(team)
    try:
        store = CheckpointStore(persist_dir=checkpoint_dir) if checkpoint_dir else None
        runtime, manager = build_team(spec, store=store)
    except BackstepError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(EXIT_LOAD)
    app = create_app(runtime, manager, spec)
    click.echo(f"team '{spec.name}' with {len(runtime.listed_agents())} agents")
    click.echo(f"serving on http://{host}:{port}/api/v1")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@cli.command()
@click.option("--team", required=True, help="Team file path or shipped team name.")
@click.option("--max-steps", default=None, type=int, help="Dispatch ceiling (default 200).")
@click.option(
    "--export-dir",
    envvar="BACKSTEP_EXPORT_DIR",
    default="exports",
    show_default=True,
    type=click.Path(file_okay=False),
    help="Where the session export is written (env: BACKSTEP_EXPORT_DIR).",
)
def run(team: str, max_steps: int | None, export_dir: str):
    """Run a team's fixture task to completion and export the session.

    Exit code: 0 verdict pass, 1 fail, 2 unknown, 3 load failure.
    """
    spec = _load(team)
    try:
        runtime, manager = build_team(spec)
        seed_task(manager, spec)
        report = runtime.run(max_steps=max_steps)
        verdict = manager.evaluate(runtime.active_session_id)
        export = manager.export_session(runtime.active_session_id, team_meta=spec.meta)
    except BackstepError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(EXIT_LOAD)

    out_dir = Path(export_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # Same team + same flags overwrite deterministically; a ceiling-limited
    # run is a different artifact and gets its own name.
    stem = f"{spec.name}-{runtime.active_session_id}"
    if max_steps is not None:
        stem += f"-steps{max_steps}"
    out_path = out_dir / f"{stem}.json"
    with open(out_path, "w") as fh:
        json.dump(export, fh, indent=2)

    click.echo(f"steps: {report.steps} (stopped: {report.stop_reason})")
    click.echo(f"messages: {len(export['history'])}")
    click.echo(
        f"verdict: {verdict.status}"
        + (f" (expected {verdict.expected!r}, got {verdict.actual!r})"
           if verdict.status != "unknown" else "")
    )
    click.echo(f"exported: {out_path}")
    sys.exit(STATUS_EXIT.get(verdict.status, EXIT_UNKNOWN))


@cli.command()
@click.argument("export_path", type=click.Path(exists=False))
@click.option(
    "--team",
    default=None,
    help="Rebuild from this team instead of the one named in the export.",
)
def replay(export_path: str, team: str | None):
    """Re-execute an exported session and diff it against the record.

    Exit code: 0 identical, 1 divergent, 3 unreadable export or team.
    """
    started = time.time()
    try:
        result = replay_file(export_path, team=team)
    except BackstepError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(EXIT_LOAD)

    elapsed = time.time() - started
    n = len(result["replayed_export"]["history"])
    if result["identical"]:
        click.echo(f"replay identical: {n} history entries match ({elapsed:.2f}s)")
        sys.exit(0)

    first = result["divergences"][0]
    click.echo(f"replay DIVERGED: {len(result['divergences'])} difference(s)")
    where = f" at seq {first['seq']}" if first["seq"] is not None else ""
    click.echo(f"first divergence in {first['part']}{where}:")
    click.echo(f"  recorded: {json.dumps(first['recorded'])}")
    click.echo(f"  replayed: {json.dumps(first['replayed'])}")
    sys.exit(1)


def main():
    cli()


if __name__ == "__main__":
    main()
