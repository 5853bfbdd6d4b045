"""Re-execute an exported session record and verify it reproduces.

An export names its team file, the seed message of every branch in the fork
chain, and the resulting message view.  Replaying rebuilds the team, replays
the seeds in order (re-running the queue to exhaustion after each), exports
the rebuilt branch, and compares the two records field by field.

Identifiers assigned at runtime (message ids, session ids, timestamps) are
excluded from the comparison; everything an agent can observe or produce is
included.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ExportError
from .messages import Provenance
from .sessions import SessionManager
from .teamfile import TeamSpec, build_team, load_team

SCHEMA_VERSION = 1

# Generous ceiling applied on top of the recorded length; a replay that
# needs more steps than the record plus slack is already divergent.
STEP_SLACK = 50


def canonical_history_item(doc: dict) -> dict:
    return {
        "seq": doc.get("seq"),
        "sender": doc.get("sender"),
        "recipient": doc.get("recipient"),
        "kind": doc.get("kind"),
        "payload": doc.get("payload"),
        "provenance": doc.get("provenance"),
        "inherited": doc.get("inherited"),
    }


def canonical_thought(doc: dict) -> dict:
    return {
        "seq_anchor": doc.get("seq_anchor"),
        "agent": doc.get("agent"),
        "text": doc.get("text"),
        "inherited": doc.get("inherited"),
    }


def canonical_session(doc: dict) -> dict:
    seed = doc.get("seed") or None
    if seed is not None:
        seed = {
            "sender": seed.get("sender"),
            "recipient": seed.get("recipient"),
            "kind": seed.get("kind"),
            "payload": seed.get("payload"),
            "provenance": seed.get("provenance"),
        }
    return {"fork_seq": doc.get("fork_seq"), "label": doc.get("label"), "seed": seed}


def canonical_export(doc: dict) -> dict:
    verdict = doc.get("verdict") or {}
    return {
        "expected_answer": doc.get("expected_answer"),
        "sessions": [canonical_session(s) for s in doc.get("sessions", [])],
        "history": [canonical_history_item(i) for i in doc.get("history", [])],
        "thoughts": [canonical_thought(t) for t in doc.get("thoughts", [])],
        "verdict": {
            "status": verdict.get("status"),
            "expected": verdict.get("expected"),
            "actual": verdict.get("actual"),
        },
    }


def _diff_lists(part: str, seq_key, recorded: list, replayed: list) -> list[dict]:
    out = []
    for i in range(max(len(recorded), len(replayed))):
        a = recorded[i] if i < len(recorded) else None
        b = replayed[i] if i < len(replayed) else None
        if a != b:
            anchor = seq_key(a if a is not None else b)
            out.append({"part": part, "seq": anchor, "recorded": a, "replayed": b})
    return out


def diff_exports(recorded: dict, replayed: dict) -> list[dict]:
    """All divergences between two canonicalized exports, history first so
    the leading entry names the earliest divergent seq."""
    a, b = canonical_export(recorded), canonical_export(replayed)
    divergences = _diff_lists("history", lambda d: d.get("seq"), a["history"], b["history"])
    divergences += _diff_lists(
        "thoughts", lambda d: d.get("seq_anchor"), a["thoughts"], b["thoughts"]
    )
    divergences += _diff_lists(
        "sessions", lambda d: d.get("fork_seq"), a["sessions"], b["sessions"]
    )
    if a["verdict"] != b["verdict"]:
        divergences.append(
            {"part": "verdict", "seq": None, "recorded": a["verdict"], "replayed": b["verdict"]}
        )
    if a["expected_answer"] != b["expected_answer"]:
        divergences.append(
            {
                "part": "expected_answer",
                "seq": None,
                "recorded": a["expected_answer"],
                "replayed": b["expected_answer"],
            }
        )
    return divergences


def validate_export(doc: dict) -> dict:
    if not isinstance(doc, dict):
        raise ExportError("export must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ExportError(
            f"export schema version {version!r} is not supported "
            f"(this build reads version {SCHEMA_VERSION})"
        )
    if not isinstance(doc.get("sessions"), list) or not doc["sessions"]:
        raise ExportError("export has no session chain")
    return doc


def load_export(path: str | Path) -> dict:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ExportError(f"cannot read export '{path}': {exc}")
    except json.JSONDecodeError as exc:
        raise ExportError(f"export '{path}' is not valid JSON: {exc}")
    try:
        return validate_export(doc)
    except ExportError as exc:
        raise ExportError(f"{path}: {exc.message}")


def _resolve_spec(doc: dict, team: str | Path | None) -> TeamSpec:
    if team is not None:
        return load_team(team)
    meta = doc.get("team") or {}
    path = meta.get("path")
    if path and Path(path).is_file():
        return load_team(path)
    name = meta.get("name")
    if name:
        return load_team(name)
    raise ExportError(
        "export does not name its team file; pass the team explicitly"
    )


def _run_until(runtime, target_next_seq: int, ceiling: int) -> None:
    """Step until the active branch has dispatched through target_next_seq.

    A branch that was left mid-run (ceiling hit, or paused by hand) must not
    be replayed past the recorded point, or the comparison would flag the
    extra messages as divergence.
    """
    steps = 0
    while runtime.active_session.next_seq < target_next_seq and steps < ceiling:
        result = runtime.step()
        if result.status == "empty-queue":
            break
        steps += 1


def replay_export(doc: dict, team: str | Path | None = None) -> dict:
    """Rebuild the team, rerun the recorded fork chain, and diff the result.

    Returns {identical, divergences, recorded_session, replayed_session,
    session_map, replayed_export}.
    """
    validate_export(doc)
    spec = _resolve_spec(doc, team)
    runtime, manager = build_team(spec)
    manager.expected_answer = doc.get("expected_answer")
    history = doc.get("history", [])
    ceiling = len(history) + STEP_SLACK
    # The record's reach: the final branch stops once it has dispatched the
    # last recorded seq; ancestors only need to reach their child's fork point.
    final_next = (history[-1]["seq"] + 1) if history else 0

    chain = doc["sessions"]
    session_map: dict[str, str] = {}

    def branch_target(index: int) -> int:
        if index == len(chain) - 1:
            return final_next
        return chain[index + 1]["fork_seq"] + 1

    root_doc = chain[0]
    session_map[root_doc["session_id"]] = runtime.active_session_id
    seed = root_doc.get("seed")
    if seed:
        runtime.enqueue(
            sender=seed["sender"],
            recipient=seed["recipient"],
            kind=seed["kind"],
            payload=dict(seed.get("payload") or {}),
            provenance=Provenance(seed.get("provenance", "original")),
        )
        runtime.active_session.seed = runtime.queue[-1].to_dict()
        _run_until(runtime, branch_target(0), ceiling)

    for index, branch in enumerate(chain[1:], start=1):
        parent = session_map.get(branch["parent_id"])
        if parent is None:
            raise ExportError(
                f"branch '{branch['session_id']}' forks from unknown parent "
                f"'{branch['parent_id']}'"
            )
        seed = branch.get("seed") or {}
        fork_seq = branch.get("fork_seq")
        if fork_seq is None:
            raise ExportError(f"branch '{branch['session_id']}' has no fork_seq")
        if seed.get("provenance") == Provenance.EDITED.value:
            child = manager.edit_and_reset(
                parent, fork_seq, dict(seed.get("payload") or {}), label=branch.get("label")
            )
        else:
            child = manager.reset_at(parent, fork_seq, label=branch.get("label"))
        session_map[branch["session_id"]] = child.session_id
        _run_until(runtime, branch_target(index), ceiling)

    recorded_session = doc.get("session_id") or chain[-1]["session_id"]
    replayed_session = session_map.get(recorded_session)
    if replayed_session is None:
        raise ExportError(
            f"exported session '{recorded_session}' is not part of the fork chain"
        )

    replayed = manager.export_session(replayed_session, team_meta=doc.get("team"))
    divergences = diff_exports(doc, replayed)
    return {
        "identical": not divergences,
        "divergences": divergences,
        "recorded_session": recorded_session,
        "replayed_session": replayed_session,
        "session_map": session_map,
        "replayed_export": replayed,
    }


def replay_file(path: str | Path, team: str | Path | None = None) -> dict:
    return replay_export(load_export(path), team=team)
