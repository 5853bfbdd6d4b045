"""Record a service session for the UI replay tests.

Runs the debug service in-process, drives the standard two-branch
walkthrough (task, run, edit at seq 3, run), and writes the initial
snapshots, the complete event log, and the final session documents to
tests/fixtures/recorded-stream.json.  Rerun after changing anything that
alters the wire format.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from backstep.service import create_app
from backstep.teamfile import build_team, load_team

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "recorded-stream.json"


def main() -> None:
    spec = load_team("yankees-1977")
    runtime, manager = build_team(spec)
    client = TestClient(create_app(runtime, manager, spec))

    def get(path: str) -> dict:
        res = client.get("/api/v1" + path)
        res.raise_for_status()
        return res.json()

    def post(path: str, body: dict | None = None) -> dict:
        res = client.post("/api/v1" + path, json=body or {})
        res.raise_for_status()
        return res.json()

    snapshots = {
        "team": get("/team"),
        "agents": get("/agents")["agents"],
        "sessions": get("/sessions"),
        "state": get("/state"),
        "queue": get("/queue")["queue"],
        "history": get("/sessions/s0/history"),
    }

    post(
        "/messages",
        {
            "recipient": spec.task["to"],
            "kind": spec.task.get("kind", "task"),
            "body": spec.task["body"],
        },
    )
    post("/control/run")

    edit = spec.edits["add-specificity"]
    res = client.put(
        f"/api/v1/messages/{edit['seq']}",
        json={"body": edit["body"], "label": "add-specificity"},
    )
    res.raise_for_status()
    post("/control/run")

    events = get("/events/log?since=0")["events"]
    final = {
        "sessions": get("/sessions"),
        "history_child": get("/sessions/s1/history"),
        "overview_kind": get("/sessions/s1/overview?dimension=kind"),
        "overview_sender": get("/sessions/s1/overview?dimension=sender"),
    }

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"snapshots": snapshots, "events": events, "final": final}, indent=1))
    print(f"wrote {OUT.relative_to(Path.cwd())} with {len(events)} events")


if __name__ == "__main__":
    main()
