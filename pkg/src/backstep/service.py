"""HTTP service exposing the runtime for interactive debugging frontends.

All mutating requests are serialized through one lock.  A play request runs
the dispatch loop on a worker thread that retakes the lock at every message
boundary, so pause, inject, and edit requests interleave cleanly with an
ongoing run instead of blocking behind it.

Every change is also appended to an in-process event log with a monotonic
event_seq, published at /api/v1/events as a server-sent-event stream.  The
log is the source of truth for ordering: any two subscribers replaying from
the same position see the identical sequence.
"""

from __future__ import annotations

import json
import threading
import time

from fastapi import Body, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from .errors import (
    BackstepError,
    ConfigError,
    DuplicateAgentError,
    EditViolationError,
    FaultedError,
    NoCheckpointError,
    NotPausedError,
    RestoreError,
    RosterMismatchError,
    ScriptError,
    SessionDeleteError,
    SnapshotError,
    StaleSessionError,
    TeamFileError,
    UnknownAgentError,
    UnknownDimensionError,
    UnknownSeqError,
    UnknownSessionError,
)
from .messages import Provenance
from .overview import OverviewBuilder
from .runtime import Runtime
from .sessions import SessionManager
from .teamfile import TeamSpec

API_PREFIX = "/api/v1"

EVENT_TYPES = frozenset(
    {
        "message-appended",
        "thought-appended",
        "queue-changed",
        "session-created",
        "runstate-changed",
        "verdict-changed",
        "config-changed",
    }
)

STATUS_BY_ERROR = {
    UnknownAgentError: 404,
    UnknownSessionError: 404,
    UnknownSeqError: 404,
    NoCheckpointError: 404,
    NotPausedError: 409,
    DuplicateAgentError: 409,
    StaleSessionError: 409,
    RosterMismatchError: 409,
    SessionDeleteError: 409,
    FaultedError: 409,
    EditViolationError: 422,
    ConfigError: 422,
    UnknownDimensionError: 422,
    ScriptError: 422,
    TeamFileError: 422,
    SnapshotError: 500,
    RestoreError: 500,
}


class EventLog:
    """Ordered, thread-safe record of every ApiEvent since startup."""

    def __init__(self):
        self._events: list[dict] = []
        self._cond = threading.Condition()

    def listener(self, name: str, data: dict) -> None:
        if name not in EVENT_TYPES:
            return
        with self._cond:
            self._events.append(
                {
                    "event_seq": len(self._events) + 1,
                    "event_type": name,
                    "payload": data,
                    "ts": time.time(),
                }
            )
            self._cond.notify_all()

    @property
    def latest(self) -> int:
        with self._cond:
            return len(self._events)

    def since(self, seq: int, limit: int | None = None) -> list[dict]:
        with self._cond:
            events = self._events[max(seq, 0):]
        return events[:limit] if limit is not None else events

    def wait_since(self, seq: int, timeout: float) -> list[dict]:
        with self._cond:
            self._cond.wait_for(lambda: len(self._events) > seq, timeout=timeout)
            return self._events[max(seq, 0):]


def _sse(event: dict) -> str:
    return (
        f"id: {event['event_seq']}\n"
        f"event: {event['event_type']}\n"
        f"data: {json.dumps(event['payload'])}\n\n"
    )


def create_app(
    runtime: Runtime,
    manager: SessionManager,
    spec: TeamSpec | None = None,
    keepalive: float = 15.0,
) -> FastAPI:
    app = FastAPI(title="backstep", docs_url=None, redoc_url=None)
    # a local debug tool; the UI is typically served from another local port
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    log = EventLog()
    runtime.on_event(log.listener)
    manager.watch_final_answers()
    overview = OverviewBuilder(runtime, manager)
    lock = threading.Lock()
    run_holder = {"pending": False, "last_report": None}

    app.state.runtime = runtime
    app.state.manager = manager
    app.state.event_log = log

    @app.exception_handler(BackstepError)
    async def on_backstep_error(_request: Request, exc: BackstepError):
        status = 400
        for klass, code in STATUS_BY_ERROR.items():
            if isinstance(exc, klass):
                status = code
                break
        return JSONResponse(
            status_code=status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    def check_expected_active(body: dict) -> None:
        expected = body.get("expected_active")
        if expected is not None and expected != runtime.active_session_id:
            raise StaleSessionError(
                f"expected active session '{expected}' but it is "
                f"'{runtime.active_session_id}'",
                {"expected": expected, "active": runtime.active_session_id},
            )

    def payload_from(body: dict) -> dict:
        if isinstance(body.get("payload"), dict):
            return dict(body["payload"])
        return {"body": str(body.get("body", ""))}

    # -- team and state --------------------------------------------------------

    @app.get(API_PREFIX + "/team")
    def get_team():
        if spec is None:
            return {"name": None, "description": "", "task": None, "edits": {}}
        return {
            "name": spec.name,
            "description": spec.description,
            "task": dict(spec.task),
            "edits": {name: dict(edit) for name, edit in spec.edits.items()},
        }

    @app.get(API_PREFIX + "/state")
    def get_state():
        report = run_holder["last_report"]
        return {
            "run_state": runtime.run_state().to_dict(),
            "last_run": report.to_dict() if report else None,
            "event_seq": log.latest,
        }

    # -- agents -----------------------------------------------------------------

    @app.get(API_PREFIX + "/agents")
    def get_agents():
        return {"agents": runtime.descriptors()}

    @app.get(API_PREFIX + "/agents/{name}/config")
    def get_agent_config(name: str):
        agent = runtime.agent(name)
        return {
            "agent": name,
            "config": agent.get_config(),
            "config_schema": agent.config_schema_doc(),
        }

    @app.put(API_PREFIX + "/agents/{name}/config")
    def put_agent_config(name: str, body: dict = Body(default={})):
        with lock:
            check_expected_active(body)
            runtime.require_paused()
            agent = runtime.agent(name)
            config = body.get("config") if isinstance(body.get("config"), dict) else None
            if config is None:
                config = {
                    k: v for k, v in body.items() if k not in ("expected_active",)
                }
            agent.set_config(config)
            doc = {"agent": name, "config": agent.get_config()}
            runtime.emit("config-changed", doc)
        return doc

    # -- queue and messages -------------------------------------------------------

    @app.get(API_PREFIX + "/queue")
    def get_queue():
        return {"queue": runtime.queue_doc()}

    @app.post(API_PREFIX + "/messages", status_code=201)
    def post_message(body: dict = Body(default={})):
        with lock:
            check_expected_active(body)
            entry = runtime.enqueue(
                sender=str(body.get("sender", "user")),
                recipient=str(body.get("recipient", "broadcast")),
                kind=str(body.get("kind", "task")),
                payload=payload_from(body),
                provenance=Provenance.USER_INJECTED,
            )
            active = runtime.active_session
            if active.parent_id is None and active.seed is None and entry.sender == "user":
                active.seed = entry.to_dict()
        return {"entry": entry.to_dict(), "queue_length": len(runtime.queue)}

    @app.post(API_PREFIX + "/messages/{seq}/reset")
    def post_reset(seq: int, body: dict = Body(default={})):
        with lock:
            check_expected_active(body)
            session_id = str(body.get("session_id") or runtime.active_session_id)
            child = manager.reset_at(session_id, seq, label=body.get("label"))
        return {"session_id": child.session_id, "session": child.to_dict()}

    @app.put(API_PREFIX + "/messages/{seq}")
    def put_message(seq: int, body: dict = Body(default={})):
        forbidden = [k for k in ("sender", "recipient", "kind") if k in body]
        if forbidden:
            raise EditViolationError(
                "an edit may only change the payload; "
                + ", ".join(forbidden) + " are fixed by the original message",
                {"keys": forbidden},
            )
        with lock:
            check_expected_active(body)
            session_id = str(body.get("session_id") or runtime.active_session_id)
            child = manager.edit_and_reset(
                session_id, seq, payload_from(body), label=body.get("label")
            )
        return {"session_id": child.session_id, "session": child.to_dict()}

    # -- control -------------------------------------------------------------------

    @app.post(API_PREFIX + "/control/step")
    def post_step(body: dict = Body(default={})):
        with lock:
            check_expected_active(body)
            result = runtime.step()
        return result.to_dict()

    @app.post(API_PREFIX + "/control/run")
    def post_run(body: dict = Body(default={})):
        max_steps = body.get("max_steps")
        wait = bool(body.get("wait", True))
        with lock:
            check_expected_active(body)
            if runtime.faulted:
                raise FaultedError("runtime is faulted; restore a checkpoint first")
            if run_holder["pending"] or runtime.mode != "paused":
                raise NotPausedError("a run is already in progress")
            run_holder["pending"] = True

        def do_run():
            try:
                report = runtime.run(max_steps=max_steps, step_lock=lock)
                run_holder["last_report"] = report
                return report
            finally:
                run_holder["pending"] = False

        if wait:
            report = do_run()
            return {"report": report.to_dict(), "run_state": runtime.run_state().to_dict()}
        thread = threading.Thread(target=do_run, name="backstep-run", daemon=True)
        thread.start()
        return {"report": None, "run_state": {"mode": "running"}}

    @app.post(API_PREFIX + "/control/pause")
    def post_pause(body: dict = Body(default={})):
        with lock:
            runtime.pause()
        return {"run_state": runtime.run_state().to_dict()}

    # -- sessions ---------------------------------------------------------------------

    @app.get(API_PREFIX + "/sessions")
    def get_sessions():
        return {
            "sessions": manager.list_sessions(),
            "active_session": runtime.active_session_id,
        }

    @app.get(API_PREFIX + "/sessions/{session_id}/history")
    def get_history(session_id: str, offset: int = 0, limit: int | None = None):
        items = runtime.full_history(session_id)
        total = len(items)
        window = items[offset: offset + limit if limit is not None else None]
        return {
            "session_id": session_id,
            "total": total,
            "offset": offset,
            "limit": limit,
            "items": window,
        }

    @app.get(API_PREFIX + "/sessions/{session_id}/overview")
    def get_overview(session_id: str, dimension: str = "kind"):
        runtime.session(session_id)  # 404 on unknown id
        doc = overview.build(dimension=dimension)
        doc["focus"] = session_id
        return doc

    @app.post(API_PREFIX + "/sessions/{session_id}/activate")
    def post_activate(session_id: str, body: dict = Body(default={})):
        with lock:
            check_expected_active(body)
            session = manager.set_active(session_id)
        return {"session": session.to_dict(), "active_session": runtime.active_session_id}

    @app.delete(API_PREFIX + "/sessions/{session_id}")
    def delete_session(session_id: str, body: dict = Body(default={})):
        with lock:
            check_expected_active(body)
            pruned = manager.delete_session(session_id)
        return {"deleted": session_id, "checkpoints_pruned": pruned}

    @app.get(API_PREFIX + "/export/{session_id}")
    def get_export(session_id: str):
        return manager.export_session(
            session_id, team_meta=spec.meta if spec else None
        )

    # -- events ------------------------------------------------------------------------

    @app.get(API_PREFIX + "/events/log")
    def get_event_log(since: int = 0, limit: int | None = None):
        events = log.since(since, limit)
        return {"events": events, "latest": log.latest}

    @app.get(API_PREFIX + "/events")
    def get_events(since: int = 0, limit: int | None = None):
        def stream():
            cursor = since
            sent = 0
            yield ": stream open\n\n"
            while True:
                events = log.wait_since(cursor, timeout=keepalive)
                if not events:
                    yield ": keepalive\n\n"
                    continue
                for event in events:
                    cursor = event["event_seq"]
                    yield _sse(event)
                    sent += 1
                    if limit is not None and sent >= limit:
                        return

        return StreamingResponse(
            stream(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "Connection": "keep-alive"},
        )

    return app
