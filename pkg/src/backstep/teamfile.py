"""Team files: declarative YAML describing a team, its task, and its edits.

A team file names the agents (with scripts and corpus where needed), the
opening task with its expected answer, and a set of named steering edits.
The named edits let a run be steered reproducibly: each gives the seq of the
message to rewrite and the replacement body.

Files can extend another team file via ``base:``.  Top-level keys given in
the child replace the base's wholesale, except ``agents``: agent entries
merge by name, so a variant can override one agent's script without
repeating the roster.  Relative paths resolve against the child file, so a
variant should sit next to its base.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .agents import (
    AGENT_TYPES,
    CannedBackend,
    Corpus,
    ExecutorAgent,
    FileSurferAgent,
    LlmAgent,
    Script,
    ScriptedAgent,
    WebSurferAgent,
)
from .checkpoints import CheckpointStore
from .errors import TeamFileError
from .runtime import Runtime, Session
from .sessions import SessionManager


def fixtures_dir() -> Path:
    return Path(__file__).parent / "fixtures"


def list_fixture_teams() -> list[str]:
    teams = fixtures_dir() / "teams"
    if not teams.is_dir():
        return []
    return sorted(p.stem for p in teams.glob("*.yaml"))


@dataclass
class TeamSpec:
    name: str
    path: Path
    description: str = ""
    corpus_dir: Path | None = None
    agents: list[dict] = field(default_factory=list)
    task: dict = field(default_factory=dict)
    edits: dict[str, dict] = field(default_factory=dict)

    @property
    def meta(self) -> dict:
        return {"name": self.name, "path": str(self.path)}


def resolve_team_path(name_or_path: str | Path) -> Path:
    """Accept either a filesystem path or the name of a shipped team."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    shipped = fixtures_dir() / "teams" / f"{name_or_path}.yaml"
    if shipped.is_file():
        return shipped
    raise TeamFileError(
        f"no team file at '{name_or_path}' and no shipped team of that name; "
        f"shipped teams: {', '.join(list_fixture_teams()) or '(none)'}"
    )


def _read_doc(path: Path) -> dict:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise TeamFileError(f"{path}: not valid YAML: {exc}")
    if not isinstance(doc, dict):
        raise TeamFileError(f"{path}: team file must be a mapping")
    if "base" in doc:
        base_path = (path.parent / doc.pop("base")).resolve()
        if not base_path.is_file():
            raise TeamFileError(f"{path}: base team file '{base_path}' not found")
        merged = _read_doc(base_path)
        if "agents" in doc and isinstance(merged.get("agents"), list):
            merged["agents"] = _merge_agents(merged["agents"], doc.pop("agents"))
        merged.update(doc)
        doc = merged
    return doc


def _merge_agents(base: list, overrides) -> list:
    if not isinstance(overrides, list):
        return overrides
    agents = [dict(a) if isinstance(a, dict) else a for a in base]
    by_name = {a.get("name"): a for a in agents if isinstance(a, dict)}
    for raw in overrides:
        name = raw.get("name") if isinstance(raw, dict) else None
        if name in by_name:
            by_name[name].update(raw)
        else:
            agents.append(raw)
    return agents


def load_team(name_or_path: str | Path) -> TeamSpec:
    path = resolve_team_path(name_or_path).resolve()
    doc = _read_doc(path)

    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise TeamFileError(f"{path}: team needs a 'name'")

    raw_agents = doc.get("agents")
    if not isinstance(raw_agents, list) or not raw_agents:
        raise TeamFileError(f"{path}: 'agents' must be a non-empty list")
    seen: set[str] = set()
    needs_corpus = False
    for raw in raw_agents:
        if not isinstance(raw, dict) or "name" not in raw or "type" not in raw:
            raise TeamFileError(f"{path}: every agent needs 'name' and 'type'")
        if raw["name"] in seen:
            raise TeamFileError(f"{path}: duplicate agent name '{raw['name']}'")
        seen.add(raw["name"])
        if raw["type"] not in AGENT_TYPES:
            raise TeamFileError(
                f"{path}: agent '{raw['name']}' has unknown type '{raw['type']}'; "
                f"known types: {', '.join(AGENT_TYPES)}"
            )
        if raw["type"] == "scripted":
            if "script" not in raw:
                raise TeamFileError(f"{path}: scripted agent '{raw['name']}' needs 'script'")
            script_path = (path.parent / raw["script"]).resolve()
            if not script_path.is_file():
                raise TeamFileError(f"{path}: script file '{script_path}' not found")
        if raw["type"] in ("websurfer", "filesurfer"):
            needs_corpus = True

    corpus_dir = None
    if "corpus" in doc:
        corpus_dir = (path.parent / doc["corpus"]).resolve()
        if not corpus_dir.is_dir():
            raise TeamFileError(f"{path}: corpus directory '{corpus_dir}' not found")
    elif needs_corpus:
        raise TeamFileError(f"{path}: team uses browsing agents but names no 'corpus'")

    task = doc.get("task")
    if not isinstance(task, dict) or "to" not in task or "body" not in task:
        raise TeamFileError(f"{path}: 'task' must give 'to' and 'body'")
    if task["to"] not in seen:
        raise TeamFileError(f"{path}: task recipient '{task['to']}' is not an agent")

    edits = {}
    for edit_name, raw in (doc.get("edits") or {}).items():
        if (
            not isinstance(raw, dict)
            or not isinstance(raw.get("seq"), int)
            or raw["seq"] < 0
            or not isinstance(raw.get("body"), str)
            or not raw["body"].strip()
        ):
            raise TeamFileError(
                f"{path}: edit '{edit_name}' needs a non-negative 'seq' and a "
                f"non-empty 'body'"
            )
        edits[str(edit_name)] = {"seq": raw["seq"], "body": raw["body"]}

    return TeamSpec(
        name=name,
        path=path,
        description=str(doc.get("description", "")),
        corpus_dir=corpus_dir,
        agents=[dict(raw) for raw in raw_agents],
        task=dict(task),
        edits=edits,
    )


def build_team(
    spec: TeamSpec, store: CheckpointStore | None = None
) -> tuple[Runtime, SessionManager]:
    """Construct a runtime with the team registered, ready to seed."""
    runtime = Runtime(store=store)
    corpus = Corpus.load(spec.corpus_dir) if spec.corpus_dir else Corpus()
    for raw in spec.agents:
        name = raw["name"]
        description = str(raw.get("description", ""))
        kind = raw["type"]
        if kind == "scripted":
            script_path = (spec.path.parent / raw["script"]).resolve()
            with open(script_path) as fh:
                script_doc = yaml.safe_load(fh)
            script = Script.from_doc(script_doc, origin=str(script_path))
            agent = ScriptedAgent(
                name, script, description=description, script_path=str(script_path)
            )
        elif kind == "websurfer":
            agent = WebSurferAgent(name, corpus, description=description)
        elif kind == "executor":
            agent = ExecutorAgent(name, description=description)
        elif kind == "filesurfer":
            agent = FileSurferAgent(name, corpus, description=description)
        else:
            backend = CannedBackend(
                responses=raw.get("responses") or {},
                sequence=raw.get("sequence") or [],
                fallback=raw.get("fallback", "I have nothing to add about: {body}"),
            )
            agent = LlmAgent(
                name,
                backend,
                description=description,
                system_prompt=str(raw.get("system_prompt", "")),
                model_name=str(raw.get("model_name", "canned-1")),
            )
            if "temperature" in raw:
                agent.set_config({"temperature": float(raw["temperature"])})
        runtime.register_agent(agent)
    manager = SessionManager(runtime, expected_answer=spec.task.get("expected_answer"))
    return runtime, manager


def seed_task(manager: SessionManager, spec: TeamSpec):
    return manager.seed_task(
        recipient=spec.task["to"],
        body=str(spec.task["body"]),
        kind=str(spec.task.get("kind", "task")),
    )


def apply_edit(manager: SessionManager, spec: TeamSpec, edit_name: str) -> Session:
    """Apply one of the team file's named steering edits to the active branch."""
    if edit_name not in spec.edits:
        raise TeamFileError(
            f"team '{spec.name}' has no edit named '{edit_name}'; "
            f"available: {', '.join(sorted(spec.edits)) or '(none)'}"
        )
    edit = spec.edits[edit_name]
    return manager.edit_and_reset(
        manager.runtime.active_session_id, edit["seq"], edit["body"], label=edit_name
    )
