"""Deterministic scripted agents.

A script is an ordered list of rules.  On each incoming message the first
rule whose conditions all hold fires; its effects run in order.  Scripts are
the stand-in for model-driven agents: they give runs that are reproducible
byte for byte, which the replay and reset machinery depends on.

Rule conditions (all optional, combined with AND):
  kind: <exact match on the envelope kind>
  body_contains: <case-sensitive substring of the body>
  body_pattern: <regex, re.search semantics; named groups become variables>
  require_state: {key: value, ...}   # string equality against agent state
  default: true                      # matches anything; required as last rule

Rule effects (all optional, applied in this order):
  think: <template>                  # record an internal note
  set_state: {key: template, ...}
  inc_state: [key, ...]              # integer counters
  emit:                              # queued in list order
    - to: <agent name, may be "{sender}">
      kind: <kind>
      body: <template>
      # or instead of body:
      body_join: {vars: [a, b], sep: ", ", sort: false}

Templates use str.format with variables drawn from, in increasing priority:
agent state, the regex named groups, and {body}/{sender}/{kind} of the
incoming envelope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import yaml

from ..errors import ScriptError
from ..messages import Envelope
from .base import Agent, ConfigField, HandlerContext


@dataclass
class Rule:
    kind: str | None = None
    body_contains: str | None = None
    body_pattern: str | None = None
    require_state: dict = field(default_factory=dict)
    default: bool = False
    think: str | None = None
    set_state: dict = field(default_factory=dict)
    inc_state: list[str] = field(default_factory=list)
    emit: list[dict] = field(default_factory=list)

    def __post_init__(self):
        self._compiled = re.compile(self.body_pattern) if self.body_pattern else None

    def matches(self, envelope: Envelope, state: dict) -> dict | None:
        """Return the capture dict when the rule fires, else None."""
        if self.default:
            return {}
        if self.kind is not None and envelope.kind != self.kind:
            return None
        body = envelope.body
        if self.body_contains is not None and self.body_contains not in body:
            return None
        captures: dict = {}
        if self._compiled is not None:
            m = self._compiled.search(body)
            if m is None:
                return None
            captures = m.groupdict()
        for key, want in self.require_state.items():
            if str(state.get(key, "")) != str(want):
                return None
        return captures


@dataclass
class Script:
    """A validated list of rules plus the kinds the agent accepts."""

    kinds: tuple[str, ...]
    rules: list[Rule]

    @classmethod
    def from_doc(cls, doc: dict, origin: str = "<script>") -> "Script":
        if not isinstance(doc, dict):
            raise ScriptError(f"{origin}: script document must be a mapping")
        kinds = doc.get("kinds", [])
        if (
            not isinstance(kinds, list)
            or not kinds
            or not all(isinstance(k, str) for k in kinds)
        ):
            raise ScriptError(f"{origin}: 'kinds' must be a non-empty list of strings")
        raw_rules = doc.get("rules")
        if not isinstance(raw_rules, list) or not raw_rules:
            raise ScriptError(f"{origin}: 'rules' must be a non-empty list")
        rules = []
        for i, raw in enumerate(raw_rules):
            if not isinstance(raw, dict):
                raise ScriptError(f"{origin}: rule {i} must be a mapping")
            known = {
                "kind", "body_contains", "body_pattern", "require_state",
                "default", "think", "set_state", "inc_state", "emit",
            }
            extra = set(raw) - known
            if extra:
                raise ScriptError(
                    f"{origin}: rule {i} has unknown keys: {', '.join(sorted(extra))}"
                )
            try:
                rule = Rule(
                    kind=raw.get("kind"),
                    body_contains=raw.get("body_contains"),
                    body_pattern=raw.get("body_pattern"),
                    require_state=raw.get("require_state") or {},
                    default=bool(raw.get("default", False)),
                    think=raw.get("think"),
                    set_state=raw.get("set_state") or {},
                    inc_state=list(raw.get("inc_state") or []),
                    emit=list(raw.get("emit") or []),
                )
            except re.error as exc:
                raise ScriptError(f"{origin}: rule {i} has a bad pattern: {exc}")
            for j, em in enumerate(rule.emit):
                if not isinstance(em, dict) or "to" not in em or "kind" not in em:
                    raise ScriptError(
                        f"{origin}: rule {i} emit {j} needs 'to' and 'kind'"
                    )
                if ("body" in em) == ("body_join" in em):
                    raise ScriptError(
                        f"{origin}: rule {i} emit {j} needs exactly one of "
                        f"'body' or 'body_join'"
                    )
            rules.append(rule)
        if not rules[-1].default:
            raise ScriptError(f"{origin}: the last rule must set 'default: true'")
        for i, rule in enumerate(rules[:-1]):
            if rule.default:
                raise ScriptError(
                    f"{origin}: only the last rule may be the default (rule {i})"
                )
        return cls(kinds=tuple(kinds), rules=rules)


class _SafeDict(dict):
    """Leave unknown {placeholders} intact instead of raising."""

    def __missing__(self, key):
        return "{" + key + "}"


def render(template: str, variables: dict) -> str:
    return template.format_map(_SafeDict(variables))


class ScriptedAgent(Agent):
    """An agent whose behaviour is entirely a rule table."""

    agent_type = "scripted"

    def __init__(
        self,
        name: str,
        script: Script,
        description: str = "",
        script_path: str = "",
    ):
        self.script = script
        self.script_path = script_path
        super().__init__(name, description=description, handled_kinds=script.kinds)

    config_schema = (
        ConfigField(
            "script",
            str,
            "Path of the rule file this agent follows; "
            "setting a new path reloads the rules.",
        ),
    )

    def default_config(self) -> dict:
        return {"script": self.script_path}

    def set_config(self, config: dict) -> None:
        super().set_config(config)
        new_path = self._config["script"]
        if new_path != self.script_path:
            try:
                with open(new_path, "r", encoding="utf-8") as fh:
                    doc = yaml.safe_load(fh)
            except OSError as exc:
                raise ScriptError(f"{new_path}: {exc}")
            self.script = Script.from_doc(doc, origin=new_path)
            self.script_path = new_path
            self.handled_kinds = self.script.kinds

    def handle(self, envelope: Envelope, ctx: HandlerContext) -> None:
        for rule in self.script.rules:
            captures = rule.matches(envelope, self._state)
            if captures is None:
                continue
            variables = dict(self._state)
            variables.update({k: v for k, v in captures.items() if v is not None})
            variables.update(
                {"body": envelope.body, "sender": envelope.sender, "kind": envelope.kind}
            )
            if rule.think:
                ctx.think(render(rule.think, variables))
            for key, tmpl in rule.set_state.items():
                self._state[key] = render(str(tmpl), variables)
                variables[key] = self._state[key]
            for key in rule.inc_state:
                self._state[key] = int(self._state.get(key, 0)) + 1
                variables[key] = self._state[key]
            for em in rule.emit:
                to = render(em["to"], variables)
                kind = render(em["kind"], variables)
                if "body" in em:
                    body = render(str(em["body"]), variables)
                else:
                    spec = em["body_join"]
                    parts = [str(variables.get(v, "")) for v in spec.get("vars", [])]
                    if spec.get("sort", False):
                        parts = sorted(parts)
                    body = spec.get("sep", ", ").join(parts)
                ctx.send(to, kind, body)
            return
