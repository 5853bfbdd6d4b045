"""A browsing agent over the offline corpus.

It accepts one action per instruction: visit a page, find text on the open
page, sort a table on the open page, or read a row of a table.  Instructions
naming two or more distinct actions are refused with a report that says so,
mirroring how real browsing agents degrade on compound requests.

Checkpointed state is deliberately small: the open URL, a viewport marker,
and the active sort specs.  Sorted views are re-derived from the corpus on
demand, so restoring a checkpoint never has to persist table contents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..messages import Envelope
from .base import Agent, HandlerContext
from .corpus import Corpus, Page

# Verbs that start an action, grouped by the action they request.  Verbs in
# REPORT_VERBS describe how to report results and are not actions.
FAMILIES = {
    "visit": {"visit", "open", "navigate", "browse", "go"},
    "find": {"find", "identify", "locate", "search", "look", "lookup"},
    "sort": {"sort", "order", "arrange", "rank"},
    "read": {"read"},
}
REPORT_VERBS = {"provide", "give", "return", "report", "include", "state", "tell"}

POLITENESS = ("please ", "can you ", "could you ", "would you ", "now ", "next ", "then ")

INCREASING_WORDS = {"increasing", "ascending", "asc"}
DECREASING_WORDS = {"decreasing", "descending", "desc"}


@dataclass
class Action:
    name: str
    args: dict


def _strip_politeness(text: str) -> str:
    changed = True
    while changed:
        changed = False
        for prefix in POLITENESS:
            if text.lower().startswith(prefix):
                text = text[len(prefix):]
                changed = True
    return text.strip()


def _words(text: str) -> list[str]:
    return re.findall(r"[a-z0-9_/.']+", text.lower())


def parse_instruction(body: str, page: Page | None) -> Action:
    """Turn one instruction into an Action.  Never raises; bad input comes
    back as a 'refuse' or 'find' action so the agent always reports."""
    text = body.strip()

    m = re.match(r"^(\w+)\s*\((.*)\)\s*$", text, re.DOTALL)
    if m:
        name = m.group(1).lower()
        args = [a.strip().strip("'\"") for a in m.group(2).split(",")] if m.group(2).strip() else []
        if name == "visit" and len(args) == 1:
            return Action("visit", {"url": args[0]})
        if name in ("find", "search") and len(args) == 1:
            return Action("find", {"query": args[0]})
        if name == "sort" and len(args) >= 2:
            descending = True
            if len(args) >= 3:
                descending = args[2].lower() not in INCREASING_WORDS
            return Action("sort", {"table": args[0], "column": args[1], "descending": descending})
        if name in ("read_row", "readrow") and len(args) == 2 and args[1].isdigit():
            return Action("read", {"table": args[0], "row": int(args[1])})
        return Action("refuse", {"reason": f"unknown call {name}()"})

    text = _strip_politeness(text)
    words = _words(text)
    present = [
        fam for fam, verbs in FAMILIES.items()
        if any(w in verbs for w in words)
    ]
    if len(present) >= 2:
        return Action("multi", {"families": present})
    if not present:
        # No action verb at all: treat the whole instruction as a lookup.
        return Action("find", {"query": text.rstrip(". ")})
    family = present[0]

    if family == "visit":
        m = re.search(r"\b(visit|open|navigate|browse|go)\b", text, re.IGNORECASE)
        rest = text[m.end():].strip()
        if rest.lower().startswith("to "):
            rest = rest[3:]
        return Action("visit", {"url": rest.rstrip(". ").strip()})

    if family == "sort":
        table = None
        if page is not None:
            for w in words:
                if w in page.tables:
                    table = w
                    break
        m = re.search(r"\bby\s+([A-Za-z_]\w*)", text, re.IGNORECASE)
        column = m.group(1) if m else None
        descending = True
        if any(w in INCREASING_WORDS for w in words):
            descending = False
        return Action("sort", {"table": table, "column": column, "descending": descending})

    if family == "read":
        m = re.search(r"\brow\s+(\d+)", text, re.IGNORECASE)
        row = int(m.group(1)) if m else None
        table = None
        if page is not None:
            for w in words:
                if w in page.tables:
                    table = w
                    break
        if table is None:
            m = re.search(r"\btable\s+(\w+)", text, re.IGNORECASE)
            table = m.group(1) if m else None
        return Action("read", {"table": table, "row": row})

    m = re.search(r"\b(find|identify|locate|search|look)(\s+up|\s+for)?\b", text, re.IGNORECASE)
    query = text[m.end():].strip().rstrip(". ")
    return Action("find", {"query": query.strip("'\"")})


class WebSurferAgent(Agent):
    """Single-action browsing agent backed by the corpus."""

    agent_type = "websurfer"

    def __init__(self, name: str, corpus: Corpus, description: str = ""):
        self.corpus = corpus
        super().__init__(name, description=description, handled_kinds=("task",))

    def initial_state(self) -> dict:
        return {"current_url": None, "viewport_index": 0, "sorts": {}}

    def _page(self) -> Page | None:
        url = self._state.get("current_url")
        return self.corpus.page(url) if url else None

    def _rows(self, page: Page, table: str) -> list[list]:
        spec = self._state["sorts"].get(f"{page.url}::{table}")
        t = page.tables[table]
        if spec:
            return t.sorted_rows(spec["column"], spec["descending"])
        return list(t.rows)

    def handle(self, envelope: Envelope, ctx: HandlerContext) -> None:
        page = self._page()
        action = parse_instruction(envelope.body, page)
        reply = lambda body: ctx.send(envelope.sender, "report", body)

        if action.name == "multi":
            fams = ", ".join(action.args["families"])
            ctx.think(f"Action: refuse multi-action ({fams})")
            reply(
                f"That instruction asks for multiple actions ({fams}). "
                f"I can only perform one action per instruction."
            )
            return

        if action.name == "refuse":
            ctx.think(f"Action: refuse ({action.args['reason']})")
            reply(f"I could not act on that instruction: {action.args['reason']}.")
            return

        if action.name == "visit":
            url = action.args["url"]
            ctx.think(f"Action: visit {url}")
            target = self.corpus.page(url)
            if target is None:
                reply(f"Could not visit {url}: page not found.")
                return
            self._state["current_url"] = url
            self._state["viewport_index"] = 0
            summary = f"Visited {url}: {target.title}."
            if target.tables:
                tables = ", ".join(
                    f"{name} ({len(t.rows)} rows)" for name, t in target.tables.items()
                )
                summary += f" Tables: {tables}."
            reply(summary)
            return

        if page is None:
            ctx.think(f"Action: {action.name} with no page open")
            reply("No page is open. Visit a page first.")
            return

        if action.name == "find":
            query = action.args["query"]
            ctx.think(f"Action: find '{query}' on {page.url}")
            needle = query.lower()
            for i, line in enumerate(page.text):
                if needle and needle in line.lower():
                    self._state["viewport_index"] = i
                    reply(f"Found on {page.url}: {line}")
                    return
            reply(f"No text matching '{query}' found on {page.url}.")
            return

        if action.name == "sort":
            table, column = action.args["table"], action.args["column"]
            descending = action.args["descending"]
            direction = "decreasing" if descending else "increasing"
            ctx.think(f"Action: sort {table} by {column} ({direction})")
            if not table or table not in page.tables:
                reply(
                    f"No table named {table} on {page.url}."
                    if table else f"Could not tell which table to sort on {page.url}."
                )
                return
            t = page.tables[table]
            if not column or column not in t.columns:
                reply(f"Could not tell which column to sort {table} by.")
                return
            self._state["sorts"][f"{page.url}::{table}"] = {
                "column": column, "descending": descending,
            }
            rows = self._rows(page, table)
            reply(
                f"Sorted table {table} by {column} in {direction} order. "
                f"Row 1: {t.row_doc(rows[0])}."
            )
            return

        if action.name == "read":
            table, row = action.args["table"], action.args["row"]
            ctx.think(f"Action: read row {row} of {table}")
            if not table or table not in page.tables:
                reply(
                    f"No table named {table} on {page.url}."
                    if table else f"Could not tell which table to read on {page.url}."
                )
                return
            if not row:
                reply(f"Could not tell which row of {table} to read.")
                return
            rows = self._rows(page, table)
            if row < 1 or row > len(rows):
                reply(f"Table {table} has only {len(rows)} rows.")
                return
            self._state["viewport_index"] = row
            t = page.tables[table]
            reply(f"Row {row} of table {table}: {t.row_doc(rows[row - 1])}.")
            return
