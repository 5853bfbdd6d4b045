"""Arithmetic executor agent.

Takes a task whose body is (or contains) an arithmetic expression, evaluates
it, and reports the bare value back to the sender.  Expressions support
integers, floats, + - * /, parentheses, and unary minus.  Fenced code blocks
are unwrapped first so the agent can run what a coder agent hands it.

The evaluator is a tiny recursive-descent parser rather than eval(): message
bodies are untrusted input.
"""

from __future__ import annotations

from ..messages import Envelope
from .base import Agent, HandlerContext


class ExprError(Exception):
    def __init__(self, position: int, reason: str):
        super().__init__(f"parse-error at position {position}: {reason}")
        self.position = position
        self.reason = reason


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> int | float:
        value = self.expr()
        self._skip_ws()
        if self.pos != len(self.text):
            raise ExprError(self.pos, f"unexpected character {self.text[self.pos]!r}")
        return value

    def expr(self) -> int | float:
        value = self.term()
        while self._peek() and self._peek() in "+-":
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> int | float:
        value = self.factor()
        while self._peek() and self._peek() in "*/":
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs == 0:
                    raise ExprError(self.pos, "division by zero")
                value = value / rhs
        return value

    def factor(self) -> int | float:
        ch = self._peek()
        if ch == "-":
            self.pos += 1
            return -self.factor()
        if ch == "(":
            self.pos += 1
            value = self.expr()
            if self._peek() != ")":
                raise ExprError(self.pos, "expected ')'")
            self.pos += 1
            return value
        return self.number()

    def number(self) -> int | float:
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] == "."):
            self.pos += 1
        token = self.text[start:self.pos]
        if not token:
            reason = "expected a number"
            if start < len(self.text):
                reason = f"unexpected character {self.text[start]!r}"
            raise ExprError(start, reason)
        try:
            return float(token) if "." in token else int(token)
        except ValueError:
            raise ExprError(start, f"bad number {token!r}")


def evaluate(text: str) -> int | float:
    return _Parser(text).parse()


def extract_expression(body: str) -> str:
    """Unwrap a fenced block if present, else strip a 'compute' prefix."""
    if "```" in body:
        first = body.index("```")
        rest = body[first + 3:]
        end = rest.find("```")
        block = rest if end < 0 else rest[:end]
        # Drop a language tag on the opening fence line.
        if "\n" in block:
            head, tail = block.split("\n", 1)
            if head.strip().isalpha():
                block = tail
        return block.strip()
    text = body.strip()
    if text.lower().startswith("compute "):
        return text[len("compute "):].strip()
    return text


def format_value(value: int | float) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(value)


class ExecutorAgent(Agent):
    """Evaluates arithmetic found in task bodies and reports the value."""

    agent_type = "executor"

    def __init__(self, name: str, description: str = ""):
        super().__init__(name, description=description, handled_kinds=("task",))

    def handle(self, envelope: Envelope, ctx: HandlerContext) -> None:
        expr = extract_expression(envelope.body)
        ctx.think(f"Evaluating: {expr}")
        try:
            value = evaluate(expr)
        except ExprError as exc:
            ctx.send(envelope.sender, "report", f"parse-error at position {exc.position}: {exc.reason}")
            return
        ctx.send(envelope.sender, "report", format_value(value))
