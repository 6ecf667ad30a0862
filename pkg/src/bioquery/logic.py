"""Logic-program representation: terms, atoms, rules, text rendering and parsing.

The concrete syntax is the usual rule form::

    drug_gene(X,Y) :- ctd_drug_gene(X,Y).
    drug_gene("Epinephrine","ADRB1").

Variables start with an uppercase letter, constants are double-quoted
strings (backslash escapes ``\"`` and ``\\``), ``%`` begins a comment.
``parse_program(render_program(p))`` reproduces ``p`` exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import RuleSyntaxError

VARIABLE_RE = re.compile(r"[A-Z][A-Za-z0-9]*\Z")
PREDICATE_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __post_init__(self):
        if not VARIABLE_RE.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True, slots=True)
class Constant:
    value: str


Term = Union[Variable, Constant]


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple[Term, ...]

    def __post_init__(self):
        if not PREDICATE_RE.match(self.predicate):
            raise ValueError(f"invalid predicate name {self.predicate!r}")

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> set[str]:
        return {t.name for t in self.args if isinstance(t, Variable)}


@dataclass(frozen=True, slots=True)
class Rule:
    head: Atom
    body: tuple[Atom, ...] = ()

    @property
    def is_fact(self) -> bool:
        return not self.body

    def unbound_head_variables(self) -> list[str]:
        """Head variables not covered by the body (safety violations)."""
        bound = set()
        for atom in self.body:
            bound |= atom.variables()
        return [v for v in sorted(self.head.variables()) if v not in bound]


@dataclass(frozen=True, slots=True)
class Program:
    rules: tuple[Rule, ...] = ()


# ---------------------------------------------------------------------------
# Rendering


def quote_constant(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_term(term: Term) -> str:
    if isinstance(term, Variable):
        return term.name
    return quote_constant(term.value)


def render_atom(atom: Atom) -> str:
    return f"{atom.predicate}({','.join(render_term(t) for t in atom.args)})"


def render_rule(rule: Rule) -> str:
    if rule.is_fact:
        return render_atom(rule.head) + "."
    body = ", ".join(render_atom(a) for a in rule.body)
    return f"{render_atom(rule.head)} :- {body}."


def render_program(program: Program | Iterable[Rule]) -> str:
    rules = program.rules if isinstance(program, Program) else tuple(program)
    if not rules:
        return ""
    return "\n".join(render_rule(r) for r in rules) + "\n"


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<implies>:-)
  | (?P<punct>[(),.])
  | (?P<var>[A-Z][A-Za-z0-9]*)
  | (?P<pred>[a-z][a-z0-9_]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
    """,
    re.VERBOSE,
)

_ESCAPE_RE = re.compile(r"\\(.)")


def _unquote(text: str) -> str:
    return _ESCAPE_RE.sub(lambda m: m.group(1), text[1:-1])


class _RuleTokens:
    """Token stream over rule text, tracking line and column for errors."""

    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int, int]] = []  # kind, value, line, col
        pos, line, line_start = 0, 1, 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                col = pos - line_start + 1
                raise RuleSyntaxError(f"unexpected character {text[pos]!r}", line, col)
            kind = m.lastgroup
            value = m.group()
            if kind not in ("ws", "comment"):
                self.tokens.append((kind, value, line, pos - line_start + 1))
            newlines = value.count("\n")
            if newlines:
                line += newlines
                line_start = pos + value.rindex("\n") + 1
            pos = m.end()
        self.line = line
        self.col = len(text) - line_start + 1
        self.i = 0

    def peek(self) -> tuple[str, str, int, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> tuple[str, str, int, int] | None:
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def fail(self, message: str) -> RuleSyntaxError:
        tok = self.peek()
        if tok is None:
            return RuleSyntaxError(message + ", got end of input", self.line, self.col)
        return RuleSyntaxError(f"{message}, got {tok[1]!r}", tok[2], tok[3])

    def expect(self, kind: str, value: str | None = None) -> tuple[str, str, int, int]:
        tok = self.peek()
        if tok is None or tok[0] != kind or (value is not None and tok[1] != value):
            wanted = value if value is not None else kind
            raise self.fail(f"expected {wanted!r}")
        return self.next()


def _parse_atom(ts: _RuleTokens) -> Atom:
    kind, name, line, col = ts.expect("pred")
    ts.expect("punct", "(")
    args: list[Term] = []
    while True:
        tok = ts.peek()
        if tok is None:
            raise ts.fail("expected a term")
        if tok[0] == "var":
            args.append(Variable(tok[1]))
            ts.next()
        elif tok[0] == "string":
            args.append(Constant(_unquote(tok[1])))
            ts.next()
        else:
            raise ts.fail("expected a variable or quoted constant")
        tok = ts.peek()
        if tok is not None and tok[:2] == ("punct", ","):
            ts.next()
            continue
        break
    ts.expect("punct", ")")
    return Atom(name, tuple(args))


def parse_program(text: str) -> list[Rule]:
    """Parse rule text into a list of rules, in source order.

    Raises RuleSyntaxError with line and column on malformed input.
    Safety and arity checks are the rule layer's job, not done here.
    """
    ts = _RuleTokens(text)
    rules: list[Rule] = []
    while ts.peek() is not None:
        head = _parse_atom(ts)
        body: list[Atom] = []
        tok = ts.peek()
        if tok is not None and tok[0] == "implies":
            ts.next()
            while True:
                body.append(_parse_atom(ts))
                tok = ts.peek()
                if tok is not None and tok[:2] == ("punct", ","):
                    ts.next()
                    continue
                break
        ts.expect("punct", ".")
        rules.append(Rule(head, tuple(body)))
    return rules
