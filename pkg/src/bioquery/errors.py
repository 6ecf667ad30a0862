"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` plus enough fields
for a client to render a useful diagnostic (positions, expected tokens,
conflicting names).  ``payload()`` is the wire form used by the HTTP API
and the CLI.
"""

from __future__ import annotations


class BioQueryError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"

    def payload(self) -> dict:
        return {"code": self.code, "message": str(self)}


# ---------------------------------------------------------------------------
# Lexicon / tokenizer


class LexiconError(BioQueryError):
    code = "lexicon_error"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line

    def payload(self) -> dict:
        out = super().payload()
        if self.line is not None:
            out["line"] = self.line
        return out


class EmptyInputError(BioQueryError):
    code = "empty_input"

    def __init__(self):
        super().__init__("query text is empty")


class UnknownWordError(BioQueryError):
    code = "unknown_word"

    def __init__(self, surface: str, span: tuple[int, int]):
        super().__init__(f"unknown word {surface!r}")
        self.surface = surface
        self.span = span

    def payload(self) -> dict:
        out = super().payload()
        out["surface"] = self.surface
        out["span"] = list(self.span)
        return out


# ---------------------------------------------------------------------------
# Query grammar


class GrammarError(BioQueryError):
    code = "grammar_error"

    def __init__(self, position: int, expected: set[str], span: tuple[int, int]):
        shown = ", ".join(sorted(expected))
        super().__init__(f"expected one of: {shown}")
        self.position = position  # token index
        self.expected = frozenset(expected)
        self.span = span  # character offsets of the offending token

    def payload(self) -> dict:
        out = super().payload()
        out["position"] = self.position
        out["expected"] = sorted(self.expected)
        out["span"] = list(self.span)
        return out


class TypeMismatchError(BioQueryError):
    code = "type_mismatch"

    def __init__(self, verb: str, expected_type: str, found_type: str,
                 position: int, span: tuple[int, int]):
        super().__init__(
            f"{verb!r} needs a {expected_type} here, not a {found_type}")
        self.verb = verb
        self.expected_type = expected_type
        self.found_type = found_type
        self.position = position
        self.span = span

    def payload(self) -> dict:
        out = super().payload()
        out.update(verb=self.verb, expected_type=self.expected_type,
                   found_type=self.found_type, position=self.position,
                   span=list(self.span))
        return out


# ---------------------------------------------------------------------------
# Rule text


class RuleSyntaxError(BioQueryError):
    code = "rule_syntax_error"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column

    def payload(self) -> dict:
        out = super().payload()
        out["line"] = self.line
        out["column"] = self.column
        return out


class SafetyError(BioQueryError):
    code = "unsafe_rule"

    def __init__(self, variable: str, rule_text: str | None = None):
        detail = f" in {rule_text}" if rule_text else ""
        super().__init__(f"head variable {variable} does not occur in the body{detail}")
        self.variable = variable

    def payload(self) -> dict:
        out = super().payload()
        out["variable"] = self.variable
        return out


class ArityConflictError(BioQueryError):
    code = "arity_conflict"

    def __init__(self, predicate: str, arities: tuple[int, int]):
        super().__init__(
            f"predicate {predicate} used with arities {arities[0]} and {arities[1]}")
        self.predicate = predicate
        self.arities = arities

    def payload(self) -> dict:
        out = super().payload()
        out["predicate"] = self.predicate
        return out


# ---------------------------------------------------------------------------
# Fact ingestion


class IngestError(BioQueryError):
    code = "ingest_error"


class ManifestError(BioQueryError):
    code = "manifest_error"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# Explanations


class FactNotFoundError(BioQueryError):
    code = "fact_not_found"

    def __init__(self, fact: str):
        super().__init__(f"fact not present: {fact}")
        self.fact = fact


class MissingTemplateError(BioQueryError):
    code = "missing_template"

    def __init__(self, predicate: str):
        super().__init__(f"no sentence template for predicate {predicate}")
        self.predicate = predicate

    def payload(self) -> dict:
        out = super().payload()
        out["predicate"] = self.predicate
        return out


# ---------------------------------------------------------------------------
# Service


class UnknownQueryIdError(BioQueryError):
    code = "unknown_query_id"

    def __init__(self, query_id: str):
        super().__init__(f"unknown or expired query id {query_id!r}")
        self.query_id = query_id


class AnswerNotFoundError(BioQueryError):
    code = "answer_not_found"

    def __init__(self, answer: tuple[str, ...]):
        super().__init__(f"answer {list(answer)} was not returned by this query")
        self.answer = answer
