"""Tokenizer and parser for the controlled query language.

The grammar (keywords case-insensitive)::

    Query    := ("What" "are" "the" TypePlural | "Which" TypePlural) RelChain "?"
    RelChain := "that" VP { "and" "that" VP }
    VP       := ActiveVerb NPObj
              | ("is"|"are") PassiveParticiple "by" NPObj
    NPObj    := "the" TypeSingular ProperName
              | "the" TypePlural RelChain

All relative-clause subjects are plural, so active phrases appear in
their base form and phrases declared with a leading "be" conjugate to
is/are.  A relative clause introduced by a plural object noun binds a
fresh existential variable; "and that" clauses constrain the nearest
enclosing plural noun, with backtracking to an outer one when the inner
attachment fails to type-check.

``expected_next`` works over the type-erased grammar (noun and verb
classes without their type constraints), which is exactly what an
autocomplete widget should offer; type errors surface on parse as
TypeMismatchError.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator

from .errors import (EmptyInputError, GrammarError, TypeMismatchError,
                     UnknownWordError)
from .lexicon import Lexicon, keyword_display

KEYWORD = "keyword"
NOUN = "noun"
VERB = "verb"
NAME = "name"
QMARK = "qmark"

NAME_DESC = "<name>"
END_DESC = "<end of query>"


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    surface: str            # verbatim slice of the input
    value: str              # canonical form (lowercased word, noun literal, name)
    start: int
    end: int
    # noun tokens may be ambiguous between types or numbers
    readings: tuple[tuple[str, bool], ...] = ()

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def description(self) -> str:
        if self.kind == KEYWORD:
            return keyword_display(self.value)
        if self.kind == NAME:
            return NAME_DESC
        if self.kind == QMARK:
            return "?"
        return self.value


# ---------------------------------------------------------------------------
# Tokenizer


def _raw_pieces(text: str) -> list[tuple[str, int, int]]:
    """Split into (piece, start, end): words, quoted strings, question marks."""
    pieces = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "?":
            pieces.append(("?", i, i + 1))
            i += 1
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                raise UnknownWordError(text[i:], (i, n))
            pieces.append((text[i:j + 1], i, j + 1))
            i = j + 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in '?"':
            j += 1
        pieces.append((text[i:j], i, j))
        i = j
    return pieces


def _is_namelike(word: str) -> bool:
    return bool(word) and (word[0].isupper() or word[0].isdigit())


def tokenize(text: str, lexicon: Lexicon) -> list[Token]:
    """Classify the input into keyword, noun, verb, name and "?" tokens.

    Keywords and lexicon words match case-insensitively; proper names are
    maximal runs of capitalized or digit-initial words, or any quoted
    string (quotes stripped, case preserved).
    """
    if not text.strip():
        raise EmptyInputError()
    pieces = _raw_pieces(text)
    tokens: list[Token] = []
    i = 0

    def lexical_match(k: int) -> tuple[Token, int] | None:
        """Keyword/noun/verb classification at piece k, or None."""
        piece, start, end = pieces[k]
        if piece == "?" or piece.startswith('"'):
            return None
        word = piece.lower()
        # longest multi-word noun first ("side effects")
        limit = min(lexicon.max_noun_words, len(pieces) - k)
        for length in range(limit, 1, -1):
            parts = []
            for p, _, _ in pieces[k:k + length]:
                if p == "?" or p.startswith('"'):
                    break
                parts.append(p.lower())
            if len(parts) != length:
                continue
            readings = lexicon.noun_readings(tuple(parts))
            if readings:
                last_end = pieces[k + length - 1][2]
                return Token(NOUN, text[start:last_end], " ".join(parts),
                             start, last_end, readings), k + length
        if word in lexicon.keywords:
            return Token(KEYWORD, piece, word, start, end), k + 1
        if word in lexicon.verb_words:
            return Token(VERB, piece, word, start, end), k + 1
        readings = lexicon.noun_readings((word,))
        if readings:
            return Token(NOUN, piece, word, start, end, readings), k + 1
        return None

    while i < len(pieces):
        piece, start, end = pieces[i]
        if piece == "?":
            tokens.append(Token(QMARK, piece, "?", start, end))
            i += 1
            continue
        if piece.startswith('"'):
            inner = piece[1:-1].replace('\\"', '"').replace("\\\\", "\\")
            tokens.append(Token(NAME, piece, inner, start, end))
            i += 1
            continue
        matched = lexical_match(i)
        if matched is not None:
            tok, i = matched
            tokens.append(tok)
            continue
        if _is_namelike(piece):
            j = i + 1
            while j < len(pieces):
                nxt = pieces[j][0]
                if nxt == "?" or nxt.startswith('"') or not _is_namelike(nxt):
                    break
                if lexical_match(j) is not None:
                    break
                j += 1
            last_end = pieces[j - 1][2]
            value = " ".join(p for p, _, _ in pieces[i:j])
            tokens.append(Token(NAME, text[start:last_end], value, start, last_end))
            i = j
            continue
        raise UnknownWordError(piece, (start, end))
    return tokens


# ---------------------------------------------------------------------------
# Query intermediate form


@dataclass(frozen=True, slots=True)
class VariableRef:
    id: str


@dataclass(frozen=True, slots=True)
class IRConstant:
    value: str
    entity_type: str


IRArg = VariableRef | IRConstant


@dataclass(frozen=True, slots=True)
class IRAtom:
    predicate: str
    args: tuple[IRArg, IRArg]


@dataclass(frozen=True, slots=True)
class QueryIR:
    answer_var: tuple[str, str]                 # (variable id, entity type)
    vars: tuple[tuple[str, str], ...]           # id -> type, introduction order
    atoms: tuple[IRAtom, ...]

    def var_types(self) -> dict[str, str]:
        return dict(self.vars)

    def validate(self) -> None:
        types = self.var_types()
        answer_id, answer_type = self.answer_var
        if types.get(answer_id) != answer_type:
            raise AssertionError("answer variable missing from vars")
        seen_in_atoms: set[str] = set()
        for atom in self.atoms:
            for arg in atom.args:
                if isinstance(arg, VariableRef):
                    if arg.id not in types:
                        raise AssertionError(f"variable {arg.id} not declared")
                    seen_in_atoms.add(arg.id)
        if answer_id not in seen_in_atoms:
            raise AssertionError("answer variable occurs in no atom")
        if seen_in_atoms != set(types):
            raise AssertionError("declared variables unused by any atom")
        # connectivity over variables sharing an atom
        adjacency: dict[str, set[str]] = {v: set() for v in types}
        for atom in self.atoms:
            ids = [a.id for a in atom.args if isinstance(a, VariableRef)]
            for a in ids:
                for b in ids:
                    adjacency[a].add(b)
        frontier, reached = [answer_id], {answer_id}
        while frontier:
            for nxt in adjacency[frontier.pop()]:
                if nxt not in reached:
                    reached.add(nxt)
                    frontier.append(nxt)
        if reached != set(types):
            raise AssertionError("query graph is not connected")


# ---------------------------------------------------------------------------
# Parser


@dataclass(frozen=True, slots=True)
class Expectation:
    """One way the grammar can extend a prefix: a token class or literal."""
    kind: str                      # keyword | noun | verb | name | qmark | end
    literal: str | None = None     # display form where applicable
    entity_type: str | None = None # noun type, when structurally known
    plural: bool | None = None

    @property
    def description(self) -> str:
        if self.kind == "name":
            return NAME_DESC
        if self.kind == "end":
            return END_DESC
        return self.literal or self.kind


class _Var:
    """Placeholder renamed to v1, v2, ... once a parse is chosen."""

    __slots__ = ("entity_type",)

    def __init__(self, entity_type: str):
        self.entity_type = entity_type


_ParseArg = tuple  # (_Var | IRConstant)
_ParseAtom = tuple  # (predicate, arg1, arg2)


class _Machine:
    """Backtracking walker over the grammar with expectation recording.

    Every terminal scan first records what it would accept at that token
    position; the union of records at a position is therefore the exact
    erased-grammar expectation set there, and the furthest failed scan
    provides grammar diagnostics.
    """

    def __init__(self, tokens: list[Token], lexicon: Lexicon, typed: bool):
        self.toks = tokens
        self.lex = lexicon
        self.typed = typed
        self.expected: dict[int, set[Expectation]] = defaultdict(set)
        self.failed_at = -1
        self.mismatches: list[TypeMismatchError] = []

    # -- scanner helpers ----------------------------------------------

    def _tok(self, i: int) -> Token | None:
        return self.toks[i] if i < len(self.toks) else None

    def _fail(self, i: int) -> None:
        if i > self.failed_at:
            self.failed_at = i

    def _kw(self, i: int, word: str) -> Iterator[int]:
        self.expected[i].add(Expectation("keyword", keyword_display(word)))
        t = self._tok(i)
        if t is not None and t.kind == KEYWORD and t.value == word:
            yield i + 1
        else:
            self._fail(i)

    def _noun(self, i: int, plural: bool) -> Iterator[tuple[str, int]]:
        for literal, tid in self.lex.nouns(plural):
            self.expected[i].add(Expectation("noun", literal, tid, plural))
        t = self._tok(i)
        matched = False
        if t is not None and t.kind == NOUN:
            for tid, is_plural in t.readings:
                if is_plural == plural:
                    matched = True
                    yield tid, i + 1
        if not matched:
            self._fail(i)

    def _name(self, i: int, entity_type: str | None) -> Iterator[tuple[str, int]]:
        self.expected[i].add(Expectation("name", None, entity_type))
        t = self._tok(i)
        if t is not None and t.kind == NAME:
            yield t.value, i + 1
        else:
            self._fail(i)

    def _phrase(self, i: int, words: tuple[str, ...]) -> int | None:
        """Match a verb phrase word-by-word; None when it does not fit."""
        j = i
        for w in words:
            self.expected[j].add(Expectation("verb", w))
            t = self._tok(j)
            if t is None or t.kind not in (VERB, KEYWORD) or t.value != w:
                self._fail(j)
                return None
            j += 1
        return j

    def _mismatch(self, verb: str, expected_type: str, found_type: str, i: int):
        t = self._tok(i)
        span = t.span if t is not None else (0, 0)
        self.mismatches.append(
            TypeMismatchError(verb, expected_type, found_type, i, span))

    # -- grammar ------------------------------------------------------

    def query(self) -> Iterator[tuple[tuple[str, tuple[_ParseAtom, ...]], int]]:
        """Yield ((answer type, atoms), end position) for each complete parse."""
        for j in self._kw(0, "what"):
            for k in self._kw(j, "are"):
                for l in self._kw(k, "the"):
                    yield from self._query_tail(l, require_that=True)
        for j in self._kw(0, "which"):
            # "Which drugs treat ...?" puts the verb right after the noun;
            # "Which drugs that treat ...?" is accepted too.
            yield from self._query_tail(j, require_that=False)

    def _query_tail(self, i: int, require_that: bool):
        for tid, j in self._noun(i, plural=True):
            subject = _Var(tid)
            for atoms, k in self._rel_chain(j, subject, require_that):
                for l in self._qmark(k):
                    self.expected[l].add(Expectation("end"))
                    yield (subject, atoms), l

    def _qmark(self, i: int) -> Iterator[int]:
        self.expected[i].add(Expectation("qmark", "?"))
        t = self._tok(i)
        if t is not None and t.kind == QMARK:
            yield i + 1
        else:
            self._fail(i)

    def _rel_chain(self, i: int, subject: _Var, require_that: bool = True):
        for j in self._kw(i, "that"):
            for atoms, k in self._vp(j, subject):
                yield from self._rel_more(k, subject, atoms)
        if not require_that:
            for atoms, k in self._vp(i, subject):
                yield from self._rel_more(k, subject, atoms)

    def _rel_more(self, i: int, subject: _Var, acc: tuple):
        # Greedy: try to extend the current chain before closing it, so
        # "and that" binds to the nearest noun first.
        for j in self._kw(i, "and"):
            for k in self._kw(j, "that"):
                for atoms, l in self._vp(k, subject):
                    yield from self._rel_more(l, subject, acc + atoms)
        yield acc, i

    def _vp(self, i: int, subject: _Var):
        for words, frame in self.lex.active_entries:
            end = self._phrase(i, words)
            if end is None:
                continue
            if self.typed and subject.entity_type != frame.subject_type:
                self._mismatch(words[0], frame.subject_type, subject.entity_type, i)
                continue
            yield from self._vp_object(end, frame, subject, passive=False,
                                       verb=words[0])
        if self.lex.has_be_alternatives:
            for be_word in ("is", "are"):
                for j in self._kw(i, be_word):
                    yield from self._after_be(j, subject)

    def _after_be(self, i: int, subject: _Var):
        for words, frame in self.lex.passive_entries:
            end = self._phrase(i, words)
            if end is None:
                continue
            if self.typed and subject.entity_type != frame.object_type:
                self._mismatch(words[0], frame.object_type, subject.entity_type, i)
                continue
            yield from self._vp_object(end, frame, subject, passive=True,
                                       verb=words[0])
        for words, frame in self.lex.be_entries:
            end = self._phrase(i, words)
            if end is None:
                continue
            if self.typed and subject.entity_type != frame.subject_type:
                self._mismatch(words[0], frame.subject_type, subject.entity_type, i)
                continue
            yield from self._vp_object(end, frame, subject, passive=False,
                                       verb=words[0])

    def _vp_object(self, i: int, frame, subject: _Var, passive: bool, verb: str):
        wanted = frame.subject_type if passive else frame.object_type
        for obj, nested, j in self._npobj(i, wanted, verb):
            s_role, o_role = (obj, subject) if passive else (subject, obj)
            if not frame.subject_first:
                s_role, o_role = o_role, s_role
            atom = (frame.predicate, s_role, o_role)
            yield (atom,) + nested, j

    def _npobj(self, i: int, wanted_type: str, verb: str):
        for j in self._kw(i, "the"):
            for tid, k in self._noun(j, plural=False):
                if self.typed and tid != wanted_type:
                    self._mismatch(verb, wanted_type, tid, j)
                    continue
                for value, l in self._name(k, tid):
                    yield IRConstant(value, tid), (), l
            for tid, k in self._noun(j, plural=True):
                if self.typed and tid != wanted_type:
                    self._mismatch(verb, wanted_type, tid, j)
                    continue
                fresh = _Var(tid)
                for atoms, l in self._rel_chain(k, fresh):
                    yield fresh, atoms, l


def _number_variables(subject: _Var, atoms: tuple) -> QueryIR:
    names: dict[int, str] = {}
    order: list[tuple[str, str]] = []

    def visit(var: _Var) -> str:
        key = id(var)
        if key not in names:
            names[key] = f"v{len(names) + 1}"
            order.append((names[key], var.entity_type))
        return names[key]

    answer_id = visit(subject)
    ir_atoms = []
    for pred, a1, a2 in atoms:
        args = tuple(VariableRef(visit(a)) if isinstance(a, _Var) else a
                     for a in (a1, a2))
        ir_atoms.append(IRAtom(pred, args))
    return QueryIR(answer_var=(answer_id, subject.entity_type),
                   vars=tuple(order), atoms=tuple(ir_atoms))


def parse(tokens: list[Token], lexicon: Lexicon) -> QueryIR:
    """Parse a token sequence into a QueryIR, or raise a diagnostic.

    The first parse in the deterministic exploration order wins; the IR
    therefore always satisfies its invariants for any accepted input.
    """
    if not tokens:
        raise EmptyInputError()
    machine = _Machine(tokens, lexicon, typed=True)
    result = None
    for (subject, atoms), end in machine.query():
        if end == len(tokens):
            result = (subject, atoms)
            break
        machine._fail(end)
    if result is None:
        position = machine.failed_at
        best_mismatch = None
        for m in machine.mismatches:
            if best_mismatch is None or m.position > best_mismatch.position:
                best_mismatch = m
        if best_mismatch is not None and best_mismatch.position >= position:
            raise best_mismatch
        expected = {e.description for e in machine.expected.get(position, set())}
        if position < len(tokens):
            span = tokens[position].span
        else:
            span = (tokens[-1].end, tokens[-1].end)
        raise GrammarError(position, expected, span)
    ir = _number_variables(*result)
    ir.validate()
    return ir


def expectations_at(prefix: list[Token], lexicon: Lexicon) -> set[Expectation]:
    """Structured next-token expectations for a (possibly empty) prefix."""
    return prefix_expectation_table(prefix, lexicon).get(len(prefix), set())


def prefix_expectation_table(tokens: list[Token],
                             lexicon: Lexicon) -> dict[int, set[Expectation]]:
    """Expectations at every position in one pass.

    Position ``i`` holds exactly ``expectations_at(tokens[:i])``: a walk
    attempts its scan at ``i`` whenever the first ``i`` tokens fit some
    derivation, whatever comes after, so one exploration of the full
    sequence records the per-prefix sets all at once.
    """
    if not lexicon.types or not lexicon.frames:
        return {}
    machine = _Machine(tokens, lexicon, typed=False)
    for _ in machine.query():
        pass
    return dict(machine.expected)


def expected_next(prefix: list[Token], lexicon: Lexicon) -> set[str]:
    """Token descriptions with which the prefix extends to a sentence.

    Unparseable prefixes yield the empty set; a complete sentence yields
    only the end-of-query marker.
    """
    return {e.description for e in expectations_at(prefix, lexicon)}
