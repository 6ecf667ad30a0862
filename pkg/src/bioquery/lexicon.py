"""Vocabulary for the controlled query language.

A lexicon declares entity types (noun pairs like gene/genes) and verb
frames (how a verb phrase relates a subject type to an object type and
which predicate it compiles to).  The grammar itself is fixed; all
domain words come from here, so new relations need only a lexicon edit.

File format, one declaration per line, tab-separated, ``#`` comments::

    type<TAB>singular<TAB>plural
    verb<TAB>active<TAB>third_person<TAB>passive_phrase<TAB>subject_type<TAB>object_type<TAB>predicate

``passive_phrase`` is the participle plus its preposition ("targeted by")
or ``-`` when the frame has no passive voice.  Active phrases starting
with "be" ("be related to") conjugate with is/are in sentences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import LexiconError

BASE_KEYWORDS = frozenset({"what", "which", "are", "is", "the", "that", "and", "by"})
BE_FORMS = frozenset({"be", "is", "are"})

# Sentence-initial grammar words keep their conventional capitals.
KEYWORD_DISPLAY = {"what": "What", "which": "Which"}


def keyword_display(word: str) -> str:
    return KEYWORD_DISPLAY.get(word, word)


@dataclass(frozen=True, slots=True)
class EntityType:
    id: str
    singular: str
    plural: str


@dataclass(frozen=True, slots=True)
class VerbFrame:
    active: str
    third_person: str
    passive: str | None
    subject_type: str
    object_type: str
    predicate: str
    # When False the compiled atom takes (object, subject) argument order.
    # The file format always produces subject-first frames.
    subject_first: bool = True

    @property
    def verb_word(self) -> str:
        """First content word of the active phrase ("interact", "related")."""
        words = self.active.split()
        return words[1] if words[0] in BE_FORMS and len(words) > 1 else words[0]


def _phrase_words(phrase: str) -> list[str]:
    return phrase.lower().split()


class Lexicon:
    """Immutable vocabulary with the lookup tables the tokenizer and parser use.

    Word classification precedence: multi-word nouns, then keywords, then
    verb words, then single-word nouns; anything else must look like a
    proper name.  Frames whose phrases collide with these sets should be
    avoided when authoring a lexicon.
    """

    def __init__(self, types: Iterable[EntityType], frames: Iterable[VerbFrame],
                 known_names: Mapping[str, frozenset[str]] | None = None):
        self.types = tuple(types)
        self.frames = tuple(frames)
        self.known_names = {k: frozenset(v) for k, v in (known_names or {}).items()}
        self._validate()
        self._build_tables()

    # -- construction -------------------------------------------------

    def _validate(self) -> None:
        self.types_by_id: dict[str, EntityType] = {}
        for t in self.types:
            if t.id in self.types_by_id:
                raise LexiconError(f"duplicate entity type {t.id!r}")
            self.types_by_id[t.id] = t
        seen_frames: set[tuple[str, str]] = set()
        seen_predicates: set[str] = set()
        for f in self.frames:
            for ref in (f.subject_type, f.object_type):
                if ref not in self.types_by_id:
                    raise LexiconError(
                        f"frame {f.active!r} references undeclared type {ref!r}")
            key = (f.active.lower(), f.subject_type)
            if key in seen_frames:
                raise LexiconError(
                    f"duplicate frame {f.active!r} for subject {f.subject_type!r}")
            seen_frames.add(key)
            if f.predicate in seen_predicates:
                raise LexiconError(
                    f"predicate {f.predicate!r} used by more than one frame")
            seen_predicates.add(f.predicate)

    def _build_tables(self) -> None:
        keywords = set(BASE_KEYWORDS)
        verb_words: set[str] = set()
        # noun word sequence -> readings (type id, plural?)
        noun_map: dict[tuple[str, ...], list[tuple[str, bool]]] = {}
        for t in self.types:
            for surface, plural in ((t.singular, False), (t.plural, True)):
                words = tuple(surface.lower().split())
                if not words:
                    raise LexiconError(f"entity type {t.id!r} has an empty noun")
                noun_map.setdefault(words, []).append((t.id, plural))
        self._noun_map = {k: tuple(v) for k, v in noun_map.items()}
        self.max_noun_words = max((len(k) for k in noun_map), default=0)

        # (phrase words to match, frame); actives split by conjugation style
        active_entries: list[tuple[tuple[str, ...], VerbFrame]] = []
        be_entries: list[tuple[tuple[str, ...], VerbFrame]] = []
        passive_entries: list[tuple[tuple[str, ...], VerbFrame]] = []

        def classify(words: list[str]) -> None:
            if not words:
                return
            rest = words[1:] if words[0] in BE_FORMS else words
            if not rest:
                return
            verb_words.add(rest[0])
            keywords.update(rest[1:])

        for f in self.frames:
            active = _phrase_words(f.active)
            third = _phrase_words(f.third_person)
            if not active:
                raise LexiconError(f"frame for {f.predicate!r} has an empty active form")
            classify(active)
            classify(third)
            if active[0] in BE_FORMS:
                if len(active) < 2:
                    raise LexiconError(f"frame {f.active!r} has no content word")
                be_entries.append((tuple(active[1:]), f))
            else:
                active_entries.append((tuple(active), f))
            if f.passive:
                passive = _phrase_words(f.passive)
                verb_words.add(passive[0])
                keywords.update(passive[1:])
                passive_entries.append((tuple(passive), f))

        self.keywords = frozenset(keywords)
        self.verb_words = frozenset(verb_words - keywords)
        self.active_entries = tuple(active_entries)
        self.be_entries = tuple(be_entries)
        self.passive_entries = tuple(passive_entries)

    # -- queries ------------------------------------------------------

    def noun_readings(self, words: tuple[str, ...]) -> tuple[tuple[str, bool], ...]:
        return self._noun_map.get(words, ())

    def nouns(self, plural: bool) -> list[tuple[str, str]]:
        """(display literal, type id) for every noun of the given number."""
        out = []
        for t in self.types:
            out.append(((t.plural if plural else t.singular).lower(), t.id))
        return out

    @property
    def has_be_alternatives(self) -> bool:
        return bool(self.be_entries or self.passive_entries)

    def names_for(self, type_id: str) -> frozenset[str]:
        return self.known_names.get(type_id, frozenset())

    def with_known_names(self, names: Mapping[str, Iterable[str]]) -> "Lexicon":
        merged = dict(self.known_names)
        for tid, vals in names.items():
            merged[tid] = merged.get(tid, frozenset()) | frozenset(vals)
        return Lexicon(self.types, self.frames, merged)

    def summary(self) -> dict:
        """Plain-data description of the vocabulary (used by the HTTP API)."""
        return {
            "types": [
                {"id": t.id, "singular": t.singular, "plural": t.plural,
                 "known_names": sorted(self.names_for(t.id))}
                for t in self.types
            ],
            "verbs": [
                {"active": f.active, "third_person": f.third_person,
                 "passive": f.passive, "subject": f.subject_type,
                 "object": f.object_type, "predicate": f.predicate}
                for f in self.frames
            ],
            "keywords": sorted(keyword_display(k) for k in self.keywords),
        }


def load_lexicon(text: str) -> Lexicon:
    """Parse lexicon file contents.

    Declarations may appear in any order except that verb lines may only
    reference already-declared or later-declared types; type references
    are resolved after the whole file is read.
    """
    types: list[EntityType] = []
    pending_frames: list[tuple[int, VerbFrame]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        kind = cols[0].strip().lower()
        if kind == "type":
            if len(cols) != 3:
                raise LexiconError(
                    f"type line needs 3 tab-separated columns, got {len(cols)}", lineno)
            singular, plural = cols[1].strip().lower(), cols[2].strip().lower()
            if not singular or not plural:
                raise LexiconError("empty noun in type line", lineno)
            types.append(EntityType(id=singular, singular=singular, plural=plural))
        elif kind == "verb":
            if len(cols) != 7:
                raise LexiconError(
                    f"verb line needs 7 tab-separated columns, got {len(cols)}", lineno)
            active, third, passive, subj, obj, pred = (c.strip() for c in cols[1:])
            passive_norm = passive.lower() if passive not in ("", "-") else None
            frame = VerbFrame(active=active.lower(), third_person=third.lower(),
                              passive=passive_norm, subject_type=subj.lower(),
                              object_type=obj.lower(), predicate=pred)
            pending_frames.append((lineno, frame))
        else:
            raise LexiconError(f"unknown declaration kind {cols[0]!r}", lineno)

    type_ids = {t.id for t in types}
    for lineno, frame in pending_frames:
        for ref in (frame.subject_type, frame.object_type):
            if ref not in type_ids:
                raise LexiconError(
                    f"frame {frame.active!r} references undeclared type {ref!r}", lineno)
    try:
        return Lexicon(types, [f for _, f in pending_frames])
    except LexiconError:
        raise
