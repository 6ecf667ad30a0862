"""Source-tagged ground facts loaded from tab-separated snapshot files.

Fact rows are ``predicate<TAB>arg1<TAB>arg2<TAB>source``; a manifest
lists ``path<TAB>source_label`` pairs (paths relative to the manifest).
All argument strings are interned to integer symbols so evaluation works
over small tuples of ints.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IngestError, ManifestError


class Interner:
    """Bijection between strings and dense integer ids."""

    def __init__(self):
        self._by_string: dict[str, int] = {}
        self._by_id: list[str] = []

    def intern(self, value: str) -> int:
        sym = self._by_string.get(value)
        if sym is None:
            sym = len(self._by_id)
            self._by_string[value] = sym
            self._by_id.append(value)
        return sym

    def lookup(self, value: str) -> int | None:
        return self._by_string.get(value)

    def resolve(self, sym: int) -> str:
        return self._by_id[sym]

    def __len__(self) -> int:
        return len(self._by_id)


@dataclass(frozen=True, slots=True)
class RowIssue:
    line: int
    reason: str


@dataclass(slots=True)
class IngestReport:
    source: str | None
    added: int = 0
    duplicates: int = 0
    errors: list[RowIssue] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


class FactStore:
    """Interned, source-tagged ground facts grouped by predicate.

    Mutable while loading; treat as read-only once queries start.  The
    same argument pair may carry several source tags, in which case the
    tuple is stored once and all labels are kept.
    """

    def __init__(self):
        self.interner = Interner()
        # predicate -> set of (sym, sym)
        self.tables: dict[str, set[tuple[int, int]]] = {}
        # (predicate, args) -> sorted tuple of source labels
        self._sources: dict[tuple[str, tuple[int, int]], tuple[str, ...]] = {}
        self._indexes: dict[tuple[str, int], dict[int, list[tuple[int, int]]]] = {}
        self._index_lock = threading.Lock()

    # -- loading ------------------------------------------------------

    def add_fact(self, predicate: str, args: tuple[str, str], source: str) -> bool:
        """True when the (predicate, args, source) triple was new."""
        syms = (self.interner.intern(args[0]), self.interner.intern(args[1]))
        key = (predicate, syms)
        labels = self._sources.get(key)
        if labels is None:
            self.tables.setdefault(predicate, set()).add(syms)
            self._sources[key] = (source,)
            self._indexes.pop((predicate, 0), None)
            self._indexes.pop((predicate, 1), None)
            return True
        if source in labels:
            return False
        self._sources[key] = tuple(sorted((*labels, source)))
        return True

    def ingest(self, text: str, source: str | None = None,
               predicate_prefix: str | None = None) -> IngestReport:
        """Load fact rows; well-formed rows are tagged with their own
        source column.  ``source`` and ``predicate_prefix`` (from a
        manifest entry) only drive consistency warnings."""
        report = IngestReport(source=source)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                report.errors.append(RowIssue(lineno, "wrong column count"))
                continue
            if any(not c.strip() for c in cols):
                report.errors.append(RowIssue(lineno, "empty field"))
                continue
            predicate, arg1, arg2, row_source = (c.strip() for c in cols)
            if source is not None and row_source != source:
                report.warnings.append(
                    f"line {lineno}: source {row_source!r} differs from "
                    f"manifest label {source!r}")
            if predicate_prefix and not predicate.startswith(predicate_prefix):
                report.warnings.append(
                    f"line {lineno}: predicate {predicate!r} does not start "
                    f"with {predicate_prefix!r}")
            if self.add_fact(predicate, (arg1, arg2), row_source):
                report.added += 1
            else:
                report.duplicates += 1
        return report

    # -- queries ------------------------------------------------------

    def relation(self, predicate: str) -> set[tuple[int, int]]:
        return self.tables.get(predicate, set())

    def sources_of(self, predicate: str, args: tuple[int, int]) -> tuple[str, ...]:
        return self._sources.get((predicate, args), ())

    def has_fact(self, predicate: str, args: tuple[int, int]) -> bool:
        return (predicate, args) in self._sources

    def index(self, predicate: str, position: int) -> dict[int, list[tuple[int, int]]]:
        """Tuples of a relation grouped by the symbol at one position.

        Built on first use and cached; safe under concurrent readers.
        """
        key = (predicate, position)
        idx = self._indexes.get(key)
        if idx is None:
            with self._index_lock:
                idx = self._indexes.get(key)
                if idx is None:
                    idx = {}
                    for row in self.tables.get(predicate, ()):
                        idx.setdefault(row[position], []).append(row)
                    self._indexes[key] = idx
        return idx

    def stats(self) -> dict:
        by_predicate = {p: len(rows) for p, rows in sorted(self.tables.items())}
        by_source: dict[str, int] = {}
        for labels in self._sources.values():
            for label in labels:
                by_source[label] = by_source.get(label, 0) + 1
        total = sum(len(labels) for labels in self._sources.values())
        return {
            "predicates": by_predicate,
            "sources": dict(sorted(by_source.items())),
            "total": total,
        }


@dataclass(frozen=True, slots=True)
class ManifestEntry:
    path: str
    source: str
    predicate_prefix: str | None = None


@dataclass(frozen=True, slots=True)
class SourceManifest:
    entries: tuple[ManifestEntry, ...]


def parse_manifest(text: str) -> SourceManifest:
    """Manifest lines: ``path<TAB>source_label[<TAB>predicate_prefix]``."""
    entries: list[ManifestEntry] = []
    seen_paths: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) not in (2, 3):
            raise ManifestError(
                f"expected 2 or 3 tab-separated columns, got {len(cols)}", lineno)
        path, source = cols[0].strip(), cols[1].strip()
        if not source:
            raise ManifestError("empty source label", lineno)
        if path in seen_paths:
            raise ManifestError(f"duplicate file {path!r}", lineno)
        seen_paths.add(path)
        prefix = cols[2].strip() if len(cols) == 3 else None
        entries.append(ManifestEntry(path, source, prefix))
    return SourceManifest(tuple(entries))


def load_manifest(store: FactStore, manifest_text: str, base) -> list[IngestReport]:
    """Ingest every file a manifest names, resolving paths against ``base``.

    ``base`` may be a pathlib.Path or an importlib.resources traversable;
    it only needs ``/`` and the target's ``read_text``.
    """
    manifest = parse_manifest(manifest_text)
    reports = []
    for entry in manifest.entries:
        target = base / entry.path if base is not None else Path(entry.path)
        try:
            text = target.read_text(encoding="utf-8")
        except (OSError, FileNotFoundError) as exc:
            raise IngestError(f"cannot read {entry.path!r}: {exc}") from exc
        reports.append(store.ingest(text, source=entry.source,
                                    predicate_prefix=entry.predicate_prefix))
    return reports
