"""The query pipeline behind both the CLI and the HTTP API.

A QueryService holds the loaded lexicon, rule layer, templates and fact
store, all immutable after load, plus a bounded LRU cache mapping query
ids to evaluation results so explanations can be requested as an
interactive follow-up.
"""

from __future__ import annotations

import os
import secrets
import threading
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path

from . import defaults
from .cnl import expectations_at, parse, tokenize
from .cnl import END_DESC, NAME_DESC, IRConstant, QueryIR
from .compiler import compile_query
from .engine import DerivedStore, answers, evaluate
from .errors import AnswerNotFoundError, UnknownQueryIdError
from .explain import TemplateTable, min_proof, render_tree, verbalize
from .facts import FactStore, load_manifest
from .lexicon import Lexicon, load_lexicon
from .logic import Rule, render_rule
from .rules import RuleLayer, parse_rules, slice_layer

ENV_LEXICON = "BQ_LEXICON"
ENV_RULES = "BQ_RULES"
ENV_MANIFEST = "BQ_MANIFEST"
ENV_PORT = "BQ_PORT"


@dataclass(frozen=True, slots=True)
class QueryResult:
    query_id: str
    answers: tuple[tuple[str, ...], ...]
    program: str
    warnings: tuple[str, ...]

    def payload(self) -> dict:
        return {
            "query_id": self.query_id,
            "answers": [list(a) for a in self.answers],
            "program": self.program,
            "warnings": list(self.warnings),
        }


@dataclass(slots=True)
class _CachedQuery:
    rule: Rule
    derived: DerivedStore
    answer_set: frozenset[tuple[str, ...]]


class SessionCache:
    """Bounded map of query id to evaluation result, LRU eviction."""

    def __init__(self, capacity: int = 256):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._entries: OrderedDict[str, _CachedQuery] = OrderedDict()
        self._lock = threading.Lock()

    def put(self, query_id: str, value: _CachedQuery) -> None:
        with self._lock:
            self._entries[query_id] = value
            self._entries.move_to_end(query_id)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)

    def get(self, query_id: str) -> _CachedQuery | None:
        with self._lock:
            entry = self._entries.get(query_id)
            if entry is not None:
                self._entries.move_to_end(query_id)
            return entry

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


def _resolve(flag: str | None, env_var: str, default_text) -> str:
    if flag:
        return Path(flag).read_text(encoding="utf-8")
    env_path = os.environ.get(env_var)
    if env_path:
        return Path(env_path).read_text(encoding="utf-8")
    return default_text()


class QueryService:
    def __init__(self, lexicon: Lexicon, layer: RuleLayer,
                 templates: TemplateTable, store: FactStore,
                 cache_size: int = 256, index_names: bool = True):
        self.layer = layer
        self.templates = templates
        self.store = store
        self.cache = SessionCache(cache_size)
        if index_names:
            lexicon = lexicon.with_known_names(
                _collect_known_names(lexicon, layer, store))
        self.lexicon = lexicon

    # -- loading --------------------------------------------------------

    @classmethod
    def load(cls, lexicon_path: str | None = None, rules_path: str | None = None,
             manifest_path: str | None = None, templates_path: str | None = None,
             cache_size: int = 256, index_names: bool = True) -> "QueryService":
        """Build a service from files; explicit paths win over the BQ_*
        environment variables, which win over the packaged defaults."""
        lexicon = load_lexicon(_resolve(lexicon_path, ENV_LEXICON,
                                        defaults.default_lexicon_text))
        layer = parse_rules(_resolve(rules_path, ENV_RULES,
                                     defaults.default_rules_text))
        if templates_path:
            templates = TemplateTable.load(
                Path(templates_path).read_text(encoding="utf-8"))
        else:
            templates = TemplateTable.load(defaults.default_templates_text())

        store = FactStore()
        manifest = manifest_path or os.environ.get(ENV_MANIFEST)
        if manifest:
            manifest_file = Path(manifest)
            load_manifest(store, manifest_file.read_text(encoding="utf-8"),
                          manifest_file.parent)
        else:
            load_manifest(store, defaults.default_manifest_text(),
                          defaults.default_kb_root())
        return cls(lexicon, layer, templates, store,
                   cache_size=cache_size, index_names=index_names)

    # -- pipeline --------------------------------------------------------

    def handle_query(self, text: str) -> QueryResult:
        tokens = tokenize(text, self.lexicon)
        ir = parse(tokens, self.lexicon)
        rule = compile_query(ir, self.lexicon)
        goals = {atom.predicate for atom in rule.body}
        sliced, slice_warnings = slice_layer(self.layer, goals)
        derived = evaluate(sliced, self.store, query=rule)
        result_answers = answers(derived, rule.head.predicate)
        warnings = list(dict.fromkeys(
            slice_warnings + derived.warnings + self._name_warnings(ir)))
        query_id = secrets.token_urlsafe(9)
        self.cache.put(query_id, _CachedQuery(
            rule, derived.pruned(rule.head.predicate),
            frozenset(result_answers)))
        return QueryResult(
            query_id=query_id,
            answers=tuple(result_answers),
            program=render_rule(rule),
            warnings=tuple(warnings),
        )

    def handle_explain(self, query_id: str, answer) -> dict:
        cached = self.cache.get(query_id)
        if cached is None:
            raise UnknownQueryIdError(query_id)
        answer = tuple(answer)
        if answer not in cached.answer_set:
            raise AnswerNotFoundError(answer)
        proof = min_proof(cached.derived, cached.rule.head.predicate, answer)
        return {
            "text": verbalize(proof, self.templates),
            "tree": render_tree(proof),
        }

    def handle_complete(self, prefix: str) -> list[str]:
        try:
            tokens, partial = self._lenient_tokens(prefix)
        except Exception:
            return []
        expectations = expectations_at(tokens, self.lexicon)
        low = partial.lower()
        out: set[str] = set()
        for exp in expectations:
            if exp.kind == "name":
                known = (self.lexicon.names_for(exp.entity_type)
                         if exp.entity_type else frozenset())
                for name in known:
                    if name.lower().startswith(low):
                        out.add(_suggest_name(name))
                if not known and not partial:
                    out.add(NAME_DESC)
            elif exp.kind == "end":
                if not partial:
                    out.add(END_DESC)
            else:
                literal = exp.description
                if literal.lower().startswith(low):
                    out.add(literal)
        return sorted(out, key=lambda s: (s.startswith("<"), s.lower()))

    # -- summaries -------------------------------------------------------

    def vocabulary(self) -> dict:
        return self.lexicon.summary()

    def stats(self) -> dict:
        return self.store.stats()

    # -- helpers ----------------------------------------------------------

    def _name_warnings(self, ir: QueryIR) -> list[str]:
        out = []
        for atom in ir.atoms:
            for arg in atom.args:
                if isinstance(arg, IRConstant):
                    known = self.lexicon.names_for(arg.entity_type)
                    if known and arg.value not in known:
                        out.append(
                            f'unknown {arg.entity_type} name "{arg.value}"')
        return out

    def _lenient_tokens(self, prefix: str):
        """Tokenize a prefix, treating an unfinished trailing word as a
        filter.  Returns (tokens, partial word)."""
        text = prefix.rstrip()
        if not text:
            return [], ""
        ends_complete = (prefix != text or text.endswith("?")
                         or text.endswith('"'))
        if ends_complete:
            return tokenize(text, self.lexicon), ""
        words = text.split()
        last_error = None
        for k in range(1, len(words) + 1):
            head = " ".join(words[:len(words) - k])
            partial = " ".join(words[len(words) - k:])
            if partial.startswith('"'):
                partial = partial[1:]
            try:
                tokens = tokenize(head, self.lexicon) if head else []
            except Exception as exc:
                last_error = exc
                continue
            return tokens, partial
        raise last_error if last_error else ValueError(prefix)


def _suggest_name(name: str) -> str:
    words = name.split()
    if len(words) == 1 and (name[0].isupper() or name[0].isdigit()):
        return name
    return '"' + name.replace('"', '\\"') + '"'


def _collect_known_names(lexicon: Lexicon, layer: RuleLayer,
                         store: FactStore) -> dict[str, set[str]]:
    """Entity names per type, read off the integrated relations once."""
    derived = evaluate(layer, store)
    names: dict[str, set[str]] = {}
    for frame in lexicon.frames:
        subject_pos, object_pos = (0, 1) if frame.subject_first else (1, 0)
        for row in derived.rows(frame.predicate):
            names.setdefault(frame.subject_type, set()).add(
                derived.resolve(row[subject_pos]))
            names.setdefault(frame.object_type, set()).add(
                derived.resolve(row[object_pos]))
    return names
