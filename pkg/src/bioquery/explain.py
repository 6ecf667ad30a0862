"""Minimal proof trees over the derivation hypergraph, and their wording.

A proof's cost is its number of leaf citations (loaded facts, counted
with multiplicity).  Minimal proofs are found best-first: facts are
finalized in nondecreasing cost order and a derivation becomes usable
once all its premises are finalized, the hypergraph analogue of
shortest-path relaxation.  Cyclic derivations can never finalize, so
they are skipped for free.

Verbalization renders only the leaves: one clause per cited fact from a
per-predicate template table, joined by " and ", which keeps the wording
down to the evidence a curator could check.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from string import Formatter

from .engine import DerivedStore, FactKey
from .errors import FactNotFoundError, MissingTemplateError

_TEMPLATE_FIELDS = {"arg1", "arg2", "source"}


@dataclass(frozen=True, slots=True)
class Justification:
    """A proof tree node; leaves cite loaded facts, steps apply rules."""
    predicate: str
    args: tuple[str, ...]
    source: str | None = None               # leaf: source label
    rule_id: int | None = None              # step: rule that fired
    children: tuple["Justification", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return self.source is not None

    @property
    def cost(self) -> int:
        if self.is_leaf:
            return 1
        return sum(child.cost for child in self.children)

    def leaves(self) -> list["Justification"]:
        if self.is_leaf:
            return [self]
        out = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def check(self) -> None:
        if self.is_leaf:
            if self.children:
                raise AssertionError("leaf with children")
            return
        if self.rule_id is None or not self.children:
            raise AssertionError("step without rule or children")
        for child in self.children:
            child.check()


def _sort_key(derived: DerivedStore, key: FactKey):
    return (key[0], derived.resolve_args(key[1]))


def min_proof(derived: DerivedStore, predicate: str,
              args: tuple[str, ...]) -> Justification:
    """Minimum-cost proof of a fact; ties broken by smaller rule id, then
    by premise order, so the result is deterministic."""
    key = derived.fact_key(predicate, args)
    if key is None:
        raise FactNotFoundError(f"{predicate}({','.join(args)})")
    return _proof_from_key(derived, key)


def _proof_from_key(derived: DerivedStore, key: FactKey) -> Justification:
    if derived.is_source(key):
        return _leaf(derived, key)

    # restrict to the facts backward-reachable from the target
    subgraph: set[FactKey] = set()
    stack = [key]
    while stack:
        fact = stack.pop()
        if fact in subgraph:
            continue
        subgraph.add(fact)
        for _, premises in derived.derivations.get(fact, ()):
            for premise in premises:
                if premise not in subgraph and not derived.is_source(premise):
                    stack.append(premise)
                elif derived.is_source(premise):
                    subgraph.add(premise)

    # derivations indexed by premise, with unfinalized-premise counts
    uses: dict[FactKey, list[tuple]] = {}
    pending: list[tuple] = []
    for fact in subgraph:
        if derived.is_source(fact):
            continue
        for rule_id, premises in derived.derivations.get(fact, ()):
            entry = (fact, rule_id, premises,
                     [len(premises)])  # mutable remaining-count cell
            pending.append(entry)
            if not premises:
                entry[3][0] = 0
            for premise in premises:
                uses.setdefault(premise, []).append(entry)

    costs: dict[FactKey, int] = {}
    chosen: dict[FactKey, tuple] = {}
    heap: list[tuple] = []

    def push(fact: FactKey, cost: int, rule_id: int, premises: tuple):
        heapq.heappush(heap, (cost, _sort_key(derived, fact), rule_id,
                              tuple(_sort_key(derived, p) for p in premises),
                              fact, (rule_id, premises)))

    for fact in subgraph:
        if derived.is_source(fact):
            push(fact, 1, -1, ())
    for entry in pending:
        if entry[3][0] == 0:
            push(entry[0], 0, entry[1], entry[2])

    while heap:
        cost, _, _, _, fact, derivation = heapq.heappop(heap)
        if fact in costs:
            continue
        costs[fact] = cost
        if not derived.is_source(fact):
            chosen[fact] = derivation
        if fact == key:
            break
        for entry in uses.get(fact, ()):
            head, rule_id, premises, remaining = entry
            remaining[0] -= premises.count(fact)
            if remaining[0] == 0 and head not in costs:
                push(head, sum(costs[p] for p in premises), rule_id, premises)

    if key not in costs:
        raise FactNotFoundError(derived.fact_text(key))

    def build(fact: FactKey) -> Justification:
        if derived.is_source(fact):
            return _leaf(derived, fact)
        rule_id, premises = chosen[fact]
        return Justification(
            predicate=fact[0], args=derived.resolve_args(fact[1]),
            rule_id=rule_id,
            children=tuple(build(p) for p in premises))

    proof = build(key)
    proof.check()
    return proof


def _leaf(derived: DerivedStore, key: FactKey) -> Justification:
    labels = derived.source_labels(key)
    return Justification(predicate=key[0], args=derived.resolve_args(key[1]),
                         source=labels[0] if labels else "unknown")


# ---------------------------------------------------------------------------
# Templates and wording


class TemplateTable:
    """Per-predicate sentence templates with {arg1}, {arg2}, {source} slots."""

    def __init__(self, templates: dict[str, str]):
        for predicate, template in templates.items():
            for _, name, _, _ in Formatter().parse(template):
                if name is not None and name not in _TEMPLATE_FIELDS:
                    raise ValueError(
                        f"template for {predicate!r} uses unknown field {name!r}")
        self.templates = dict(templates)

    @classmethod
    def load(cls, text: str) -> "TemplateTable":
        templates = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise ValueError(
                    f"line {lineno}: expected 'predicate<TAB>template'")
            templates[parts[0].strip()] = parts[1].strip()
        return cls(templates)

    def render(self, leaf: Justification) -> str:
        template = self.templates.get(leaf.predicate)
        if template is None:
            raise MissingTemplateError(leaf.predicate)
        arg2 = leaf.args[1] if len(leaf.args) > 1 else ""
        return template.format(arg1=leaf.args[0], arg2=arg2, source=leaf.source)


def verbalize(justification: Justification, templates: TemplateTable) -> str:
    """One clause per cited fact, left to right, joined by " and "."""
    return " and ".join(templates.render(leaf)
                        for leaf in justification.leaves())


def render_tree(justification: Justification) -> dict:
    """Nested plain-data view of a proof, ready for JSON."""
    quoted = ",".join(f'"{a}"' for a in justification.args)
    node = {
        "fact": f"{justification.predicate}({quoted})",
        "predicate": justification.predicate,
        "args": list(justification.args),
        "source": justification.source,
        "rule": justification.rule_id,
        "children": [render_tree(c) for c in justification.children],
    }
    return node
