"""The rule layer: integrated predicates defined over per-source predicates.

A RuleLayer is a validated program with stable rule ids (file order).
Slicing keeps only the rules transitively needed to define a goal set of
predicates, which is how a query evaluates against just the relevant
part of the layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ArityConflictError, SafetyError
from .logic import Program, Rule, parse_program, render_rule


@dataclass(frozen=True, slots=True)
class RuleLayer:
    program: Program
    rule_ids: tuple[int, ...]  # parallel to program.rules, stable across slicing

    def __len__(self) -> int:
        return len(self.program.rules)

    @property
    def rules(self) -> tuple[Rule, ...]:
        return self.program.rules

    def rule_by_id(self, rule_id: int) -> Rule:
        return self.rules[self.rule_ids.index(rule_id)]

    def head_predicates(self) -> set[str]:
        return {r.head.predicate for r in self.rules}


@dataclass(frozen=True, slots=True)
class PredicateGraph:
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]  # head predicate -> body predicate

    def successors(self, predicate: str) -> set[str]:
        return {b for h, b in self.edges if h == predicate}


def validate_rules(rules: list[Rule]) -> None:
    arities: dict[str, int] = {}
    for rule in rules:
        unbound = rule.unbound_head_variables()
        if unbound:
            raise SafetyError(unbound[0], render_rule(rule))
        for atom in (rule.head, *rule.body):
            seen = arities.get(atom.predicate)
            if seen is None:
                arities[atom.predicate] = atom.arity
            elif seen != atom.arity:
                raise ArityConflictError(atom.predicate, (seen, atom.arity))


def parse_rules(text: str) -> RuleLayer:
    """Parse and validate rule text; rules get ids 0..n-1 in file order."""
    rules = parse_program(text)
    validate_rules(rules)
    return RuleLayer(Program(tuple(rules)), tuple(range(len(rules))))


def dependency_graph(layer: RuleLayer) -> PredicateGraph:
    nodes: set[str] = set()
    edges: set[tuple[str, str]] = set()
    for rule in layer.rules:
        nodes.add(rule.head.predicate)
        for atom in rule.body:
            nodes.add(atom.predicate)
            edges.add((rule.head.predicate, atom.predicate))
    return PredicateGraph(frozenset(nodes), frozenset(edges))


def slice_layer(layer: RuleLayer, goals: set[str]) -> tuple[RuleLayer, list[str]]:
    """Rules whose head is reachable from the goals, plus unknown-goal warnings.

    Reachability follows head-to-body edges, so the result is closed
    under dependencies: every predicate a kept rule mentions is either a
    source predicate or defined by another kept rule.
    """
    graph = dependency_graph(layer)
    warnings = [f"unknown predicate {g!r}" for g in sorted(goals - set(graph.nodes))]
    reached = set(goals & graph.nodes)
    frontier = list(reached)
    while frontier:
        for nxt in graph.successors(frontier.pop()):
            if nxt not in reached:
                reached.add(nxt)
                frontier.append(nxt)
    kept_rules = []
    kept_ids = []
    for rule_id, rule in zip(layer.rule_ids, layer.rules):
        if rule.head.predicate in reached:
            kept_rules.append(rule)
            kept_ids.append(rule_id)
    return RuleLayer(Program(tuple(kept_rules)), tuple(kept_ids)), warnings
