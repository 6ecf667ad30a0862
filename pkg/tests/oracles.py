"""Independent reference implementations used to check the real ones.

These stay deliberately naive: the evaluator recomputes the whole
fixpoint from scratch each round with nested-loop joins over string
tuples, the proof scorer enumerates every well-founded proof, and the
replay check re-substitutes premises into a rule.  None of them share
code with the engine or explainer.
"""

from __future__ import annotations

from bioquery.engine import DerivedStore
from bioquery.logic import Atom, Constant, Rule, Variable

Relations = dict[str, set[tuple[str, ...]]]


def _substitutions(atoms: tuple[Atom, ...], relations: Relations, env: dict):
    if not atoms:
        yield env
        return
    atom, rest = atoms[0], atoms[1:]
    for row in relations.get(atom.predicate, ()):
        if len(row) != len(atom.args):
            continue
        extended = dict(env)
        ok = True
        for term, value in zip(atom.args, row):
            if isinstance(term, Constant):
                if term.value != value:
                    ok = False
                    break
            elif term.name in extended:
                if extended[term.name] != value:
                    ok = False
                    break
            else:
                extended[term.name] = value
        if ok:
            yield from _substitutions(rest, relations, extended)


def _instantiate(atom: Atom, env: dict) -> tuple[str, ...]:
    return tuple(t.value if isinstance(t, Constant) else env[t.name]
                 for t in atom.args)


def naive_fixpoint(rules: list[Rule], facts: Relations) -> Relations:
    """Full-recomputation least fixpoint over string tuples."""
    relations: Relations = {p: set(rows) for p, rows in facts.items()}
    while True:
        snapshot = {p: set(rows) for p, rows in relations.items()}
        changed = False
        for rule in rules:
            for env in _substitutions(rule.body, snapshot, {}):
                head = _instantiate(rule.head, env)
                rel = relations.setdefault(rule.head.predicate, set())
                if head not in rel:
                    rel.add(head)
                    changed = True
        if not changed:
            return relations


def derived_relations(ds: DerivedStore) -> Relations:
    """The engine's derived facts as string tuples, grouped by predicate."""
    out: Relations = {}
    for predicate, rows in ds.derived.items():
        out[predicate] = {ds.resolve_args(args) for args in rows}
    return out


def oracle_derived(rules: list[Rule], facts: Relations) -> Relations:
    """Naive fixpoint minus the loaded facts, for comparison with the engine."""
    full = naive_fixpoint(rules, facts)
    out: Relations = {}
    for predicate, rows in full.items():
        new = rows - facts.get(predicate, set())
        if new:
            out[predicate] = new
    return out


def exhaustive_min_cost(ds: DerivedStore, key, path: frozenset = frozenset()):
    """Minimum leaf count over every well-founded proof, or None."""
    if ds.is_source(key):
        return 1
    best = None
    deeper = path | {key}
    for _, premises in ds.derivations.get(key, ()):
        if any(p in deeper for p in premises):
            continue
        total = 0
        for premise in premises:
            cost = exhaustive_min_cost(ds, premise, deeper)
            if cost is None:
                total = None
                break
            total += cost
        if total is not None and (best is None or total < best):
            best = total
    return best


def replay_derivation(rule: Rule, premises, fact) -> bool:
    """Check that substituting the premises into the rule yields the fact.

    ``premises`` and ``fact`` are (predicate, string-args) pairs.
    """
    if len(premises) != len(rule.body):
        return False
    env: dict[str, str] = {}
    for atom, (predicate, values) in zip(rule.body, premises):
        if atom.predicate != predicate or len(values) != len(atom.args):
            return False
        for term, value in zip(atom.args, values):
            if isinstance(term, Constant):
                if term.value != value:
                    return False
            elif term.name in env:
                if env[term.name] != value:
                    return False
            else:
                env[term.name] = value
    return (rule.head.predicate, _instantiate(rule.head, env)) == fact
