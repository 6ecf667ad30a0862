"""Compile a parsed query into a single answer-collecting rule.

The head predicate is ``what_be_`` plus the answer type's plural noun
(spaces become underscores); its one argument is the answer variable.
Variables are named by type prefix (GN1, DR1, ...) counting per type in
order of first occurrence, so the same query always compiles to the
same rule.
"""

from __future__ import annotations

from .cnl import IRConstant, QueryIR, VariableRef
from .lexicon import Lexicon
from .logic import Atom, Constant, Rule, Variable

TYPE_PREFIXES = {
    "drug": "DR",
    "gene": "GN",
    "disease": "DS",
    "category": "CT",
    "side effect": "SE",
}


def _prefix_for(entity_type: str) -> str:
    if entity_type in TYPE_PREFIXES:
        return TYPE_PREFIXES[entity_type]
    words = entity_type.split()
    if len(words) >= 2:
        return (words[0][0] + words[1][0]).upper()
    return entity_type[:2].upper()


def compile_query(ir: QueryIR, lexicon: Lexicon) -> Rule:
    """Build the safe rule whose head relation holds the query's answers."""
    types = ir.var_types()
    counters: dict[str, int] = {}
    names: dict[str, str] = {}

    def assign(var_id: str) -> str:
        if var_id not in names:
            entity_type = types[var_id]
            prefix = _prefix_for(entity_type)
            counters[prefix] = counters.get(prefix, 0) + 1
            names[var_id] = f"{prefix}{counters[prefix]}"
        return names[var_id]

    answer_id, answer_type = ir.answer_var
    assign(answer_id)
    body = []
    for atom in ir.atoms:
        args = []
        for arg in atom.args:
            if isinstance(arg, VariableRef):
                args.append(Variable(assign(arg.id)))
            else:
                assert isinstance(arg, IRConstant)
                args.append(Constant(arg.value))
        body.append(Atom(atom.predicate, tuple(args)))

    plural = lexicon.types_by_id[answer_type].plural
    head_pred = "what_be_" + plural.replace(" ", "_")
    head = Atom(head_pred, (Variable(names[answer_id]),))
    rule = Rule(head, tuple(body))
    assert not rule.unbound_head_variables(), "compiled rule must be safe"
    return rule
