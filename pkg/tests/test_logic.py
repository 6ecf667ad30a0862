import pytest
from hypothesis import given, strategies as st

from bioquery.errors import RuleSyntaxError
from bioquery.logic import (Atom, Constant, Program, Rule, Variable,
                            parse_program, render_program, render_rule)

predicates = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True)
variables = st.from_regex(r"[A-Z][A-Za-z0-9]{0,4}", fullmatch=True)
constants = st.text(min_size=0, max_size=8).map(Constant)
terms = st.one_of(variables.map(Variable), constants)
atoms = st.builds(Atom, predicates, st.tuples(terms) | st.tuples(terms, terms))


def safe_rule(head: Atom, body: tuple[Atom, ...]) -> Rule:
    bound = {v for a in body for v in a.variables()}
    fixed_args = tuple(
        t if isinstance(t, Constant) or t.name in bound else Constant(t.name)
        for t in head.args)
    return Rule(Atom(head.predicate, fixed_args), body)


rules = st.builds(safe_rule, atoms, st.tuples() | st.tuples(atoms) |
                  st.tuples(atoms, atoms) | st.tuples(atoms, atoms, atoms))
programs = st.lists(rules, max_size=6).map(lambda rs: Program(tuple(rs)))


def test_fact_rendering():
    fact = Rule(Atom("drug_gene", (Constant("Epinephrine"), Constant("ADRB1"))))
    assert render_rule(fact) == 'drug_gene("Epinephrine","ADRB1").'


def test_rule_rendering():
    rule = Rule(Atom("what_be_genes", (Variable("GN1"),)),
                (Atom("gene_gene", (Variable("GN1"), Constant("DLG4"))),
                 Atom("drug_gene", (Constant("Epinephrine"), Variable("GN1")))))
    assert render_rule(rule) == (
        'what_be_genes(GN1) :- gene_gene(GN1,"DLG4"), '
        'drug_gene("Epinephrine",GN1).')


def test_empty_program_renders_empty():
    assert render_program(Program()) == ""


def test_quote_escaping_round_trip():
    fact = Rule(Atom("p", (Constant('say "hi" \\ bye'),)))
    [parsed] = parse_program(render_rule(fact))
    assert parsed == fact


@given(programs)
def test_render_parse_round_trip(program):
    parsed = parse_program(render_program(program))
    assert tuple(parsed) == program.rules


def test_comments_and_whitespace_ignored():
    text = """
    % a comment
    p(X) :- q(X).   % trailing
    q("a").
    """
    parsed = parse_program(text)
    assert len(parsed) == 2


@pytest.mark.parametrize("text,line,col", [
    ("p(X", 1, 4),
    ("p(X) :- q(X)", 1, 13),
    ("p(x) :- q(x).", 1, 3),     # bare lowercase terms are not supported
    ("p(X) :- \n q(X,).", 2, 6),
    ("Pred(X).", 1, 1),
])
def test_syntax_errors_carry_position(text, line, col):
    with pytest.raises(RuleSyntaxError) as err:
        parse_program(text)
    assert err.value.line == line
    assert err.value.column == col


def test_unbound_head_variables():
    rule = Rule(Atom("p", (Variable("X"), Variable("Y"))),
                (Atom("q", (Variable("X"),)),))
    assert rule.unbound_head_variables() == ["Y"]
    fact_with_var = Rule(Atom("p", (Variable("X"),)))
    assert fact_with_var.unbound_head_variables() == ["X"]
