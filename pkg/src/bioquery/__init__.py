"""Controlled-English biomedical queries over integrated fact tables.

The pipeline: tokenize and parse a query against a lexicon, compile it
to a single answer-collecting rule, slice the rule layer down to the
relevant predicates, evaluate bottom-up over source-tagged facts, and
extract minimal source-cited explanations for any answer.
"""

from .cnl import (QueryIR, Token, expected_next, expectations_at, parse,
                  prefix_expectation_table, tokenize)
from .compiler import compile_query
from .engine import DerivedStore, answers, evaluate
from .errors import BioQueryError
from .explain import (Justification, TemplateTable, min_proof, render_tree,
                      verbalize)
from .facts import FactStore, IngestReport, SourceManifest, load_manifest, parse_manifest
from .lexicon import EntityType, Lexicon, VerbFrame, load_lexicon
from .logic import (Atom, Constant, Program, Rule, Variable, parse_program,
                    render_program, render_rule)
from .rules import (PredicateGraph, RuleLayer, dependency_graph, parse_rules,
                    slice_layer)
from .service import QueryResult, QueryService, SessionCache

__version__ = "0.1.0"

__all__ = [
    "Atom", "BioQueryError", "Constant", "DerivedStore", "EntityType",
    "FactStore", "IngestReport", "Justification", "Lexicon", "PredicateGraph",
    "Program", "QueryIR", "QueryResult", "QueryService", "Rule", "RuleLayer",
    "SessionCache", "SourceManifest", "TemplateTable", "Token", "Variable",
    "VerbFrame", "answers", "compile_query", "dependency_graph", "evaluate",
    "expected_next", "expectations_at", "load_lexicon", "load_manifest",
    "min_proof", "parse", "parse_manifest", "parse_program", "parse_rules",
    "prefix_expectation_table",
    "render_program", "render_rule", "render_tree", "slice_layer", "tokenize",
    "verbalize",
]
