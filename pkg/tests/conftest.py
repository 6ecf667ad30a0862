import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bioquery import defaults
from bioquery.explain import TemplateTable
from bioquery.facts import FactStore, load_manifest
from bioquery.lexicon import load_lexicon
from bioquery.rules import parse_rules
from bioquery.service import QueryService

SAMPLE_QUERY = ("What are the genes that are targeted by the drug Epinephrine "
                "and that interact with the gene DLG4?")
SAMPLE_PROGRAM = ('what_be_genes(GN1) :- gene_gene(GN1,"DLG4"), '
                  'drug_gene("Epinephrine",GN1).')
SAMPLE_EXPLANATION = ('the drug "Epinephrine" targets the gene "ADRB1" '
                      'according to CTD and the gene "ADRB1" interacts with '
                      'the gene "DLG4" according to BioGrid')


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon(defaults.default_lexicon_text())


@pytest.fixture(scope="session")
def layer():
    return parse_rules(defaults.default_rules_text())


@pytest.fixture(scope="session")
def templates():
    return TemplateTable.load(defaults.default_templates_text())


@pytest.fixture(scope="session")
def sample_store():
    store = FactStore()
    load_manifest(store, defaults.default_manifest_text(),
                  defaults.default_kb_root())
    return store


@pytest.fixture(scope="session")
def service():
    return QueryService.load()
