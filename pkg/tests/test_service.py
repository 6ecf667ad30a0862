import pytest

from bioquery.cnl import END_DESC
from bioquery.errors import (AnswerNotFoundError, GrammarError,
                             UnknownQueryIdError)
from bioquery.explain import TemplateTable
from bioquery.facts import FactStore
from bioquery.lexicon import load_lexicon
from bioquery.logic import parse_program
from bioquery.rules import parse_rules
from bioquery.service import QueryService, SessionCache, _CachedQuery

from conftest import SAMPLE_EXPLANATION, SAMPLE_PROGRAM, SAMPLE_QUERY


def rule_signature(text):
    [rule] = parse_program(text)
    return rule.head, frozenset(rule.body)


def test_sample_query_result(service):
    result = service.handle_query(SAMPLE_QUERY)
    assert result.answers == (("ADRB1",),)
    assert rule_signature(result.program) == rule_signature(SAMPLE_PROGRAM)
    assert result.warnings == ()


def test_sample_explanation(service):
    result = service.handle_query(SAMPLE_QUERY)
    detail = service.handle_explain(result.query_id, ("ADRB1",))
    assert detail["text"] == SAMPLE_EXPLANATION
    assert len(detail["tree"]["children"]) == 2


def test_statelessness_of_answers(service):
    first = service.handle_query(SAMPLE_QUERY)
    second = service.handle_query(SAMPLE_QUERY)
    assert first.answers == second.answers
    assert first.program == second.program
    assert first.query_id != second.query_id


def test_explain_closure(service):
    result = service.handle_query(
        "What are the drugs that target the genes that interact with the "
        "gene DLG4?")
    assert result.answers
    for answer in result.answers:
        assert service.handle_explain(result.query_id, answer)["text"]


def test_unknown_query_id(service):
    with pytest.raises(UnknownQueryIdError):
        service.handle_explain("nonexistent", ("ADRB1",))


def test_answer_matching_is_case_sensitive(service):
    result = service.handle_query(SAMPLE_QUERY)
    with pytest.raises(AnswerNotFoundError):
        service.handle_explain(result.query_id, ("adrb1",))


def test_query_over_empty_kb_warns(tmp_path):
    manifest = tmp_path / "manifest.tsv"
    facts = tmp_path / "facts.tsv"
    facts.write_text("# empty\n", encoding="utf-8")
    manifest.write_text("facts.tsv\tCTD\n", encoding="utf-8")
    svc = QueryService.load(manifest_path=str(manifest))
    result = svc.handle_query(SAMPLE_QUERY)
    assert result.answers == ()
    assert result.warnings


def test_parser_errors_propagate(service):
    with pytest.raises(GrammarError) as err:
        service.handle_query("What are the genes that?")
    assert err.value.payload()["expected"]


def test_unknown_name_warning(service):
    result = service.handle_query(
        "What are the genes that are targeted by the drug Zzzdrug?")
    assert result.answers == ()
    assert any("Zzzdrug" in w for w in result.warnings)


# -- completion -------------------------------------------------------------


def test_complete_empty_prefix(service):
    assert service.handle_complete("") == ["What", "Which"]


def test_complete_partial_word_filters(service):
    assert service.handle_complete("What are the g") == ["genes"]


def test_complete_multiword_noun(service):
    assert service.handle_complete("What are the side eff") == ["side effects"]


def test_complete_full_query_ends(service):
    suggestions = service.handle_complete(SAMPLE_QUERY)
    assert suggestions == [END_DESC]


def test_complete_offers_known_names(service):
    suggestions = service.handle_complete(
        "What are the genes that interact with the gene DL")
    assert suggestions == ["DLG4"]


def test_complete_quotes_awkward_names(tmp_path):
    facts = tmp_path / "facts.tsv"
    facts.write_text("drugbank_drug_category\tIbuprofen\tpain reliever\tDrugBank\n",
                     encoding="utf-8")
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("facts.tsv\tDrugBank\n", encoding="utf-8")
    svc = QueryService.load(manifest_path=str(manifest))
    suggestions = svc.handle_complete(
        "Which drugs belong to the category ")
    assert '"pain reliever"' in suggestions


def test_complete_unparseable_prefix(service):
    assert service.handle_complete("the the the ") == []


def test_complete_survives_bad_input(service):
    assert service.handle_complete("blargh zzz qqq") == []


# -- session cache ----------------------------------------------------------


def test_cache_lru_eviction(service):
    cache = SessionCache(capacity=2)
    sentinel = _CachedQuery(None, None, frozenset())
    cache.put("a", sentinel)
    cache.put("b", sentinel)
    assert cache.get("a") is sentinel  # refresh a
    cache.put("c", sentinel)           # evicts b
    assert cache.get("b") is None
    assert cache.get("a") is sentinel
    assert cache.get("c") is sentinel
    assert len(cache) == 2


def test_evicted_query_id_raises(lexicon, layer, templates, sample_store):
    svc = QueryService(lexicon, layer, templates, sample_store,
                       cache_size=1, index_names=False)
    first = svc.handle_query(SAMPLE_QUERY)
    svc.handle_query("Which drugs treat the disease Asthma?")
    with pytest.raises(UnknownQueryIdError):
        svc.handle_explain(first.query_id, ("ADRB1",))


# -- summaries ---------------------------------------------------------------


def test_vocabulary_summary(service):
    vocab = service.vocabulary()
    assert {t["id"] for t in vocab["types"]} == {
        "drug", "gene", "disease", "category", "side effect"}
    gene_entry = [t for t in vocab["types"] if t["id"] == "gene"][0]
    assert "DLG4" in gene_entry["known_names"]


def test_stats_summary(service):
    stats = service.stats()
    assert stats["total"] == 28
    assert stats["sources"]["CTD"] == 9


def test_env_var_configuration(tmp_path, monkeypatch):
    rules = tmp_path / "rules.lp"
    rules.write_text("only_pred(X,Y) :- some_source(X,Y).\n", encoding="utf-8")
    monkeypatch.setenv("BQ_RULES", str(rules))
    svc = QueryService.load(index_names=False)
    assert svc.layer.head_predicates() == {"only_pred"}
    # explicit flag wins over the environment
    svc2 = QueryService.load(index_names=False)
    assert len(svc2.layer) == 1
    monkeypatch.delenv("BQ_RULES")
    svc3 = QueryService.load(index_names=False)
    assert len(svc3.layer) == 10
