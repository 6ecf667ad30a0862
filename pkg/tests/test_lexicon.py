import pytest

from bioquery import defaults
from bioquery.errors import LexiconError
from bioquery.lexicon import Lexicon, EntityType, VerbFrame, load_lexicon


def test_default_lexicon_counts(lexicon):
    assert len(lexicon.types) == 5
    assert len(lexicon.frames) == 6


def test_default_lexicon_types(lexicon):
    assert set(lexicon.types_by_id) == {
        "drug", "gene", "disease", "category", "side effect"}
    assert lexicon.types_by_id["gene"].plural == "genes"
    assert lexicon.types_by_id["side effect"].plural == "side effects"


def test_empty_file_is_valid_but_useless():
    lex = load_lexicon("")
    assert lex.types == ()
    assert lex.frames == ()


def test_undeclared_type_is_named_with_line():
    text = "type\tdrug\tdrugs\nverb\tbind\tbinds\t-\tdrug\tprotein\tdrug_protein\n"
    with pytest.raises(LexiconError) as err:
        load_lexicon(text)
    assert "protein" in str(err.value)
    assert err.value.line == 2


def test_duplicate_frame_rejected():
    rows = [
        "type\tdrug\tdrugs",
        "type\tgene\tgenes",
        "verb\ttarget\ttargets\t-\tdrug\tgene\tdrug_gene",
        "verb\ttarget\ttargets\t-\tdrug\tgene\tdrug_gene2",
    ]
    with pytest.raises(LexiconError, match="duplicate frame"):
        load_lexicon("\n".join(rows))


def test_duplicate_predicate_rejected():
    with pytest.raises(LexiconError, match="more than one frame"):
        Lexicon(
            [EntityType("drug", "drug", "drugs"),
             EntityType("gene", "gene", "genes")],
            [VerbFrame("target", "targets", None, "drug", "gene", "p"),
             VerbFrame("bind", "binds", None, "drug", "gene", "p")])


def test_wrong_column_count_reports_line():
    with pytest.raises(LexiconError) as err:
        load_lexicon("# ok\ntype\tdrug\n")
    assert err.value.line == 2


def test_unknown_kind_rejected():
    with pytest.raises(LexiconError, match="unknown declaration"):
        load_lexicon("noun\tdrug\tdrugs\n")


def test_word_classification_tables(lexicon):
    assert "with" in lexicon.keywords
    assert "to" in lexicon.keywords
    assert "by" in lexicon.keywords
    assert {"target", "targets", "interact", "interacts", "targeted",
            "treated", "related", "have", "has", "belong", "belongs",
            "treat", "treats"} <= set(lexicon.verb_words)
    # be-forms stay keywords even though they open verb phrases
    assert "are" in lexicon.keywords and "are" not in lexicon.verb_words


def test_with_known_names_merges(lexicon):
    extended = lexicon.with_known_names({"gene": {"DLG4"}})
    assert "DLG4" in extended.names_for("gene")
    assert lexicon.names_for("gene") == frozenset()


def test_summary_shape(lexicon):
    summary = lexicon.summary()
    assert {t["id"] for t in summary["types"]} == set(lexicon.types_by_id)
    assert len(summary["verbs"]) == 6
    assert "What" in summary["keywords"]
