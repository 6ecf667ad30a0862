"""Access to the packaged default lexicon, rule layer, templates and
sample knowledge base."""

from __future__ import annotations

from importlib.resources import files


def data_root():
    return files("bioquery") / "data"


def default_lexicon_text() -> str:
    return (data_root() / "lexicon.tsv").read_text(encoding="utf-8")


def default_rules_text() -> str:
    return (data_root() / "rules.lp").read_text(encoding="utf-8")


def default_templates_text() -> str:
    return (data_root() / "templates.tsv").read_text(encoding="utf-8")


def default_kb_root():
    return data_root() / "kb"


def default_manifest_text() -> str:
    return (default_kb_root() / "manifest.tsv").read_text(encoding="utf-8")
