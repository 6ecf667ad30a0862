"""Command-line interface.

    bioquery ask "What are the genes that ...?" [--explain] [--program]
    bioquery repl
    bioquery load --manifest path/to/manifest.tsv
    bioquery validate-rules path/to/rules.lp
    bioquery serve --port 8000 [--ui frontend/dist]

Data sources resolve from flags, then the BQ_LEXICON / BQ_RULES /
BQ_MANIFEST / BQ_PORT environment variables, then the packaged sample
knowledge base.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import BioQueryError
from .facts import FactStore, load_manifest
from .rules import dependency_graph, parse_rules
from .service import ENV_PORT, QueryService


def _add_source_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lexicon", help="lexicon file (default: packaged)")
    parser.add_argument("--rules", help="rule layer file (default: packaged)")
    parser.add_argument("--manifest", help="fact manifest file (default: packaged)")
    parser.add_argument("--templates", help="explanation template file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bioquery",
        description="Answer controlled-English biomedical queries with "
                    "source-cited explanations.")
    sub = parser.add_subparsers(dest="command", required=True)

    ask = sub.add_parser("ask", help="answer one query and exit")
    ask.add_argument("query", help="query text, ending in '?'")
    ask.add_argument("--explain", action="store_true",
                     help="print a minimal explanation under each answer")
    ask.add_argument("--program", action="store_true",
                     help="print the compiled rule before the answers")
    _add_source_options(ask)

    repl = sub.add_parser("repl", help="interactive query loop")
    _add_source_options(repl)

    load = sub.add_parser("load", help="ingest a manifest and report counts")
    load.add_argument("--manifest", required=True)

    validate = sub.add_parser("validate-rules", help="check a rule layer file")
    validate.add_argument("path")

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--port", type=int,
                       default=int(os.environ.get(ENV_PORT, "8000")))
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--ui", help="directory of built web UI assets")
    _add_source_options(serve)

    return parser


def _load_service(args) -> QueryService:
    return QueryService.load(lexicon_path=args.lexicon, rules_path=args.rules,
                             manifest_path=args.manifest,
                             templates_path=args.templates)


def _print_error(exc: BioQueryError) -> None:
    payload = exc.payload()
    print(f"error ({payload['code']}): {payload['message']}", file=sys.stderr)
    if "expected" in payload:
        print("expected: " + ", ".join(payload["expected"]), file=sys.stderr)


def cmd_ask(args) -> int:
    try:
        service = _load_service(args)
        result = service.handle_query(args.query)
    except BioQueryError as exc:
        _print_error(exc)
        return 1
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if args.program:
        print(result.program)
    for answer in result.answers:
        print("\t".join(answer))
        if args.explain:
            explanation = service.handle_explain(result.query_id, answer)
            print(explanation["text"])
    return 0


def _print_tree(node: dict, indent: int = 0) -> None:
    origin = (f"source {node['source']}" if node["source"] is not None
              else f"rule {node['rule']}")
    print("  " * indent + f"{node['fact']}  [{origin}]")
    for child in node["children"]:
        _print_tree(child, indent + 1)


def cmd_repl(args) -> int:
    try:
        service = _load_service(args)
    except BioQueryError as exc:
        _print_error(exc)
        return 1
    try:
        import readline

        def completer(text: str, state: int):
            buffer = readline.get_line_buffer()
            options = [s for s in service.handle_complete(buffer)
                       if not s.startswith("<")]
            return options[state] if state < len(options) else None

        readline.set_completer(completer)
        readline.parse_and_bind("tab: complete")
    except ImportError:
        pass

    print("Ask a question ending in '?'.  Commands: :explain <answer>, "
          ":tree <answer>, :program, :quit")
    last = None
    while True:
        try:
            line = input("? ").strip()
        except (EOFError, KeyboardInterrupt):
            print()
            return 0
        if not line:
            continue
        if line in (":quit", ":q", ":exit"):
            return 0
        try:
            if line == ":program":
                print(last.program if last else "no query yet")
            elif line.startswith(":explain ") or line.startswith(":tree "):
                if last is None:
                    print("no query yet")
                    continue
                answer = (line.split(" ", 1)[1].strip(),)
                detail = service.handle_explain(last.query_id, answer)
                if line.startswith(":tree "):
                    _print_tree(detail["tree"])
                else:
                    print(detail["text"])
            else:
                last = service.handle_query(line)
                for warning in last.warnings:
                    print(f"warning: {warning}")
                if not last.answers:
                    print("(no answers)")
                for answer in last.answers:
                    print("\t".join(answer))
        except BioQueryError as exc:
            _print_error(exc)


def cmd_load(args) -> int:
    store = FactStore()
    manifest_file = Path(args.manifest)
    try:
        reports = load_manifest(store, manifest_file.read_text(encoding="utf-8"),
                                manifest_file.parent)
    except (BioQueryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    failed = False
    for report in reports:
        print(f"{report.source}\tadded={report.added}"
              f"\tduplicates={report.duplicates}\terrors={len(report.errors)}")
        for issue in report.errors:
            print(f"  line {issue.line}: {issue.reason}", file=sys.stderr)
            failed = True
        for warning in report.warnings:
            print(f"  warning: {warning}", file=sys.stderr)
    stats = store.stats()
    print(f"total\t{stats['total']}")
    for predicate, count in stats["predicates"].items():
        print(f"predicate\t{predicate}\t{count}")
    for source, count in stats["sources"].items():
        print(f"source\t{source}\t{count}")
    return 1 if failed else 0


def cmd_validate_rules(args) -> int:
    try:
        text = Path(args.path).read_text(encoding="utf-8")
        layer = parse_rules(text)
    except (BioQueryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    graph = dependency_graph(layer)
    defined = layer.head_predicates()
    sources = sorted(graph.nodes - defined)
    print(f"OK: {len(layer)} rules, {len(defined)} defined predicates, "
          f"{len(sources)} source predicates")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    try:
        service = _load_service(args)
    except BioQueryError as exc:
        _print_error(exc)
        return 1
    ui_dir = args.ui
    if ui_dir is None:
        candidate = Path("frontend") / "dist"
        if candidate.is_dir():
            ui_dir = candidate
    app = create_app(service, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "ask": cmd_ask,
    "repl": cmd_repl,
    "load": cmd_load,
    "validate-rules": cmd_validate_rules,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
