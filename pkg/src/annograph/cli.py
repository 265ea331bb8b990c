"""Command line entry points: run the service, score offline corpora."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .evalkit import intra_group_variance, micro_f1, records_from_export
from .generation import HttpGenerationClient, MockGenerationClient
from .scheme import TaskKind
from .store import DocumentStore


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="annograph")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the annotation service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--data-dir", default=None, help="persist collections under this directory")
    serve.add_argument("--gen-endpoint", default=None, help="URL of the text-generation endpoint")
    serve.add_argument("--gen-key-env", default="ANNOGRAPH_GENERATION_TOKEN",
                       help="environment variable holding the endpoint bearer token")
    serve.add_argument("--mock-gen", action="store_true",
                       help="use the deterministic mock generation client")
    serve.add_argument("--mock-fixtures", default=None,
                       help="JSON fixture file for the mock client")
    serve.add_argument("--embed-endpoint", default=None,
                       help="URL of an external sentence-embedding endpoint for clustering")
    serve.add_argument("--autolabel-cap", type=int, default=4,
                       help="max concurrent auto-label conversations")

    evaluate = sub.add_parser("eval", help="score prediction exports against a gold export")
    evaluate.add_argument("--task", required=True, choices=["ner", "re", "ee"])
    evaluate.add_argument("--gold", required=True, help="gold export JSON file")
    evaluate.add_argument("--pred", required=True, help="prediction export JSON file")
    evaluate.add_argument("--group", nargs="*", default=None,
                          help="two or more member export files for group variance")
    return parser


def _load_records(path: str, task: TaskKind):
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return records_from_export(payload, task)


def _cmd_eval(args: argparse.Namespace) -> int:
    task = TaskKind(args.task.upper())
    gold = _load_records(args.gold, task)
    pred = _load_records(args.pred, task)
    result = {"task": task.value, "micro_f1": micro_f1(task, gold, pred)}
    if args.group:
        members = [_load_records(path, task) for path in args.group]
        result["intra_group_variance"] = intra_group_variance(task, members)
    json.dump(result, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .pipeline import HttpEmbeddingProvider
    from .service import create_app

    client = None
    if args.mock_gen:
        client = MockGenerationClient(fixtures=args.mock_fixtures, default_reply="none")
    elif args.gen_endpoint:
        client = HttpGenerationClient(args.gen_endpoint, token_env=args.gen_key_env)

    provider = HttpEmbeddingProvider(args.embed_endpoint) if args.embed_endpoint else None
    app = create_app(
        store=DocumentStore(args.data_dir),
        generation_client=client,
        embedding_provider=provider,
        autolabel_cap=args.autolabel_cap,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "eval":
        return _cmd_eval(args)
    return _cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
