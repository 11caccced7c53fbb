"""Command line interface over a file-backed workspace.

The workspace directory comes from ``--workspace``, the ``SCS_WORKSPACE``
environment variable, or the current directory, in that order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import workspace as ws_mod
from .corpus import QueryFilter, derive_form_schema, form_schema_to_doc, query_segments, segment_to_doc
from .errors import ScsError, UnknownIdError
from .notation import ParseError, canonical_form, parse_graph
from .storyteller import compile_publication, enumerate_paths

DEFAULT_MAX_LEN = 32


def _workspace_root(args: argparse.Namespace) -> Path:
    if args.workspace:
        return Path(args.workspace)
    env = os.environ.get("SCS_WORKSPACE")
    return Path(env) if env else Path(".")


def cmd_check(args: argparse.Namespace) -> int:
    result = ws_mod.check_workspace(_workspace_root(args))
    for line in result.lines():
        print(line)
    if result.exit_code == 0:
        print("workspace clean")
    return result.exit_code


def cmd_fmt(args: argparse.Namespace) -> int:
    path = Path(args.file)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        graph = parse_graph(text)
    except ParseError as exc:
        print(f"{path}:{exc}", file=sys.stderr)
        return 1
    formatted = canonical_form(graph)
    if formatted != text:
        ws_mod.atomic_write_text(path, formatted)
    return 0


def cmd_form(args: argparse.Namespace) -> int:
    ws = ws_mod.load_workspace(_workspace_root(args))
    model = ws.corpus.model_library.get(args.model_id)
    if model is None:
        raise UnknownIdError(f"unknown model {args.model_id!r}", id=args.model_id)
    schema = derive_form_schema(ws.ontology, model)
    print(json.dumps(form_schema_to_doc(schema), ensure_ascii=False, indent=2))
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    ws = ws_mod.load_workspace(_workspace_root(args))
    window = None
    if args.from_ms is not None or args.to_ms is not None:
        lo = args.from_ms if args.from_ms is not None else 0
        hi = args.to_ms if args.to_ms is not None else max(
            (m.duration_ms for m in ws.corpus.media.values()), default=0
        )
        window = (lo, hi)
    flt = QueryFilter(
        concept=args.concept,
        marker=args.marker,
        relation=args.relation,
        stratum_kind=args.stratum,
        time_window=window,
    )
    hits = query_segments(ws.corpus, ws.ontology, flt)
    print(json.dumps([segment_to_doc(s) for s in hits], ensure_ascii=False, indent=2))
    return 0


def cmd_match(args: argparse.Namespace) -> int:
    from .storyteller import match_step

    ws = ws_mod.load_workspace(_workspace_root(args))
    scenario = ws.scenario(args.scenario_id)
    step = next((s for s in scenario.steps if s.id == args.step_id), None)
    if step is None:
        raise UnknownIdError(f"unknown step {args.step_id!r}", id=args.step_id)
    for seg, score in match_step(ws.ontology, step, ws.corpus):
        print(f"{seg.id}\t{score}")
    return 0


def cmd_paths(args: argparse.Namespace) -> int:
    ws = ws_mod.load_workspace(_workspace_root(args))
    scenario = ws.scenario(args.scenario_id)
    for path in enumerate_paths(scenario, args.max_len):
        print(" -> ".join(path))
    return 0


def cmd_publish(args: argparse.Namespace) -> int:
    ws = ws_mod.load_workspace(_workspace_root(args))
    scenario = ws.scenario(args.scenario_id)
    manifest, warnings = compile_publication(ws.ontology, scenario, ws.corpus, args.mode)
    try:
        path = ws_mod.write_publication(ws, manifest)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(path)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    app = create_app(_workspace_root(args))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scs",
        description="Conceptual-graph workspace tools: validate, query, match, publish.",
    )
    parser.add_argument("--workspace", help="workspace directory (default: $SCS_WORKSPACE or .)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("check", help="validate every file of the workspace").set_defaults(func=cmd_check)

    p = sub.add_parser("fmt", help="rewrite a notation file to canonical form")
    p.add_argument("file")
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("form", help="print the dynamic form schema of a model")
    p.add_argument("model_id")
    p.set_defaults(func=cmd_form)

    p = sub.add_parser("query", help="query segments by annotation content")
    p.add_argument("--concept")
    p.add_argument("--marker")
    p.add_argument("--relation")
    p.add_argument("--stratum")
    p.add_argument("--from-ms", type=int, dest="from_ms")
    p.add_argument("--to-ms", type=int, dest="to_ms")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("match", help="rank segments against one scenario step")
    p.add_argument("scenario_id")
    p.add_argument("step_id")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("paths", help="enumerate condition-respecting narrative paths")
    p.add_argument("scenario_id")
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN, dest="max_len")
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("publish", help="compile a publication manifest")
    p.add_argument("scenario_id")
    p.add_argument("--mode", choices=("fixed", "open"), default="fixed")
    p.set_defaults(func=cmd_publish)

    p = sub.add_parser("serve", help="serve the workspace over HTTP")
    p.add_argument("--bind", default="127.0.0.1:8023")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScsError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        if isinstance(getattr(exc, "details", None), dict) and exc.details.get("issues"):
            for issue in exc.details["issues"]:
                print(f"  {issue}", file=sys.stderr)
        return 2 if exc.code == "IoError" else 1


if __name__ == "__main__":
    sys.exit(main())
