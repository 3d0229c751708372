"""boycottctl: campaign lint, target expansion, and offline replay.

Exit codes: 0 success, 1 validation or assertion failure, 2 IO/usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import timedelta
from pathlib import Path

from ..campaigns import Campaign, StrengthLevel, parse_campaign, validate_campaign
from ..campaigns import CampaignParseError
from ..userstate import UserState, UserStateParseError, parse_user_state
from .ownership import GraphParseError, UnknownEntityError, expand_targets, load_graph
from .replay import DEFAULT_STEP, render_table, run_replay, serialize_report


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def cmd_lint(args: argparse.Namespace) -> int:
    path = Path(args.file)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        return _fail(f"lint: cannot read {path}: {exc}", 2)
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        print(json.dumps({
            "file": str(path),
            "ok": False,
            "issues": [{"code": "PARSE_ERROR", "path": "", "severity": "error",
                        "message": exc.msg}],
        }, sort_keys=True))
        return 1
    report = validate_campaign(payload)
    print(json.dumps({
        "file": str(path),
        "ok": report.ok,
        "issues": report.to_payload(),
    }, sort_keys=True))
    return 0 if report.ok else 1


def cmd_expand(args: argparse.Namespace) -> int:
    try:
        graph = load_graph(args.graph)
    except OSError as exc:
        return _fail(f"expand: cannot read {args.graph}: {exc}", 2)
    except GraphParseError as exc:
        return _fail(f"expand: bad graph file: {exc}", 2)
    kinds = frozenset(args.edge_kind) if args.edge_kind else None
    try:
        if kinds is None:
            keywords, domains = expand_targets(args.root, graph)
        else:
            keywords, domains = expand_targets(args.root, graph, kinds)
    except UnknownEntityError as exc:
        return _fail(f"expand: unknown entity {exc.args[0]!r}", 1)
    payload = json.dumps(
        {"keywords": sorted(keywords), "domains": sorted(domains)},
        sort_keys=True, indent=2,
    ) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(payload, encoding="utf-8")
        except OSError as exc:
            return _fail(f"expand: cannot write {args.out}: {exc}", 2)
    else:
        sys.stdout.write(payload)
    return 0


def _load_campaigns(paths: list[str]) -> list[Campaign] | int:
    campaigns = []
    for raw_path in paths:
        path = Path(raw_path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            return _fail(f"replay: cannot read {path}: {exc}", 2)
        try:
            campaigns.append(parse_campaign(raw))
        except CampaignParseError as exc:
            return _fail(f"replay: invalid campaign {path}: {exc}", 1)
    return campaigns


def cmd_replay(args: argparse.Namespace) -> int:
    fixtures_dir = Path(args.fixtures)
    if not fixtures_dir.is_dir():
        return _fail(f"replay: not a directory: {fixtures_dir}", 2)
    campaigns = _load_campaigns(args.campaign)
    if isinstance(campaigns, int):
        return campaigns
    user: UserState | None = None
    if args.state:
        try:
            user = parse_user_state(Path(args.state).read_bytes())
        except OSError as exc:
            return _fail(f"replay: cannot read {args.state}: {exc}", 2)
        except UserStateParseError as exc:
            return _fail(f"replay: invalid user state: {exc}", 1)
    report = run_replay(
        sorted(fixtures_dir.glob("*.json")),
        campaigns,
        StrengthLevel(args.level),
        user,
        step=timedelta(minutes=args.step_minutes),
    )
    sys.stdout.write(render_table(report))
    if args.report:
        try:
            Path(args.report).write_bytes(serialize_report(report))
        except OSError as exc:
            return _fail(f"replay: cannot write {args.report}: {exc}", 2)
    return 1 if report.error_count else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boycottctl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_lint = sub.add_parser("lint", help="validate a campaign file")
    p_lint.add_argument("file", help="campaign JSON document")
    p_lint.set_defaults(func=cmd_lint)

    p_expand = sub.add_parser("expand", help="expand targets from an ownership graph")
    p_expand.add_argument("--graph", required=True, help="ownership graph file")
    p_expand.add_argument("--root", required=True, action="append",
                          help="root entity id (repeatable)")
    p_expand.add_argument("--edge-kind", action="append",
                          help="ownership edge kind to follow (default: subsidiary, brand)")
    p_expand.add_argument("--out", help="write JSON here instead of stdout")
    p_expand.set_defaults(func=cmd_expand)

    p_replay = sub.add_parser("replay", help="run the engine over fixture pages")
    p_replay.add_argument("--fixtures", required=True, help="directory of fixture JSON files")
    p_replay.add_argument("--campaign", required=True, action="append",
                          help="campaign file (repeatable)")
    p_replay.add_argument("--level", required=True, choices=["High", "Medium", "Low"])
    p_replay.add_argument("--state", help="user-state JSON file (whitelist, priorities)")
    p_replay.add_argument("--report", help="write the machine-readable report here")
    p_replay.add_argument("--step-minutes", type=int,
                          default=int(DEFAULT_STEP.total_seconds() // 60),
                          help="simulated minutes between fixtures")
    p_replay.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return int(exc.code) if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
