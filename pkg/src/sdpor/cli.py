"""Command-line interface: `sdpor check` and `sdpor fuzz`.

Exit codes for `check`: 0 no violations, 1 violations found, 2 tool
error or cap exhaustion.  `fuzz` exits 0 iff every seed's explorers
agreed on violation sites.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .corpus import GeneratorConfig
from .engine import (
    MODE_DPOR,
    MODE_SUMMARY,
    DporEngine,
    EngineConfig,
    ExplorationReport,
)
from .fuzz import run_fuzz
from .lang import ParseError, SemanticError, parse_program
from .oracle import DEFAULT_NODE_CAP, NodeCapExceeded, exhaustive_explore
from .statespace import to_dot

_CLI_MODES = {
    "dpor": MODE_DPOR,
    "summary-cache": MODE_SUMMARY,
    "exhaustive": "exhaustive",
}


def _node_cap() -> int:
    return int(os.environ.get("SDPOR_NODE_CAP", DEFAULT_NODE_CAP))


def report_to_dict(program_path: str, mode: str, report: ExplorationReport) -> dict:
    return {
        "program": program_path,
        "mode": mode,
        "states": report.states,
        "transitions": report.transitions,
        "executions": report.executions,
        "violations": [
            {"event": v.event, "message": v.message, "trace": list(v.trace)}
            for v in report.violations
        ],
        "wall_ms": round(report.wall_seconds * 1000.0, 3),
        "terminated_by": report.terminated_by,
    }


def render_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _cmd_check(args: argparse.Namespace) -> int:
    try:
        with open(args.program, encoding="utf-8") as f:
            source = f.read()
    except OSError as exc:
        print(f"error: cannot read {args.program}: {exc}", file=sys.stderr)
        return 2
    try:
        program = parse_program(source)
    except (ParseError, SemanticError) as exc:
        print(f"error: {args.program}: {exc}", file=sys.stderr)
        return 2

    if args.mode == "exhaustive":
        try:
            result = exhaustive_explore(program, node_cap=_node_cap())
        except NodeCapExceeded as exc:
            print(f"error: node cap exceeded: {exc}", file=sys.stderr)
            return 2
        report, graph = result.report, result.graph
    else:
        config = EngineConfig(
            mode=_CLI_MODES[args.mode],
            stop_policy="first-violation" if args.stop == "first" else "exhaust",
            max_executions=args.max_executions,
            max_trace_len=args.max_trace_len,
        )
        engine = DporEngine(program, config)
        report = engine.explore_all()
        graph = engine.graph

    if args.json:
        with open(args.json, "w", encoding="utf-8") as f:
            f.write(render_json(report_to_dict(args.program, args.mode, report)))
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as f:
            f.write(to_dot(graph))
    if not args.quiet:
        print(f"program:     {args.program}")
        print(f"mode:        {args.mode}")
        print(f"states:      {report.states}")
        print(f"transitions: {report.transitions}")
        print(f"executions:  {report.executions}")
        print(f"wall_ms:     {round(report.wall_seconds * 1000.0, 3)}")
        print(f"terminated:  {report.terminated_by}")
        if report.violations:
            print(f"violations:  {len(report.violations)}")
            for v in report.violations:
                print(f"  {v.event}: {v.message}  via {' '.join(v.trace)}")
        else:
            print("violations:  none")

    if report.terminated_by == "cap":
        print("error: exploration cap exhausted", file=sys.stderr)
        return 2
    return 1 if report.violations else 0


def _cmd_fuzz(args: argparse.Namespace) -> int:
    try:
        base = GeneratorConfig(
            seed=args.seed,
            n_events=args.n_events,
            n_vars=args.n_vars,
            max_stmts_per_event=args.max_stmts,
            p_enable_disable=args.p_enable_disable,
            p_assert=args.p_assert,
            p_branch=args.p_branch,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    stats = run_fuzz(base, args.count, node_cap=_node_cap(), log=print)
    print(f"seeds: {args.count}  ok: {stats.ok}  skipped: {stats.skipped}  "
          f"mismatches: {len(stats.mismatches)}")
    return 0 if stats.all_agree else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdpor",
        description="Stateful DPOR model checker for event-driven programs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="explore one program and report violations")
    check.add_argument("--program", required=True, help="path to a .evt program")
    check.add_argument("--mode", choices=sorted(_CLI_MODES), default="dpor")
    check.add_argument("--stop", choices=["first", "exhaust"], default="exhaust")
    check.add_argument("--max-executions", type=int, default=None)
    check.add_argument("--max-trace-len", type=int, default=None)
    check.add_argument("--dot", help="write the explored graph as GraphViz")
    check.add_argument("--json", help="write the report as JSON")
    check.add_argument("--quiet", action="store_true")
    check.set_defaults(func=_cmd_check)

    fuzz = sub.add_parser("fuzz", help="differential-test the explorers on seeds")
    fuzz.add_argument("--seed", type=int, default=1)
    fuzz.add_argument("--count", type=int, default=50)
    fuzz.add_argument("--n-events", type=int, default=3)
    fuzz.add_argument("--n-vars", type=int, default=2)
    fuzz.add_argument("--max-stmts", type=int, default=3)
    fuzz.add_argument("--p-enable-disable", type=float, default=0.25)
    fuzz.add_argument("--p-assert", type=float, default=0.25)
    fuzz.add_argument("--p-branch", type=float, default=0.3)
    fuzz.set_defaults(func=_cmd_fuzz)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
