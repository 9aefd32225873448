"""Command-line entry point: ``justact {eval,check,run,audit,inspect,scenarios}``.

Exit codes: 0 ok, 1 user error, 2 replay divergence or (with --strict) a
prohibited enactment.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .slick import (
    DEFAULT_BOUND,
    SlickSyntaxError,
    UnsafeRuleError,
    evaluate,
    parse_fact,
    parse_policy,
    parse_rules,
    render,
    safety_violations,
)

OK, USER_ERROR, VIOLATION = 0, 1, 2


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_eval(args) -> int:
    try:
        policy = parse_policy(_read(args.file))
        queries = [parse_fact(q) for q in args.query or ()]
    except (SlickSyntaxError, UnsafeRuleError) as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return USER_ERROR
    d = evaluate(policy, args.bound)
    for q in queries:
        print(f"{render(q)}: {'true' if q in d.trues else 'false'}")
    if not queries or args.verbose:
        print("trues:")
        for f in d.sorted_trues():
            print(f"  {render(f)}")
        print("unknowns:")
        for f in d.sorted_unknowns():
            print(f"  {render(f)}")
    print(f"valid: {str(d.valid).lower()}")
    if d.bound_exceeded:
        print(f"bound exceeded after {d.steps_used} steps (bound {args.bound})")
    return OK


def cmd_check(args) -> int:
    try:
        located = parse_rules(_read(args.file))
    except SlickSyntaxError as exc:
        print(f"{args.file}:{exc}")
        return USER_ERROR
    problems = []
    for index, (rule, line, column) in enumerate(located):
        problems += safety_violations(rule, index=index, line=line, column=column)
    for v in problems:
        print(f"{args.file}:{v}")
    if problems:
        return USER_ERROR
    print(f"{args.file}: ok, {len(located)} safe rules")
    return OK


def _engine_options(args) -> dict:
    return {"strict": args.strict, "bound": args.bound, "authority": parse_fact(args.authority)}


def cmd_run(args) -> int:
    from .agents import NonTermination, ScenarioError, load_scenario, run_scenario
    from .runtime import write_trace

    try:
        spec = load_scenario(args.scenario, disabled=args.disable or ())
        result = run_scenario(spec, round_cap=args.round_cap, strict=args.strict, bound=args.bound)
    except (ScenarioError, SlickSyntaxError, UnsafeRuleError, NonTermination) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USER_ERROR
    out = args.out or f"{spec.name}.jsonl"
    write_trace(result.events, out)
    s = result.summary()
    print(f"{spec.name}: {s['statements']} statements, {s['enactments']} enactments "
          f"({s['permitted']} permitted), {s['grants']} access grants, {s['denials']} denials, "
          f"{result.rounds} rounds -> {out}")
    if args.strict and any(e.reason == "Prohibited" for e in result.events):
        return VIOLATION
    return OK


def _load_trace(path):
    from .runtime import read_trace

    return read_trace(path)


def cmd_audit(args) -> int:
    from .runtime import NotAnEnactment, ReplayDivergence, audit, audit_all, correspondence_violations, replay

    try:
        events = _load_trace(args.trace)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read trace: {exc}", file=sys.stderr)
        return USER_ERROR
    options = _engine_options(args)
    try:
        replay(events, **options)
        reports = [audit(events, args.index, **options)] if args.index is not None else audit_all(events, **options)
    except ReplayDivergence as exc:
        print(f"replay diverges at event {exc.index}\n  recorded:   {exc.expected}\n  recomputed: {exc.actual}",
              file=sys.stderr)
        return VIOLATION
    except NotAnEnactment as exc:
        print(f"NotAnEnactment: {exc}", file=sys.stderr)
        return USER_ERROR
    bad = correspondence_violations(events)
    if args.json:
        print(json.dumps({"reports": [r.to_json() for r in reports], "uncorresponding_grants": bad},
                         indent=2, sort_keys=True))
    else:
        for r in reports:
            print(r.render())
            print()
        permitted = sum(r.permission.permitted for r in reports)
        print(f"{len(reports)} enactments audited, {permitted} permitted, {len(reports) - permitted} prohibited; "
              f"{len(bad)} granted accesses without a matching effect")
    if args.strict and any(not r.permission.permitted for r in reports):
        return VIOLATION
    return OK


def cmd_inspect(args) -> int:
    from .inspector import browse, render_panes

    try:
        events = _load_trace(args.trace)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read trace: {exc}", file=sys.stderr)
        return USER_ERROR
    if args.plain or not sys.stdout.isatty():
        indices = [args.index] if args.index is not None else [e.index for e in events if e.is_applied_enact]
        for i in indices or [0]:
            print("\n".join(render_panes(events, i, args.width, args.height, max(0, i - args.height // 2))))
            print()
        return OK
    browse(events)
    return OK


def cmd_scenarios(args) -> int:
    from .agents import bundled_names, load_scenario

    for name in bundled_names():
        spec = load_scenario(name)
        print(f"{name}: {spec.title} (agents: {', '.join(render(a) for a in spec.agents)})")
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="justact", description="JustAct with Slick policies")
    sub = parser.add_subparsers(dest="command", required=True)

    def engine_flags(p):
        p.add_argument("--bound", type=int, default=DEFAULT_BOUND, help="inference step bound")
        p.add_argument("--strict", action="store_true", help="treat prohibited enactments as errors")
        p.add_argument("--authority", default="consortium", help="agent allowed to update agreements")

    p = sub.add_parser("eval", help="evaluate a Slick file")
    p.add_argument("file")
    p.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    p.add_argument("--query", action="append", help="fact to test (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true", help="print the model even with --query")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="parse and safety-check a Slick file")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="run a scenario and write its trace")
    p.add_argument("scenario", help="bundled name (scenario1..5) or directory with manifest.yaml")
    p.add_argument("--out", help="trace path (default <scenario>.jsonl)")
    p.add_argument("--disable", action="append", metavar="AGENT", help="agent that never acts (repeatable)")
    p.add_argument("--round-cap", type=int, default=100)
    engine_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("audit", help="replay a trace and audit its enactments")
    p.add_argument("trace")
    p.add_argument("index", nargs="?", type=int)
    p.add_argument("--json", action="store_true")
    engine_flags(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("inspect", help="browse a trace (read-only)")
    p.add_argument("trace")
    p.add_argument("--plain", action="store_true", help="print panes instead of opening the browser")
    p.add_argument("--index", type=int, help="event to show with --plain (default: every enactment)")
    p.add_argument("--width", type=int, default=140)
    p.add_argument("--height", type=int, default=40)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("scenarios", help="list bundled scenarios")
    p.set_defaults(func=cmd_scenarios)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
