"""Run every bundled scenario, write its trace and check the trace invariants.

    python3 scripts/run_all_scenarios.py [--out traces/] [--strict]
"""
import argparse
import sys
import time
from pathlib import Path

from justact.agents import bundled_names, load_scenario, run_scenario
from justact.invariants import check_all
from justact.runtime import correspondence_violations, replay, write_trace


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="traces")
    parser.add_argument("--strict", action="store_true")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    runs = [(name, ()) for name in bundled_names()] + [("scenario3", ("amy",))]
    failures = 0
    for name, disabled in runs:
        tag = name + "".join(f"-no-{a}" for a in disabled)
        start = time.perf_counter()
        result = run_scenario(load_scenario(name, disabled=disabled), strict=args.strict)
        elapsed = time.perf_counter() - start
        write_trace(result.events, out / f"{tag}.jsonl")
        replay(result.events, strict=args.strict)
        broken = {k: v for k, v in check_all(result.events, strict=args.strict).items() if v}
        unmatched = correspondence_violations(result.events)
        if unmatched:
            broken["correspondence"] = unmatched
        s = result.summary()
        status = "ok" if not broken else "VIOLATED " + ", ".join(broken)
        failures += bool(broken)
        print(f"{tag:20s} {len(result.events):4d} events  {s['statements']:2d} stated  "
              f"{s['enactments']} enacted ({s['permitted']} permitted)  {s['grants']:2d} grants  "
              f"{elapsed:5.2f}s  {status}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
