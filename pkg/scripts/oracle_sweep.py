"""Compare the Slick evaluator with the naive stratified oracle on random programs.

    python3 scripts/oracle_sweep.py [--n 5000] [--seed 0]
"""
import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parents[1] / "tests"))

import oracle  # noqa: E402
from justact.slick import evaluate, parse_policy  # noqa: E402


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    mismatches = 0
    start = time.perf_counter()
    for i in range(args.n):
        facts, rules, strata = oracle.random_program(rng)
        text = oracle.to_slick(facts, rules)
        d = evaluate(parse_policy(text))
        expected = oracle.to_facts(oracle.solve(facts, rules, strata))
        if d.trues != expected or d.unknowns:
            mismatches += 1
            print(f"mismatch #{i}:\n{text}\n")
    elapsed = time.perf_counter() - start
    print(f"{args.n} programs, {mismatches} mismatches, {elapsed:.2f}s ({1000 * elapsed / args.n:.2f} ms/program)")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
