"""Seeded search for axiom violations over several seeds, with replay checks."""
import argparse
import time
from dataclasses import replace

from sharedinfo.axioms import SearchConfig, replay, search_violations, worst_gap


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--measure", default="imin")
    parser.add_argument("--axiom", default="LM")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    parser.add_argument("--budget", type=int, default=100_000)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--output", help="write the witness of the first seed here")
    args = parser.parse_args()

    base = SearchConfig(args.measure, args.axiom, budget=args.budget)
    for i, seed in enumerate(args.seeds):
        config = replace(base, seed=seed)
        start = time.perf_counter()
        res = search_violations(config, jobs=args.jobs)
        elapsed = time.perf_counter() - start
        if not res.found:
            print(f"seed {seed}: nothing in {res.trials} trials ({elapsed:.2f}s)")
            continue
        text = res.witness_text(config)
        _, verdicts, _ = replay(text)
        stable = worst_gap(verdicts, config.axiom) == res.gap
        print(f"seed {seed}: trial {res.trial}, {len(res.case.dist)} rows, gap {res.gap:.6g}, "
              f"replay {'stable' if stable else 'UNSTABLE'} ({elapsed:.2f}s)")
        if args.output and i == 0:
            with open(args.output, "w") as fh:
                fh.write(text)


if __name__ == "__main__":
    main()
