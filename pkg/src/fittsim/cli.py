"""Command-line entry point: run a scenario, export its CSV, optionally check it."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .checks import check_builtin
from .runner import run_scenario
from .scenario import BUILTINS, ScenarioError, load_scenario

log = logging.getLogger("fittsim")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fittsim",
        description="Discrete-event NDN simulator with FITT interest-flooding mitigation.",
        epilog="Built-in scenarios: " + ", ".join(BUILTINS),
    )
    p.add_argument("--scenario", required=True,
                   help="built-in scenario name or path to a TOML scenario file")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: scenario's own)")
    p.add_argument("--duration", type=float, default=None, help="simulated seconds")
    p.add_argument("--out", default=None, help="write the metrics CSV here ('-' for stdout)")
    p.add_argument("--check", action="store_true",
                   help="run the acceptance assertions of a built-in scenario")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be a non-negative integer")
    if args.duration is not None and not args.duration > 0:
        parser.error("--duration must be > 0")
    if args.check and args.scenario not in BUILTINS:
        parser.error(f"--check only applies to built-in scenarios ({', '.join(BUILTINS)})")

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.duration is not None:
        overrides["duration"] = args.duration
    try:
        cfg = load_scenario(args.scenario, **overrides)
    except ScenarioError as exc:
        parser.error(str(exc))

    result = run_scenario(cfg)
    text = result.csv()
    if args.out == "-":
        sys.stdout.write(text)
    elif args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    print(f"{cfg.name}: seed={cfg.seed} duration={cfg.duration:g}s "
          f"events={result.events_run} wall={result.wall_seconds:.2f}s",
          file=sys.stderr if args.out == "-" else sys.stdout)

    if not args.check:
        return 0
    results = check_builtin(args.scenario, seed=cfg.seed, duration=args.duration, run=result)
    stream = sys.stderr if args.out == "-" else sys.stdout
    for r in results:
        print(r.line(), file=stream)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} assertions passed", file=stream)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
