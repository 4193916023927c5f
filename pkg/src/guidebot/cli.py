"""Command-line interface.

Subcommands: run, batch, map-check, intent.  Exit codes: 0 success,
2 parse error, 3 run failure (collision / unreachable / lost / clarify).
Set GUIDEBOT_LOG=debug|info|warning to control verbosity.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .dialogue import Ambiguous, NoDestination, extract_intent, load_lexicon_file
from .grid import MapParseError, load_map_file
from .runner import run_batch, run_scenario
from .scenario import load_scenario_file
from .trace import write_trace

log = logging.getLogger("guidebot")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_RUN = 3


def _setup_logging() -> None:
    level = os.environ.get("GUIDEBOT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _cmd_run(args) -> int:
    try:
        sc = load_scenario_file(args.scenario)
    except (OSError, ValueError, json.JSONDecodeError) as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if args.seed is not None:
        sc = sc.with_seed(args.seed)
    try:
        records, metrics = run_scenario(sc)
    except MapParseError as e:
        print(f"map error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if args.trace:
        write_trace(records, args.trace)
    payload = json.dumps(metrics.to_json_dict(), indent=2)
    if args.metrics:
        with open(args.metrics, "w", encoding="utf-8", newline="\n") as f:
            f.write(payload + "\n")
    print(payload)
    return EXIT_OK if metrics.success else EXIT_RUN


def _cmd_batch(args) -> int:
    try:
        sc = load_scenario_file(args.scenario)
    except (OSError, ValueError, json.JSONDecodeError) as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return EXIT_PARSE
    results = run_batch(sc, range(args.seeds), out_dir=args.out)
    ok = sum(1 for m in results if m.success)
    print(f"{ok}/{len(results)} runs succeeded; outputs in {args.out}")
    return EXIT_OK if ok == len(results) else EXIT_RUN


def _cmd_map_check(args) -> int:
    try:
        grid, entities = load_map_file(args.file)
    except MapParseError as e:
        print(f"map error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"cannot read map: {e}", file=sys.stderr)
        return EXIT_PARSE
    print(
        f"ok: {grid.width}x{grid.height} cells at {grid.resolution} m/cell, "
        f"{len(entities)} entities"
    )
    return EXIT_OK


def _cmd_intent(args) -> int:
    try:
        lexicon = load_lexicon_file(args.lexicon)
    except (OSError, ValueError) as e:
        print(f"lexicon error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        intent = extract_intent(args.utterance, lexicon)
    except NoDestination:
        print("Sorry, I did not catch a destination. Could you rephrase?")
        return EXIT_RUN
    except Ambiguous as e:
        print(f"Did you mean one of: {', '.join(e.candidates)}?")
        return EXIT_RUN
    print(intent.confirmation)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(prog="guidebot")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--trace", default=None, help="trace output path (jsonl)")
    p_run.add_argument("--metrics", default=None, help="metrics output path (json)")
    p_run.set_defaults(func=_cmd_run)

    p_batch = sub.add_parser("batch", help="run a scenario over many seeds")
    p_batch.add_argument("--scenario", required=True)
    p_batch.add_argument("--seeds", type=int, required=True)
    p_batch.add_argument("--out", required=True)
    p_batch.set_defaults(func=_cmd_batch)

    p_map = sub.add_parser("map-check", help="validate a map file")
    p_map.add_argument("file")
    p_map.set_defaults(func=_cmd_map_check)

    p_intent = sub.add_parser("intent", help="extract a destination from text")
    p_intent.add_argument("--lexicon", required=True)
    p_intent.add_argument("--utterance", required=True)
    p_intent.set_defaults(func=_cmd_intent)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
