#!/usr/bin/env python3
"""Compare user-side safety with and without the user boundary polygon.

Runs each bundled scenario over a seed range twice: once with the full
composite footprint, once as the robot-only baseline (no user polygon,
robot-sized inflation, no user monitoring).  Prints per-map totals of
user clearance violation ticks (< 0.1 m) and collision tallies.
"""
from __future__ import annotations

import argparse
import sys
import os

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from guidebot.experiments import ABLATION_OVERRIDES, scenario_path
from guidebot.grid import load_map_file
from guidebot.metrics import clearance_violation_ticks
from guidebot.runner import run_scenario
from guidebot.scenario import load_scenario_file

MAPS = ("corridor", "atrium", "cluttered")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()

    print(f"{'map':10s} {'mode':10s} {'viol.ticks':>10s} {'collisions':>10s} {'success':>8s}")
    for name in MAPS:
        grid, _ = load_map_file(load_scenario_file(scenario_path(name)).map_path)
        for mode, overrides in (("full", {}), ("robot-only", ABLATION_OVERRIDES)):
            sc = load_scenario_file(scenario_path(name))
            sc.overrides = dict(overrides)
            viol = coll = succ = 0
            for seed in range(args.seeds):
                records, m = run_scenario(sc.with_seed(seed))
                viol += clearance_violation_ticks(records, grid)
                coll += m.collision_count
                succ += m.success
            print(f"{name:10s} {mode:10s} {viol:10d} {coll:10d} {succ:7d}/{args.seeds}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
