#!/usr/bin/env python3
"""Global-localization experiment: uniform particle init in the bundled
storage room, 50 scripted steps, final weighted-mean error per trial."""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from guidebot.experiments import localization_room, run_localization_trial


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed0", type=int, default=1000)
    args = ap.parse_args()

    room = localization_room()
    threshold = 2 * room.resolution
    errs = np.array(
        [run_localization_trial(args.seed0 + k) for k in range(args.trials)]
    )
    hits = int((errs < threshold).sum())
    print(f"trials:    {args.trials}")
    print(f"converged: {hits} (< {threshold:.1f} m)")
    print(f"median:    {np.median(errs):.3f} m")
    print(f"p90:       {np.percentile(errs, 90):.3f} m")
    return 0


if __name__ == "__main__":
    sys.exit(main())
