from __future__ import annotations

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from guidebot.geometry import Pose2D
from guidebot.grid import OCCUPIED, OccupancyGrid


@pytest.fixture
def empty_grid():
    return OccupancyGrid(100, 100, 0.05, Pose2D(-2.5, -2.5, 0.0))


@pytest.fixture
def walled_grid():
    """6 m x 6 m room with a boundary wall, origin at (0, 0)."""
    g = OccupancyGrid(120, 120, 0.05, Pose2D(0.0, 0.0, 0.0))
    g.cells[0, :] = OCCUPIED
    g.cells[-1, :] = OCCUPIED
    g.cells[:, 0] = OCCUPIED
    g.cells[:, -1] = OCCUPIED
    return g


def random_grid(rng: np.random.Generator, w=30, h=30, res=0.1, density=0.2,
                keep_free=None) -> OccupancyGrid:
    g = OccupancyGrid(w, h, res, Pose2D(0.0, 0.0, 0.0))
    mask = rng.random((w, h)) < density
    if keep_free is not None:
        for ix, iy in keep_free:
            mask[ix, iy] = False
    g.cells[mask] = OCCUPIED
    return g


@pytest.fixture
def tiny_scenario(tmp_path):
    """A fast-running scenario on a small corridor, for harness/CLI tests."""
    import json

    map_text_rows = []
    w, h = 70, 26
    for r in range(h):
        if r == 0 or r == h - 1:
            map_text_rows.append("#" * w)
        else:
            map_text_rows.append("#" + "." * (w - 2) + "#")
    map_text = f"{w} {h} 0.1\n" + "\n".join(map_text_rows) + "\n"
    map_text += "entity doorway 6.0 1.3 static\n"
    (tmp_path / "mini.map").write_text(map_text)
    (tmp_path / "mini.lex").write_text("exit 6.0 1.3 0.0 exit,door\n")
    sc = {
        "map": "mini.map",
        "lexicon": "mini.lex",
        "robot_start": [1.3, 1.5, 0.0],
        "user_start": [0.75, 1.15, 0.0],
        "utterance": "take me to the exit",
        "duration_max": 30.0,
        "seed": 7,
        "overrides": {
            "lidar": {"n_beams": 90, "max_range": 4.0},
            "mcl": {"n_particles": 150},
        },
    }
    path = tmp_path / "mini.json"
    path.write_text(json.dumps(sc))
    return str(path)
