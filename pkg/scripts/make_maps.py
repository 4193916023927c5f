#!/usr/bin/env python3
"""Generate the bundled scenario assets (maps, lexicons, scenario files).

Rerunning overwrites scenarios/ deterministically.
"""
from __future__ import annotations

import json
import os
import sys



sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from guidebot.geometry import Pose2D
from guidebot.grid import FREE, OCCUPIED, OccupancyGrid, SemanticEntity, serialize_map

OUT = os.path.join(os.path.dirname(__file__), "..", "scenarios")
RES = 0.05


def shell(grid: OccupancyGrid) -> None:
    grid.cells[0, :] = OCCUPIED
    grid.cells[-1, :] = OCCUPIED
    grid.cells[:, 0] = OCCUPIED
    grid.cells[:, -1] = OCCUPIED


def carve(grid: OccupancyGrid, x0: float, y0: float, x1: float, y1: float) -> None:
    i0, j0 = grid.world_to_cell(x0, y0)
    i1, j1 = grid.world_to_cell(x1 - 1e-9, y1 - 1e-9)
    grid.cells[i0 : i1 + 1, j0 : j1 + 1] = FREE


def block(grid: OccupancyGrid, x0: float, y0: float, x1: float, y1: float) -> None:
    i0, j0 = grid.world_to_cell(x0, y0)
    i1, j1 = grid.world_to_cell(x1 - 1e-9, y1 - 1e-9)
    grid.cells[i0 : i1 + 1, j0 : j1 + 1] = OCCUPIED


def corridor() -> tuple[OccupancyGrid, list[SemanticEntity]]:
    # L-shaped corridor: east leg 14 x 3 m, then a right turn south.
    g = OccupancyGrid(280, 120, RES, Pose2D(0, 0, 0))
    g.cells[:, :] = OCCUPIED
    carve(g, 0.05, 3.05, 13.95, 5.95)
    carve(g, 11.05, 0.05, 13.95, 5.95)
    entities = [
        SemanticEntity("bench", (5.0, 3.4), "static"),
        SemanticEntity("wet_floor_sign", (8.0, 5.6), "hazard"),
        SemanticEntity("door", (12.6, 1.0), "static"),
    ]
    return g, entities


def atrium() -> tuple[OccupancyGrid, list[SemanticEntity]]:
    g = OccupancyGrid(240, 200, RES, Pose2D(0, 0, 0))
    shell(g)
    for cx, cy in [(3.0, 2.2), (3.0, 7.8), (9.0, 2.2), (9.0, 7.8)]:
        block(g, cx - 0.2, cy - 0.2, cx + 0.2, cy + 0.2)
    block(g, 5.7, 3.2, 6.3, 4.4)  # information kiosk south of center
    entities = [
        SemanticEntity("kiosk", (6.0, 4.6), "static"),
        SemanticEntity("fountain", (9.5, 8.5), "static"),
        SemanticEntity("cleaning_cart", (2.5, 8.0), "hazard"),
        SemanticEntity("info_desk", (10.5, 2.0), "static"),
    ]
    return g, entities


def cluttered() -> tuple[OccupancyGrid, list[SemanticEntity]]:
    # Room split by a partial partition: the route climbs over its gap and
    # bends back down on the far side, plus loose clutter off the route.
    g = OccupancyGrid(200, 160, RES, Pose2D(0, 0, 0))
    shell(g)
    block(g, 5.4, 0.05, 5.9, 4.8)   # partition from the south wall
    block(g, 1.4, 6.6, 1.9, 7.1)
    block(g, 8.6, 6.6, 9.1, 7.1)
    block(g, 2.8, 3.0, 3.3, 3.5)
    entities = [
        SemanticEntity("crate", (5.65, 5.1), "static"),
        SemanticEntity("ladder", (3.05, 2.7), "hazard"),
        SemanticEntity("shelf", (8.85, 6.3), "static"),
    ]
    return g, entities


LEXICONS = {
    "corridor.lex": [
        "exit 12.5 1.4 0.0 exit,door,outside,entrance",
        "bench 5.0 4.5 0.0 bench,seat",
    ],
    "atrium.lex": [
        "restroom 10.8 5.0 0.0 restroom,bathroom,toilet,washroom",
        "fountain 9.5 7.6 0.0 fountain,water",
        "desk 10.5 2.6 0.0 desk,information,reception",
    ],
    "cluttered.lex": [
        "workbench 8.4 1.6 0.0 workbench,bench,station",
        "exit 8.4 5.6 0.0 exit,door",
    ],
}

SCENARIOS = {
    "corridor.json": {
        "map": "corridor.map",
        "lexicon": "corridor.lex",
        "robot_start": [1.4, 4.4, 0.0],
        "user_start": [0.85, 4.05, 0.0],
        "utterance": "Take me to the exit, please.",
        "duration_max": 60.0,
        "seed": 1,
    },
    "atrium.json": {
        "map": "atrium.map",
        "lexicon": "atrium.lex",
        "robot_start": [1.4, 5.0, 0.0],
        "user_start": [0.85, 4.65, 0.0],
        "utterance": "Where is the restroom?",
        "duration_max": 60.0,
        "seed": 1,
    },
    "cluttered.json": {
        "map": "cluttered.map",
        "lexicon": "cluttered.lex",
        "robot_start": [1.6, 1.4, 0.0],
        "user_start": [1.05, 1.05, 0.0],
        "utterance": "Can you take me to the workbench?",
        "duration_max": 60.0,
        "seed": 1,
    },
}


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    for name, builder in [
        ("corridor.map", corridor),
        ("atrium.map", atrium),
        ("cluttered.map", cluttered),
    ]:
        grid, entities = builder()
        with open(os.path.join(OUT, name), "w", encoding="utf-8", newline="\n") as f:
            f.write(serialize_map(grid, entities))
        print(f"wrote {name}: {grid.width}x{grid.height}")
    for name, lines in LEXICONS.items():
        with open(os.path.join(OUT, name), "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
        print(f"wrote {name}")
    for name, obj in SCENARIOS.items():
        with open(os.path.join(OUT, name), "w", encoding="utf-8", newline="\n") as f:
            json.dump(obj, f, indent=2)
            f.write("\n")
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
