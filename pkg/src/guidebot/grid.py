"""Occupancy grids, semantic entities, and the plain-text map format.

Map file grammar::

    W H RES
    <H rows of exactly W characters from {'#' occupied, '.' free, '?' unknown}>
    entity LABEL X Y SALIENCE        (zero or more)

The first character row is the *top* of the map (row index H-1), so the
file reads like a picture with +y up.  Parsing is bit-exact; ragged rows,
unknown glyphs, or out-of-bounds entities are load errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose2D

FREE = 0
OCCUPIED = 1
UNKNOWN = 2

_GLYPHS = {".": FREE, "#": OCCUPIED, "?": UNKNOWN}
_CHARS = {FREE: ".", OCCUPIED: "#", UNKNOWN: "?"}

SALIENCE_TAGS = ("static", "hazard")


class MapParseError(ValueError):
    """Raised on any map-file grammar violation, with line/column context."""

    def __init__(self, message: str, line: int, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class SemanticEntity:
    """Named object on the map used by the scene describer."""

    label: str
    position: tuple[float, float]
    salience: str

    def __post_init__(self):
        if self.salience not in SALIENCE_TAGS:
            raise ValueError(f"salience must be one of {SALIENCE_TAGS}")


@dataclass
class OccupancyGrid:
    """Ternary occupancy grid over a regular cell lattice.

    `cells[ix, iy]` holds FREE/OCCUPIED/UNKNOWN for the cell whose corner
    sits at ``origin + (ix, iy) * resolution``.  Out-of-range queries
    return the OCCUPIED sentinel instead of raising.
    """

    width: int
    height: int
    resolution: float
    origin: Pose2D = field(default_factory=lambda: Pose2D(0.0, 0.0, 0.0))
    cells: np.ndarray | None = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("grid dimensions must be positive")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.cells is None:
            self.cells = np.full((self.width, self.height), FREE, dtype=np.int8)
        else:
            self.cells = np.asarray(self.cells, dtype=np.int8)
            if self.cells.shape != (self.width, self.height):
                raise ValueError("cells shape does not match width x height")

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def cell_state(self, ix: int, iy: int) -> int:
        """State of a cell; OCCUPIED sentinel when out of range."""
        if not self.in_bounds(ix, iy):
            return OCCUPIED
        return int(self.cells[ix, iy])

    def is_free(self, ix: int, iy: int) -> bool:
        return self.cell_state(ix, iy) == FREE

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin.x) / self.resolution)),
            int(math.floor((y - self.origin.y) / self.resolution)),
        )

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin.x + (ix + 0.5) * self.resolution,
            self.origin.y + (iy + 0.5) * self.resolution,
        )

    def cell_box(self, ix: int, iy: int) -> tuple[float, float, float, float]:
        x0 = self.origin.x + ix * self.resolution
        y0 = self.origin.y + iy * self.resolution
        return (x0, y0, x0 + self.resolution, y0 + self.resolution)

    def contains_point(self, x: float, y: float) -> bool:
        ix, iy = self.world_to_cell(x, y)
        return self.in_bounds(ix, iy)

    def free_at_point(self, x: float, y: float) -> bool:
        ix, iy = self.world_to_cell(x, y)
        return self.is_free(ix, iy)

    def occupied_mask(self) -> np.ndarray:
        return self.cells == OCCUPIED

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(
            self.width, self.height, self.resolution, self.origin, self.cells.copy()
        )


def parse_map_text(text: str) -> tuple[OccupancyGrid, list[SemanticEntity]]:
    """Parse map-file text into a grid and its semantic entities."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    if not lines:
        raise MapParseError("empty map file", 1)

    header = lines[0].split()
    if len(header) != 3:
        raise MapParseError("header must be 'W H RES'", 1)
    try:
        width, height = int(header[0]), int(header[1])
        resolution = float(header[2])
    except ValueError:
        raise MapParseError("header must be 'W H RES' with integer W, H", 1) from None
    if width <= 0 or height <= 0 or resolution <= 0:
        raise MapParseError("W, H, RES must be positive", 1)
    if len(lines) < 1 + height:
        raise MapParseError(f"expected {height} cell rows", len(lines))

    cells = np.empty((width, height), dtype=np.int8)
    for r in range(height):
        line_no = 2 + r
        row = lines[1 + r]
        if len(row) != width:
            raise MapParseError(
                f"row has {len(row)} characters, expected {width}", line_no, len(row)
            )
        iy = height - 1 - r  # first row in the file is the top of the map
        for ix, ch in enumerate(row):
            state = _GLYPHS.get(ch)
            if state is None:
                raise MapParseError(f"unknown cell glyph {ch!r}", line_no, ix + 1)
            cells[ix, iy] = state

    grid = OccupancyGrid(width, height, resolution, Pose2D(0.0, 0.0, 0.0), cells)
    entities: list[SemanticEntity] = []
    for k, raw in enumerate(lines[1 + height :]):
        line_no = 2 + height + k
        if not raw.strip():
            raise MapParseError("blank line after cell rows", line_no)
        parts = raw.split()
        if parts[0] != "entity" or len(parts) != 5:
            raise MapParseError("expected 'entity LABEL X Y SALIENCE'", line_no)
        _, label, xs, ys, salience = parts
        try:
            x, y = float(xs), float(ys)
        except ValueError:
            raise MapParseError("entity coordinates must be numbers", line_no) from None
        if salience not in SALIENCE_TAGS:
            raise MapParseError(f"salience must be one of {SALIENCE_TAGS}", line_no)
        if not grid.contains_point(x, y):
            raise MapParseError("entity position outside map bounds", line_no)
        entities.append(SemanticEntity(label, (x, y), salience))
    return grid, entities


def serialize_map(grid: OccupancyGrid, entities: list[SemanticEntity] = ()) -> str:
    """Inverse of :func:`parse_map_text` (canonical formatting)."""
    res = grid.resolution
    res_str = repr(res) if res != int(res) else str(int(res))
    out = [f"{grid.width} {grid.height} {res_str}"]
    for r in range(grid.height):
        iy = grid.height - 1 - r
        out.append("".join(_CHARS[int(grid.cells[ix, iy])] for ix in range(grid.width)))
    for e in entities:
        out.append(
            f"entity {e.label} {_fmt(e.position[0])} {_fmt(e.position[1])} {e.salience}"
        )
    return "\n".join(out) + "\n"


def _fmt(v: float) -> str:
    return repr(float(v))


def load_map_file(path: str) -> tuple[OccupancyGrid, list[SemanticEntity]]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_map_text(f.read())
