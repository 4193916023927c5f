from __future__ import annotations

import numpy as np
import pytest

from guidebot.grid import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    MapParseError,
    OccupancyGrid,
    SemanticEntity,
    parse_map_text,
    serialize_map,
)
from guidebot.geometry import Pose2D

MINIMAL = "3 3 0.5\n...\n...\n...\n"


def test_minimal_map_parses():
    grid, entities = parse_map_text(MINIMAL)
    assert (grid.width, grid.height, grid.resolution) == (3, 3, 0.5)
    assert entities == []
    assert np.all(grid.cells == FREE)


def test_glyphs_and_row_orientation():
    # top file row is the top of the map (highest y index)
    text = "2 2 1\n#?\n..\n"
    grid, _ = parse_map_text(text)
    assert grid.cell_state(0, 1) == OCCUPIED
    assert grid.cell_state(1, 1) == UNKNOWN
    assert grid.cell_state(0, 0) == FREE


def test_ragged_row_is_error_with_location():
    text = "3 3 0.5\n...\n..\n...\n"
    with pytest.raises(MapParseError) as ei:
        parse_map_text(text)
    assert ei.value.line == 3


def test_unknown_glyph_is_error():
    with pytest.raises(MapParseError):
        parse_map_text("3 1 0.5\n.x.\n")


def test_bad_header_is_error():
    with pytest.raises(MapParseError):
        parse_map_text("3 0.5\n...\n")
    with pytest.raises(MapParseError):
        parse_map_text("a b c\n...\n")


def test_entity_parsing_and_bounds():
    text = "3 3 0.5\n...\n...\n...\nentity door 0.7 0.2 static\n"
    grid, entities = parse_map_text(text)
    assert entities == [SemanticEntity("door", (0.7, 0.2), "static")]
    with pytest.raises(MapParseError):
        parse_map_text("3 3 0.5\n...\n...\n...\nentity door 5.0 0.2 static\n")
    with pytest.raises(MapParseError):
        parse_map_text("3 3 0.5\n...\n...\n...\nentity door 0.5 0.2 loud\n")


def test_round_trip_on_corpus():
    corpus = [
        MINIMAL,
        "2 2 1\n#?\n..\n",
        "4 3 0.25\n####\n#..#\n####\nentity exit 0.5 0.6 static\n"
        "entity spill 0.9 0.3 hazard\n",
    ]
    for text in corpus:
        grid, entities = parse_map_text(text)
        # canonical float formatting differs from shorthand headers, so
        # round-trip through one serialize first
        canonical = serialize_map(grid, entities)
        grid2, entities2 = parse_map_text(canonical)
        assert serialize_map(grid2, entities2) == canonical


def test_out_of_range_queries_return_occupied_sentinel():
    grid, _ = parse_map_text(MINIMAL)
    assert grid.cell_state(-1, 0) == OCCUPIED
    assert grid.cell_state(0, 3) == OCCUPIED
    assert not grid.is_free(99, 99)


def test_world_cell_transforms():
    g = OccupancyGrid(10, 10, 0.5, Pose2D(-1.0, 2.0, 0.0))
    assert g.world_to_cell(-1.0, 2.0) == (0, 0)
    assert g.world_to_cell(-0.75, 2.75) == (0, 1)
    assert g.cell_center(0, 0) == pytest.approx((-0.75, 2.25))
    assert g.cell_box(1, 0) == pytest.approx((-0.5, 2.0, 0.0, 2.5))


def test_invalid_grid_construction():
    with pytest.raises(ValueError):
        OccupancyGrid(0, 5, 0.1)
    with pytest.raises(ValueError):
        OccupancyGrid(5, 5, -1.0)
