from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from guidebot.config import DescribeConfig
from guidebot.dialogue import (
    Ambiguous,
    DestinationLexicon,
    LexiconEntry,
    NoDestination,
    STOPWORDS,
    confirmation_text,
    describe_scene,
    description_due,
    entity_visible,
    extract_intent,
    parse_lexicon_text,
    tokenize,
    validate_lexicon_goals,
)
from guidebot.geometry import Pose2D
from guidebot.grid import OCCUPIED, OccupancyGrid, SemanticEntity
from conftest import random_grid
from oracles import entity_visible_brute

LEXICON = DestinationLexicon(
    (
        LexiconEntry("restroom", Pose2D(1, 1, 0), ("restroom", "bathroom", "toilet")),
        LexiconEntry("exit", Pose2D(2, 2, 0), ("exit", "door")),
    )
)


def test_stopword_list_is_the_fixed_30_word_fixture():
    assert len(STOPWORDS) == 30


def test_direct_alias_hit():
    intent = extract_intent("Take me to the restroom, please.", LEXICON)
    assert intent.destination_id == "restroom"
    assert intent.score == 1


def test_alias_lookup():
    assert extract_intent("where is the bathroom", LEXICON).destination_id == "restroom"


def test_zero_overlap_raises_no_destination():
    with pytest.raises(NoDestination):
        extract_intent("take me somewhere nice", LEXICON)


def test_tie_raises_ambiguous():
    with pytest.raises(Ambiguous) as ei:
        extract_intent("restroom or exit?", LEXICON)
    assert ei.value.candidates == ["exit", "restroom"]


def test_intent_invariant_to_order_case_punctuation():
    base = extract_intent("please take me to the bathroom now", LEXICON)
    for words in itertools.permutations(["please", "take", "me", "bathroom", "now"]):
        masked = " ".join(w.upper() if i % 2 else w for i, w in enumerate(words))
        assert extract_intent(masked + "!!!", LEXICON).destination_id == base.destination_id


@given(st.text(alphabet="abcdefgh ,.!?", max_size=40))
def test_extract_never_crashes_on_noise(text):
    try:
        extract_intent(text, LEXICON)
    except (NoDestination, Ambiguous):
        pass


def test_adding_alias_never_decreases_score():
    utterances = [
        "take me to the restroom",
        "bathroom please",
        "washroom please",
        "exit now",
    ]
    extended = DestinationLexicon(
        (
            LexiconEntry("restroom", Pose2D(1, 1, 0),
                         ("restroom", "bathroom", "toilet", "washroom")),
            LexiconEntry("exit", Pose2D(2, 2, 0), ("exit", "door")),
        )
    )
    for u in utterances:
        tokens = tokenize(u)
        counts = {t: tokens.count(t) for t in tokens}
        for small, big in zip(LEXICON.entries, extended.entries):
            s_small = sum(counts.get(a, 0) for a in small.aliases)
            s_big = sum(counts.get(a, 0) for a in big.aliases)
            assert s_big >= s_small


def test_confirmation_templates_exact():
    assert confirmation_text("restroom") == "Navigating to restroom."
    assert confirmation_text("exit") == "Navigating to exit."
    assert confirmation_text("Room101") == "Navigating to Room101."


def test_lexicon_file_parsing_and_goal_validation():
    lex = parse_lexicon_text("exit 1.0 2.0 0.0 exit,door\ncafe 3.0 1.0 0.5 cafe\n")
    assert len(lex) == 2
    assert lex.get("exit").aliases == ("exit", "door")
    g = OccupancyGrid(50, 50, 0.1)
    validate_lexicon_goals(lex, g)
    g.cells[10, 20] = OCCUPIED
    with pytest.raises(ValueError):
        validate_lexicon_goals(lex, g)
    with pytest.raises(ValueError):
        parse_lexicon_text("exit 1.0 2.0 0.0\n")


def test_duplicate_destination_ids_rejected():
    with pytest.raises(ValueError):
        DestinationLexicon(
            (
                LexiconEntry("exit", Pose2D(0, 0, 0), ("exit",)),
                LexiconEntry("exit", Pose2D(1, 1, 0), ("door",)),
            )
        )


# --- scene description ------------------------------------------------------

CFG = DescribeConfig(period=10.0, describe_range=5.0, max_items=3, hfov=1.5)


def test_empty_scene_text():
    g = OccupancyGrid(100, 100, 0.1)
    desc = describe_scene([], Pose2D(5, 5, 0), g, CFG)
    assert desc.text == "No notable objects around."
    assert desc.entities_mentioned == ()


def test_single_door_template():
    g = OccupancyGrid(100, 100, 0.1)
    desc = describe_scene(
        [SemanticEntity("door", (7.0, 5.0), "static")], Pose2D(5, 5, 0), g, CFG
    )
    assert desc.text == "There is a door nearby in front of you."


def test_buckets_and_hazard_priority():
    g = OccupancyGrid(200, 200, 0.1)
    cam = Pose2D(10, 10, 0.0)
    entities = [
        SemanticEntity("sign", (13.5, 10.0), "static"),        # far, front
        SemanticEntity("spill", (10.8, 10.1), "hazard"),       # very close
        SemanticEntity("bench", (11.5, 11.2), "static"),       # nearby, left
    ]
    desc = describe_scene(entities, cam, g, CFG)
    assert desc.entities_mentioned[0].label == "spill"
    assert "spill very close" in desc.text
    assert "ahead in the distance" in desc.text
    assert "bench nearby to your left" in desc.text
    assert desc.text.count(";") == 2


def test_max_items_and_occlusion():
    g = OccupancyGrid(200, 200, 0.1)
    # wall between the camera and one entity
    for iy in range(95, 106):
        g.cells[120, iy] = OCCUPIED
    cam = Pose2D(10, 10, 0.0)
    entities = [
        SemanticEntity("hidden", (13.0, 10.0), "static"),
        SemanticEntity("seen", (11.0, 10.5), "static"),
    ]
    desc = describe_scene(entities, cam, g, CFG)
    assert [e.label for e in desc.entities_mentioned] == ["seen"]


def test_visibility_matches_brute_force_oracle():
    rng = np.random.default_rng(17)
    for _ in range(6):
        g = random_grid(rng, 40, 40, 0.1, 0.08, keep_free=[(20, 20)])
        cam = Pose2D(2.05, 2.05, rng.uniform(-math.pi, math.pi))
        entities = [
            SemanticEntity(f"e{k}", (rng.uniform(0.3, 3.7), rng.uniform(0.3, 3.7)),
                           "static")
            for k in range(12)
        ]
        got = {e.label for e in entities if entity_visible(e, cam, g, CFG)}
        want = {e.label for e in entities if entity_visible_brute(e, cam, g, CFG)}
        assert got == want


def test_description_due_boundary():
    assert not description_due(0.0, 9.9, 10.0)
    assert description_due(0.0, 10.0, 10.0)
    with pytest.raises(ValueError):
        description_due(0.0, 1.0, 0.0)


def test_counted_simulation_six_emissions():
    emitted = 0
    last = 0.0
    for k in range(601):  # 60 s at dt = 0.1
        t = k * 0.1
        if description_due(last, t, 10.0):
            emitted += 1
            last = t
    assert emitted == 6
