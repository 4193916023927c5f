"""Destination-intent extraction over text utterances and the periodic
template scene describer.

Lexicon file grammar, one destination per line::

    DEST_ID X Y THETA alias1,alias2,...
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass

import numpy as np

from .config import DescribeConfig
from .geometry import Pose2D, wrap_angle
from .grid import OccupancyGrid, SemanticEntity
from .world import raycast

# Fixed 30-word function-word list; versioned test fixture.
STOPWORDS = frozenset(
    """a an and are at be but can could do for from i in is it me my of on or
    please the to us want we where would you""".split()
)

_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


class NoDestination(ValueError):
    """No lexicon entry matched the utterance; ask the user to rephrase."""


class Ambiguous(ValueError):
    """Multiple entries tied for the best score; ask the user to pick one."""

    def __init__(self, candidates: list[str]):
        super().__init__(f"ambiguous destinations: {', '.join(sorted(candidates))}")
        self.candidates = sorted(candidates)


@dataclass(frozen=True)
class LexiconEntry:
    destination_id: str
    goal_pose: Pose2D
    aliases: tuple[str, ...]

    def __post_init__(self):
        if not self.aliases:
            raise ValueError("every destination needs at least one alias")


@dataclass(frozen=True)
class DestinationLexicon:
    entries: tuple[LexiconEntry, ...]

    def __post_init__(self):
        ids = [e.destination_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("destination ids must be unique")

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, destination_id: str) -> LexiconEntry:
        for e in self.entries:
            if e.destination_id == destination_id:
                return e
        raise KeyError(destination_id)


@dataclass(frozen=True)
class Intent:
    destination_id: str
    score: int
    confirmation: str

    def __post_init__(self):
        if self.score < 1:
            raise ValueError("intent score must be >= 1")


def parse_lexicon_text(text: str) -> DestinationLexicon:
    entries = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"lexicon line {line_no}: expected 'ID X Y THETA aliases'")
        dest_id, xs, ys, ths, alias_csv = parts
        aliases = tuple(a for a in alias_csv.lower().split(",") if a)
        entries.append(
            LexiconEntry(dest_id, Pose2D(float(xs), float(ys), float(ths)), aliases)
        )
    return DestinationLexicon(tuple(entries))


def load_lexicon_file(path: str) -> DestinationLexicon:
    with open(path, "r", encoding="utf-8") as f:
        return parse_lexicon_text(f.read())


def validate_lexicon_goals(lexicon: DestinationLexicon, grid: OccupancyGrid) -> None:
    """Goal poses must land on free map cells."""
    for e in lexicon.entries:
        if not grid.free_at_point(e.goal_pose.x, e.goal_pose.y):
            raise ValueError(f"goal for {e.destination_id!r} is not on a free cell")


def tokenize(utterance: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace, drop stopwords."""
    words = utterance.lower().translate(_PUNCT_TABLE).split()
    return [w for w in words if w not in STOPWORDS]


def confirmation_text(destination) -> str:
    """Fixed echo template; ids are emitted verbatim.  Accepts an Intent
    or a bare destination id."""
    if isinstance(destination, Intent):
        destination = destination.destination_id
    return f"Navigating to {destination}."


def extract_intent(utterance: str, lexicon: DestinationLexicon) -> Intent:
    """Bag-of-words destination match: each entry scores the number of its
    alias tokens occurring in the utterance's token multiset."""
    if len(lexicon) == 0:
        raise ValueError("lexicon is empty")
    tokens = tokenize(utterance)
    counts: dict[str, int] = {}
    for t in tokens:
        counts[t] = counts.get(t, 0) + 1
    scores = [
        (sum(counts.get(a, 0) for a in e.aliases), e.destination_id)
        for e in lexicon.entries
    ]
    best = max(s for s, _ in scores)
    if best < 1:
        raise NoDestination(f"utterance matched no destination: {utterance!r}")
    winners = [d for s, d in scores if s == best]
    if len(winners) > 1:
        raise Ambiguous(winners)
    return Intent(winners[0], best, confirmation_text(winners[0]))


@dataclass(frozen=True)
class SceneDescription:
    text: str
    entities_mentioned: tuple[SemanticEntity, ...]
    tick: float


def entity_visible(
    entity: SemanticEntity,
    camera_pose: Pose2D,
    grid: OccupancyGrid,
    cfg: DescribeConfig,
) -> bool:
    """FOV cone, range, and line-of-sight occlusion predicate."""
    ex, ey = entity.position
    dist = math.hypot(ex - camera_pose.x, ey - camera_pose.y)
    if dist > cfg.describe_range or dist <= 1e-9:
        return False
    bearing = wrap_angle(math.atan2(ey - camera_pose.y, ex - camera_pose.x)
                         - camera_pose.theta)
    if abs(bearing) > cfg.hfov / 2.0:
        return False
    # Clear line of sight: no occupied cell strictly before the entity.
    hit = raycast(
        grid, camera_pose.x, camera_pose.y,
        np.array([camera_pose.theta + bearing]), np.array([dist]),
    )[0]
    return hit >= dist - 1e-9


def _dist_bucket(d: float) -> str:
    if d < 1.0:
        return "very close"
    if d < 3.0:
        return "nearby"
    return "ahead in the distance"


def _dir_bucket(bearing: float, hfov: float) -> str:
    third = hfov / 6.0
    if bearing > third:
        return "to your left"
    if bearing < -third:
        return "to your right"
    return "in front of you"


def describe_scene(
    entities: list[SemanticEntity],
    camera_pose: Pose2D,
    grid: OccupancyGrid,
    cfg: DescribeConfig,
    tick: float = 0.0,
) -> SceneDescription:
    """Template description of visible entities, hazards first then nearest."""
    visible = [e for e in entities if entity_visible(e, camera_pose, grid, cfg)]
    if not visible:
        return SceneDescription("No notable objects around.", (), tick)

    def sort_key(e: SemanticEntity):
        d = math.hypot(e.position[0] - camera_pose.x, e.position[1] - camera_pose.y)
        return (0 if e.salience == "hazard" else 1, d)

    chosen = sorted(visible, key=sort_key)[: cfg.max_items]
    parts = []
    for e in chosen:
        d = math.hypot(e.position[0] - camera_pose.x, e.position[1] - camera_pose.y)
        bearing = wrap_angle(
            math.atan2(e.position[1] - camera_pose.y, e.position[0] - camera_pose.x)
            - camera_pose.theta
        )
        parts.append(
            f"There is a {e.label} {_dist_bucket(d)} {_dir_bucket(bearing, cfg.hfov)}."
        )
    return SceneDescription("; ".join(parts), tuple(chosen), tick)


def description_due(last_emit: float, now: float, period: float) -> bool:
    """True when a full period has elapsed since the last emission."""
    if period <= 0:
        raise ValueError("period must be positive")
    return now - last_emit >= period
