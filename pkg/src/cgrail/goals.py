"""Goal discovery by visual change detection, goal storage, goal matching.

An event is the normalized pixel difference between two consecutive
frames, with anything under either frame's arm mask excluded. New events
are stored in the goal map; the match function compares an event to a
stored goal image and emits the binary reward.

Distinct targets produce events with disjoint supports (inner product
exactly 0), while the arm exclusion can clip a fraction of a disc, so
the match threshold sits low: any real overlap counts as the same event.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .world import Frame

MATCH_THRESHOLD = 0.1


class GoalCapacityError(RuntimeError):
    """Goal map has no free selector slot left."""


class GoalLookupError(KeyError):
    """Unknown goal id."""


@dataclass
class EventImage:
    """L2-normalized non-negative 80x60 image of a detected change."""

    pixels: np.ndarray

    def __post_init__(self):
        n = float(np.linalg.norm(self.pixels))
        if n <= 0.0:
            raise ValueError("event image must have at least one nonzero pixel")
        if abs(n - 1.0) > 1e-9:
            self.pixels = self.pixels / n

    def dot(self, other: "EventImage") -> float:
        return float(np.sum(self.pixels * other.pixels))


@dataclass
class GoalMap:
    """Discovered goals in discovery order; ids are dense 0..n-1."""

    capacity: int = 16
    images: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.images)

    def image(self, g: int) -> EventImage:
        if not 0 <= g < len(self.images):
            raise GoalLookupError(g)
        return self.images[g]


def detect_change(prev: Frame, curr: Frame) -> EventImage | None:
    """Pixel difference between frames, arm pixels excluded; None if no
    unmasked pixel changed."""
    diff = (prev.pixels != curr.pixels).astype(float)
    excluded = (prev.arm_mask | curr.arm_mask) != 0
    diff[excluded] = 0.0
    if not diff.any():
        return None
    return EventImage(diff)


def store_goal(img: EventImage, goal_map: GoalMap, threshold: float = MATCH_THRESHOLD) -> tuple[int, bool]:
    """Return (goal_id, is_new): the matching stored goal if one exists,
    else the event appended in the first free slot."""
    for g, stored in enumerate(goal_map.images):
        if img.dot(stored) >= threshold:
            return g, False
    if len(goal_map.images) >= goal_map.capacity:
        raise GoalCapacityError(f"goal map full at {goal_map.capacity}")
    goal_map.images.append(img)
    return len(goal_map.images) - 1, True


def match_goal(img: EventImage, g: int, goal_map: GoalMap, threshold: float = MATCH_THRESHOLD) -> int:
    """Binary goal-matching reward: 1 iff the inner product between the
    event and the stored image reaches the threshold."""
    stored = goal_map.image(g)
    return 1 if img.dot(stored) >= threshold else 0
