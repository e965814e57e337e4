"""Context detection: per-goal useful-feature lists and known contexts.

A context key is the projection of the 9-bit obstacle mask onto the
slots a goal has so far found relevant (its ucf list, in acquisition
order). The empty projection is the blank context. Keys grown later
extend earlier ones, so old keys remain valid coarser keys and their
policies are retained.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .world import ContractViolation, TouchEvent, WorldState

COMPETENCE_THRESHOLD = 0.4

BLANK_KEY: tuple = ()


def filter_context(mask, ucf) -> tuple:
    """Project an obstacle mask onto the goal's useful slots.

    Returns a tuple of (slot, bit) pairs in ucf order; empty ucf gives
    the blank key.
    """
    return tuple((int(s), int(mask[s])) for s in ucf)


def raw_key(mask) -> tuple:
    """Full-resolution key over all 9 slots (no filtering)."""
    return tuple((s, int(mask[s])) for s in range(9))


def key_str(key) -> str:
    """Stable text form used in CSV and snapshot files."""
    if not key:
        return "phi0"
    return ";".join(f"{s}:{b}" for s, b in key)


def key_from_str(text: str) -> tuple:
    if text == "phi0":
        return BLANK_KEY
    pairs = []
    for part in text.split(";"):
        s, b = part.split(":")
        pairs.append((int(s), int(b)))
    return tuple(pairs)


@dataclass
class ContextRegistry:
    """Known contexts per goal, with the trial each was first seen."""

    known: dict = field(default_factory=dict)  # goal -> {key: discovery_trial}

    def keys_for(self, g: int) -> dict:
        return self.known.setdefault(g, {})

    def size(self, g: int) -> int:
        return len(self.known.get(g, {}))

    def total(self) -> int:
        return sum(len(v) for v in self.known.values())


def register_context(g: int, key: tuple, registry: ContextRegistry, trial: int) -> bool:
    """Insert key into the goal's known contexts; True if it was new
    (the caller then creates the policy pair and may plan a transfer)."""
    keys = registry.keys_for(g)
    if key in keys:
        return False
    keys[key] = trial
    return True


def extract_failure_features(event: TouchEvent, state: WorldState) -> set:
    """Slots implicated by an obstacle failure: exactly the touched slot
    (the parsimony heuristic — distant obstacles are ignored)."""
    if event.kind != "obstacle":
        raise ContractViolation(f"failure features need an obstacle touch, got {event.kind}")
    return {event.index}


def record_failure(g: int, f_fail: set, prior_prob: float, ucf: dict,
                   threshold: float = COMPETENCE_THRESHOLD) -> bool:
    """Grow ucf_g with the failure slots, gated on the pre-trial
    competence estimate exceeding the threshold. Returns True if grown."""
    if prior_prob <= threshold:
        return False
    slots = ucf.setdefault(g, [])
    new = [s for s in sorted(f_fail) if s not in slots]
    if not new:
        return False
    slots.extend(new)
    return True
