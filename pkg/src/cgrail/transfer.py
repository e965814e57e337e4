"""Success-gated policy transfer between contexts of the same goal.

When the selected (goal, key) pair is still incompetent, the trial may
be controlled by a copy of a competent policy for the same goal in a
different context; only if that trial succeeds are the source's
parameters copied into the target expert.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .experts import ExpertNet
from .motivation import CompetenceTable, predict

LEARNING_THRESHOLD = 0.4
TRANSFER_THRESHOLD = 0.7
TRANSFER_PROBABILITY = 0.5


@dataclass(frozen=True)
class TransferPolicy:
    learning_threshold: float = LEARNING_THRESHOLD
    transfer_threshold: float = TRANSFER_THRESHOLD
    transfer_probability: float = TRANSFER_PROBABILITY


@dataclass(frozen=True)
class TrialPlan:
    """own policy (source_key None) or transfer from source_key."""

    source_key: tuple | None = None

    @property
    def is_transfer(self) -> bool:
        return self.source_key is not None


def candidate_sources(g: int, target_key, competence: CompetenceTable, known_keys, policy: TransferPolicy) -> list:
    """Other known keys of the goal whose competence clears the
    transfer threshold, in registration order."""
    return [k for k in known_keys
            if k != target_key and predict(g, k, competence) >= policy.transfer_threshold]


def plan_trial(g: int, target_key, policy: TransferPolicy, competence: CompetenceTable,
               known_keys, rng: np.random.Generator) -> TrialPlan:
    """Decide own-policy vs transfer for this trial.

    A competent target always uses its own policy; otherwise, with the
    transfer probability, a uniformly random candidate source is used
    (own policy if there are none).
    """
    if predict(g, target_key, competence) >= policy.learning_threshold:
        return TrialPlan()
    if rng.random() >= policy.transfer_probability:
        return TrialPlan()
    sources = candidate_sources(g, target_key, competence, known_keys, policy)
    if not sources:
        return TrialPlan()
    return TrialPlan(source_key=sources[int(rng.integers(len(sources)))])


def commit_transfer(source: ExpertNet, target: ExpertNet, trial_success: bool) -> bool:
    """Copy the source's actor and critic into the target on success;
    on failure nothing changes (a later trial may retry)."""
    if not trial_success:
        return False
    target.copy_from(source)
    return True
