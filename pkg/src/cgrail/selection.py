"""Goal and expert selection: softmax bandits over EMA values.

The goal selector is a contextual bandit: each discovered goal
contributes its value under its own current context key and a
low-temperature softmax picks the goal. The expert selector chooses
between the two arms for the selected (goal, key) from an EMA of the
match rewards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .world import ContractViolation

TAU_GOAL = 0.01
TAU_EXPERT = 0.05
GAMMA_EMA = 0.3
N_ARMS = 2


class EmptyRepertoireError(RuntimeError):
    """No goal has been discovered yet; the caller should run a
    motor-babbling trial instead."""


@dataclass
class SelectorState:
    goal_values: dict = field(default_factory=dict)  # (g, key) -> Q
    expert_values: dict = field(default_factory=dict)  # (g, key, arm) -> value
    tau_goal: float = TAU_GOAL
    tau_expert: float = TAU_EXPERT
    gamma: float = GAMMA_EMA


def softmax_probs(values, tau: float) -> np.ndarray:
    """Stabilized softmax over values/tau (max subtracted first)."""
    v = np.asarray(values, dtype=float) / tau
    v -= v.max()
    e = np.exp(v)
    return e / e.sum()


def softmax_sample(values, tau: float, rng: np.random.Generator) -> int:
    if len(values) == 0:
        raise ContractViolation("softmax over an empty value list")
    p = softmax_probs(values, tau)
    return int(np.searchsorted(np.cumsum(p), rng.random(), side="right").clip(0, len(p) - 1))


def select_goal(candidates, selector: SelectorState, rng: np.random.Generator):
    """Pick one (goal, key) pair from the goals' values under their
    current keys. candidates: list of (goal_id, key)."""
    if not candidates:
        raise EmptyRepertoireError("no discovered goals")
    values = [selector.goal_values.get((g, key), 0.0) for g, key in candidates]
    return candidates[softmax_sample(values, selector.tau_goal, rng)]


def update_goal_value(g: int, key, dc: float, selector: SelectorState) -> float:
    q = selector.goal_values.get((g, key), 0.0)
    q = q + selector.gamma * (dc - q)
    selector.goal_values[(g, key)] = q
    return q


def select_expert(g: int, key, selector: SelectorState, rng: np.random.Generator) -> int:
    values = [selector.expert_values.get((g, key, a), 0.0) for a in range(N_ARMS)]
    return softmax_sample(values, selector.tau_expert, rng)


def update_expert_value(g: int, key, arm: int, reward: float, selector: SelectorState) -> float:
    v = selector.expert_values.get((g, key, arm), 0.0)
    v = v + selector.gamma * (reward - v)
    selector.expert_values[(g, key, arm)] = v
    return v
