"""Competence prediction and the competence-improvement signal.

Each (goal, context) pair has a success-probability estimate (EMA of
trial outcomes) and a ring buffer of the pre-update prediction-error
magnitudes. The motivation signal is the mean of the older half of that
buffer minus the mean of the newer half: positive while predictions are
improving, decaying to zero once competence saturates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

PT = 20  # window length; the buffer holds the last 2*PT values
CHI_EMA = 0.1


@dataclass
class CompetenceTable:
    """chi(goal, key) estimates; unseen pairs read as 0."""

    ema_rate: float = CHI_EMA
    values: dict = field(default_factory=dict)  # (g, key) -> float


@dataclass
class CPHistory:
    """Per-(goal, key) buffers of prediction-error magnitudes."""

    pt: int = PT
    buffers: dict = field(default_factory=dict)  # (g, key) -> deque(maxlen=2*pt)

    def buffer(self, g: int, key) -> deque:
        b = self.buffers.get((g, key))
        if b is None:
            b = deque(maxlen=2 * self.pt)
            self.buffers[(g, key)] = b
        return b


def predict(g: int, key, table: CompetenceTable) -> float:
    return table.values.get((g, key), 0.0)


def update(g: int, key, outcome: int, table: CompetenceTable, history: CPHistory) -> float:
    """Record the pre-update error |outcome - chi| and move chi toward
    the outcome. Returns the recorded error."""
    chi = table.values.get((g, key), 0.0)
    cp = abs(outcome - chi)
    history.buffer(g, key).append(cp)
    table.values[(g, key)] = chi + table.ema_rate * (outcome - chi)
    return cp


def delta_c(g: int, key, history: CPHistory) -> float:
    """Older-window mean minus newer-window mean of the error buffer.

    Fewer than 2 samples give 0; a partially filled buffer is split into
    halves (older gets the extra element when odd).
    """
    buf = history.buffers.get((g, key))
    if buf is None:
        return 0.0
    k = len(buf)
    if k < 2:
        return 0.0
    values = list(buf)
    split = (k + 1) // 2 if k < 2 * history.pt else history.pt
    older = values[:split]
    newer = values[split:]
    return sum(older) / len(older) - sum(newer) / len(newer)
