"""Actor-critic experts over a Gaussian RBF joint encoding.

One expert per (goal, context, arm) slot: a linear critic and a 4-output
logistic actor on 625 radial basis features (5 centers per joint
dimension). Trained online with TD(0); exploration noise is a smoothed
Gaussian whose scale shrinks as the expert's success estimate grows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

N_JOINTS = 4
CENTERS_PER_DIM = 5
N_FEATURES = CENTERS_PER_DIM ** N_JOINTS  # 625

CRITIC_LR = 0.02
ACTOR_LR = 0.4
TD_DISCOUNT = 0.99

NOISE_SD = 2.0
NOISE_EMA = 0.08
NOISE_DECREASE_EMA = 0.0005

REWARD_GOAL = 1.0
REWARD_OBSTACLE = -1.0
REWARD_TIMEOUT = -0.5


class RbfEncoder:
    """5^4 grid of Gaussian units over normalized joint angles in [0,1].

    Widths satisfy the midpoint condition: an input halfway between two
    contiguous centers along one dimension (on-center elsewhere)
    activates both units at exactly 0.5, i.e. sigma^2 = spacing^2/(8 ln 2).
    Feature index order is row-major over (j0, j1, j2, j3) center indices.
    """

    def __init__(self):
        self.centers_1d = np.linspace(0.0, 1.0, CENTERS_PER_DIM)
        spacing = self.centers_1d[1] - self.centers_1d[0]
        self.sigma_sq = spacing ** 2 / (8.0 * math.log(2.0))

    def encode(self, joints_norm) -> np.ndarray:
        """Activations of all 625 units for one (clamped) input."""
        x = np.clip(np.asarray(joints_norm, dtype=float), 0.0, 1.0)
        # separable: per-dimension Gaussian vectors, then outer product
        d = x[:, None] - self.centers_1d[None, :]
        per_dim = np.exp(-(d * d) / (2.0 * self.sigma_sq))  # (4, 5)
        y = per_dim[0][:, None] * per_dim[1][None, :]
        y = y.reshape(-1)[:, None] * per_dim[2][None, :]
        y = y.reshape(-1)[:, None] * per_dim[3][None, :]
        return y.reshape(-1)


@dataclass
class ExpertNet:
    """Linear critic + logistic actor weights for one policy slot."""

    critic_w: np.ndarray = field(default_factory=lambda: np.zeros(N_FEATURES))
    critic_b: float = 0.0
    actor_w: np.ndarray = field(default_factory=lambda: np.zeros((N_JOINTS, N_FEATURES)))
    actor_b: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))

    def copy(self) -> "ExpertNet":
        return ExpertNet(
            critic_w=self.critic_w.copy(),
            critic_b=self.critic_b,
            actor_w=self.actor_w.copy(),
            actor_b=self.actor_b.copy(),
        )

    def copy_from(self, other: "ExpertNet") -> None:
        """Bit-exact parameter copy (the transfer commit)."""
        self.critic_w[:] = other.critic_w
        self.critic_b = other.critic_b
        self.actor_w[:] = other.actor_w
        self.actor_b[:] = other.actor_b


@dataclass
class NoiseState:
    """Exploration noise for one expert.

    decrease d is an EMA (rate 0.0005) of the expert's trial successes;
    the per-trial noise scale is sd*(1-d). The smoothed noise vector is
    re-zeroed at trial start.
    """

    decrease: float = 0.0
    base_sd: float = NOISE_SD
    ema: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))

    @property
    def effective_sd(self) -> float:
        return self.base_sd * (1.0 - self.decrease)

    def start_trial(self) -> float:
        self.ema[:] = 0.0
        return self.effective_sd

    def record_outcome(self, success: float, rate: float = NOISE_DECREASE_EMA) -> None:
        self.decrease += rate * (success - self.decrease)


def critic_value(features, net: ExpertNet) -> float:
    return float(np.dot(features, net.critic_w)) + net.critic_b


def actor_output(features, net: ExpertNet) -> np.ndarray:
    pre = net.actor_w @ features + net.actor_b
    return 1.0 / (1.0 + np.exp(-pre))


def apply_noise(outputs, noise: NoiseState, rng: np.random.Generator,
                sd: float | None = None, ema_rate: float = NOISE_EMA) -> np.ndarray:
    """Fold a fresh Gaussian draw into the smoothed noise, add, clamp."""
    if sd is None:
        sd = noise.effective_sd
    g = rng.normal(0.0, sd, N_JOINTS) if sd > 0.0 else np.zeros(N_JOINTS)
    noise.ema += ema_rate * (g - noise.ema)
    return np.clip(outputs + noise.ema, 0.0, 1.0)


def td_error(r: float, v_now: float, v_prev: float, terminal: bool,
             discount: float = TD_DISCOUNT) -> float:
    """One-step TD error; terminal states bootstrap from 0."""
    if terminal:
        v_now = 0.0
    return (r + discount * v_now) - v_prev


def learn_step(net: ExpertNet, features_prev, delta: float, outputs, commands,
               critic_lr: float = CRITIC_LR, actor_lr: float = ACTOR_LR) -> None:
    """In-place TD(0) update from one step's quantities.

    Critic: du_i = eta_c * delta * y_i. Actor: du_ji = eta_a * delta *
    (command_j - output_j) * output_j(1-output_j) * y_i. Biases use y=1.
    """
    cd = critic_lr * delta
    net.critic_w += cd * features_prev
    net.critic_b += cd
    o = np.asarray(outputs)
    a = actor_lr * delta * (np.asarray(commands) - o) * o * (1.0 - o)  # (4,)
    net.actor_w += a[:, None] * features_prev[None, :]
    net.actor_b += a


def normalize_joints(joints, low, high) -> np.ndarray:
    """Map joint angles to [0,1] against their limits, clamped."""
    j = (np.asarray(joints, dtype=float) - low) / (np.asarray(high) - low)
    return np.clip(j, 0.0, 1.0)
