"""Experiment configuration: full parameter table with defaults, INI I/O.

Every tunable ships with its default; the INI profile only needs the
keys being overridden. Scene geometry can be replaced wholesale from the
[world] section.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, asdict, replace

import numpy as np

from .world import Rect, SceneConfig, default_scene


class ConfigError(ValueError):
    """Bad configuration value or file."""


@dataclass(frozen=True)
class Params:
    """All module knobs. Defaults are the benchmark's reference values."""

    steps_per_trial: int = 700
    obstacle_prob: float = 0.5
    # goal/expert selection
    tau_goal: float = 0.01
    tau_expert: float = 0.05
    value_ema: float = 0.3
    # competence predictor and motivation window
    chi_ema: float = 0.1
    window: int = 20
    # context acquisition and transfer gates
    competence_threshold: float = 0.4
    learning_threshold: float = 0.4
    transfer_threshold: float = 0.7
    transfer_probability: float = 0.5
    # goal matching
    match_threshold: float = 0.1
    goal_capacity: int = 16
    # experts
    critic_lr: float = 0.02
    actor_lr: float = 0.4
    td_discount: float = 0.99
    noise_sd: float = 2.0
    noise_ema: float = 0.08
    noise_decrease_ema: float = 0.0005
    reward_goal: float = 1.0
    reward_obstacle: float = -1.0
    reward_timeout: float = -0.5
    # metrics
    success_window: int = 200


@dataclass(frozen=True)
class ExperimentConfig:
    variant: str = "c-grail"
    trials: int = 50000
    seeds: tuple = (0,)
    params: Params = field(default_factory=Params)
    scene: SceneConfig = field(default_factory=default_scene)


_UNIT_INTERVAL = {
    "obstacle_prob", "chi_ema", "value_ema", "competence_threshold",
    "learning_threshold", "transfer_threshold", "transfer_probability",
    "match_threshold", "noise_ema", "noise_decrease_ema", "td_discount",
}
_POSITIVE = {
    "steps_per_trial", "tau_goal", "tau_expert", "window", "goal_capacity",
    "critic_lr", "actor_lr", "noise_sd", "success_window",
}

VARIANT_NAMES = ("bandit", "c-transfer", "smart-c-bandit", "c-grail")


def validate_params(p: Params) -> None:
    for name, value in asdict(p).items():
        if name in _UNIT_INTERVAL and not 0.0 <= value <= 1.0:
            raise ConfigError(f"{name}={value} outside [0, 1]")
        if name in _POSITIVE and value <= 0:
            raise ConfigError(f"{name}={value} must be positive")


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.variant not in VARIANT_NAMES:
        raise ConfigError(f"unknown variant {cfg.variant!r}; choose from {VARIANT_NAMES}")
    if cfg.trials < 0:
        raise ConfigError("trials must be >= 0")
    if not cfg.seeds:
        raise ConfigError("at least one seed required")
    validate_params(cfg.params)
    scene = cfg.scene
    reach = scene.reach
    for base in scene.arm_bases:
        for cx, cy in scene.target_centers:
            d = float(np.hypot(cx - base[0], cy - base[1]))
            if d > reach:
                raise ConfigError(f"target ({cx},{cy}) beyond reach {reach} of base {base}")
    if scene.target_draw_radius >= scene.target_radius:
        raise ConfigError("target_draw_radius must be below target_radius")
    if len(scene.obstacle_rects) != 9:
        raise ConfigError("exactly 9 obstacle slots required")
    for i, r in enumerate(scene.obstacle_rects):
        for cx, cy in scene.target_centers:
            qx = min(max(cx, r.x0), r.x1)
            qy = min(max(cy, r.y0), r.y1)
            if (qx - cx) ** 2 + (qy - cy) ** 2 <= scene.target_radius ** 2:
                raise ConfigError(f"obstacle {i} overlaps a target disc")


def _parse_floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _parse_pairs(text: str) -> tuple:
    pairs = []
    for chunk in text.split(";"):
        xs = _parse_floats(chunk)
        if len(xs) != 2:
            raise ConfigError(f"expected 'x,y' pairs, got {chunk!r}")
        pairs.append((xs[0], xs[1]))
    return tuple(pairs)


def _scene_from_section(sec) -> SceneConfig:
    scene = default_scene()
    kw = {}
    if "targets" in sec:
        kw["target_centers"] = _parse_pairs(sec["targets"])
    if "bases" in sec:
        kw["arm_bases"] = _parse_pairs(sec["bases"])
    if "links" in sec:
        kw["link_lengths"] = _parse_floats(sec["links"])
    if "joint_low" in sec:
        kw["joint_low"] = _parse_floats(sec["joint_low"])
    if "joint_high" in sec:
        kw["joint_high"] = _parse_floats(sec["joint_high"])
    if "home" in sec:
        kw["home_pose"] = _parse_floats(sec["home"])
    if "view" in sec:
        kw["view"] = _parse_floats(sec["view"])
    for name in ("target_radius", "target_draw_radius", "max_joint_step"):
        if name in sec:
            kw[name] = float(sec[name])
    if "obstacle_rects" in sec:
        rects = []
        for chunk in sec["obstacle_rects"].split(";"):
            xs = _parse_floats(chunk)
            if len(xs) != 4:
                raise ConfigError(f"rect needs 4 numbers, got {chunk!r}")
            rects.append(Rect(*xs))
        kw["obstacle_rects"] = tuple(rects)
    return replace(scene, **kw)


_PARAM_SECTIONS = {
    "selection": ("tau_goal", "tau_expert", "value_ema"),
    "motivation": ("chi_ema", "window"),
    "context": ("competence_threshold",),
    "transfer": ("learning_threshold", "transfer_threshold", "transfer_probability"),
    "goals": ("match_threshold", "goal_capacity"),
    "experts": ("critic_lr", "actor_lr", "td_discount", "noise_sd", "noise_ema",
                "noise_decrease_ema", "reward_goal", "reward_obstacle", "reward_timeout"),
    "world": ("obstacle_prob",),
    "metrics": ("success_window",),
    "run": ("steps_per_trial",),
}
_INT_PARAMS = {"steps_per_trial", "window", "goal_capacity", "success_window"}


def load_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    kw = {}
    pkw = {}
    for section, names in _PARAM_SECTIONS.items():
        if not cp.has_section(section):
            continue
        for name in names:
            if name in cp[section]:
                raw = cp[section][name]
                pkw[name] = int(raw) if name in _INT_PARAMS else float(raw)
    if cp.has_section("run"):
        sec = cp["run"]
        if "variant" in sec:
            kw["variant"] = sec["variant"].strip()
        if "trials" in sec:
            kw["trials"] = int(sec["trials"])
        if "seeds" in sec:
            kw["seeds"] = tuple(int(s) for s in sec["seeds"].replace(",", " ").split())
    scene = _scene_from_section(cp["world"]) if cp.has_section("world") else default_scene()
    cfg = ExperimentConfig(params=Params(**pkw), scene=scene, **kw)
    validate_config(cfg)
    return cfg


def config_text(cfg: ExperimentConfig) -> str:
    """Render the full parameter table as an INI profile."""
    p = cfg.params
    s = cfg.scene
    fmt = lambda xs: ", ".join(repr(float(x)) for x in xs)
    pairs = lambda ps: "; ".join(f"{x}, {y}" for x, y in ps)
    rects = "; ".join(f"{r.x0}, {r.y0}, {r.x1}, {r.y1}" for r in s.obstacle_rects)
    return f"""# benchmark configuration profile
[run]
variant = {cfg.variant}
trials = {cfg.trials}
steps_per_trial = {p.steps_per_trial}   # control steps per trial
seeds = {", ".join(str(x) for x in cfg.seeds)}

[selection]
tau_goal = {p.tau_goal}        # goal-selector softmax temperature
tau_expert = {p.tau_expert}      # arm-selector softmax temperature
value_ema = {p.value_ema}        # smoothing of goal/arm values

[motivation]
chi_ema = {p.chi_ema}          # competence-estimate smoothing
window = {p.window}            # half-length of the improvement window

[context]
competence_threshold = {p.competence_threshold}   # gate for feature acquisition after a failure

[transfer]
learning_threshold = {p.learning_threshold}     # below this the target may borrow a policy
transfer_threshold = {p.transfer_threshold}     # sources must predict at least this
transfer_probability = {p.transfer_probability}   # chance of attempting a borrow

[goals]
match_threshold = {p.match_threshold}      # inner product needed to call two events the same
goal_capacity = {p.goal_capacity}

[experts]
critic_lr = {p.critic_lr}
actor_lr = {p.actor_lr}
td_discount = {p.td_discount}
noise_sd = {p.noise_sd}           # base exploration noise scale
noise_ema = {p.noise_ema}          # per-step noise smoothing
noise_decrease_ema = {p.noise_decrease_ema}  # success-driven noise decay
reward_goal = {p.reward_goal}
reward_obstacle = {p.reward_obstacle}
reward_timeout = {p.reward_timeout}

[metrics]
success_window = {p.success_window}    # trailing trials per goal in the windowed rate

[world]
obstacle_prob = {p.obstacle_prob}      # per-slot presence probability each trial
max_joint_step = {s.max_joint_step}
target_radius = {s.target_radius}
target_draw_radius = {s.target_draw_radius}
targets = {pairs(s.target_centers)}
bases = {pairs(s.arm_bases)}
links = {fmt(s.link_lengths)}
joint_low = {fmt(s.joint_low)}
joint_high = {fmt(s.joint_high)}
home = {fmt(s.home_pose)}
view = {fmt(s.view)}
obstacle_rects = {rects}
"""


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(config_text(cfg))
