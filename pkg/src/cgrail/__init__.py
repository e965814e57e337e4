"""Open-ended learning of context-dependent reaching skills.

A planar two-arm world where an agent autonomously discovers visual
goals, learns per-goal per-context reaching policies with actor-critic
experts, detects which obstacle features matter through surprising
failures, and transfers competent policies into newly recognized
contexts. Four architecture variants share the same trial loop for
ablation comparisons, driven by a deterministic benchmark harness.
"""

from .agent import Agent, TrialLog, VariantConfig, VARIANTS
from .config import ExperimentConfig, Params, load_config, save_config
from .harness import evaluate, run_experiment, run_single
from .plots import emit_plots
from .snapshot import load_agent, save_agent
from .world import SceneConfig, default_scene

__version__ = "0.1.0"

__all__ = [
    "Agent", "TrialLog", "VariantConfig", "VARIANTS",
    "ExperimentConfig", "Params", "load_config", "save_config",
    "evaluate", "run_experiment", "run_single",
    "emit_plots", "load_agent", "save_agent",
    "SceneConfig", "default_scene", "__version__",
]
