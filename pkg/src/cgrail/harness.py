"""Experiment runner: deterministic per-seed runs, CSV metrics, snapshots,
and the frozen-policy evaluation mode.

Every output byte is a pure function of (config, seed): no timestamps,
stable float formatting, pinned file layouts. A run directory holds
metrics.csv, contexts.csv, transfers.csv, run.json and snapshot.zip.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import motivation as mo
from .agent import ARM_LEFT, Agent, TrialLog, VARIANTS
from .config import ExperimentConfig, config_text, validate_config
from .context import key_str
from .snapshot import load_agent, save_agent
from .world import reset_state

METRICS_SCHEMA = "cgrail.metrics.v1"
CONTEXTS_SCHEMA = "cgrail.contexts.v1"
TRANSFERS_SCHEMA = "cgrail.transfers.v1"

METRICS_COLUMNS = [
    "trial", "goal", "key", "arm", "steps", "success", "reward",
    "touch", "touch_index", "prior", "posterior", "delta_c", "q",
    "transfer", "transfer_source", "transfer_committed",
    "new_contexts", "discovered", "ucf_added",
    "wsr_sel", "wsr_g0", "wsr_g1", "wsr_g2",
    "phi_g0", "phi_g1", "phi_g2", "ucf_g0", "ucf_g1", "ucf_g2",
    "q_snapshot",
]


class SchemaError(ValueError):
    """Metrics file carries an unknown schema tag."""


def _f(x: float) -> str:
    return repr(float(x))


def _pad3(values, fill="0") -> list:
    out = [fill, fill, fill]
    for i, v in enumerate(values[:3]):
        out[i] = v
    return out


def metrics_row(log: TrialLog) -> list:
    wsr = _pad3([_f(v) for v in log.wsr], fill="")
    phi = _pad3(list(log.phi_sizes))
    ucf = _pad3(list(log.ucf_sizes))
    wsr_sel = _f(log.wsr[log.goal]) if 0 <= log.goal < len(log.wsr) else ""
    return [
        log.trial, log.goal, key_str(log.key) if log.goal >= 0 else "",
        log.arm, log.steps, log.success, _f(log.reward),
        log.touch, log.touch_index,
        _f(log.prior), _f(log.posterior), _f(log.delta_c), _f(log.q),
        int(log.transfer_source is not None),
        key_str(log.transfer_source) if log.transfer_source is not None else "",
        int(log.transfer_committed),
        len(log.new_contexts),
        ";".join(str(g) for g in log.discovered),
        ";".join(str(s) for s in log.ucf_added),
        wsr_sel, *wsr, *phi, *ucf,
        ";".join(f"{g}={_f(v)}" for g, _k, v in log.q_snapshot),
    ]


def read_csv(path, schema: str):
    """Read one of our schema-tagged CSVs into a list of dicts."""
    with open(path, newline="", encoding="utf-8") as f:
        first = f.readline().strip()
        if first != f"#schema={schema}":
            raise SchemaError(f"{path}: expected {schema!r}, found {first!r}")
        return list(csv.DictReader(f))


def run_experiment(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> list:
    """Run cfg for each seed, writing one run directory per seed.

    Returns the list of run directories. Seeds run in parallel worker
    processes when jobs > 1; outputs are identical either way.
    """
    validate_config(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    probe.write_text("")
    probe.unlink()

    run_dirs = [out / f"{cfg.variant}_seed{seed}" for seed in cfg.seeds]
    if jobs > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_run_one_star, [(cfg, s, str(d)) for s, d in zip(cfg.seeds, run_dirs)]))
    else:
        for seed, d in zip(cfg.seeds, run_dirs):
            run_single(cfg, seed, d)
    return [str(d) for d in run_dirs]


def _run_one_star(args):
    cfg, seed, d = args
    run_single(cfg, seed, d)
    return d


def run_single(cfg: ExperimentConfig, seed: int, run_dir) -> Agent:
    """One deterministic run: trials, metrics, event logs, snapshot."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    agent = Agent(VARIANTS[cfg.variant], cfg.params, cfg.scene, rng)

    with open(run_dir / "metrics.csv", "w", newline="", encoding="utf-8") as mf, \
         open(run_dir / "contexts.csv", "w", newline="", encoding="utf-8") as cf, \
         open(run_dir / "transfers.csv", "w", newline="", encoding="utf-8") as tf:
        mf.write(f"#schema={METRICS_SCHEMA}\n")
        cf.write(f"#schema={CONTEXTS_SCHEMA}\n")
        tf.write(f"#schema={TRANSFERS_SCHEMA}\n")
        mw = csv.writer(mf, lineterminator="\n")
        cw = csv.writer(cf, lineterminator="\n")
        tw = csv.writer(tf, lineterminator="\n")
        mw.writerow(METRICS_COLUMNS)
        cw.writerow(["trial", "goal", "kind", "key", "slot"])
        tw.writerow(["trial", "goal", "arm", "source_key", "target_key",
                     "success", "committed", "kind"])
        for _ in range(cfg.trials):
            log = agent.run_trial()
            mw.writerow(metrics_row(log))
            for g in log.discovered:
                cw.writerow([log.trial, g, "goal", "", ""])
            for g, key in log.new_contexts:
                cw.writerow([log.trial, g, "context", key_str(key), ""])
            for s in log.ucf_added:
                cw.writerow([log.trial, log.goal, "feature", "", s])
            if log.transfer_source is not None:
                tw.writerow([log.trial, log.goal, log.arm,
                             key_str(log.transfer_source), key_str(log.key),
                             log.success, int(log.transfer_committed),
                             "full" if log.transfer_committed else "partial"])

    save_agent(agent, run_dir / "snapshot.zip")
    manifest = {
        "variant": cfg.variant,
        "seed": seed,
        "trials": cfg.trials,
        "metrics_schema": METRICS_SCHEMA,
    }
    (run_dir / "run.json").write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    (run_dir / "config.ini").write_text(config_text(replace(cfg, seeds=(seed,))))
    return agent


def evaluate(snapshot_path, n_eval: int, rng: np.random.Generator) -> dict:
    """Frozen-policy evaluation: no learning, no exploration noise.

    Samples (goal, obstacle mask) uniformly n_eval times and reports
    success rates per (goal, context key) plus the overall rate. The
    snapshot file is never modified.
    """
    agent = load_agent(snapshot_path)
    n_goals = len(agent.goal_map)
    if n_goals == 0:
        return {"per_context": [], "overall": 0.0, "n": n_eval}
    table: dict = {}
    overall = [0, 0]
    for _ in range(n_eval):
        g = int(rng.integers(n_goals))
        mask = (rng.random(9) < 0.5).astype(np.uint8)
        success = _eval_trial(agent, g, mask, rng)
        key = agent.goal_key(mask, g)
        cell = table.setdefault((g, key), [0, 0])
        cell[0] += success
        cell[1] += 1
        overall[0] += success
        overall[1] += 1
    rows = {
        "per_context": [
            {"goal": g, "key": key_str(k), "n": n, "successes": s,
             "rate": s / n if n else 0.0}
            for (g, k), (s, n) in sorted(table.items(),
                                         key=lambda x: (x[0][0], key_str(x[0][1])))
        ],
        "overall": overall[0] / overall[1] if overall[1] else 0.0,
        "n": overall[1],
    }
    return rows


def _resolve_expert(agent: Agent, g: int, key):
    """Exact key, else its longest registered prefix, else None."""
    known = agent.registry.keys_for(g)
    probe = key
    while True:
        if probe in known:
            values = [agent.selector.expert_values.get((g, probe, a), 0.0) for a in range(2)]
            arm = int(np.argmax(values))
            return agent.experts[(g, probe, arm)], arm
        if not probe:
            return None, ARM_LEFT
        probe = probe[:-1]


def _eval_trial(agent: Agent, g: int, mask, rng) -> int:
    from . import experts as ex

    key = agent.goal_key(mask, g)
    net, arm = _resolve_expert(agent, g, key)
    if net is None:
        net = ex.ExpertNet()
        arm = ARM_LEFT
    state = reset_state(mask, agent.scene)
    state.active_arm = arm
    noise = ex.NoiseState(decrease=1.0, base_sd=agent.params.noise_sd)  # S_eT = 0
    sd = noise.start_trial()
    _, _, _, success, _ = agent._control_loop(state, net, noise, sd, pursued=g,
                                              learn=False, rng=rng, discover=False)
    return success


def write_eval_csv(result: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("#schema=cgrail.eval.v1\n")
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["goal", "key", "n", "successes", "rate"])
        for row in result["per_context"]:
            w.writerow([row["goal"], row["key"], row["n"], row["successes"], _f(row["rate"])])
        w.writerow(["overall", "", result["n"],
                    round(result["overall"] * result["n"]), _f(result["overall"])])
