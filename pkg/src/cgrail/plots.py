"""Figure emission: columnar plot data plus SVG renderings.

Reads one or more run directories, groups them by variant, and writes
per-figure CSV data files next to matplotlib-rendered SVGs. Multi-seed
groups get mean and sample-sd bands; context-discovery marks come from
the contexts.csv event logs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "cgrail"
import matplotlib.pyplot as plt
import numpy as np

from .harness import CONTEXTS_SCHEMA, METRICS_SCHEMA, SchemaError, read_csv

FIGURES = ("performance", "contexts", "im")

_SVG_META = {"Date": None}


def discover_runs(in_dir) -> list:
    """Run directories under in_dir (or in_dir itself), sorted by path."""
    root = Path(in_dir)
    if (root / "metrics.csv").exists():
        return [root]
    runs = sorted(p.parent for p in root.glob("**/metrics.csv"))
    if not runs:
        raise FileNotFoundError(f"no metrics.csv under {in_dir}")
    return runs


def _variant_of(run_dir: Path) -> str:
    manifest = run_dir / "run.json"
    if manifest.exists():
        return json.loads(manifest.read_text()).get("variant", run_dir.name)
    return run_dir.name


def _group_by_variant(runs) -> dict:
    groups: dict = {}
    for r in runs:
        groups.setdefault(_variant_of(r), []).append(r)
    return groups


def _load_metrics(run_dir: Path) -> list:
    return read_csv(run_dir / "metrics.csv", METRICS_SCHEMA)


def _series(rows, column) -> np.ndarray:
    return np.array([float(r[column]) if r[column] != "" else np.nan for r in rows])


def _band(stack) -> tuple:
    """Mean and sample sd across seeds at each trial (sd 0 for one seed)."""
    arr = np.vstack(stack)
    mean = np.nanmean(arr, axis=0)
    sd = np.nanstd(arr, axis=0, ddof=1) if arr.shape[0] > 1 else np.zeros(arr.shape[1])
    return mean, sd


def _r(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def emit_performance(groups: dict, out: Path) -> list:
    written = []
    fig, axes = plt.subplots(1, len(groups), figsize=(5 * len(groups), 3.4),
                             squeeze=False, sharey=True)
    for ax, (variant, runs) in zip(axes[0], sorted(groups.items())):
        per_goal = {}
        trials = None
        for g in range(3):
            stack = [_series(_load_metrics(r), f"wsr_g{g}") for r in runs]
            n = min(len(s) for s in stack)
            stack = [s[:n] for s in stack]
            per_goal[g] = _band(stack)
            trials = np.arange(n)
        rows = [[t] + [x for g in range(3) for x in
                       (_r(per_goal[g][0][t]), _r(per_goal[g][1][t]))]
                for t in range(len(trials))]
        path = out / f"performance_{variant}.csv"
        _write_csv(path, ["trial"] + [f"wsr_g{g}_{s}" for g in range(3) for s in ("mean", "sd")],
                   rows)
        written.append(path)
        for g in range(3):
            mean, sd = per_goal[g]
            ax.plot(trials, mean, label=f"goal {g}", lw=0.9)
            ax.fill_between(trials, mean - sd, mean + sd, alpha=0.25, lw=0)
        ax.set_title(variant)
        ax.set_xlabel("trial")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(fontsize=7)
    axes[0][0].set_ylabel("windowed success")
    svg = out / "performance.svg"
    _save(fig, svg)
    written.append(svg)
    return written


def emit_contexts(groups: dict, out: Path) -> list:
    written = []
    fig, axes = plt.subplots(1, len(groups), figsize=(5 * len(groups), 3.4),
                             squeeze=False, sharey=False)
    for ax, (variant, runs) in zip(axes[0], sorted(groups.items())):
        stacks = {c: [] for g in range(3) for c in (f"phi_g{g}", f"ucf_g{g}")}
        n = None
        for r in runs:
            rows = _load_metrics(r)
            for c in stacks:
                stacks[c].append(_series(rows, c))
        n = min(len(s) for ss in stacks.values() for s in ss)
        bands = {c: _band([s[:n] for s in ss]) for c, ss in stacks.items()}
        trials = np.arange(n)
        header = ["trial"] + [f"{c}_{s}" for c in bands for s in ("mean", "sd")]
        rows = [[t] + [_r(v) for c in bands for v in (bands[c][0][t], bands[c][1][t])]
                for t in range(n)]
        path = out / f"contexts_{variant}.csv"
        _write_csv(path, header, rows)
        written.append(path)
        for g in range(3):
            mean, sd = bands[f"phi_g{g}"]
            ax.plot(trials, mean, label=f"goal {g} contexts", lw=0.9)
            ax.fill_between(trials, mean - sd, mean + sd, alpha=0.25, lw=0)
        if len(runs) == 1:
            events = read_csv(runs[0] / "contexts.csv", CONTEXTS_SCHEMA)
            marks = [int(e["trial"]) for e in events if e["kind"] == "context"]
            for t in marks:
                ax.axvline(t, color="k", alpha=0.15, lw=0.6)
        ax.set_title(variant)
        ax.set_xlabel("trial")
        ax.legend(fontsize=7)
    axes[0][0].set_ylabel("known contexts")
    svg = out / "contexts.svg"
    _save(fig, svg)
    written.append(svg)
    return written


def emit_im(groups: dict, out: Path, window: int = 200) -> list:
    written = []
    fig, axes = plt.subplots(1, len(groups), figsize=(5 * len(groups), 3.4),
                             squeeze=False, sharey=True)
    for ax, (variant, runs) in zip(axes[0], sorted(groups.items())):
        per_goal = {}
        for g in range(3):
            stack = []
            for r in runs:
                rows = _load_metrics(r)
                dc = np.full(len(rows), np.nan)
                for i, row in enumerate(rows):
                    if row["goal"] == str(g):
                        dc[i] = abs(float(row["delta_c"]))
                # trailing moving average over the goal's own trials
                out_series = np.full(len(rows), np.nan)
                vals = []
                for i, v in enumerate(dc):
                    if not np.isnan(v):
                        vals.append(v)
                    if vals:
                        out_series[i] = np.mean(vals[-window:])
                stack.append(out_series)
            n = min(len(s) for s in stack)
            per_goal[g] = _band([s[:n] for s in stack])
        n = min(len(m) for m, _ in per_goal.values())
        trials = np.arange(n)
        header = ["trial"] + [f"im_g{g}_{s}" for g in range(3) for s in ("mean", "sd")]
        rows = [[t] + [_r(per_goal[g][j][t]) for g in range(3) for j in (0, 1)]
                for t in range(n)]
        path = out / f"im_{variant}.csv"
        _write_csv(path, header, rows)
        written.append(path)
        for g in range(3):
            mean, sd = per_goal[g]
            ax.plot(trials[:n], mean[:n], label=f"goal {g}", lw=0.9)
            ax.fill_between(trials[:n], (mean - sd)[:n], (mean + sd)[:n], alpha=0.25, lw=0)
        ax.set_title(variant)
        ax.set_xlabel("trial")
        ax.legend(fontsize=7)
    axes[0][0].set_ylabel("|competence improvement| (smoothed)")
    svg = out / "im.svg"
    _save(fig, svg)
    written.append(svg)
    return written


def emit_plots(in_dir, fig: str = "all", out_dir=None) -> list:
    """Write plot-data CSVs and SVG charts for one figure kind or all."""
    runs = discover_runs(in_dir)
    groups = _group_by_variant(runs)
    out = Path(out_dir) if out_dir else Path(in_dir) / "plots"
    out.mkdir(parents=True, exist_ok=True)
    emitters = {"performance": emit_performance, "contexts": emit_contexts, "im": emit_im}
    if fig == "all":
        names = FIGURES
    elif fig in emitters:
        names = (fig,)
    else:
        raise ValueError(f"unknown figure {fig!r}; choose from {FIGURES + ('all',)}")
    written = []
    for name in names:
        written.extend(emitters[name](groups, out))
    return [str(p) for p in written]
