"""Command-line interface: run experiments, evaluate snapshots, emit plots."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, VARIANT_NAMES, load_config
from .harness import evaluate, run_experiment, write_eval_csv
from .plots import FIGURES, emit_plots

OUTPUT_ROOT_ENV = "CGRAIL_OUTPUT_ROOT"


def _resolve_out(path: str) -> Path:
    root = os.environ.get(OUTPUT_ROOT_ENV)
    p = Path(path)
    if root and not p.is_absolute():
        return Path(root) / p
    return p


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.variant:
        overrides["variant"] = args.variant
    if args.seed is not None:
        overrides["seeds"] = (args.seed,)
    if args.trials is not None:
        overrides["trials"] = args.trials
    cfg = replace(cfg, **overrides)
    out = _resolve_out(args.out)
    dirs = run_experiment(cfg, out, jobs=args.jobs)
    for d in dirs:
        print(d)
    return 0


def _cmd_evaluate(args) -> int:
    rng = np.random.default_rng(args.seed)
    result = evaluate(args.snapshot, args.n, rng)
    if args.out:
        write_eval_csv(result, _resolve_out(args.out))
    for row in result["per_context"]:
        print(f"goal {row['goal']} key {row['key']}: "
              f"{row['successes']}/{row['n']} = {row['rate']:.3f}")
    print(f"overall: {result['overall']:.3f} over {result['n']} evaluations")
    return 0


def _cmd_plot(args) -> int:
    written = emit_plots(_resolve_out(args.indir), fig=args.fig,
                         out_dir=_resolve_out(args.out) if args.out else None)
    for p in written:
        print(p)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cgrail",
        description="Open-ended learning benchmark: context-dependent reaching "
                    "with autonomous goal and context discovery.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment")
    p_run.add_argument("--config", help="INI profile (defaults are built in)")
    p_run.add_argument("--variant", choices=VARIANT_NAMES)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--trials", type=int)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel seed workers")
    p_run.set_defaults(func=_cmd_run)

    p_eval = sub.add_parser("evaluate", help="frozen-policy evaluation of a snapshot")
    p_eval.add_argument("--snapshot", required=True)
    p_eval.add_argument("--n", type=int, default=1000, help="evaluation trials")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--out", help="write the table as CSV here")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_plot = sub.add_parser("plot", help="emit plot data and SVG charts")
    p_plot.add_argument("--in", dest="indir", required=True,
                        help="directory containing run directories")
    p_plot.add_argument("--fig", default="all", choices=FIGURES + ("all",))
    p_plot.add_argument("--out", help="plot output directory")
    p_plot.set_defaults(func=_cmd_plot)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
