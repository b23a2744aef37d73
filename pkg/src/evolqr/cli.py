"""Command-line interface.

Subcommands:
  optimize  run the evolutionary campaign and write fronts/metrics/summary
  select    winner histogram over a saved front
  simulate  one controller on one payload case
  compare   payload sweep of the three controllers
  metrics   recompute indicators from a saved fronts.csv
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .harness import (
    APPLIED_DT,
    ExperimentConfig,
    compare_controllers,
    controller_gains,
    default_winner_candidates,
    format_number,
    lane_change_profile,
    load_config,
    make_problem,
    read_fronts_csv,
    recompute_metrics,
    run_experiment,
    simulate_tracking,
    winner_histogram,
    write_csv,
    write_polyline_svg,
)
from .moea import EvolutionConfig
from .vehicle import build_continuous, discretize_zoh, payload_variant


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON experiment configuration")
    parser.add_argument("--out", type=Path, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="single seed (overrides config seeds)")
    parser.add_argument("--problem", choices=("generic", "applied"), help="problem selection")
    parser.add_argument("--molsp", choices=("on", "off"), help="enable/disable the local search hook")
    parser.add_argument("--evals", type=int, help="evaluation budget per run")


def _build_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    updates: dict = {}
    if args.problem:
        updates["problem"] = args.problem
    if args.molsp:
        updates["molsp_enabled"] = args.molsp == "on"
    if args.seed is not None:
        updates["seeds"] = (args.seed,)
    if args.out:
        updates["output_dir"] = str(args.out)
    if args.evals is not None:
        updates["evolution"] = dataclasses.replace(config.evolution, max_evaluations=args.evals)
    return dataclasses.replace(config, **updates) if updates else config


def cmd_optimize(args) -> int:
    config = _build_config(args)
    report = run_experiment(config)
    for entry in report.summary:
        print(
            f"{entry['algorithm']}: hv={entry['hv_mean']:.6g}+-{entry['hv_std']:.3g} "
            f"igd={entry['igd_mean']:.6g} (over {entry['n_seeds']} seeds)"
        )
    print(f"results written to {config.output_dir}")
    return 0


def cmd_select(args) -> int:
    config = _build_config(args)
    problem = make_problem(config)
    saved = read_fronts_csv(args.fronts)
    run_id = args.run or sorted(saved)[0]
    if run_id not in saved:
        print(f"run {run_id!r} not found in {args.fronts}", file=sys.stderr)
        return 2
    front_z, _ = saved[run_id][max(saved[run_id])]
    front_z = np.unique(front_z, axis=0)
    seed = args.seed if args.seed is not None else 0
    labels, candidates = default_winner_candidates(problem, front_z, seed, config.vehicle)
    counts = winner_histogram(candidates, problem, args.sims, seed)
    out = Path(args.out or config.output_dir)
    write_csv(
        out / "winners.csv",
        ["candidate", "wins"],
        [[label, str(int(c))] for label, c in zip(labels, counts)],
    )
    best = int(np.argmax(counts))
    print(f"winner: {labels[best]} with {counts[best]} of {args.sims} simulations")
    print(f"histogram written to {out / 'winners.csv'}")
    return 0


def cmd_simulate(args) -> int:
    config = _build_config(args)
    gains = controller_gains(config.vehicle)
    name = args.controller.replace("-", "_")
    if name not in gains:
        print(f"unknown controller {args.controller!r}", file=sys.stderr)
        return 2
    plant = discretize_zoh(
        build_continuous(payload_variant(config.vehicle, args.overload), curvature_input=False),
        APPLIED_DT,
    )
    offsets = lane_change_profile(args.steps, APPLIED_DT)
    states, inputs, diverged = simulate_tracking(plant, gains[name], (0.0, 0.0, 1.0, 0.0), offsets)
    out = Path(args.out or config.output_dir)
    rows = []
    for i in range(states.shape[0]):
        steering = inputs[i - 1, 0] if 0 < i <= inputs.shape[0] else 0.0
        rows.append(
            [format_number(i * APPLIED_DT)]
            + [format_number(v) for v in states[i]]
            + [format_number(steering)]
        )
    write_csv(
        out / f"trajectory_{name}_overload{int(round(args.overload * 100))}.csv",
        ["time", "y_dot", "psi_dot", "rho", "theta", "steering"],
        rows,
    )
    write_polyline_svg(
        out / f"trajectory_{name}_overload{int(round(args.overload * 100))}.svg",
        np.arange(states.shape[0]) * APPLIED_DT,
        states[:, 2],
        title=f"{name} lateral displacement, overload {args.overload:g}",
    )
    status = "DIVERGED" if diverged else "ok"
    print(f"simulated {name} at overload {args.overload:g}: {status}; files in {out}")
    return 0


def cmd_compare(args) -> int:
    config = _build_config(args)
    out = args.out or config.output_dir
    rows = compare_controllers(config, output_dir=out)
    for row in rows:
        print(
            f"overload {row['overload']:>4g}  {row['controller']:<15s} "
            + " ".join(f"{c}={row[c]:.6g}" for c in ("f1", "f2", "f3", "f4"))
        )
    print(f"comparison written to {Path(out) / 'compare.csv'}")
    return 0


def cmd_metrics(args) -> int:
    config = _build_config(args)
    out = args.out or config.output_dir
    rows = recompute_metrics(args.fronts, config, out)
    for row in rows:
        print(
            f"{row['algorithm']} seed {row['seed']}: "
            + " ".join(f"{m}={row[m]:.6g}" for m in ("igd", "sp", "hv", "pd", "spread"))
        )
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="evolqr",
        description="Robust path-following controller design via multiobjective evolution",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="run the optimization campaign")
    _add_common(p_opt)
    p_opt.set_defaults(func=cmd_optimize)

    p_sel = sub.add_parser("select", help="winner histogram over a saved front")
    _add_common(p_sel)
    p_sel.add_argument("--fronts", type=Path, required=True, help="fronts.csv from optimize")
    p_sel.add_argument("--run", help="run id to select from (default: first)")
    p_sel.add_argument("--sims", type=int, default=1000, help="number of randomized simulations")
    p_sel.set_defaults(func=cmd_select)

    p_sim = sub.add_parser("simulate", help="simulate one controller at one payload")
    _add_common(p_sim)
    p_sim.add_argument(
        "--controller",
        default="rlqr-mop",
        choices=("lqr", "rlqr-mop", "rlqr-algebraic"),
        help="controller to simulate",
    )
    p_sim.add_argument("--overload", type=float, default=0.0, help="payload overload fraction")
    p_sim.add_argument("--steps", type=int, default=300, help="simulation steps")
    p_sim.set_defaults(func=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="payload sweep of the three controllers")
    _add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_met = sub.add_parser("metrics", help="recompute indicators from saved fronts")
    _add_common(p_met)
    p_met.add_argument("--fronts", type=Path, required=True, help="fronts.csv from optimize")
    p_met.set_defaults(func=cmd_metrics)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
