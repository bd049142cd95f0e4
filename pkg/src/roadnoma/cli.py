"""Command-line surface: scenario runs, figure reproduction, validation.

Subcommands:
  run       evaluate one scenario (closed form + Monte Carlo) and emit CSV
  figure    rebuild one of the report figures (CSV + vector plot)
  validate  run the self-validation suites and write a pass/fail report
  snapshot  dump and plot one network realization
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import fields

from . import analytic, figures, montecarlo, validation
from .config import (
    ConfigError,
    SystemConfig,
    derive,
    load_config,
    with_overrides,
    _parse_rates,
)
from .numerics import NumericsError

Z_GATE = 4.0


def _add_common(parser, trials_default):
    parser.add_argument("--seed", type=int, default=figures.DEFAULT_SEED)
    parser.add_argument("--trials", type=int, default=trials_default)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", type=str, default="out")


def _add_config_flags(parser):
    parser.add_argument("--config", type=str, default=None,
                        help="key=value config file; every field required")
    for f in fields(SystemConfig):
        if f.name == "rates":
            parser.add_argument("--rates", type=str, default=None,
                                metavar="R0,R1,R2")
        else:
            parser.add_argument(f"--{f.name}", type=float, default=None)


def _resolve_config(args) -> SystemConfig:
    cfg = load_config(args.config) if args.config else SystemConfig()
    overrides = {}
    for f in fields(SystemConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = _parse_rates(value) if f.name == "rates" else value
    cfg = with_overrides(cfg, **overrides) if overrides else cfg
    cfg.validate()
    return cfg


def _z_score(p_hat: float, analytic_p: float, n: int) -> float:
    sigma = math.sqrt(analytic_p * (1.0 - analytic_p) / n)
    if sigma == 0.0:
        return 0.0 if p_hat == analytic_p else math.inf
    return (p_hat - analytic_p) / sigma


def _cmd_run(args) -> int:
    cfg = _resolve_config(args)
    users = tuple(u.strip() for u in args.users.split(",") if u.strip())
    banks = montecarlo.collect_samples(
        cfg, users, args.trials, args.seed, workers=args.workers)
    der = derive(cfg)
    rows = []
    for user in users:
        if user == "comp":
            analytic_p = analytic.outage_comp(cfg).p
        else:
            analytic_p = analytic.outage_noma(cfg, int(user[-1])).p
        ind = montecarlo.outage_indicators(banks[user], user, der, cfg.beta)
        n = ind.size
        p_hat = float(ind.sum()) / n
        rows.append({
            "scenario_id": args.scenario_id,
            "user": user,
            "n_trials": n,
            "p_hat": repr(p_hat),
            "stderr": repr(math.sqrt(p_hat * (1.0 - p_hat) / n)),
            "analytic_p": repr(analytic_p),
            "z_score": repr(_z_score(p_hat, analytic_p, n)),
        })
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.scenario_id}.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

    print(f"scenario {args.scenario_id}: {args.trials} trials, seed {args.seed}")
    print(f"{'user':8s} {'mc':>12s} {'stderr':>10s} {'analytic':>12s} {'z':>8s}")
    worst = 0.0
    for r in rows:
        z = float(r["z_score"])
        worst = max(worst, abs(z))
        print(f"{r['user']:8s} {float(r['p_hat']):12.6f} {float(r['stderr']):10.6f} "
              f"{float(r['analytic_p']):12.6f} {z:8.2f}")
    print(f"wrote {path}")
    if args.check and worst > Z_GATE:
        print(f"CHECK FAILED: |z| = {worst:.2f} exceeds {Z_GATE}", file=sys.stderr)
        return 1
    return 0


def _cmd_figure(args) -> int:
    csv_path, plot_path = figures.reproduce_figure(
        args.figure_id, args.out, seed=args.seed,
        trials=args.trials, workers=args.workers)
    print(f"wrote {csv_path}")
    print(f"wrote {plot_path}")
    return 0


def _cmd_validate(args) -> int:
    rows = validation.run_all(seed=args.seed, n_trials=args.trials,
                              workers=args.workers)
    report = validation.format_report(rows)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "validation_report.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report + "\n")
    print(report)
    print(f"wrote {path}")
    return 0 if all(r.passed for r in rows) else 1


def _cmd_snapshot(args) -> int:
    csv_path, plot_path = figures.reproduce_figure(
        "snapshot", args.out, seed=args.seed)
    print(f"wrote {csv_path}")
    print(f"wrote {plot_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roadnoma",
        description="Outage analysis of two-BS cooperative NOMA on a "
                    "Poisson-line-Cox road network",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate a scenario from a config file")
    _add_config_flags(p_run)
    _add_common(p_run, trials_default=figures.DEFAULT_TRIALS)
    p_run.add_argument("--users", type=str, default="comp,noma1,noma2")
    p_run.add_argument("--scenario-id", type=str, default="scenario")
    p_run.add_argument("--check", action="store_true",
                       help="exit 1 if simulation and analysis disagree beyond 4 sigma")
    p_run.set_defaults(func=_cmd_run)

    p_fig = sub.add_parser("figure", help="reproduce a report figure")
    p_fig.add_argument("figure_id", choices=figures.FIGURE_IDS)
    _add_common(p_fig, trials_default=figures.DEFAULT_TRIALS)
    p_fig.set_defaults(func=_cmd_figure)

    p_val = sub.add_parser("validate", help="run the self-validation suites")
    _add_common(p_val, trials_default=20000)
    p_val.set_defaults(func=_cmd_validate)

    p_snap = sub.add_parser("snapshot", help="dump and plot one realization")
    _add_common(p_snap, trials_default=1)
    p_snap.set_defaults(func=_cmd_snapshot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NumericsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
