"""Command line entry point: ``virtmimo {validate,solve,sweep} CONFIG``.

Exit codes: 0 success, 1 configuration error, 2 solver error.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from ..errors import ConfigError, VirtMimoError
from ..units import watt_to_dbm
from .config import load_config
from .experiment import run_experiment, solve_instance, sweep_points

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


def _load(args):
    overrides = list(args.set or [])
    if getattr(args, "drops", None) is not None:
        overrides.append(("monte_carlo.num_drops", args.drops))
    if getattr(args, "seed", None) is not None:
        overrides.append(("monte_carlo.master_seed", args.seed))
    return load_config(args.config, overrides)


def cmd_validate(args):
    cfg = _load(args)
    ph, t = cfg.physics, cfg.topology
    print(f"config            {args.config}")
    print(f"topology          C={t.num_cells} R={t.cell_radius_m:g} m N_c={t.antennas} "
          f"M={t.num_sps} K_c^m={t.users_per_sp}")
    print(f"p_max             {ph.p_max_dbm:g} dBm = {ph.p_max_watt:.6g} W")
    print(f"noise power       {ph.noise_power_dbm:.2f} dBm = {ph.noise_power_watt:.6g} W")
    print(f"solver            theta={cfg.solver.theta} p_w={cfg.solver.p_w}")
    print(f"sweep             {cfg.sweep.axis} = {list(cfg.sweep.values)}")
    print(f"schemes           {', '.join(cfg.schemes)}   sp_precoder={cfg.sp_precoder}")
    seeds = cfg.drop_seeds()
    shown = ", ".join(str(s) for s in seeds[:3]) + (", ..." if len(seeds) > 3 else "")
    print(f"drops             {cfg.monte_carlo.num_drops} from master seed "
          f"{cfg.monte_carlo.master_seed}: {shown}")
    for p in sweep_points(cfg):
        k = p.topology.num_cells * p.topology.num_sps * p.topology.users_per_sp
        n = p.topology.num_cells * p.topology.antennas
        if "COOP_ZF" in cfg.schemes and k > n:
            raise ConfigError(f"COOP_ZF needs K <= N, got K={k}, N={n} at {p.value}",
                              field="schemes")
    print("ok")
    return EXIT_OK


def cmd_solve(args):
    cfg = _load(args)
    point, seed, sols, rep = solve_instance(cfg, drop=args.drop, value_index=args.value_index)
    out = {
        "sweep_axis": cfg.sweep.axis, "value": point.value, "drop": args.drop, "seed": seed,
        "r_bar": rep.r_bar, "r_min_bar": rep.r_min_bar,
        "cells": [{
            "cell": s.cell, "branch": s.branch.value, "lambda": s.lam,
            "lambda_upper": s.lambda_upper, "bisection_iters": s.iterations,
            "p_w_w": s.p_w_used, "p_w_dbm": float(watt_to_dbm(s.p_w_used)),
            "power_w": s.achieved_power, "p_max_w": s.p_max,
            "leakage": s.leakage, "deviation": s.deviation, "kkt_residual": s.kkt_residual,
        } for s in sols],
        "sinr_db": (10 * np.log10(np.maximum(rep.sinr, 1e-300))).round(3).tolist(),
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_sweep(args):
    cfg = _load(args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    diag = out.with_suffix(".diag.jsonl")
    t0 = time.perf_counter()
    result = run_experiment(cfg, workers=args.workers)
    result.write(out, diag)
    print(f"wrote {len(result.rows)} rows to {out} and diagnostics to {diag} "
          f"in {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="virtmimo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="YAML experiment config")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config field, e.g. solver.theta=0.3 (repeatable)")
        sp.add_argument("--drops", type=int, help="override monte_carlo.num_drops")
        sp.add_argument("--seed", type=int, help="override monte_carlo.master_seed")

    v = sub.add_parser("validate", help="check a config and print resolved values")
    common(v)
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="solve one drop and dump per-cell diagnostics as JSON")
    common(s)
    s.add_argument("--drop", type=int, default=0)
    s.add_argument("--value-index", type=int, default=0,
                   help="which sweep value to use (default: the first)")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="run the Monte-Carlo sweep and write CSV")
    common(w)
    w.add_argument("--out", default="results/sweep.csv")
    w.add_argument("--workers", type=int, default=1, help="processes for the drops")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VirtMimoError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
