"""Shared argument handling for the experiment scripts."""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from virtmimo.harness import load_config, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def parser(description, default_config="configs/desk.yaml", default_drops=200):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", default=str(ROOT / default_config))
    p.add_argument("--drops", type=int, default=default_drops)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV path (default: results/<script>.csv)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return p


def pw_grid_dbm(lo=-100.0, hi=33.0, n=20):
    """``n`` log-spaced powers (i.e. evenly spaced in dBm) from ``lo`` to ``hi``."""
    return [round(float(x), 6) for x in np.linspace(lo, hi, n)]


def run(args, overrides, name):
    ov = list(overrides) + list(args.set)
    ov.append(("monte_carlo.num_drops", args.drops))
    if args.seed is not None:
        ov.append(("monte_carlo.master_seed", args.seed))
    cfg = load_config(args.config, ov)
    out = Path(args.out or ROOT / "results" / f"{name}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    result = run_experiment(cfg, workers=args.workers)
    result.write(out, out.with_suffix(".diag.jsonl"))
    print(f"{name}: {len(result.rows)} rows -> {out} ({time.perf_counter() - t0:.1f} s)",
          file=sys.stderr)
    return result
