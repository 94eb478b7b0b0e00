"""Monte-Carlo sweeps: regenerate every drop from derived seeds, design, evaluate, average.

Each drop's channels depend only on ``(master_seed, drop)``, so every sweep
value and every scheme sees the same realizations (common random numbers),
and adding a scheme never perturbs the others. Drops may run in worker
processes; results are folded in drop order so the output is identical to
the sequential run.
"""

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from ..baselines import cooperative_zf, fd_leakage_min
from ..channel import TopologyConfig, build_topology, corrupt_csi, sample_channels
from ..demand import build_demand
from ..errors import SolverError, VirtMimoError
from ..metrics import rates, sinr_all, virtual_sinr
from ..rng import derive_seed
from ..solver import AUTO, Branch, SolverParams, solve_network
from ..units import dbm_to_watt

CSV_COLUMNS = ("sweep_axis", "value", "scheme", "theta", "p_w_mean", "r_bar", "r_min_bar",
               "leakage_mean", "deviation_mean", "num_drops", "seed")


@dataclass(frozen=True)
class SweepPoint:
    """Everything that varies along the sweep axis, resolved for one value."""
    value: object
    topology: TopologyConfig
    csi_error: float
    thetas: tuple
    p_ws: tuple                 # dBm floats or AUTO


def sweep_points(cfg):
    t, axis = cfg.topology, cfg.sweep.axis
    out = []
    for v in cfg.sweep.values:
        antennas = v if axis == "N_C" else t.antennas
        users = v if axis == "K_C" else t.users_per_sp
        topo = TopologyConfig(num_cells=t.num_cells, cell_radius=t.cell_radius_m,
                              antennas=antennas, num_sps=t.num_sps, users_per_sp=users,
                              exclusion_radius=cfg.physics.exclusion_radius_m)
        out.append(SweepPoint(
            value=v, topology=topo,
            csi_error=v if axis == "E_H" else cfg.physics.csi_error,
            thetas=(v,) if axis == "THETA" else cfg.solver.theta_grid,
            p_ws=(v,) if axis == "P_W" else cfg.solver.p_w_grid))
    return out


def _p_w_watt(p_w):
    return AUTO if p_w == AUTO else float(dbm_to_watt(p_w))


def row_keys(cfg, point):
    """Output rows of one sweep value as ``(scheme, theta, p_w)``, in CSV order."""
    keys = []
    for scheme in cfg.schemes:
        if scheme == "COOP_ZF":
            keys.append((scheme, None, None))
            continue
        for th in point.thetas:
            for pw in point.p_ws:
                keys.append((scheme, th, pw))
    return keys


@dataclass
class _Stats:
    """Running sums for one output row."""
    r_bar: float = 0.0
    r_min_bar: float = 0.0
    p_w: float = 0.0
    leakage: float = 0.0
    deviation: float = 0.0
    has_power: bool = False
    has_ld: bool = False
    branches: dict = field(default_factory=lambda: {b.value: 0 for b in Branch})
    lam_min: float = float("inf")
    lam_max: float = 0.0
    max_iterations: int = 0

    def add_solutions(self, sols):
        for s in sols:
            self.branches[s.branch.value] += 1
            if s.branch is Branch.RIDGE_BISECTION:
                self.lam_min = min(self.lam_min, s.lam)
                self.lam_max = max(self.lam_max, s.lam)
            self.max_iterations = max(self.max_iterations, s.iterations)


def drop_instance(cfg, point, drop):
    """True channels, design channels (CSI-corrupted if configured), demand and seed."""
    seed = derive_seed(cfg.monte_carlo.master_seed, drop)
    topo = build_topology(point.topology, seed)
    true = sample_channels(topo, seed, shadowing_std_db=cfg.physics.shadowing_std_db)
    design = true if point.csi_error == 0 else corrupt_csi(true, point.csi_error, seed)
    demand = build_demand(design, kinds=cfg.precoder_kinds(topo.num_sps))
    return true, design, demand, seed


def _params(cfg, theta, p_w):
    return SolverParams(theta=theta, p_max=cfg.physics.p_max_watt, p_w=_p_w_watt(p_w),
                        bisection_rel_tol=cfg.solver.bisection_rel_tol,
                        max_bisection_iters=cfg.solver.max_bisection_iters)


def run_drop(cfg, point, drop):
    """Evaluate every requested scheme on one drop; returns ``{row_key: metrics}``."""
    true, design, demand, _ = drop_instance(cfg, point, drop)
    topo = true.topology
    kinds = cfg.precoder_kinds(topo.num_sps)
    noise = cfg.physics.noise_power_watt
    p_max = cfg.physics.p_max_watt
    out, solved = {}, {}
    for key in row_keys(cfg, point):
        scheme, th, pw = key
        try:
            if scheme == "COOP_ZF":
                res = cooperative_zf(design, p_max, noise, true_channels=true)
                out[key] = dict(r_bar=res.eval.r_bar, r_min_bar=res.eval.r_min_bar)
                continue
            params = _params(cfg, th, pw)
            if scheme == "FD":
                res = fd_leakage_min(design, kinds, params, noise, true_channels=true)
                sols = [s for per_sp in res.solutions for s in per_sp]
                out[key] = dict(r_bar=res.eval.r_bar, r_min_bar=res.eval.r_min_bar,
                                p_w=float(np.mean([s.p_w_used for s in sols])),
                                leakage=float(np.mean(res.eval.leakage)),
                                deviation=float(np.mean(res.eval.deviation)), solutions=sols)
                continue
            if (th, pw) not in solved:
                solved[th, pw] = solve_network(design, demand, params)
            sols = solved[th, pw]
            p_w_used = np.array([s.p_w_used for s in sols])
            if scheme == "PROPOSED":
                rep = rates(sinr_all(true, [s.precoder for s in sols], noise), topo.users_per_sp)
            else:
                rep = rates(virtual_sinr(demand, p_w_used, noise), topo.users_per_sp)
            out[key] = dict(r_bar=rep.r_bar, r_min_bar=rep.r_min_bar,
                            p_w=float(np.mean(p_w_used)),
                            leakage=float(np.mean([s.leakage for s in sols])),
                            deviation=float(np.mean([s.deviation for s in sols])),
                            solutions=sols)
        except VirtMimoError as exc:
            cell = getattr(exc, "cell", None)
            raise SolverError(f"drop {drop}, scheme {scheme}, theta {th}, p_w {pw}: {exc}",
                              cell=cell,
                              context={"drop": drop, "scheme": scheme, "cell": cell,
                                       "value": point.value}) from exc
    return out


@dataclass
class ExperimentResult:
    config: object
    rows: list                  # dicts keyed by CSV_COLUMNS
    diagnostics: list           # one dict per row

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_jsonl(self):
        return "".join(json.dumps(d, sort_keys=True) + "\n" for d in self.diagnostics)

    def write(self, csv_path, diag_path=None):
        with open(csv_path, "w", newline="") as fh:
            fh.write(self.to_csv())
        if diag_path is not None:
            with open(diag_path, "w") as fh:
                fh.write(self.to_jsonl())

    def select(self, **match):
        """Rows whose columns equal every ``column=value`` given."""
        return [r for r in self.rows if all(r[k] == v for k, v in match.items())]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_experiment(cfg, workers=1):
    """Run the configured sweep and return the averaged table.

    Parameters
    ----------
    cfg : ExperimentConfig
    workers : int
        Worker processes for the drops of each sweep value; 1 runs inline.
        The output does not depend on this value.
    """
    n = cfg.monte_carlo.num_drops
    rows, diags = [], []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for point in sweep_points(cfg):
            fn = partial(run_drop, cfg, point)
            if pool is None:
                results = map(fn, range(n))
            else:
                results = pool.map(fn, range(n), chunksize=max(1, n // (4 * workers)))
            keys = row_keys(cfg, point)
            stats = {k: _Stats() for k in keys}
            for res in results:
                for k in keys:
                    m, st = res[k], stats[k]
                    st.r_bar += m["r_bar"]
                    st.r_min_bar += m["r_min_bar"]
                    if "p_w" in m:
                        st.has_power = True
                        st.p_w += m["p_w"]
                    if "leakage" in m and k[0] != "VIRTUAL_ONLY":
                        st.has_ld = True
                        st.leakage += m["leakage"]
                        st.deviation += m["deviation"]
                    if "solutions" in m:
                        st.add_solutions(m["solutions"])
            for k in keys:
                scheme, th, pw = k
                st = stats[k]
                rows.append({
                    "sweep_axis": cfg.sweep.axis, "value": point.value, "scheme": scheme,
                    "theta": th,
                    "p_w_mean": st.p_w / n if st.has_power else None,
                    "r_bar": st.r_bar / n, "r_min_bar": st.r_min_bar / n,
                    "leakage_mean": st.leakage / n if st.has_ld else None,
                    "deviation_mean": st.deviation / n if st.has_ld else None,
                    "num_drops": n, "seed": cfg.monte_carlo.master_seed})
                diags.append({
                    "sweep_axis": cfg.sweep.axis, "value": point.value, "scheme": scheme,
                    "theta": th, "p_w_setting": pw,
                    "branch_counts": st.branches if scheme != "COOP_ZF" else None,
                    "lambda_min": st.lam_min if np.isfinite(st.lam_min) else None,
                    "lambda_max": st.lam_max if np.isfinite(st.lam_min) else None,
                    "max_bisection_iters": st.max_iterations if scheme != "COOP_ZF" else None})
    finally:
        if pool is not None:
            pool.shutdown()
    return ExperimentResult(config=cfg, rows=rows, diagnostics=diags)


def solve_instance(cfg, drop=0, value_index=0):
    """Single-drop solve of the proposed scheme for the CLI ``solve`` command."""
    point = sweep_points(cfg)[value_index]
    true, design, demand, seed = drop_instance(cfg, point, drop)
    sols = solve_network(design, demand, _params(cfg, point.thetas[0], point.p_ws[0]))
    rep = rates(sinr_all(true, [s.precoder for s in sols], cfg.physics.noise_power_watt),
                true.topology.users_per_sp)
    return point, seed, sols, rep
