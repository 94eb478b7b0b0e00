"""Per-cell precoding that trades inter-cell leakage against demand deviation.

Each cell solves

    min_V  (1 - theta) * leakage(V) + theta * deviation(V)   s.t. ||V||_F^2 <= P_max

using only the channels from its own BS. Stacking the own-cell channel with
the foreign-cell channels scaled by ``sqrt((1 - theta) / theta)`` turns the
objective into one least-squares term, solved in closed form when the power
budget is slack and by bisection on the ridge multiplier otherwise.
"""

from dataclasses import dataclass, replace
from enum import Enum
from functools import partial

import numpy as np

from .errors import (IllConditionedError, NotPositiveDefiniteError,
                     SolverError)
from .linalg import fro_norm_sq, pinv_apply, solve_hpd
from .metrics import cell_leakage_deviation

AUTO = "auto"
CLOSED_FORM_SLACK = 1e-12


class Branch(str, Enum):
    CLOSED_FORM = "closed_form"
    RIDGE_BISECTION = "ridge_bisection"


def _per_cell(value, cell):
    arr = np.asarray(value, dtype=float)
    return float(arr) if arr.ndim == 0 else float(arr[cell])


@dataclass(frozen=True)
class SolverParams:
    """Weights and power budgets; scalars apply to every cell.

    ``p_w`` is either watts (scalar or per cell) or ``AUTO``, which picks the
    largest virtual power the closed form can serve within ``p_max``.
    """
    theta: object = 0.5
    p_max: object = 1.0
    p_w: object = AUTO
    bisection_rel_tol: float = 1e-9
    max_bisection_iters: int = 200

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if np.any(th <= 0) or np.any(th >= 1):
            raise ValueError(f"theta must lie in the open interval (0, 1), got {self.theta}")
        pm = np.asarray(self.p_max, dtype=float)
        if np.any(pm <= 0):
            raise ValueError("p_max must be positive")
        if not self.auto_power:
            pw = np.asarray(self.p_w, dtype=float)
            if np.any(pw <= 0):
                raise ValueError("explicit p_w must be positive")
            if np.any(pw > pm * (1 + 1e-12)):
                raise ValueError("explicit p_w may not exceed p_max")
        if self.bisection_rel_tol <= 0 or self.max_bisection_iters < 1:
            raise ValueError("bisection tolerance and iteration cap must be positive")

    @property
    def auto_power(self):
        return isinstance(self.p_w, str) and self.p_w.lower() == AUTO

    def theta_for(self, cell):
        return _per_cell(self.theta, cell)

    def p_max_for(self, cell):
        return _per_cell(self.p_max, cell)

    def p_w_for(self, cell):
        return None if self.auto_power else _per_cell(self.p_w, cell)


@dataclass(frozen=True, eq=False)
class PrecodingSolution:
    cell: int
    precoder: np.ndarray
    lam: float
    branch: Branch
    achieved_power: float
    leakage: float
    deviation: float
    p_w_used: float
    p_max: float
    kkt_residual: float
    lambda_upper: float
    iterations: int = 0


def foreign_scale(theta):
    """Amplitude weight of foreign-cell rows in the effective channel."""
    return np.sqrt((1.0 - theta) / theta)


def effective_channel(channels, cell, theta):
    """``K x N_c`` stack of every cell's channel from BS ``cell``.

    Own-cell rows are unscaled; every other block-row is multiplied by
    ``sqrt((1 - theta) / theta)``.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    topo = channels.topology
    scale = np.full(topo.num_users, foreign_scale(theta))
    scale[topo.cell_slice(cell)] = 1.0
    return channels.columns[cell] * scale[:, None]


def virtual_power_cell(h_eff, d_tilde, p_max):
    """Largest virtual power whose closed-form precoder fits in ``p_max``."""
    need = fro_norm_sq(pinv_apply(h_eff, d_tilde))
    if need == 0.0:
        return float(p_max)
    return float(min(p_max / need, p_max))


def lambda_upper_bound(h_eff, p_w, p_max):
    """Upper end of the bracket that contains the optimal ridge multiplier."""
    return fro_norm_sq(h_eff) * np.sqrt(h_eff.shape[1] * p_w / p_max)


def kkt_residual(h_eff, d_tilde, v, lam, p_w):
    """Frobenius norm of the Lagrangian gradient ``H^H (H V - sqrt(P^w) D) + lam V``."""
    r = h_eff.conj().T @ (h_eff @ v - np.sqrt(p_w) * d_tilde) + lam * v
    return float(np.sqrt(fro_norm_sq(r)))


def _ridge_bisection(gram, rhs, p_w, p_max, upper, tol, max_iters, cell):
    def power(lam):
        x = solve_hpd(gram, rhs, lam)
        return p_w * fro_norm_sq(x), x

    top, x = power(upper)
    if top > p_max * (1 + tol):
        raise SolverError(
            f"cell {cell}: power {top:.6e} W at the bracket bound lambda={upper:.6e} "
            f"still exceeds p_max={p_max:.6e} W",
            cell=cell, context={"lambda_upper": upper, "power": top})
    if abs(top - p_max) <= tol * p_max:
        return upper, x, 0
    lo, hi = 0.0, upper
    x_hi = x
    for it in range(1, max_iters + 1):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # Bracket exhausted at float resolution; the power curve is flat
            # to rounding here, so keep the feasible end.
            return hi, x_hi, it
        try:
            pw, x = power(mid)
        except NotPositiveDefiniteError:
            lo = mid
            continue
        if abs(pw - p_max) <= tol * p_max:
            return mid, x, it
        if pw > p_max:
            lo = mid
        else:
            hi, x_hi = mid, x
    raise SolverError(
        f"cell {cell}: bisection did not reach tolerance {tol} in {max_iters} "
        f"iterations; last bracket [{lo:.6e}, {hi:.6e}]",
        cell=cell, context={"bracket": (lo, hi)})


def solve_weighted_cell(h_eff, d_tilde, params, cell, own_rows=None):
    """Solve one cell's weighted leakage/deviation problem.

    Parameters
    ----------
    h_eff : (K, N_c) array
        Effective channel from :func:`effective_channel`.
    d_tilde : (K, K_c) array
        Padded demand of the cell.
    params : SolverParams
    cell : int
    own_rows : slice, optional
        Rows of ``h_eff`` belonging to the cell's own users. Used only for
        the leakage/deviation diagnostics; without it every row counts as
        own (the single-cell problem).

    Returns
    -------
    PrecodingSolution
    """
    h_eff = np.asarray(h_eff, dtype=np.complex128)
    d_tilde = np.asarray(d_tilde, dtype=np.complex128)
    if d_tilde.shape[0] != h_eff.shape[0]:
        raise ValueError(f"d_tilde has {d_tilde.shape[0]} rows, h_eff has {h_eff.shape[0]}")
    theta = params.theta_for(cell)
    p_max = params.p_max_for(cell)
    p_w = params.p_w_for(cell)
    try:
        x = pinv_apply(h_eff, d_tilde)
    except IllConditionedError:
        if p_w is None:
            raise
        x = None
    if p_w is None:
        need = fro_norm_sq(x)
        p_w = p_max if need == 0.0 else min(p_max / need, p_max)
    upper = lambda_upper_bound(h_eff, p_w, p_max)
    iters = 0
    if x is not None and p_w * fro_norm_sq(x) <= p_max * (1 + CLOSED_FORM_SLACK):
        v = np.sqrt(p_w) * x
        lam, branch = 0.0, Branch.CLOSED_FORM
    else:
        hh = h_eff.conj().T
        gram = hh @ h_eff
        gram = 0.5 * (gram + gram.conj().T)
        lam, xr, iters = _ridge_bisection(gram, hh @ d_tilde, p_w, p_max, upper,
                                          params.bisection_rel_tol,
                                          params.max_bisection_iters, cell)
        v = np.sqrt(p_w) * xr
        branch = Branch.RIDGE_BISECTION
    if own_rows is None:
        leak = 0.0
        dev = fro_norm_sq(h_eff @ v - np.sqrt(p_w) * d_tilde)
    else:
        mask = np.ones(h_eff.shape[0], dtype=bool)
        mask[own_rows] = False
        dev = fro_norm_sq(h_eff[own_rows] @ v - np.sqrt(p_w) * d_tilde[own_rows])
        leak = fro_norm_sq(h_eff[mask] @ v) / foreign_scale(theta) ** 2 if mask.any() else 0.0
    return PrecodingSolution(
        cell=cell, precoder=v, lam=float(lam), branch=branch,
        achieved_power=fro_norm_sq(v), leakage=float(leak), deviation=float(dev),
        p_w_used=float(p_w), p_max=p_max,
        kkt_residual=kkt_residual(h_eff, d_tilde, v, lam, p_w),
        lambda_upper=float(upper), iterations=iters)


def solve_single_cell(h, d, p_max, p_w=AUTO, **kw):
    """Deviation minimization for an isolated cell (no leakage term)."""
    return solve_weighted_cell(h, d, SolverParams(theta=0.5, p_max=p_max, p_w=p_w, **kw), 0)


def _solve_cell(channels, demand, params, cell):
    topo = channels.topology
    try:
        h_eff = effective_channel(channels, cell, params.theta_for(cell))
        sol = solve_weighted_cell(h_eff, demand.padded[cell], params, cell,
                                  own_rows=topo.cell_slice(cell))
    except SolverError:
        raise
    except Exception as exc:
        raise SolverError(f"cell {cell}: {exc}", cell=cell) from exc
    leak, dev = cell_leakage_deviation(channels, cell, sol.precoder,
                                       demand.demand[cell], sol.p_w_used)
    return replace(sol, leakage=leak, deviation=dev)


def solve_network(channels, demand, params, executor=None):
    """Solve every cell independently; each uses only its own BS's channels.

    ``executor`` (anything with an order-preserving ``map``) fans the cells
    out; results are identical to the sequential run.
    """
    fn = partial(_solve_cell, channels, demand, params)
    cells = range(channels.topology.num_cells)
    mapper = map if executor is None else executor.map
    return list(mapper(fn, cells))


@dataclass(frozen=True, eq=False)
class ParetoPoint:
    theta: float
    leakage: np.ndarray
    deviation: np.ndarray
    solutions: list


def pareto_sweep(channels, demand, params, theta_grid):
    """Leakage/deviation of the solution at every weight in ``theta_grid``.

    The virtual power is held fixed across the grid so that every point
    refers to the same deviation measure; ``AUTO`` is resolved once at
    ``theta = 1/2``.
    """
    grid = [float(t) for t in theta_grid]
    if any(not 0 < t < 1 for t in grid):
        raise ValueError("theta grid values must lie in (0, 1)")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("theta grid must be sorted ascending")
    if params.auto_power:
        C = channels.topology.num_cells
        p_w = [virtual_power_cell(effective_channel(channels, c, 0.5), demand.padded[c],
                                  params.p_max_for(c)) for c in range(C)]
        params = replace(params, p_w=np.array(p_w))
    out = []
    for t in grid:
        sols = solve_network(channels, demand, replace(params, theta=t))
        out.append(ParetoPoint(theta=t,
                               leakage=np.array([s.leakage for s in sols]),
                               deviation=np.array([s.deviation for s in sols]),
                               solutions=sols))
    return out
