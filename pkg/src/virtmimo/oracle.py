"""Brute-force reference solvers used to cross-check :mod:`virtmimo.solver`.

Nothing here relies on the closed-form structure of the solution: the
weighted problem is solved by plain projected gradient descent and the
leakage-constrained problem by an exterior quadratic penalty.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OracleError
from .linalg import fro_norm_sq


@dataclass(frozen=True)
class OracleConfig:
    step_size: float = None     # None: 0.9 / (2 ||H^H H||_F)
    max_iters: int = 200_000
    obj_rel_tol: float = 1e-13
    penalty_start: float = 1e3
    penalty_growth: float = 10.0
    penalty_rounds: int = 8
    feasibility_slack: float = 1e-6

    def __post_init__(self):
        if self.step_size is not None and self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.obj_rel_tol <= 0:
            raise ValueError("obj_rel_tol must be positive")


def project_ball(v, p_max):
    """Scale ``v`` onto the Frobenius ball of radius ``sqrt(p_max)`` if outside."""
    n2 = fro_norm_sq(v)
    if n2 > p_max:
        return v * np.sqrt(p_max / n2)
    return v


@dataclass(frozen=True, eq=False)
class WeightedOracleResult:
    precoder: np.ndarray
    objective: float
    iterations: int
    trace: np.ndarray


def oracle_weighted(h_eff, d_tilde, p_w, p_max, cfg=OracleConfig()):
    """Minimize ``||H V - sqrt(p_w) D||_F^2`` over ``||V||_F^2 <= p_max``.

    Iterates ``V <- P(V - step * 2 H^H (H V - sqrt(p_w) D))`` from ``V = 0``
    and stops once an iteration improves the objective by less than
    ``obj_rel_tol`` times ``max(current, initial)`` objective.
    """
    h = np.asarray(h_eff, dtype=np.complex128)
    target = np.sqrt(p_w) * np.asarray(d_tilde, dtype=np.complex128)
    hh = h.conj().T
    gram = hh @ h
    step = cfg.step_size
    if step is None:
        step = 0.9 / (2.0 * np.linalg.norm(gram))
    rhs = hh @ target
    v = np.zeros((h.shape[1], target.shape[1]), dtype=np.complex128)
    f = fro_norm_sq(target)
    f_ref = f
    trace = [f]
    for it in range(1, cfg.max_iters + 1):
        v = project_ball(v - step * 2.0 * (gram @ v - rhs), p_max)
        f_new = fro_norm_sq(h @ v - target)
        trace.append(f_new)
        if abs(f - f_new) <= cfg.obj_rel_tol * max(f_new, f_ref):
            return WeightedOracleResult(v, f_new, it, np.array(trace))
        f = f_new
    raise OracleError(f"projected gradient did not converge in {cfg.max_iters} iterations",
                      trace_tail=trace[-10:])


@dataclass(frozen=True, eq=False)
class LeakageOracleResult:
    feasible: bool
    precoder: np.ndarray
    leakage: float
    deviation: float


INFEASIBLE = "infeasible"


def _real_operator(b, cols):
    """Real matrix acting on ``[Re vec(U); Im vec(U)]`` that computes ``vec(B U)``."""
    big = np.kron(np.eye(cols), b)
    return np.block([[big.real, -big.imag], [big.imag, big.real]])


def _real_vec(m):
    v = m.reshape(-1, order="F")
    return np.concatenate([v.real, v.imag])


def _complex_mat(x, shape):
    n = x.size // 2
    return (x[:n] + 1j * x[n:]).reshape(shape, order="F")


def _newton(fun, x, max_iters):
    """Damped Newton with Armijo backtracking for a smooth convex function."""
    val, grad, hess = fun(x)
    for _ in range(max_iters):
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
        decrement = -grad @ step
        if decrement <= 1e-15 * abs(val) or decrement <= 0:
            return x
        t = 1.0
        while True:
            cand = x + t * step
            cval, cgrad, chess = fun(cand)
            if cval <= val - 0.25 * t * decrement or t < 1e-12:
                break
            t *= 0.5
        if val - cval <= 1e-15 * abs(val):
            # No decrease beyond rounding: converged to working precision.
            return cand if cval < val else x
        x, val, grad, hess = cand, cval, cgrad, chess
    raise OracleError(f"penalty subproblem did not converge in {max_iters} Newton steps",
                      trace_tail=[val])


def oracle_constrained_leakage(channels, demand, cell, delta, p_w, p_max, cfg=OracleConfig()):
    """Minimize cell leakage subject to ``deviation <= delta`` and ``||V||^2 <= p_max``.

    Both constraints enter as squared hinge penalties on their relative
    violation. The penalty weight grows geometrically over a fixed number of
    rounds; each round is a smooth convex problem in the real-stacked
    variables, solved by damped Newton from the previous round's
    point. The problem is declared infeasible when the final
    deviation still exceeds ``delta * (1 + feasibility_slack)``.
    """
    topo = channels.topology
    if delta <= 0:
        raise ValueError("delta must be positive")
    own = channels.block(cell, cell)
    foreign = [channels.block(l, cell) for l in range(topo.num_cells) if l != cell]
    n_ant = own.shape[1]
    a = np.vstack(foreign) if foreign else np.zeros((0, n_ant), dtype=np.complex128)
    target = np.sqrt(p_w) * demand.demand[cell]
    shape = (n_ant, target.shape[1])

    # Variables are U = V / sqrt(p_max), so the power constraint is ||U||^2 <= 1;
    # leakage is normalized by its largest possible value on that ball.
    sp = np.sqrt(p_max)
    a_r = _real_operator(a * sp, shape[1])
    b_r = _real_operator(own * sp, shape[1])
    t_r = _real_vec(target)
    f_scale = max(fro_norm_sq(a) * p_max, np.finfo(float).tiny)
    constrained = np.isfinite(delta)
    q_f = 2.0 * (a_r.T @ a_r) / f_scale
    q_d = 2.0 * (b_r.T @ b_r) / delta if constrained else None
    eye = np.eye(a_r.shape[1])

    def _parts(x, mu):
        val = 0.5 * x @ q_f @ x
        grad = q_f @ x
        hess = q_f.copy()
        terms = [(np.sum(x * x) - 1.0, 2.0 * x, 2.0 * eye)]
        if constrained:
            res = b_r @ x - t_r
            grad_d = q_d @ x - 2.0 * (b_r.T @ t_r) / delta
            terms.append((np.sum(res * res) / delta - 1.0, grad_d, q_d))
        for g, dg, d2g in terms:
            if g > 0:
                val += mu * g * g
                grad += 2.0 * mu * g * dg
                hess += 2.0 * mu * (np.outer(dg, dg) + g * d2g)
        return val, grad, hess

    x = np.zeros(a_r.shape[1])
    mu = cfg.penalty_start
    for _ in range(cfg.penalty_rounds):
        x = _newton(lambda z, m=mu: _parts(z, m), x, cfg.max_iters)
        mu *= cfg.penalty_growth
    v = project_ball(sp * _complex_mat(x, shape), p_max)
    leak = fro_norm_sq(a @ v)
    dev = fro_norm_sq(own @ v - target)
    feasible = (not constrained) or dev <= delta * (1.0 + cfg.feasibility_slack)
    return LeakageOracleResult(feasible=feasible, precoder=v, leakage=leak, deviation=dev)
