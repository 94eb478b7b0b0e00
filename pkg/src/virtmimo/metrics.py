"""SINR, rate and leakage/deviation evaluation of network-wide precoders."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .linalg import block_diag, fro_norm_sq


@dataclass(frozen=True, eq=False)
class EvalReport:
    sinr: np.ndarray            # (K,) linear, (cell, SP, user) order
    rate: np.ndarray            # (K,) bits/s/Hz
    r_bar: float
    r_min_bar: float
    users_per_sp: np.ndarray    # (C, M)
    noise_power: float = float("nan")
    leakage: np.ndarray = field(default=None)
    deviation: np.ndarray = field(default=None)

    def nested(self, values=None):
        """Split a per-user vector into ``[c][m][k]`` lists."""
        values = self.sinr if values is None else values
        out, i = [], 0
        for row in self.users_per_sp:
            cell = []
            for k in row:
                cell.append(values[i:i + k])
                i += k
            out.append(cell)
        return out


def sinr_from_products(g, noise_power):
    """Per-user SINR from the ``K x K`` matrix of received gains ``H V``.

    Row ``k`` holds what user ``k`` receives from every stream; the diagonal
    is its own stream, everything else is interference.
    """
    p = g.real ** 2 + g.imag ** 2
    signal = np.diag(p).copy()
    interference = p.sum(axis=1) - signal
    return signal / (interference + noise_power)


def _check_precoders(topo, precoders):
    if len(precoders) != topo.num_cells:
        raise DimensionError(f"expected {topo.num_cells} cell precoders, got {len(precoders)}")
    for c, v in enumerate(precoders):
        want = (int(topo.antennas[c]), int(topo.users_per_cell[c]))
        if v.shape != want:
            raise DimensionError(
                f"precoder of cell {c} has shape {v.shape}, expected {want} "
                f"(SP column blocks {topo.users_per_sp[c].tolist()})")


def sinr_all(channels, precoders, noise_power):
    """SINR of every user for per-cell precoders, evaluated on ``channels``.

    Always pass the true channels here, even when the precoders were designed
    from corrupted CSI.
    """
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    topo = channels.topology
    _check_precoders(topo, precoders)
    g = channels.global_matrix() @ block_diag(list(precoders))
    return sinr_from_products(g, noise_power)


def virtual_sinr(demand, p_w, noise_power):
    """SINR seen on the virtual signal ``sqrt(P^w) D x``.

    ``D`` is block diagonal per SP, so only same-SP cross terms appear.
    """
    p_w = np.broadcast_to(np.asarray(p_w, dtype=float), (demand.num_cells,))
    out = []
    for c, d in enumerate(demand.demand):
        out.append(sinr_from_products(np.sqrt(p_w[c]) * d, noise_power))
    return np.concatenate(out)


def summarize_rates(rate, users_per_sp):
    """Mean per-user rate and mean over (cell, SP) of the minimum user rate."""
    bounds = np.concatenate([[0], np.cumsum(np.asarray(users_per_sp).reshape(-1))])
    minima = [rate[bounds[i]:bounds[i + 1]].min() for i in range(len(bounds) - 1)]
    return float(np.mean(rate)), float(np.mean(minima))


def rates(sinr, users_per_sp, noise_power=float("nan"), bandwidth_share=1.0):
    sinr = np.asarray(sinr, dtype=float)
    if np.any(~np.isfinite(sinr)) or np.any(sinr < 0):
        raise ValueError("SINRs must be finite and non-negative")
    rate = bandwidth_share * np.log2(1.0 + sinr)
    r_bar, r_min_bar = summarize_rates(rate, users_per_sp)
    return EvalReport(sinr=sinr, rate=rate, r_bar=r_bar, r_min_bar=r_min_bar,
                      users_per_sp=np.asarray(users_per_sp), noise_power=noise_power)


def cell_leakage_deviation(channels, cell, v, d_cell, p_w):
    """Leakage ``sum_{l != c} ||H_lc V_c||^2`` and deviation ``||H_cc V_c - sqrt(P^w) D_c||^2``."""
    leak = 0.0
    for l in range(channels.topology.num_cells):
        if l != cell:
            leak += fro_norm_sq(channels.block(l, cell) @ v)
    dev = fro_norm_sq(channels.block(cell, cell) @ v - np.sqrt(p_w) * d_cell)
    return leak, dev


def leakage_deviation(channels, precoders, demand, p_w):
    C = channels.topology.num_cells
    p_w = np.broadcast_to(np.asarray(p_w, dtype=float), (C,))
    f = np.empty(C)
    rho = np.empty(C)
    for c in range(C):
        f[c], rho[c] = cell_leakage_deviation(channels, c, precoders[c], demand.demand[c], p_w[c])
    return f, rho
