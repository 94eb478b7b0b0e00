"""Reference schemes: network-wide cooperative ZF and per-SP frequency division."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .demand import build_demand
from .errors import DimensionError
from .linalg import fro_norm_sq, pinv_apply
from .metrics import (EvalReport, rates, sinr_all, sinr_from_products,
                      summarize_rates)
from .solver import solve_network


class Scheme(str, Enum):
    COOP_ZF = "COOP_ZF"
    FD_LEAKAGE_MIN = "FD"


@dataclass(frozen=True, eq=False)
class BaselineResult:
    scheme: Scheme
    precoders: object           # (N, K) array for COOP_ZF, list per SP for FD
    eval: object
    bandwidth_share: float
    solutions: list = None      # per SP, per cell solver output (FD only)


def cooperative_zf(channels, p_max, noise_power, true_channels=None):
    """Global ZF over the stacked ``K x N`` channel with a sum-power budget.

    The precoder is designed on ``channels`` and evaluated on
    ``true_channels`` (defaults to the design channels).
    """
    topo = channels.topology
    h = channels.global_matrix()
    K, N = h.shape
    if K > N:
        raise DimensionError(f"cooperative ZF needs K <= N, got K={K}, N={N}")
    total = float(np.sum(np.broadcast_to(np.asarray(p_max, dtype=float), (topo.num_cells,))))
    v = pinv_apply(h, np.eye(K))
    v *= np.sqrt(total / fro_norm_sq(v))
    h_eval = h if true_channels is None else true_channels.global_matrix()
    report = rates(sinr_from_products(h_eval @ v, noise_power), topo.users_per_sp,
                   noise_power=noise_power)
    return BaselineResult(scheme=Scheme.COOP_ZF, precoders=v, eval=report, bandwidth_share=1.0)


def fd_leakage_min(channels, demand_kinds, params, noise_power, true_channels=None,
                   executor=None):
    """Equal-bandwidth split among SPs, each running single-SP coordinated precoding.

    Each SP gets ``1/M`` of the band, so its noise power is ``noise_power/M``
    and its rates are scaled by ``1/M``; every BS still spends its full
    ``p_max`` inside each sub-band.

    Parameters
    ----------
    channels : ChannelSet
        Design channels (possibly corrupted).
    demand_kinds : PrecoderKind or sequence
        SP precoder type(s), as for :func:`build_demand`.
    params : SolverParams
    noise_power : float
        Full-band noise power in watts.
    """
    topo = channels.topology
    M = topo.num_sps
    share = 1.0 / M
    true_channels = channels if true_channels is None else true_channels
    kinds = [demand_kinds] * M if isinstance(demand_kinds, str) else list(demand_kinds)
    rate = np.empty(topo.num_users)
    sinr = np.empty(topo.num_users)
    leak = np.zeros(topo.num_cells)
    dev = np.zeros(topo.num_cells)
    precoders, solutions = [], []
    for m in range(M):
        sub = channels.select_sp(m)
        sub_true = true_channels.select_sp(m)
        demand = build_demand(sub, kinds=kinds[m])
        sols = solve_network(sub, demand, params, executor=executor)
        v = [s.precoder for s in sols]
        s_m = sinr_all(sub_true, v, noise_power * share)
        rows = topo.sp_rows(m)
        sinr[rows] = s_m
        rate[rows] = share * np.log2(1.0 + s_m)
        leak += np.array([s.leakage for s in sols]) / M
        dev += np.array([s.deviation for s in sols]) / M
        precoders.append(v)
        solutions.append(sols)
    r_bar, r_min_bar = summarize_rates(rate, topo.users_per_sp)
    report = EvalReport(sinr=sinr, rate=rate, r_bar=r_bar, r_min_bar=r_min_bar,
                        users_per_sp=topo.users_per_sp, noise_power=noise_power * share,
                        leakage=leak, deviation=dev)
    return BaselineResult(scheme=Scheme.FD_LEAKAGE_MIN, precoders=precoders, eval=report,
                          bandwidth_share=share, solutions=solutions)
