"""Coordinated multi-cell precoding for shared (virtualized) MIMO networks.

An infrastructure provider runs per-cell precoders that serve several
service providers, each of which asks for a virtual precoder built from its
own users' channels. Every cell balances how closely it reproduces those
demands against how much interference it leaks into neighbouring cells.
"""

from .baselines import BaselineResult, Scheme, cooperative_zf, fd_leakage_min
from .channel import (ChannelSet, NetworkTopology, TopologyConfig, build_topology,
                      corrupt_csi, hex_centers, sample_channels)
from .demand import DemandSet, PrecoderKind, build_demand, sp_precoder
from .errors import (ConfigError, DimensionError, IllConditionedError,
                     NotHermitianError, NotPositiveDefiniteError, OracleError,
                     SolverError, VirtMimoError)
from .metrics import (EvalReport, leakage_deviation, rates, sinr_all,
                      summarize_rates, virtual_sinr)
from .solver import (AUTO, Branch, PrecodingSolution, SolverParams, effective_channel,
                     pareto_sweep, solve_network, solve_single_cell, solve_weighted_cell,
                     virtual_power_cell)

__version__ = "0.1.0"
