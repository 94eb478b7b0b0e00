"""SP-side virtual precoders and the per-cell demand matrices built from them."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError
from .linalg import block_diag, fro_norm_sq, pinv_apply

SUM_TOL = 1e-12


class PrecoderKind(str, Enum):
    MRT = "MRT"
    ZF = "ZF"


def sp_precoder(h_local, kind):
    """Unit-Frobenius-norm MRT or ZF precoder for one SP's local channel.

    A single normalization scalar is applied to the whole matrix.
    """
    h = np.asarray(h_local, dtype=np.complex128)
    kind = PrecoderKind(kind)
    if kind is PrecoderKind.MRT:
        w = h.conj().T
    else:
        k, n = h.shape
        if k > n:
            raise DimensionError(
                f"ZF needs users <= antennas, got {k} users and {n} antennas")
        w = pinv_apply(h, np.eye(k))
    return w / np.sqrt(fro_norm_sq(w))


@dataclass(frozen=True, eq=False)
class DemandSet:
    """Virtual demand of every cell.

    ``precoders[c][m]`` is SP ``m``'s normalized precoder in cell ``c``,
    ``demand[c]`` the ``K_c x K_c`` block-diagonal matrix ``D_c`` and
    ``padded[c]`` the ``K x K_c`` matrix with ``D_c`` in cell ``c``'s rows.
    """
    precoders: tuple
    alphas: np.ndarray
    demand: tuple
    padded: tuple

    @property
    def num_cells(self):
        return len(self.demand)


def _resolve_alphas(alphas, num_cells, num_sps):
    if alphas is None:
        return np.full((num_cells, num_sps), 1.0 / num_sps)
    a = np.broadcast_to(np.asarray(alphas, dtype=float), (num_cells, num_sps)).copy()
    if np.any(a < 0) or np.any(a > 1):
        raise ValueError("power shares must lie in [0, 1]")
    bad = np.abs(a.sum(axis=1) - 1.0) > SUM_TOL
    if np.any(bad):
        raise ValueError(f"power shares of cells {np.flatnonzero(bad).tolist()} do not sum to 1")
    return a


def build_demand(channels, alphas=None, kinds=PrecoderKind.MRT):
    """Assemble every cell's demand from SP-local channels only.

    Parameters
    ----------
    channels : ChannelSet
        Channels as known to the SPs (possibly CSI-corrupted).
    alphas : array_like, optional
        ``(C, M)`` virtual power shares; uniform ``1/M`` when omitted.
    kinds : PrecoderKind or sequence of PrecoderKind
        Precoder type, either shared or one per SP.
    """
    topo = channels.topology
    C, M, K = topo.num_cells, topo.num_sps, topo.num_users
    a = _resolve_alphas(alphas, C, M)
    if isinstance(kinds, (str, PrecoderKind)):
        kinds = [kinds] * M
    if len(kinds) != M:
        raise ValueError(f"need {M} precoder kinds, got {len(kinds)}")
    precoders, demand, padded = [], [], []
    for c in range(C):
        ws, blocks = [], []
        for m in range(M):
            h = channels.sp_view(c, c, m)
            w = sp_precoder(h, kinds[m])
            ws.append(w)
            blocks.append(np.sqrt(a[c, m]) * (h @ w))
        d = block_diag(blocks)
        pad = np.zeros((K, d.shape[1]), dtype=np.complex128)
        pad[topo.cell_slice(c)] = d
        precoders.append(tuple(ws))
        demand.append(d)
        padded.append(pad)
    return DemandSet(precoders=tuple(precoders), alphas=a,
                     demand=tuple(demand), padded=tuple(padded))
