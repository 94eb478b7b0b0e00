"""Hexagonal multi-cell layout and Rayleigh/log-normal channel generation.

Users are ordered (cell, SP, user) lexicographically everywhere. A channel
set keeps, for each BS ``c``, the ``K x N_c`` matrix of every user's channel
from that BS; any per-cell or per-SP block is a row slice of it.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as _rng
from .errors import DimensionError

SUPPORTED_CELL_COUNTS = (1, 3, 7, 19)

# Path loss in dB at 1 km and slope per decade of distance.
PATHLOSS_INTERCEPT_DB = -31.54
PATHLOSS_SLOPE_DB = 33.0

# Axial directions of a flat-top hex grid, starting at 30 degrees.
_HEX_DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


@dataclass(frozen=True)
class TopologyConfig:
    num_cells: int = 7
    cell_radius: float = 500.0
    antennas: object = 32
    num_sps: int = 4
    users_per_sp: object = 2
    exclusion_radius: float = 35.0

    def __post_init__(self):
        if self.num_cells < 1 or self.num_sps < 1:
            raise ValueError("num_cells and num_sps must be >= 1")
        if self.cell_radius <= 0:
            raise ValueError("cell_radius must be positive")
        if not 0 <= self.exclusion_radius < self.cell_radius * np.sqrt(3) / 2:
            raise ValueError("exclusion_radius must lie inside the hexagon's inner radius")
        if np.any(self.antenna_counts() < 1):
            raise ValueError("every cell needs at least one antenna")
        if np.any(self.user_counts() < 1):
            raise ValueError("every (cell, SP) pair needs at least one user")

    def antenna_counts(self):
        n = np.broadcast_to(np.asarray(self.antennas, dtype=int), (self.num_cells,))
        return n.copy()

    def user_counts(self):
        k = np.asarray(self.users_per_sp, dtype=int)
        return np.broadcast_to(k, (self.num_cells, self.num_sps)).copy()


def hex_centers(num_cells, cell_radius):
    """BS positions of a flat-top hex cluster (center first, then rings)."""
    if num_cells not in SUPPORTED_CELL_COUNTS:
        raise ValueError(
            f"{num_cells} cells is not a supported hexagonal cluster; "
            f"supported values are {SUPPORTED_CELL_COUNTS}")
    if num_cells == 3:
        axial = [(0, 0), _HEX_DIRS[0], _HEX_DIRS[1]]
    else:
        rings = {1: 0, 7: 1, 19: 2}[num_cells]
        axial = [(q, r) for q in range(-rings, rings + 1)
                 for r in range(-rings, rings + 1)
                 if max(abs(q), abs(r), abs(q + r)) <= rings]

        def order(qr):
            q, r = qr
            angle = np.degrees(np.arctan2(np.sqrt(3.0) * (r + q / 2.0), 1.5 * q))
            return max(abs(q), abs(r), abs(q + r)), round((angle - 30.0) % 360.0, 6)

        axial.sort(key=order)
    axial = np.array(axial[:num_cells], dtype=float)
    x = 1.5 * cell_radius * axial[:, 0]
    y = np.sqrt(3.0) * cell_radius * (axial[:, 1] + axial[:, 0] / 2.0)
    return np.column_stack([x, y])


def in_hexagon(points, cell_radius):
    """Membership test for a flat-top hexagon centred at the origin."""
    p = np.atleast_2d(points)
    ax, ay = np.abs(p[:, 0]), np.abs(p[:, 1])
    s3 = np.sqrt(3.0)
    eps = 1e-9 * cell_radius
    return (ay <= s3 / 2 * cell_radius + eps) & (s3 * ax + ay <= s3 * cell_radius + eps)


def _sample_in_hexagon(gen, count, cell_radius, exclusion_radius):
    out = np.empty((0, 2))
    half_h = np.sqrt(3.0) / 2 * cell_radius
    while len(out) < count:
        n = 2 * (count - len(out)) + 4
        cand = np.column_stack([gen.uniform(-cell_radius, cell_radius, n),
                                gen.uniform(-half_h, half_h, n)])
        ok = in_hexagon(cand, cell_radius) & (np.hypot(cand[:, 0], cand[:, 1]) >= exclusion_radius)
        out = np.vstack([out, cand[ok]])
    return out[:count]


@dataclass(frozen=True, eq=False)
class NetworkTopology:
    cell_radius: float
    exclusion_radius: float
    antennas: np.ndarray        # (C,)
    users_per_sp: np.ndarray    # (C, M)
    bs_positions: np.ndarray    # (C, 2) meters
    user_positions: np.ndarray  # (K, 2) meters
    _offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        counts = self.users_per_sp.reshape(-1)
        object.__setattr__(self, "_offsets", np.concatenate([[0], np.cumsum(counts)]))
        if self.user_positions.shape != (int(counts.sum()), 2):
            raise DimensionError(
                f"expected {counts.sum()} user positions, got {self.user_positions.shape}")

    @property
    def num_cells(self):
        return self.users_per_sp.shape[0]

    @property
    def num_sps(self):
        return self.users_per_sp.shape[1]

    @property
    def users_per_cell(self):
        return self.users_per_sp.sum(axis=1)

    @property
    def num_users(self):
        return int(self.users_per_sp.sum())

    @property
    def num_antennas(self):
        return int(self.antennas.sum())

    def sp_slice(self, cell, sp):
        i = cell * self.num_sps + sp
        return slice(int(self._offsets[i]), int(self._offsets[i + 1]))

    def cell_slice(self, cell):
        i = cell * self.num_sps
        return slice(int(self._offsets[i]), int(self._offsets[i + self.num_sps]))

    def user_cell(self):
        return np.repeat(np.arange(self.num_cells), self.users_per_cell)

    def user_sp(self):
        return np.repeat(np.tile(np.arange(self.num_sps), self.num_cells),
                         self.users_per_sp.reshape(-1))

    def distances(self):
        """(K, C) user-to-BS distances in meters."""
        diff = self.user_positions[:, None, :] - self.bs_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    def select_sp(self, sp):
        """Sub-topology holding only SP ``sp``'s users (as a single SP)."""
        return replace(self, users_per_sp=self.users_per_sp[:, [sp]].copy(),
                       user_positions=self.user_positions[self.sp_rows(sp)])

    def sp_rows(self, sp):
        return np.concatenate([np.arange(self.num_users)[self.sp_slice(c, sp)]
                               for c in range(self.num_cells)])


def build_topology(config, seed):
    """Place BSs on a hex grid and drop users uniformly in their cells."""
    bs = hex_centers(config.num_cells, config.cell_radius)
    k = config.user_counts()
    gen = _rng.stream(seed, "positions")
    pos = []
    for c in range(config.num_cells):
        local = _sample_in_hexagon(gen, int(k[c].sum()), config.cell_radius,
                                   config.exclusion_radius)
        pos.append(local + bs[c])
    return NetworkTopology(cell_radius=float(config.cell_radius),
                           exclusion_radius=float(config.exclusion_radius),
                           antennas=config.antenna_counts(), users_per_sp=k,
                           bs_positions=bs, user_positions=np.vstack(pos))


def pathloss_db(distance_km, shadowing_db=0.0):
    """Large-scale gain in dB: intercept - slope*log10(d_km) - shadowing."""
    return PATHLOSS_INTERCEPT_DB - PATHLOSS_SLOPE_DB * np.log10(distance_km) - shadowing_db


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db) / 10.0)


def complex_normal(gen, shape, variance=1.0):
    """Circularly-symmetric complex Gaussian draws with given variance."""
    z = gen.standard_normal(tuple(shape) + (2,))
    return np.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """All user-to-BS channels of one drop.

    ``columns[c]`` is the ``K x N_c`` channel from BS ``c`` to every user;
    ``gains[k, c]`` the linear large-scale gain of that link.
    """
    topology: NetworkTopology
    columns: tuple
    gains: np.ndarray

    def block(self, l, c):
        """Channel from BS ``c`` to the users of cell ``l`` (K_l x N_c)."""
        return self.columns[c][self.topology.cell_slice(l)]

    def sp_view(self, c, l, m):
        """Channel from BS ``l`` to SP ``m``'s users in cell ``c``."""
        return self.columns[l][self.topology.sp_slice(c, m)]

    def global_matrix(self):
        return np.hstack(self.columns)

    def select_sp(self, sp):
        rows = self.topology.sp_rows(sp)
        return ChannelSet(topology=self.topology.select_sp(sp),
                          columns=tuple(col[rows] for col in self.columns),
                          gains=self.gains[rows])


def sample_channels(topo, seed, shadowing_std_db=8.0):
    """Draw ``h = sqrt(beta) g`` for every user/BS link of ``topo``."""
    d_km = topo.distances() / 1000.0
    psi = _rng.stream(seed, "shadowing").normal(0.0, shadowing_std_db, d_km.shape)
    gains = db_to_linear(pathloss_db(d_km, psi))
    fading = _rng.stream(seed, "fading")
    cols = []
    for c in range(topo.num_cells):
        g = complex_normal(fading, (topo.num_users, int(topo.antennas[c])))
        cols.append(np.sqrt(gains[:, c])[:, None] * g)
    return ChannelSet(topology=topo, columns=tuple(cols), gains=gains)


def corrupt_csi(true_channels, e_h, seed):
    """Add estimation error ``CN(0, e_h^2 beta I)`` to every channel row."""
    if e_h < 0:
        raise ValueError(f"e_h must be >= 0, got {e_h}")
    if e_h == 0:
        return replace(true_channels, columns=tuple(c.copy() for c in true_channels.columns))
    gen = _rng.stream(seed, "csi_error")
    cols = []
    for c, col in enumerate(true_channels.columns):
        err = complex_normal(gen, col.shape)
        cols.append(col + e_h * np.sqrt(true_channels.gains[:, c])[:, None] * err)
    return replace(true_channels, columns=tuple(cols))
