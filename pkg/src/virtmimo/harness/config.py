"""Experiment configuration: YAML file -> validated, watt-domain dataclasses.

A config has one block per concern::

    topology:    {num_cells, cell_radius_m, antennas, num_sps, users_per_sp}
    physics:     {p_max_dbm, noise_psd_dbm_hz, noise_figure_db, bandwidth_hz,
                  shadowing_std_db, exclusion_radius_m, csi_error}
    solver:      {theta, p_w, bisection_rel_tol, max_bisection_iters}
    sweep:       {axis, values}
    monte_carlo: {num_drops, master_seed}
    schemes:     [PROPOSED, VIRTUAL_ONLY, COOP_ZF, FD]
    sp_precoder: MRT | ZF | [one per SP]

``solver.theta`` and ``solver.p_w`` may be lists, in which case every grid
point gets its own output row. ``p_w`` is ``auto`` or a power in dBm.
"""

from dataclasses import asdict, dataclass, field, replace

import numpy as np
import yaml

from ..demand import PrecoderKind
from ..errors import ConfigError
from ..rng import derive_seed
from ..units import dbm_to_watt, noise_power_dbm, noise_power_watt

SWEEP_AXES = ("P_W", "THETA", "N_C", "K_C", "E_H")
SCHEMES = ("PROPOSED", "VIRTUAL_ONLY", "COOP_ZF", "FD")
AUTO = "auto"


@dataclass(frozen=True)
class TopologyBlock:
    num_cells: int = 7
    cell_radius_m: float = 500.0
    antennas: int = 32
    num_sps: int = 4
    users_per_sp: int = 2


@dataclass(frozen=True)
class PhysicsBlock:
    p_max_dbm: float = 33.0
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 10.0
    bandwidth_hz: float = 15e3
    shadowing_std_db: float = 8.0
    exclusion_radius_m: float = 35.0
    csi_error: float = 0.0

    @property
    def p_max_watt(self):
        return float(dbm_to_watt(self.p_max_dbm))

    @property
    def noise_power_dbm(self):
        return float(noise_power_dbm(self.noise_psd_dbm_hz, self.bandwidth_hz,
                                     self.noise_figure_db))

    @property
    def noise_power_watt(self):
        return noise_power_watt(self.noise_psd_dbm_hz, self.bandwidth_hz, self.noise_figure_db)


@dataclass(frozen=True)
class SolverBlock:
    theta: object = 0.5         # float or tuple of floats
    p_w: object = AUTO          # "auto", dBm float, or tuple of those
    bisection_rel_tol: float = 1e-9
    max_bisection_iters: int = 200

    @property
    def theta_grid(self):
        return tuple(self.theta) if isinstance(self.theta, tuple) else (self.theta,)

    @property
    def p_w_grid(self):
        return tuple(self.p_w) if isinstance(self.p_w, tuple) else (self.p_w,)


@dataclass(frozen=True)
class SweepBlock:
    axis: str = "P_W"
    values: tuple = (AUTO,)


@dataclass(frozen=True)
class MonteCarloBlock:
    num_drops: int = 1
    master_seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    topology: TopologyBlock = field(default_factory=TopologyBlock)
    physics: PhysicsBlock = field(default_factory=PhysicsBlock)
    solver: SolverBlock = field(default_factory=SolverBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    monte_carlo: MonteCarloBlock = field(default_factory=MonteCarloBlock)
    schemes: tuple = ("PROPOSED",)
    sp_precoder: object = "MRT"  # str or tuple per SP

    def precoder_kinds(self, num_sps=None):
        m = self.topology.num_sps if num_sps is None else num_sps
        if isinstance(self.sp_precoder, tuple):
            return [PrecoderKind(k) for k in self.sp_precoder]
        return [PrecoderKind(self.sp_precoder)] * m

    def drop_seeds(self):
        mc = self.monte_carlo
        return [derive_seed(mc.master_seed, d) for d in range(mc.num_drops)]

    def to_dict(self):
        out = asdict(self)
        out["schemes"] = list(self.schemes)
        return out


_BLOCKS = {"topology": TopologyBlock, "physics": PhysicsBlock, "solver": SolverBlock,
           "sweep": SweepBlock, "monte_carlo": MonteCarloBlock}


def _as_tuple(v):
    return tuple(v) if isinstance(v, (list, tuple)) else v


def _number(name, v, kind=float):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", field=name)
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(f"expected an integer, got {v!r}", field=name)
        return int(v)
    if not np.isfinite(v):
        raise ConfigError(f"must be finite, got {v!r}", field=name)
    return float(v)


def _positive(name, v, kind=float):
    v = _number(name, v, kind)
    if v <= 0:
        raise ConfigError(f"must be positive, got {v}", field=name)
    return v


def _theta(name, v):
    v = _number(name, v)
    if not 0.0 < v < 1.0:
        raise ConfigError(f"theta must lie in the open interval (0, 1), got {v}", field=name)
    return v


def _p_w(name, v, p_max_dbm):
    if isinstance(v, str):
        if v.lower() != AUTO:
            raise ConfigError(f"expected 'auto' or a dBm value, got {v!r}", field=name)
        return AUTO
    v = _number(name, v)
    if v > p_max_dbm + 1e-9:
        raise ConfigError(f"{v} dBm exceeds p_max_dbm={p_max_dbm}", field=name)
    return v


def _validate(cfg):
    t, ph, so, sw, mc = cfg.topology, cfg.physics, cfg.solver, cfg.sweep, cfg.monte_carlo
    topo = TopologyBlock(
        num_cells=_positive("topology.num_cells", t.num_cells, int),
        cell_radius_m=_positive("topology.cell_radius_m", t.cell_radius_m),
        antennas=_positive("topology.antennas", t.antennas, int),
        num_sps=_positive("topology.num_sps", t.num_sps, int),
        users_per_sp=_positive("topology.users_per_sp", t.users_per_sp, int))
    if topo.num_cells not in (1, 3, 7, 19):
        raise ConfigError("supported cell counts are 1, 3, 7 and 19", field="topology.num_cells")
    phys = PhysicsBlock(
        p_max_dbm=_number("physics.p_max_dbm", ph.p_max_dbm),
        noise_psd_dbm_hz=_number("physics.noise_psd_dbm_hz", ph.noise_psd_dbm_hz),
        noise_figure_db=_number("physics.noise_figure_db", ph.noise_figure_db),
        bandwidth_hz=_positive("physics.bandwidth_hz", ph.bandwidth_hz),
        shadowing_std_db=_number("physics.shadowing_std_db", ph.shadowing_std_db),
        exclusion_radius_m=_number("physics.exclusion_radius_m", ph.exclusion_radius_m),
        csi_error=_number("physics.csi_error", ph.csi_error))
    if phys.shadowing_std_db < 0:
        raise ConfigError("must be non-negative", field="physics.shadowing_std_db")
    if phys.csi_error < 0:
        raise ConfigError("must be non-negative", field="physics.csi_error")
    if not 0 <= phys.exclusion_radius_m < topo.cell_radius_m * np.sqrt(3) / 2:
        raise ConfigError("must be non-negative and inside the cell",
                          field="physics.exclusion_radius_m")

    def grid(name, v, check):
        if isinstance(v, tuple):
            if not v:
                raise ConfigError("grid may not be empty", field=name)
            return tuple(check(f"{name}[{i}]", x) for i, x in enumerate(v))
        return check(name, v)

    solver = SolverBlock(
        theta=grid("solver.theta", so.theta, _theta),
        p_w=grid("solver.p_w", so.p_w, lambda n, x: _p_w(n, x, phys.p_max_dbm)),
        bisection_rel_tol=_positive("solver.bisection_rel_tol", so.bisection_rel_tol),
        max_bisection_iters=_positive("solver.max_bisection_iters", so.max_bisection_iters, int))

    if sw.axis is None:
        raise ConfigError("a sweep axis is required, one of " + ", ".join(SWEEP_AXES),
                          field="sweep.axis")
    axis = str(sw.axis).upper()
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown axis {sw.axis!r}; expected one of {', '.join(SWEEP_AXES)}",
                          field="sweep.axis")
    values = sw.values if isinstance(sw.values, tuple) else (sw.values,)
    if not values or values == (None,):
        raise ConfigError("at least one sweep value is required", field="sweep.values")
    checks = {
        "P_W": lambda n, x: _p_w(n, x, phys.p_max_dbm),
        "THETA": _theta,
        "N_C": lambda n, x: _positive(n, x, int),
        "K_C": lambda n, x: _positive(n, x, int),
        "E_H": lambda n, x: _non_negative(n, x),
    }
    values = tuple(checks[axis](f"sweep.values[{i}]", v) for i, v in enumerate(values))
    sweep = SweepBlock(axis=axis, values=values)

    monte = MonteCarloBlock(num_drops=_positive("monte_carlo.num_drops", mc.num_drops, int),
                            master_seed=_number("monte_carlo.master_seed", mc.master_seed, int))
    if monte.master_seed < 0:
        raise ConfigError("must be non-negative", field="monte_carlo.master_seed")

    schemes = cfg.schemes if isinstance(cfg.schemes, tuple) else (cfg.schemes,)
    schemes = tuple(str(s).upper() for s in schemes)
    bad = [s for s in schemes if s not in SCHEMES]
    if bad or not schemes:
        raise ConfigError(f"unknown scheme(s) {bad}; expected a subset of {list(SCHEMES)}",
                          field="schemes")
    if len(set(schemes)) != len(schemes):
        raise ConfigError("duplicate scheme", field="schemes")
    # Keep a canonical order so the CSV row order does not depend on how the list was typed.
    schemes = tuple(s for s in SCHEMES if s in schemes)

    kinds = cfg.sp_precoder
    try:
        if isinstance(kinds, tuple):
            if len(kinds) != topo.num_sps:
                raise ConfigError(f"needs one entry per SP ({topo.num_sps}), got {len(kinds)}",
                                  field="sp_precoder")
            kinds = tuple(PrecoderKind(str(k).upper()).value for k in kinds)
        else:
            kinds = PrecoderKind(str(kinds).upper()).value
    except ValueError:
        raise ConfigError(f"unknown precoder kind in {cfg.sp_precoder!r}; use MRT or ZF",
                          field="sp_precoder") from None
    return ExperimentConfig(topology=topo, physics=phys, solver=solver, sweep=sweep,
                            monte_carlo=monte, schemes=schemes, sp_precoder=kinds)


def _non_negative(name, v):
    v = _number(name, v)
    if v < 0:
        raise ConfigError(f"must be non-negative, got {v}", field=name)
    return v


def from_dict(data):
    """Build and validate an :class:`ExperimentConfig` from nested dicts."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", field="<root>")
    known = set(_BLOCKS) | {"schemes", "sp_precoder"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown}", field=unknown[0])
    kw = {}
    for name, cls in _BLOCKS.items():
        block = data.get(name, {}) or {}
        if not isinstance(block, dict):
            raise ConfigError("must be a mapping", field=name)
        fields = set(cls.__dataclass_fields__)
        extra = sorted(set(block) - fields)
        if extra:
            raise ConfigError(f"unknown key(s) {extra}; known: {sorted(fields)}",
                              field=f"{name}.{extra[0]}")
        kw[name] = cls(**{k: _as_tuple(v) for k, v in block.items()})
    if "axis" not in (data.get("sweep") or {}):
        kw["sweep"] = replace(kw["sweep"], axis=None)
    if "schemes" in data:
        kw["schemes"] = _as_tuple(data["schemes"])
    if "sp_precoder" in data:
        kw["sp_precoder"] = _as_tuple(data["sp_precoder"])
    return _validate(ExperimentConfig(**kw))


def _set_path(data, dotted, value):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if node.get(k) is None:
            node[k] = {}
        nxt = node[k]
        if not isinstance(nxt, dict):
            raise ConfigError(f"cannot descend into non-mapping {k!r}", field=dotted)
        node = nxt
    node[keys[-1]] = value


def parse_override(text):
    """Split ``key.path=value``; the value is parsed as YAML (so ``[1, 2]`` is a list)."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value", field=text)
    key, raw = text.split("=", 1)
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override value {raw!r}: {exc}", field=key) from None
    return key.strip(), value


def load_config(path, overrides=()):
    """Read a YAML config, apply ``key=value`` overrides, and validate.

    Every validation failure raises :class:`ConfigError` whose message
    starts with the offending dotted field (or the YAML line for syntax
    errors).
    """
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else str(path)
        raise ConfigError(f"YAML syntax error: {exc.problem}", field=where) from None
    except OSError as exc:
        raise ConfigError(str(exc), field=str(path)) from None
    data = {} if data is None else data
    for item in overrides:
        key, value = (item if isinstance(item, tuple) else parse_override(item))
        _set_path(data, key, value)
    return from_dict(data)
