import dataclasses

import numpy as np
import pytest

from factory import channel_set, cn, network
from virtmimo.baselines import Scheme, cooperative_zf, fd_leakage_min
from virtmimo.demand import build_demand
from virtmimo.errors import DimensionError
from virtmimo.linalg import fro_norm_sq
from virtmimo.metrics import rates, sinr_all
from virtmimo.solver import SolverParams, solve_network

P_MAX = 1.9952623149688795
NOISE = 5.971607558302455e-16


def test_coop_zf_identity_channel():
    ch = channel_set([np.eye(2)], [[2]])
    res = cooperative_zf(ch, 2.0, 0.01)
    np.testing.assert_allclose(res.precoders, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(res.eval.sinr, 100.0, rtol=1e-12)
    assert res.scheme is Scheme.COOP_ZF and res.bandwidth_share == 1.0


def test_coop_zf_diagonalizes_and_normalizes():
    rng = np.random.default_rng(0)
    ch = channel_set([cn(rng, 6, 4), cn(rng, 6, 4)], [[1, 2], [2, 1]])
    res = cooperative_zf(ch, [1.0, 3.0], 1.0)
    g = ch.global_matrix() @ res.precoders
    assert np.max(np.abs(g - np.diag(np.diag(g)))) <= 1e-9
    assert fro_norm_sq(res.precoders) == pytest.approx(4.0, rel=1e-9)
    # Equal effective gains, so every user sees the same SINR.
    np.testing.assert_allclose(res.eval.sinr, res.eval.sinr[0], rtol=1e-9)


def test_coop_zf_zero_interference_at_physical_scale():
    ch, _ = network(num_cells=3, antennas=8, num_sps=2, users_per_sp=2, seed=4)
    res = cooperative_zf(ch, P_MAX, NOISE)
    g = np.abs(ch.global_matrix() @ res.precoders) ** 2
    assert (g.sum(axis=1) - np.diag(g)).max() <= 1e-9 * NOISE


def test_coop_zf_needs_enough_antennas():
    ch, _ = network(num_cells=3, antennas=2, num_sps=2, users_per_sp=2)
    with pytest.raises(DimensionError, match="K <= N"):
        cooperative_zf(ch, P_MAX, NOISE)


def test_coop_zf_evaluates_on_true_channels():
    ch, _ = network(num_cells=3, antennas=8, seed=1)
    noisy = dataclasses.replace(ch, columns=tuple(1.01 * c for c in ch.columns))
    a = cooperative_zf(noisy, P_MAX, NOISE, true_channels=ch)
    g = ch.global_matrix() @ a.precoders
    p = np.abs(g) ** 2
    want = np.diag(p) / (p.sum(axis=1) - np.diag(p) + NOISE)
    np.testing.assert_allclose(a.eval.sinr, want, rtol=1e-9)


@pytest.mark.parametrize("p_w", ["auto", 1e-3])
def test_fd_single_sp_equals_proposed(p_w):
    ch, dem = network(num_cells=3, antennas=4, num_sps=1, users_per_sp=3, seed=2)
    params = SolverParams(p_max=P_MAX, p_w=p_w)
    fd = fd_leakage_min(ch, "MRT", params, NOISE)
    sols = solve_network(ch, dem, params)
    ref = rates(sinr_all(ch, [s.precoder for s in sols], NOISE), ch.topology.users_per_sp)
    np.testing.assert_array_equal(fd.eval.rate, ref.rate)
    assert fd.bandwidth_share == 1.0
    assert (fd.eval.r_bar, fd.eval.r_min_bar) == (ref.r_bar, ref.r_min_bar)


@pytest.mark.parametrize("m", [2, 4])
def test_fd_bandwidth_accounting(m):
    ch, _ = network(num_cells=3, antennas=4, num_sps=m, users_per_sp=1, seed=3)
    fd = fd_leakage_min(ch, "MRT", SolverParams(p_max=P_MAX), NOISE)
    assert fd.bandwidth_share == 1.0 / m
    assert fd.eval.noise_power == NOISE / m
    np.testing.assert_allclose(fd.eval.rate, np.log2(1 + fd.eval.sinr) / m, rtol=1e-15)


def test_fd_sp_is_isolated_from_other_sps():
    ch, _ = network(num_cells=3, antennas=4, num_sps=2, users_per_sp=2, seed=5)
    params = SolverParams(p_max=P_MAX, p_w=P_MAX)
    ref = fd_leakage_min(ch, ["MRT", "ZF"], params, NOISE)
    rows = ch.topology.sp_rows(1)
    rng = np.random.default_rng(0)
    cols = []
    for col in ch.columns:
        col = col.copy()
        col[rows] = 1e-3 * cn(rng, len(rows), col.shape[1])
        cols.append(col)
    other = fd_leakage_min(dataclasses.replace(ch, columns=tuple(cols)), ["MRT", "MRT"],
                           params, NOISE)
    keep = ch.topology.sp_rows(0)
    np.testing.assert_array_equal(other.eval.sinr[keep], ref.eval.sinr[keep])
    for a, b in zip(ref.precoders[0], other.precoders[0]):
        np.testing.assert_array_equal(a, b)


def test_fd_sub_networks_have_no_inter_sp_terms():
    ch, _ = network(num_cells=3, antennas=4, num_sps=2, users_per_sp=2, seed=6)
    fd = fd_leakage_min(ch, "MRT", SolverParams(p_max=P_MAX), NOISE)
    for m in range(2):
        sub = ch.select_sp(m)
        s = sinr_all(sub, fd.precoders[m], NOISE / 2)
        np.testing.assert_array_equal(fd.eval.sinr[ch.topology.sp_rows(m)], s)
        dem = build_demand(sub)
        assert dem.alphas.shape == (3, 1) and np.all(dem.alphas == 1.0)
