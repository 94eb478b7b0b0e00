import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factory import cn, network
from virtmimo.demand import PrecoderKind, build_demand, sp_precoder
from virtmimo.errors import DimensionError
from virtmimo.linalg import fro_norm_sq


@pytest.mark.parametrize("kind", ["MRT", "ZF"])
def test_identity_channel(kind):
    np.testing.assert_allclose(sp_precoder(np.eye(2), kind), np.eye(2) / np.sqrt(2), atol=1e-15)


def test_mrt_is_scaled_conjugate_transpose():
    h = cn(np.random.default_rng(0), 3, 6)
    w = sp_precoder(h, PrecoderKind.MRT)
    assert fro_norm_sq(w) == pytest.approx(1.0, abs=1e-12)
    ratio = w / h.conj().T
    np.testing.assert_allclose(ratio, ratio[0, 0], rtol=1e-12)
    assert ratio[0, 0].real > 0 and abs(ratio[0, 0].imag) < 1e-15


def test_zf_diagonalizes():
    h = cn(np.random.default_rng(1), 2, 8)
    g = h @ sp_precoder(h, "ZF")
    off = g - np.diag(np.diag(g))
    assert np.max(np.abs(off)) < 1e-9
    np.testing.assert_allclose(np.diag(g), g[0, 0], rtol=1e-12)
    assert g[0, 0].real > 0


def test_zf_rejects_more_users_than_antennas():
    with pytest.raises(DimensionError):
        sp_precoder(np.ones((3, 2)), "ZF")


def test_single_sp_full_share():
    ch, dem = network(num_cells=1, antennas=4, num_sps=1, users_per_sp=3)
    h = ch.sp_view(0, 0, 0)
    np.testing.assert_allclose(dem.demand[0], h @ dem.precoders[0][0], rtol=1e-14)


def test_equal_shares_halve_amplitude():
    ch, dem = network(num_cells=1, antennas=4, num_sps=4, users_per_sp=2)
    np.testing.assert_array_equal(dem.alphas, np.full((1, 4), 0.25))
    for m in range(4):
        blk = dem.demand[0][2 * m:2 * m + 2, 2 * m:2 * m + 2]
        np.testing.assert_allclose(blk, 0.5 * ch.sp_view(0, 0, m) @ dem.precoders[0][m],
                                   rtol=1e-14)


def test_padded_rows_match_cell_span():
    ch, dem = network(num_cells=3, antennas=4, num_sps=2, users_per_sp=2)
    topo = ch.topology
    for c in range(3):
        rows = np.flatnonzero(np.any(dem.padded[c] != 0, axis=1))
        span = np.arange(topo.num_users)[topo.cell_slice(c)]
        np.testing.assert_array_equal(rows, span)
        np.testing.assert_array_equal(dem.padded[c][topo.cell_slice(c)], dem.demand[c])


def test_alpha_validation():
    ch, _ = network(num_cells=1, antennas=4, num_sps=2)
    with pytest.raises(ValueError, match="sum to 1"):
        build_demand(ch, alphas=[0.3, 0.3])
    with pytest.raises(ValueError):
        build_demand(ch, alphas=[1.5, -0.5])
    with pytest.raises(ValueError, match="kinds"):
        build_demand(ch, kinds=["MRT"] * 3)


def test_mixed_kinds_per_sp():
    ch, _ = network(num_cells=1, antennas=6, num_sps=2)
    dem = build_demand(ch, kinds=["MRT", "ZF"])
    g = ch.sp_view(0, 0, 1) @ dem.precoders[0][1]
    assert abs(g[0, 1]) < 1e-9


def test_other_sps_and_cells_are_never_read():
    ch, ref = network(num_cells=3, antennas=4, num_sps=2, users_per_sp=2)
    topo = ch.topology
    c, m = 1, 0
    cols = [np.full_like(col, np.nan) for col in ch.columns]
    cols[c][topo.sp_slice(c, m)] = ch.sp_view(c, c, m)
    with np.errstate(invalid="ignore"):
        out = build_demand(dataclasses.replace(ch, columns=tuple(cols)))
    np.testing.assert_array_equal(out.precoders[c][m], ref.precoders[c][m])
    np.testing.assert_array_equal(out.demand[c][:2, :2], ref.demand[c][:2, :2])


def test_cross_cell_blocks_are_never_read_zf():
    ch, ref = network(num_cells=3, antennas=4, num_sps=2, users_per_sp=2, kinds="ZF")
    topo = ch.topology
    cols = [col.copy() for col in ch.columns]
    for l in range(3):
        for c in range(3):
            if l != c:
                cols[l][topo.cell_slice(c)] = np.nan
    out = build_demand(dataclasses.replace(ch, columns=tuple(cols)), kinds="ZF")
    for c in range(3):
        np.testing.assert_array_equal(out.demand[c], ref.demand[c])


@settings(max_examples=30)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(2, 6), st.sampled_from(["MRT", "ZF"]),
       st.integers(0, 2**32 - 1))
def test_demand_invariants(m, k, n, kind, seed):
    if kind == "ZF" and k > n:
        return
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(m), size=3)
    ch, _ = network(num_cells=3, antennas=n, num_sps=m, users_per_sp=k, seed=seed % 1000)
    dem = build_demand(ch, alphas=a, kinds=kind)
    for c in range(3):
        np.testing.assert_allclose(dem.alphas[c].sum(), 1.0, atol=1e-12)
        blocks = []
        for s in range(m):
            assert fro_norm_sq(dem.precoders[c][s]) == pytest.approx(1.0, abs=1e-12)
            blocks.append(np.sqrt(a[c, s]) * ch.sp_view(c, c, s) @ dem.precoders[c][s])
        d = dem.demand[c]
        r = 0
        for b in blocks:
            assert np.max(np.abs(d[r:r + k, r:r + k] - b)) <= 1e-13 * np.max(np.abs(b))
            mask = np.ones(d.shape[1], bool)
            mask[r:r + k] = False
            assert not d[r:r + k, mask].any()
            r += k
