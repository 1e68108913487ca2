import numpy as np
import pytest

from corrtrack.correlation import (FeatureStack, ResponseMap, circular_correlate,
                                   correlate_arrays, correlate_channels, psr, psr_at,
                                   refine_peak, sidelobe_mask, subgrid_peak,
                                   wrap_displacement)
from corrtrack.errors import ContractViolation
from corrtrack.filter_learning import ConstrainedFilter


def brute_correlate(f, h):
    """r[t] = sum_x f[(x + t) mod N] h[x], by direct enumeration."""
    H, W = f.shape
    hh, hw = h.shape
    r = np.zeros((H, W))
    for ty in range(H):
        for tx in range(W):
            acc = 0.0
            for y in range(hh):
                for x in range(hw):
                    acc += f[(y + ty) % H, (x + tx) % W] * h[y, x]
            r[ty, tx] = acc
    return r


def single(h):
    return ConstrainedFilter(h[None], np.ones(1))


def test_zero_features_give_zero_response():
    resp = circular_correlate(FeatureStack(np.zeros((8, 8))), single(np.ones((8, 8))))
    assert np.all(resp.values == 0.0)


def test_impulse_correlates_to_impulse():
    d = np.zeros((8, 8))
    d[0, 0] = 1.0
    resp = circular_correlate(FeatureStack(d), single(d))
    expected = np.zeros((8, 8))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(resp.values, expected, atol=1e-15)
    assert resp.peak_pos == (0, 0)
    assert resp.peak_value == pytest.approx(1.0)


def test_matches_brute_force_8x8(rng):
    f = rng.standard_normal((8, 8))
    h = rng.standard_normal((8, 8))
    got = circular_correlate(FeatureStack(f), single(h)).values
    want = brute_correlate(f, h)
    assert np.max(np.abs(got - want)) / np.max(np.abs(want)) < 1e-9


def test_smaller_filter_is_zero_padded(rng):
    f = rng.standard_normal((9, 7))
    h = rng.standard_normal((4, 3))
    got = correlate_channels(f, h)[0]
    np.testing.assert_allclose(got, brute_correlate(f, h), rtol=1e-9, atol=1e-12)


def test_channel_fusion_is_weighted_sum(rng):
    f = rng.standard_normal((2, 6, 5))
    h = rng.standard_normal((2, 6, 5))
    w = np.array([0.3, 0.7])
    fused = correlate_arrays(f, h, w)
    per = correlate_channels(f, h)
    np.testing.assert_allclose(fused, 0.3 * per[0] + 0.7 * per[1], atol=1e-12)


def test_linearity_in_features(rng):
    f = rng.standard_normal((6, 6))
    h = rng.standard_normal((6, 6))
    a = circular_correlate(FeatureStack(f), single(h))
    b = circular_correlate(FeatureStack(3.5 * f), single(h))
    np.testing.assert_allclose(b.values, 3.5 * a.values, rtol=1e-12, atol=1e-12)
    assert a.peak_pos == b.peak_pos


def test_channel_count_mismatch():
    f = FeatureStack(np.zeros((2, 4, 4)))
    with pytest.raises(ContractViolation):
        circular_correlate(f, ConstrainedFilter(np.zeros((3, 4, 4)), np.ones(3) / 3))


def test_empty_stack_rejected():
    with pytest.raises(ContractViolation):
        FeatureStack(np.zeros((0, 4, 4)))
    with pytest.raises(ContractViolation):
        FeatureStack(np.zeros((1, 0, 4)))


def test_filter_larger_than_plane_rejected():
    with pytest.raises(ContractViolation):
        correlate_channels(np.zeros((4, 4)), np.zeros((5, 4)))


def test_peak_tie_break_is_row_major():
    v = np.zeros((5, 5))
    v[3, 1] = v[1, 4] = v[1, 2] = 2.0
    assert ResponseMap(v).peak_pos == (1, 2)


# -- PSR -----------------------------------------------------------------------

def test_psr_constant_plane_is_zero():
    assert psr(np.full((11, 11), 3.0), 2) == 0.0


def test_psr_impulse_on_zero_plane_is_zero():
    v = np.zeros((15, 15))
    v[7, 7] = 1.0
    assert psr(v, 2) == 0.0


def test_psr_matches_direct_recomputation():
    v = np.zeros((15, 15))
    v[7, 7] = 1.0
    v[0, 3] = 0.1
    side = [v[r, c] for r in range(15) for c in range(15)
            if not (5 <= r <= 9 and 5 <= c <= 9)]
    mean = sum(side) / len(side)
    std = (sum((s - mean) ** 2 for s in side) / len(side)) ** 0.5
    assert psr(v, 2) == pytest.approx((1.0 - mean) / std, rel=1e-12)


def test_psr_window_wraps():
    mask = sidelobe_mask((10, 10), (0, 0), 1)
    excluded = {(r, c) for r in range(10) for c in range(10) if not mask[r, c]}
    assert excluded == {(r, c) for r in (9, 0, 1) for c in (9, 0, 1)}


def test_psr_window_covering_plane_raises():
    with pytest.raises(ContractViolation):
        psr(np.ones((5, 5)), 2)
    assert ResponseMap(np.ones((5, 5)), 2).psr == 0.0


def test_psr_shift_invariant_and_drops_when_peak_halved(rng):
    v = rng.random((20, 20)) * 0.1
    v[4, 6] = 1.0
    p = psr(v, 5)
    assert psr(v + 7.0, 5) == pytest.approx(p, rel=1e-9)
    halved = v.copy()
    halved[4, 6] = 0.5
    assert p > psr(halved, 5)


def test_psr_at_non_maximum(rng):
    v = rng.random((12, 12))
    pos = (3, 3)
    keep = sidelobe_mask(v.shape, pos, 2)
    side = v[keep]
    assert psr_at(v, pos, 2) == pytest.approx((v[pos] - side.mean()) / side.std())


# -- sub-grid peak ---------------------------------------------------------------

def test_subgrid_symmetric_peak_is_integer():
    v = np.zeros((5, 5))
    v[2, 2] = 1.0
    v[1, 2] = v[3, 2] = 0.5
    v[2, 1] = v[2, 3] = 0.25
    assert subgrid_peak(v) == (2.0, 2.0)


def test_subgrid_closed_form_offset():
    v = np.zeros((5, 5))
    v[2, 1], v[2, 2], v[2, 3] = 0.5, 1.0, 0.9
    row, col = subgrid_peak(v)
    expected = (0.5 - 0.9) / (2 * (0.5 - 2 * 1.0 + 0.9))
    assert row == 2.0
    assert col == pytest.approx(2 + expected, abs=1e-15)


def test_subgrid_flat_plane_returns_first_cell():
    assert subgrid_peak(np.ones((4, 4))) == (0.0, 0.0)


def test_subgrid_neighbours_wrap():
    v = np.zeros((4, 4))
    v[0, 0] = 1.0
    v[3, 0] = 0.8
    v[1, 0] = 0.2
    r, _ = refine_peak(v, (0, 0))
    assert -0.5 <= r < 0


def test_subgrid_needs_3x3():
    with pytest.raises(ContractViolation):
        subgrid_peak(np.ones((2, 5)))


def test_wrap_displacement():
    assert wrap_displacement((0, 9), (10, 10)) == (0, -1)
    assert wrap_displacement((5, 4.9), (10, 10)) == (-5, 4.9)
