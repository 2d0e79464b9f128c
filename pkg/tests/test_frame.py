import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otsm.frame import (
    FrameParams,
    QamConstellation,
    build_grid,
    extract_data,
    nearest_symbol,
    pilot_grid,
    qam_demap_hard,
    qam_map,
)


def test_defaults_follow_delay_spread():
    p = FrameParams()
    assert p.l_zp == 2 * p.l_max + 1
    assert p.m_p == p.M - p.l_max - 1
    assert p.cp_len == p.l_max + 1
    assert p.data_rows == p.M - p.l_zp
    assert p.n_data == p.N * p.data_rows


def test_timing_quantities():
    p = FrameParams(N=64, M=64, delta_f=15e3)
    assert p.T == pytest.approx(1 / 15e3)
    assert p.frame_duration == pytest.approx(64 / 15e3)
    assert p.bandwidth == pytest.approx(64 * 15e3)


def test_eva_needs_three_taps_at_m64():
    p = FrameParams.for_delay_spread(64, 64, 2510e-9)
    assert p.l_max == 3
    assert FrameParams.for_delay_spread(16, 32, 2510e-9).l_max == 2


@pytest.mark.parametrize(
    "kw",
    [
        dict(N=6),
        dict(l_max=3, l_zp=5),
        dict(M=8, l_max=3, l_zp=8),
        dict(n_p=64),
        dict(qam_order=8),
        dict(m_p=10),
    ],
)
def test_invalid_params_rejected(kw):
    with pytest.raises(ValueError):
        FrameParams(**kw)


def test_invalid_params_reported_together():
    with pytest.raises(ValueError) as info:
        FrameParams(N=6, qam_order=8)
    assert "power of two" in str(info.value) and "qam_order" in str(info.value)


def test_small_frame_layout():
    # N=8, M=9, l_max=1: three zero rows at the bottom, pilot in the middle one
    p = FrameParams(N=8, M=9, l_max=1)
    assert p.l_zp == 3 and p.m_p == 7
    data = np.arange(1, p.n_data + 1).astype(complex)
    X = build_grid(p, data, pilot_amplitude=2.0)
    assert np.all(X[6] == 0) and np.all(X[8] == 0)
    assert X[7, 0] == 2.0 and np.count_nonzero(X[7]) == 1
    assert X[0, 0] == 1 and X[0, 1] == 2  # row-major fill


def test_empty_grid_is_zero():
    p = FrameParams(N=8, M=16, l_max=2)
    assert not np.any(build_grid(p))
    assert not np.any(pilot_grid(p, 0.0))


def test_wrong_data_length_names_expected_count():
    p = FrameParams(N=8, M=16, l_max=2)
    with pytest.raises(ValueError, match=str(p.n_data)):
        build_grid(p, np.ones(p.n_data - 1))


def test_grid_energy_and_round_trip():
    p = FrameParams(N=8, M=16, l_max=2)
    rng = np.random.default_rng(0)
    sym = qam_map(rng.integers(0, 2, 2 * p.n_data))
    X = build_grid(p, sym, 3.0)
    assert np.array_equal(extract_data(p, X), sym)
    assert np.sum(np.abs(X[p.data_mask]) ** 2) == pytest.approx(p.n_data, rel=0.2)
    unit = np.exp(1j * rng.uniform(0, 2 * np.pi, p.n_data))
    assert np.sum(np.abs(build_grid(p, unit)) ** 2) == pytest.approx(p.n_data, abs=1e-9)


@pytest.mark.parametrize("order", [4, 16, 64])
def test_constellation_unit_energy_and_gray(order):
    c = QamConstellation(order)
    assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0, abs=1e-12)
    step = 2 / np.sqrt(2 * (order - 1) / 3)
    for i in range(order):
        for j in range(order):
            if np.isclose(abs(c.points[i] - c.points[j]), step):
                assert np.sum(c.labels[i] != c.labels[j]) == 1


def test_qpsk_labels():
    s = 1 / np.sqrt(2)
    assert np.allclose(qam_map([0, 0, 0, 1, 1, 0, 1, 1]), [s + s * 1j, s - s * 1j, -s + s * 1j, -s - s * 1j])


@pytest.mark.parametrize("order", [4, 16, 64])
def test_map_demap_round_trip(order):
    bits = np.random.default_rng(order).integers(0, 2, 1026 if order == 64 else 1024)
    assert np.array_equal(qam_demap_hard(qam_map(bits, order), order), bits)


def test_map_rejects_partial_symbol():
    with pytest.raises(ValueError):
        qam_map([0, 1, 1])


def test_nearest_symbol_rules():
    c = QamConstellation(4)
    s = 1 / np.sqrt(2)
    assert nearest_symbol(c.points[2], c) == c.points[2]
    assert nearest_symbol(0.0, c) == c.points[0]
    assert np.isclose(nearest_symbol(0.9 + 0.8j, c), s + s * 1j)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([4, 16, 64]), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_nearest_is_argmin(order, y):
    c = QamConstellation(order)
    d = np.abs(c.points - y)
    assert np.isclose(abs(c.nearest(y) - y), d.min())
