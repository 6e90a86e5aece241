import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import signal

from nrlocsim.channel.antenna import NodeArray
from nrlocsim.channel.response import channel_cfr, fft_frequency_indices
from nrlocsim.channel.smallscale import PathSet
from nrlocsim.config import ArrayGeometry, IqParams, PanParams, PnParams, SteeringErrParams, ToParams
from nrlocsim.impairments import (ApoTable, apply_apo, apply_cfo, apply_iq, apply_pan, apply_to, apply_to_grid,
                                  draw_timing_offsets, image_rejection_db, load_apo_table, pan_am_am, pan_am_pm_deg,
                                  perturb_weight, pn_psd, quantize_phase, save_apo_table, synthesize_pn,
                                  synthetic_apo_table)

RX = NodeArray(ArrayGeometry(rows=1, cols=2, spacing_m=0.5))


def _paths(az=(0.3, -0.8)):
    n = len(az)
    rng = np.random.default_rng(0)
    coef = rng.standard_normal((n, 2, 1)) + 1j * rng.standard_normal((n, 2, 1))
    return PathSet(np.array([0.0, 40e-9])[:n], np.ones(n) / n, np.zeros(n), np.full(n, np.pi / 2), np.array(az),
                   np.full(n, np.pi / 2), np.zeros(n), np.zeros((n, 4)), np.zeros(n, bool), np.zeros(n, bool),
                   np.arange(n), np.ones((n, 2), complex), coef=coef)


# ---------------------------------------------------------------------------
# APO

def test_constant_offset_rotates_antenna_response():
    k = np.arange(-50, 50)
    phase = np.zeros((2, 2, 2, 2))
    phase[1] = 0.7
    table = ApoTable(phase, np.array([-60.0, 60.0]), np.array([-np.pi, np.pi]), np.array([0.0, np.pi]))
    ps = _paths()
    h = apply_apo(ps, table, RX, k, 30e3)
    ref = channel_cfr(ps, k, 30e3)
    np.testing.assert_allclose(h[0], ref[0], atol=1e-12)
    np.testing.assert_allclose(h[1], ref[1] * np.exp(0.7j), atol=1e-12)


def test_synthetic_surfaces_vanish_at_broadside_and_grow_outward():
    t = synthetic_apo_table(4, -100, 100, 10.0, np.random.default_rng(2))
    psi = np.abs(t.interpolate([0.0], np.deg2rad([0.0, 10.0, 60.0]), [np.pi / 2]))[:, :, 0]
    assert np.all(psi[:, 0] < 1e-12)
    assert np.all(psi[1:, 2] > psi[1:, 1])
    assert not np.any(psi[0])


def test_apo_table_refuses_extrapolation():
    t = synthetic_apo_table(2, -10, 10, 5.0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        t.interpolate([20.0], [0.0], [np.pi / 2])


def test_apo_table_csv_round_trip(tmp_path):
    t = synthetic_apo_table(3, -10, 10, 5.0, np.random.default_rng(0))
    p = tmp_path / "apo.csv"
    save_apo_table(t, p)
    back = load_apo_table(p)
    np.testing.assert_allclose(back.phase, t.phase, atol=1e-15)
    np.testing.assert_allclose(back.az_rad, t.az_rad, atol=1e-15)


def test_apo_antenna_count_mismatch():
    t = synthetic_apo_table(3, -10, 10, 5.0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        apply_apo(_paths(), t, RX, np.arange(-5, 5), 30e3)


# ---------------------------------------------------------------------------
# TO

def test_one_sample_offset_shifts_cir_by_one_tap():
    k_fft, df = 64, 30e3
    k = fft_frequency_indices(k_fft)
    h = apply_to(np.ones((1, k_fft), complex), [1 / (k_fft * df)], k, df)
    cir = np.fft.ifft(h[0])
    expect = np.zeros(k_fft)
    expect[1] = 1
    np.testing.assert_allclose(cir, expect, atol=1e-12)


def test_timing_offsets_are_bounded_and_zero_sigma_is_identity():
    off = draw_timing_offsets(ToParams(True, 5e-9), 10_000, np.random.default_rng(0))
    assert np.max(np.abs(off)) <= 2 * 5e-9
    assert draw_timing_offsets(ToParams(True, 0.0), 3, np.random.default_rng(0)).tolist() == [0, 0, 0]
    x = np.ones((2, 5, 3), complex)
    assert apply_to_grid(x, [0.0, 0.0, 0.0], np.arange(2), 30e3) is x


def test_grid_offsets_apply_per_receive_antenna():
    k = np.arange(-3, 3)
    g = np.ones((6, 2, 2), complex)
    t = [0.0, 1e-6]
    out = apply_to_grid(g, t, k, 30e3)
    np.testing.assert_allclose(out[:, 0, 0], 1)
    np.testing.assert_allclose(out[:, 1, 1], np.exp(-2j * np.pi * k * 30e3 * 1e-6))


# ---------------------------------------------------------------------------
# beamsteering error

def test_phase_pi_with_six_bits_is_index_32():
    assert int(quantize_phase(np.pi, 6)) == 32
    w = perturb_weight(np.array([np.pi]), SteeringErrParams(True, 6))
    np.testing.assert_allclose(w, [-1.0], atol=1e-15)


def test_one_bit_shifter_is_binary():
    w = perturb_weight(np.linspace(-np.pi, np.pi, 37), SteeringErrParams(True, 1))
    np.testing.assert_allclose(np.abs(np.abs(w.real) - 1), 0, atol=1e-15)
    np.testing.assert_allclose(w.imag, 0, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(phase=st.floats(-10, 10), bits=st.integers(1, 8))
def test_quantization_error_is_within_half_step(phase, bits):
    w = perturb_weight(np.array([phase]), SteeringErrParams(True, bits))
    err = np.angle(w[0] * np.exp(-1j * phase))
    assert abs(err) <= np.pi / 2 ** bits + 1e-12
    assert abs(w[0]) == pytest.approx(1.0)


def test_random_errors_are_bounded_and_spread():
    p = SteeringErrParams(True, 8, phase_sigma_deg=3.0, amplitude_sigma_db=0.5)
    w = perturb_weight(np.zeros(20_000), p, np.random.default_rng(4))
    amp_db = 20 * np.log10(np.abs(w))
    assert np.max(np.abs(amp_db)) <= 1.0 + 1e-12
    assert np.max(np.abs(np.angle(w))) <= np.deg2rad(6.0) + 1e-12
    assert 0.3 < np.std(amp_db) < 0.5


# ---------------------------------------------------------------------------
# CFO

def test_cfo_phase_advance_per_sample():
    eps, k_fft = 0.13, 256
    y = apply_cfo(np.ones(1000, complex), eps, k_fft, n0=17)
    np.testing.assert_allclose(np.angle(y[1:] / y[:-1]), 2 * np.pi * eps / k_fft, atol=1e-12)
    assert np.angle(y[0]) == pytest.approx(2 * np.pi * eps * 17 / k_fft)
    slope = np.polyfit(np.arange(1000), np.unwrap(np.angle(y)), 1)[0]
    assert slope == pytest.approx(2 * np.pi * eps / k_fft)


# ---------------------------------------------------------------------------
# IQ imbalance

@pytest.mark.parametrize("amp,phase_deg", [(0.05, 2.0), (0.1, 0.0), (0.0, 5.0)])
def test_tone_image_matches_rejection_ratio(amp, phase_deg):
    n, f = 1024, 37
    x = np.exp(2j * np.pi * f * np.arange(n) / n)
    y = np.fft.fft(apply_iq(x, IqParams(True, amp, phase_deg)))
    irr = 10 * np.log10(abs(y[f]) ** 2 / abs(y[n - f]) ** 2)
    assert irr == pytest.approx(image_rejection_db(amp, np.deg2rad(phase_deg)), abs=1e-9)


def test_unit_filters_match_scalar_form():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    a = apply_iq(x, IqParams(True, 0.07, 3.0))
    b = apply_iq(x, IqParams(True, 0.07, 3.0, g_i=(1.0,), g_q=(1.0,)))
    np.testing.assert_allclose(a, b, atol=1e-14)


# ---------------------------------------------------------------------------
# phase noise

def _welch_two_sided(params, fs, n=2 ** 20, seed=0):
    phi = synthesize_pn(params, n, fs, np.random.default_rng(seed))
    f, p = signal.welch(phi, fs, nperseg=8192)
    return f[1:], p[1:] / 2  # one-sided -> two-sided


def test_flat_psd_without_poles_or_zeros():
    params = PnParams(True, -80.0, (), ())
    f, p = _welch_two_sided(params, 1e6)
    assert np.median(10 * np.log10(p)) == pytest.approx(-80.0, abs=0.3)


def test_single_pole_rolls_off_twenty_db_per_decade():
    fs = 100e6
    params = PnParams(True, -80.0, (), (100e3,))
    f, p = _welch_two_sided(params, fs)
    lo = np.median(p[(f > 1e6) & (f < 1.2e6)])
    hi = np.median(p[(f > 10e6) & (f < 12e6)])
    assert 10 * np.log10(lo / hi) == pytest.approx(20.0, abs=1.0)
    assert pn_psd(params, 0.0) == pytest.approx(1e-8)


def test_pole_above_nyquist_is_rejected():
    with pytest.raises(ValueError):
        synthesize_pn(PnParams(True, -80.0, (), (2e6,)), 100, 1e6, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# PA nonlinearity

def test_small_signal_behaviour():
    p = PanParams(True, small_signal_gain=2.0, a_sat=1.0)
    r = np.array([1e-4, 1e-3])
    np.testing.assert_allclose(pan_am_am(r, p), 2 * r, rtol=1e-6)
    np.testing.assert_allclose(pan_am_pm_deg(r, p), p.alpha * r ** p.gamma1, rtol=1e-6)
    assert pan_am_am(1e6, p) == pytest.approx(1.0, rel=1e-6)


def test_zero_input_gives_zero_output():
    y = apply_pan(np.zeros(4, complex), PanParams(True))
    assert not np.any(y)


def test_third_order_intermod_grows_three_db_per_db():
    n = 4096
    p = PanParams(True, smoothness=1.0, a_sat=1.0, alpha=0.0)
    t = np.arange(n)

    def im3_db(a):
        x = a * (np.exp(2j * np.pi * 100 * t / n) + np.exp(2j * np.pi * 110 * t / n))
        y = np.fft.fft(apply_pan(x, p)) / n
        return 20 * np.log10(abs(y[120]))

    slope = (im3_db(0.02) - im3_db(0.01)) / (20 * np.log10(2))
    assert slope == pytest.approx(3.0, abs=0.05)


def test_normalize_sets_backoff():
    p = PanParams(True, smoothness=2.0, a_sat=1.0, alpha=0.0, backoff_db=30.0)
    x = 123.0 * np.exp(2j * np.pi * np.arange(64) / 64)
    np.testing.assert_allclose(apply_pan(x, p, normalize=True), x, rtol=1e-5)
