import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nrlocsim.config import CarrierConfig, ConfigError, SignalConfig
from nrlocsim.waveform import (ResourceGrid, active_frequency_indices, generate_signal_grid, generate_zc_base,
                               largest_prime_at_most, ofdm_demodulate, ofdm_modulate, papr_db, prs_sequence)

SMALL = CarrierConfig(subcarrier_spacing_hz=30e3, fft_length=256, grid_length_rb=16)


@pytest.mark.parametrize("seq_id", [0, 1, 7, 29, 1000])
def test_zc_is_unit_modulus(seq_id):
    np.testing.assert_allclose(np.abs(generate_zc_base(seq_id, 1632)), 1.0, atol=1e-12)


def test_zc_ideal_cyclic_autocorrelation():
    n = 139  # prime, so the sequence is a plain ZC of that length
    x = generate_zc_base(3, n)
    corr = np.array([np.vdot(x, np.roll(x, s)) for s in range(n)])
    assert abs(corr[0]) == pytest.approx(n)
    assert np.max(np.abs(corr[1:])) / n < 1e-10


def test_zc_distinct_roots_low_cross_correlation():
    n = 139
    a, b = generate_zc_base(1, n), generate_zc_base(2, n)
    xc = np.array([abs(np.vdot(a, np.roll(b, s))) for s in range(n)])
    # |cross-correlation| of distinct-root prime-length ZC is sqrt(N)
    np.testing.assert_allclose(xc, np.sqrt(n), rtol=1e-9)


def test_largest_prime():
    assert largest_prime_at_most(1632) == 1627
    assert largest_prime_at_most(2) == 2


def test_srs_comb2_last_symbol_mapping():
    carrier = CarrierConfig(subcarrier_spacing_hz=30e3, fft_length=4096, grid_length_rb=272)
    grid = generate_signal_grid(SignalConfig(comb=2, symbol_start=13, symbol_count=1), carrier)
    occ = grid.mask[:, :, 0]
    assert occ.shape == (3264, 14)
    assert np.array_equal(np.flatnonzero(occ.any(axis=0)), [13])
    assert np.array_equal(np.flatnonzero(occ[:, 13]), np.arange(0, 3264, 2))


def test_prs_comb2_first_twelve_symbols_staggered():
    grid = generate_signal_grid(SignalConfig(signal_type="prs", comb=2, symbol_start=0, symbol_count=12), SMALL)
    occ = grid.mask[:, :, 0]
    assert occ.any(axis=0).sum() == 12
    offsets = [int(np.flatnonzero(occ[:, s])[0]) for s in range(12)]
    assert offsets == [0, 1] * 6
    np.testing.assert_allclose(np.abs(grid.symbols[grid.mask]), 1.0)


def test_zero_length_allocation_is_rejected():
    with pytest.raises(ConfigError):
        SignalConfig(symbol_count=0)


def test_tx_power_scaling_per_symbol():
    grid = generate_signal_grid(SignalConfig(symbol_start=0, symbol_count=2), SMALL, tx_power_dbm=23.0)
    p = np.sum(np.abs(grid.symbols[:, :2, 0]) ** 2, axis=0)
    np.testing.assert_allclose(10 * np.log10(p), 23.0)


def test_periodicity_over_slots():
    grid = generate_signal_grid(SignalConfig(symbol_start=0, symbol_count=1, period_slots=2), SMALL, n_slots=4)
    assert list(grid.occupied_symbols()) == [0, 28]


def test_prs_sequence_is_qpsk():
    s = prs_sequence(17, 0, 3, 64)
    np.testing.assert_allclose(np.abs(s), 1.0)
    assert set(np.round(s.real * np.sqrt(2)).astype(int)) <= {-1, 1}


def test_all_zero_grid_gives_zero_waveform():
    g = ResourceGrid(np.zeros((192, 2, 1), complex), np.zeros((192, 2, 1), bool), np.arange(2), 256)
    assert not np.any(ofdm_modulate(g, SMALL).samples)


def test_single_subcarrier_is_complex_exponential():
    k_act = SMALL.n_subcarriers
    sym = np.zeros((k_act, 1, 1), complex)
    j = 120  # signed index j - k_act/2 = 24
    sym[j, 0, 0] = 1.0
    wf = ofdm_modulate(ResourceGrid(sym, sym != 0, np.arange(1), 256), SMALL)
    body = wf.samples[0, SMALL.cp_length:]
    f = active_frequency_indices(k_act)[j]
    n = np.arange(256)
    np.testing.assert_allclose(body, np.exp(2j * np.pi * f * n / 256) / np.sqrt(256), atol=1e-14)


def test_delay_gives_linear_phase_ramp():
    rng = np.random.default_rng(0)
    sym = rng.standard_normal((192, 1, 1)) + 1j * rng.standard_normal((192, 1, 1))
    g = ResourceGrid(sym, np.ones(sym.shape, bool), np.arange(1), 256)
    wf = ofdm_modulate(g, SMALL)
    shift = SMALL.cp_length // 2
    delayed = np.concatenate([np.zeros(shift), wf.samples[0, :-shift]])[None]
    back = ofdm_demodulate(wf.with_samples(delayed), SMALL)
    k = active_frequency_indices(192)
    np.testing.assert_allclose(back.symbols[:, 0, 0], sym[:, 0, 0] * np.exp(-2j * np.pi * k * shift / 256),
                               atol=1e-12)


def test_truncated_waveform_is_rejected():
    g = generate_signal_grid(SignalConfig(), SMALL)
    wf = ofdm_modulate(g, SMALL)
    with pytest.raises(ValueError):
        ofdm_demodulate(wf.with_samples(wf.samples[:, :-1]), SMALL)


@settings(max_examples=30, deadline=None)
@given(n_sym=st.integers(1, 4), ports=st.integers(1, 3), seed=st.integers(0, 2 ** 31), occ=st.floats(0.05, 1.0))
def test_round_trip_and_parseval(n_sym, ports, seed, occ):
    rng = np.random.default_rng(seed)
    shape = (SMALL.n_subcarriers, n_sym, ports)
    mask = rng.uniform(size=shape) < occ
    sym = np.where(mask, rng.standard_normal(shape) + 1j * rng.standard_normal(shape), 0)
    g = ResourceGrid(sym, mask, np.arange(n_sym), 256)
    wf = ofdm_modulate(g, SMALL)
    back = ofdm_demodulate(wf, SMALL)
    den = max(np.linalg.norm(sym), 1e-300)
    assert np.linalg.norm(back.symbols - sym) / den <= 1e-10
    body = wf.samples.reshape(ports, n_sym, -1)[:, :, SMALL.cp_length:]
    assert np.sum(np.abs(body) ** 2) == pytest.approx(np.sum(np.abs(sym) ** 2), rel=1e-10, abs=1e-12)


def test_srs_papr_below_random_qpsk():
    carrier = CarrierConfig(subcarrier_spacing_hz=30e3, fft_length=4096, grid_length_rb=272)
    grid = generate_signal_grid(SignalConfig(comb=2, symbol_start=13), carrier)
    srs = ofdm_modulate(grid.select_symbols([13]), carrier).samples[0, carrier.cp_length:]
    rng = np.random.default_rng(5)
    qpsk = grid.select_symbols([13]).symbols.copy()
    m = grid.select_symbols([13]).mask
    qpsk[m] = (rng.choice([-1, 1], m.sum()) + 1j * rng.choice([-1, 1], m.sum())) / np.sqrt(2)
    ref = ofdm_modulate(ResourceGrid(qpsk, m, np.array([13]), 4096), carrier).samples[0, carrier.cp_length:]
    assert papr_db(srs) < papr_db(ref)
