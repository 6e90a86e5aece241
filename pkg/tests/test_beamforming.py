import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nrlocsim.beamforming import (allocate_beams, aux_pair_offset, beam_centers, beamwidth_3db, combine,
                                  coverage_alpha, diff_weights, direction_cosines, estimate_aux_pair,
                                  estimate_sumdiff, half_mask, steering_weights, weights_from_cosines)
from nrlocsim.config import ArrayGeometry, SteeringErrParams

LAM = 1.0
D = 0.5


def _ula(n):
    return ArrayGeometry(rows=1, cols=n, spacing_m=D)


def test_beamwidth_of_eight_element_half_wave_array():
    assert beamwidth_3db(8, D, LAM) == pytest.approx(0.2215)
    assert beamwidth_3db(8, D, LAM, np.deg2rad(60)) == pytest.approx(2 * 0.2215)
    assert beamwidth_3db(16, D, LAM) == pytest.approx(0.2215 / 2)
    with pytest.raises(ValueError):
        beamwidth_3db(8, D, LAM, np.pi / 2)
    with pytest.raises(ValueError):
        beamwidth_3db(1, D, LAM)


def test_beam_allocation_over_sixty_degrees():
    bs = allocate_beams(np.deg2rad([-60, 60]), 12, _ula(8), LAM)
    np.testing.assert_allclose(np.rad2deg(bs.az_rad), np.arange(-55, 56, 10))
    assert bs.weights.shape == (12, 8)
    np.testing.assert_allclose(bs.az_rad, -bs.az_rad[::-1])


def test_single_beam_points_at_range_centre():
    bs = allocate_beams(np.deg2rad([-10, 30]), 1, _ula(4), LAM)
    assert np.rad2deg(bs.az_rad[0]) == pytest.approx(10.0)


def test_too_sparse_beams_are_rejected():
    with pytest.raises(ValueError):
        allocate_beams(np.deg2rad([-60, 60]), 4, _ula(8), LAM)
    with pytest.raises(ValueError):
        beam_centers(1.0, 1.0, 3)


def test_broadside_weights_are_ones_with_array_gain():
    w = steering_weights(_ula(8), 0.0, np.pi / 2, LAM)
    np.testing.assert_allclose(w, np.ones(8))
    assert abs(combine(w, np.ones(8))) == pytest.approx(8.0)


def test_adjacent_element_phase_is_pi_sin_theta():
    th = np.deg2rad(30)
    w = steering_weights(_ula(2), th, np.pi / 2, LAM)
    assert np.angle(w[1] / w[0]) == pytest.approx(np.pi * np.sin(th))


def test_quantized_beams_record_bits():
    bs = allocate_beams(np.deg2rad([-60, 60]), 12, _ula(8), LAM, steering_error=SteeringErrParams(True, 3))
    assert bs.bits == 3
    assert np.all(np.isin(np.round(np.angle(bs.weights) / (np.pi / 4)).astype(int) % 8, np.arange(8)))


def test_diff_weights_negate_second_half():
    np.testing.assert_array_equal(diff_weights(np.ones(4)), [1, 1, -1, -1])
    w = weights_from_cosines(_ula(8), 0.3, 0.0, LAM)
    d = diff_weights(w)
    assert np.linalg.norm(d) == pytest.approx(np.linalg.norm(w))
    assert abs(combine(d, w)) < 1e-12  # null at the probe direction
    with pytest.raises(ValueError):
        diff_weights(np.ones(3))


def test_half_mask_per_axis_on_planar_array():
    g = ArrayGeometry(rows=2, cols=4, spacing_m=D)
    assert half_mask(g, 8, "h").tolist() == [False, False, True, True] * 2
    assert half_mask(g, 8, "v").tolist() == [False] * 4 + [True] * 4


@settings(max_examples=60, deadline=None)
@given(n=st.sampled_from([4, 8, 16]), probe=st.floats(-0.6, 0.6), frac=st.floats(-0.99, 0.99))
def test_noiseless_sumdiff_is_exact(n, probe, frac):
    g = _ula(n)
    du = frac * coverage_alpha() * LAM / (np.pi * D * n)
    u_act = probe + du
    h = weights_from_cosines(g, u_act, 0.0, LAM)
    w = weights_from_cosines(g, probe, 0.0, LAM)
    res = estimate_sumdiff(combine(w, h), combine(diff_weights(w), h), probe, n, D, LAM)
    assert res.u == pytest.approx(u_act, abs=1e-12)
    assert not res.out_of_coverage


def test_sumdiff_flags_out_of_coverage_and_rejects_null_sum():
    n = 8
    g = _ula(n)
    u_act = 1.5 * coverage_alpha() * LAM / (np.pi * D * n)
    h = weights_from_cosines(g, u_act, 0.0, LAM)
    w = weights_from_cosines(g, 0.0, 0.0, LAM)
    assert estimate_sumdiff(combine(w, h), combine(diff_weights(w), h), 0.0, n, D, LAM).out_of_coverage
    with pytest.raises(ValueError):
        estimate_sumdiff(0j, 1 + 0j, 0.0, n, D, LAM)


def _power(n, mu_beam, mu):
    m = np.arange(n)
    return abs(np.vdot(np.exp(1j * m * mu_beam), np.exp(1j * m * mu))) ** 2


def test_symmetric_pair_gives_zero_offset():
    assert aux_pair_offset(2.0, 2.0, 0.4) == 0.0


@pytest.mark.parametrize("n,l", [(8, 1), (8, 2), (16, 1)])
def test_noiseless_two_beam_is_exact(n, l):
    eta = np.pi * l / n
    mu0 = 0.2
    # even l puts both beams' nulls on the pair centre (0/0), so the grid skips it
    for mu in mu0 + np.linspace(-0.95, 0.95, 20) * eta:
        db = lambda c: 10 * np.log10(_power(n, c, mu))
        est = estimate_aux_pair(db(mu0 - eta), db(mu0 + eta), mu0, eta)
        assert np.rad2deg(est - mu) == pytest.approx(0.0, abs=1e-3)


def test_noiseless_three_beam_uses_stronger_neighbour():
    n = 8
    eta = 2 * np.pi / n
    mu0 = 0.0
    for mu in (-0.3 * eta, 0.35 * eta):
        db = lambda c: 10 * np.log10(_power(n, c, mu))
        est = estimate_aux_pair(db(mu0 - eta), db(mu0 + eta), mu0, eta, "three-beam", db(mu0))
        assert est == pytest.approx(mu, abs=1e-9)


def test_aux_pair_error_paths():
    with pytest.raises(ValueError):
        estimate_aux_pair(-200.0, -200.0, 0.0, 0.3, noise_floor_dbm=-150.0)
    with pytest.raises(ValueError):
        estimate_aux_pair(0.0, 0.0, 0.0, 0.3, "three-beam")
    with pytest.raises(ValueError):
        estimate_aux_pair(0.0, 0.0, 0.0, 0.3, "four-beam")
    assert aux_pair_offset(1.0, 0.0, 0.3) == 0.3


def test_direction_cosines_of_horizon():
    uh, uv = direction_cosines(np.deg2rad(30), np.pi / 2)
    assert uh == pytest.approx(0.5) and uv == pytest.approx(0.0, abs=1e-15)
