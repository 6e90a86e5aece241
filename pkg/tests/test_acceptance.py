"""Exit criteria, one test per criterion, at the stated tolerances.

Each test tags itself with ``criterion`` / ``title`` / ``measured`` user
properties; conftest prints one PASS/FAIL line per criterion at the end of
the run.
"""

from __future__ import annotations

import time

import numpy as np
import pytest
from scipy import signal, stats

from nrlocsim import beamforming as bf
from nrlocsim.cases import case_spec, run_case
from nrlocsim.channel.antenna import NodeArray
from nrlocsim.channel.geometry import link_geometry
from nrlocsim.channel.lsp import LargeScaleParams, filtered_field, interpolate_consistency
from nrlocsim.channel.response import channel_cfr, fft_frequency_indices, path_cfr
from nrlocsim.channel.smallscale import generate_small_scale
from nrlocsim.cli import main as cli_main
from nrlocsim.config import (ArrayGeometry, CarrierConfig, IqParams, PanParams, PnParams, SteeringErrParams,
                             apply_assignments)
from nrlocsim.impairments import (apply_apo, apply_cfo, apply_iq, apply_pan, apply_pn, apply_to, pan_am_am,
                                  perturb_weight, pn_psd, synthesize_pn, zero_apo_table)
from nrlocsim.scenarios import scenario_lookup
from nrlocsim.waveform import ResourceGrid, ofdm_demodulate, ofdm_modulate

pytestmark = pytest.mark.acceptance
PERCENTILES = (0.25, 0.50, 0.75)


@pytest.fixture
def crit(record_property):
    """crit(n, title) tags the test; the returned callable records measured values."""
    def tag(n: int, title: str):
        record_property("criterion", n)
        record_property("title", title)
        return lambda text: record_property("measured", text)
    return tag


def quantiles(x, q=PERCENTILES):
    # inverted_cdf keeps inf (failed drops) from turning interpolated quantiles into nan
    return np.quantile(np.asarray(x, float), q, method="inverted_cdf")


# ---------------------------------------------------------------------------
# 1

def test_criterion_01_ofdm_round_trip(crit):
    measured = crit(1, "OFDM round trip <= 1e-10 relative error, < 1 s")
    rng = np.random.default_rng(1)
    carrier = CarrierConfig(subcarrier_spacing_hz=30e3, fft_length=4096, grid_length_rb=272)
    k, n_sym = carrier.n_subcarriers, 14
    mask = rng.uniform(size=(k, n_sym, 2)) < 0.6
    sym = np.where(mask, rng.standard_normal(mask.shape) + 1j * rng.standard_normal(mask.shape), 0)
    grid = ResourceGrid(sym, mask, np.arange(n_sym), carrier.fft_length)
    t0 = time.perf_counter()
    back = ofdm_demodulate(ofdm_modulate(grid, carrier), carrier)
    elapsed = time.perf_counter() - t0
    rel = np.linalg.norm(back.symbols - sym) / np.linalg.norm(sym)
    measured(f"rel err {rel:.2e}, {elapsed:.3f} s")
    assert rel <= 1e-10
    assert elapsed < 1.0


# ---------------------------------------------------------------------------
# 2

def test_criterion_02_consistency_interpolation(crit):
    measured = crit(2, "spatial-consistency interpolation: exact corners, unit interior variance")
    rng = np.random.default_rng(2)
    d = 10.0
    corners = rng.standard_normal((4, 50))
    e00, e10, e01, e11 = corners
    for (a, b), want in (((0, 0), e00), ((d, 0), e10), ((0, d), e01), ((d, d), e11)):
        np.testing.assert_array_equal(interpolate_consistency(e00, e10, e01, e11, a, b, d), want)
    n = 100_000
    worst = 0.0
    for a, b in ((2.5, 7.0), (5.0, 5.0), (9.0, 1.0), (0.3, 8.8)):
        c = rng.standard_normal((4, n))
        v = interpolate_consistency(*c, a, b, d)
        worst = max(worst, abs(np.var(v) - 1))
    measured(f"max |var - 1| = {worst:.4f}")
    assert worst <= 0.02


# ---------------------------------------------------------------------------
# 3

def test_criterion_03_lsp_autocorrelation(crit):
    measured = crit(3, "LSP field autocorrelation at lag d_corr within 0.05 of 1/e")
    rng = np.random.default_rng(3)
    spacing, dcorr, n = 1.0, 10.0, 1500
    f = filtered_field(rng.standard_normal((n, n)), spacing, dcorr)
    lag = int(round(dcorr / spacing))
    var = np.mean(f * f)
    rho_x = np.mean(f[:-lag] * f[lag:]) / var
    rho_y = np.mean(f[:, :-lag] * f[:, lag:]) / var
    measured(f"rho_x {rho_x:.4f}, rho_y {rho_y:.4f}, target {np.exp(-1):.4f}, {n * n} samples")
    assert abs(rho_x - np.exp(-1)) <= 0.05
    assert abs(rho_y - np.exp(-1)) <= 0.05


# ---------------------------------------------------------------------------
# 4

def _weighted_rms(x, p):
    p = p / p.sum()
    return np.sqrt(np.sum(p * x ** 2) - np.sum(p * x) ** 2)


@pytest.mark.slow
def test_criterion_04_small_scale_spreads(crit):
    measured = crit(4, "ensemble RMS delay / azimuth spread within 10% of configured DS / ASA")
    out = []
    for state in ("los", "nlos"):
        table = scenario_lookup("indoor-office", state)
        geom = ArrayGeometry(spacing_m=0.005)
        geo = link_geometry((0, 0, 3), (20, 5, 1.5), NodeArray(geom), NodeArray(geom), state == "los")
        lsp = LargeScaleParams(sf_db=0.0, kf_db=7.0, ds_s=40e-9, asd_deg=25.0, asa_deg=35.0,
                               zsd_deg=8.0, zsa_deg=12.0)
        rng = np.random.default_rng(4)
        ds, asa = [], []
        for _ in range(10_000):
            ps = generate_small_scale(lsp, geo, table, rng)
            ds.append(_weighted_rms(ps.delay_s, ps.power))
            off = np.angle(np.exp(1j * (ps.aoa_az - geo.los_az_ut)))
            asa.append(_weighted_rms(off, ps.power))
        ds_rms = np.sqrt(np.mean(np.square(ds)))
        asa_rms = np.rad2deg(np.sqrt(np.mean(np.square(asa))))
        out.append((state, ds_rms / lsp.ds_s - 1, asa_rms / lsp.asa_deg - 1))
    measured(", ".join(f"{s}: DS {d:+.3%} ASA {a:+.3%}" for s, d, a in out))
    for _, d, a in out:
        assert abs(d) <= 0.10
        assert abs(a) <= 0.10


# ---------------------------------------------------------------------------
# 5

def test_criterion_05_fractional_delay(crit):
    measured = crit(5, "fractional-delay CIR matches an inverse-DFT oracle to 1e-9, peak between taps")
    k_fft, df = 256, 30e3
    fs = k_fft * df
    tau = 10.37 / fs
    f = fft_frequency_indices(k_fft)
    cir = np.fft.ifft(path_cfr(tau, 1.0, f, df))
    # oracle: explicit double sum over signed subcarriers and taps
    m = np.arange(k_fft)
    oracle = np.array([np.sum(np.exp(-2j * np.pi * df * tau * f) * np.exp(2j * np.pi * f * mm / k_fft))
                       for mm in m]) / k_fft
    err = np.max(np.abs(cir - oracle))
    energy = np.abs(cir) ** 2
    top2 = set(np.argsort(energy)[-2:].tolist())
    measured(f"max |diff| {err:.2e}, strongest taps {sorted(top2)}, peak share {energy.max() / energy.sum():.3f}")
    assert err <= 1e-9
    assert top2 == {10, 11}
    assert energy.max() / energy.sum() < 0.9


# ---------------------------------------------------------------------------
# 6

def test_criterion_06_impairment_identities(crit):
    measured = crit(6, "HI identities, IQ image rejection, PN PSD, PAN gain and saturation")
    rng = np.random.default_rng(6)
    x = rng.standard_normal((2, 4096)) + 1j * rng.standard_normal((2, 4096))

    # zero-parameter identities
    from nrlocsim.channel.smallscale import PathSet
    geom = ArrayGeometry(cols=4, spacing_m=0.05)
    rx = NodeArray(geom)
    n = 3
    ps = PathSet(np.array([1e-8, 3e-8, 7e-8]), np.ones(n) / n, np.zeros(n), np.full(n, np.pi / 2),
                 np.array([0.1, 0.5, -0.4]), np.full(n, np.pi / 2), np.zeros(n), np.zeros((n, 4)),
                 np.zeros(n, bool), np.zeros(n, bool), np.arange(n), np.ones((n, 2), complex),
                 coef=rng.standard_normal((n, 4, 1)) + 0j)
    k = np.arange(-64, 64)
    np.testing.assert_array_equal(apply_apo(ps, zero_apo_table(4, -64, 63), rx, k, 30e3),
                                  channel_cfr(ps, k, 30e3))
    h = rng.standard_normal((4, 1, 128)) + 0j
    assert apply_to(h, np.zeros(4), k, 30e3) is h
    assert apply_cfo(x, 0.0, 4096) is x
    np.testing.assert_array_equal(apply_iq(x, IqParams()), x)
    np.testing.assert_array_equal(apply_pn(x, synthesize_pn(PnParams(s0_dbc_hz=-np.inf), 4096, 1e8, rng)), x)
    np.testing.assert_array_equal(apply_pan(x, PanParams(a_sat=np.inf, alpha=0.0)), x)
    on_grid = 2 * np.pi * np.arange(64) / 64
    np.testing.assert_allclose(perturb_weight(on_grid, SteeringErrParams(bits=6), rng), np.exp(1j * on_grid),
                               atol=1e-15)

    # IQ image rejection, xi = 0.1, psi = 0 -> 20 dB, measured on a tone
    n_s = 4096
    tone = np.exp(2j * np.pi * 300 * np.arange(n_s) / n_s)
    y = np.fft.fft(apply_iq(tone, IqParams(amplitude_mismatch=0.1)))
    irr = 10 * np.log10(abs(y[300]) ** 2 / abs(y[-300]) ** 2)

    # PN PSD against the closed form over [fp/10, 10 fp]
    pn = PnParams(s0_dbc_hz=-80.0, pole_hz=(100e3,))
    fs = 30.72e6
    ph = synthesize_pn(pn, 2 ** 22, fs, np.random.default_rng(7))
    ff, pxx = signal.welch(ph, fs, nperseg=2 ** 16, return_onesided=False)
    band = (np.abs(ff) >= 10e3) & (np.abs(ff) <= 1e6)
    pn_dev = np.max(np.abs(10 * np.log10(pxx[band] / pn_psd(pn, ff[band]))))

    # PAN: Rapp small-signal gain and saturation
    pa = PanParams(small_signal_gain=2.0, smoothness=2.0, a_sat=1.0)
    gain = pan_am_am(1e-4, pa) / 1e-4
    sat = pan_am_am(1e4, pa)
    measured(f"IRR {irr:.3f} dB, PN max dev {pn_dev:.2f} dB, PAN gain {gain:.5f}, sat {sat:.5f}")
    assert abs(irr - 20.0) <= 0.5
    assert pn_dev <= 3.0
    assert abs(gain / 2.0 - 1) <= 0.01
    assert abs(sat / 1.0 - 1) <= 0.01


# ---------------------------------------------------------------------------
# 7

def test_criterion_07_sumdiff_exact_and_monotone(crit):
    measured = crit(7, "sum/difference estimator exact to 1e-6 deg inside half the 3 dB width, monotone ratio")
    lam = 3e8 / 26e9
    d = lam / 2
    worst = 0.0
    monotone = True
    for n, probe_deg in ((8, 0.0), (8, 20.0), (16, -35.0), (4, 10.0)):
        geom = ArrayGeometry(cols=n, spacing_m=d)
        probe = np.deg2rad(probe_deg)
        half = bf.beamwidth_3db(n, d, lam, probe) / 2
        w_sum = bf.weights_from_cosines(geom, np.sin(probe), 0.0, lam)
        w_diff = bf.diff_weights(w_sum, geom, "h")
        acts = probe + np.linspace(-0.999 * half, 0.999 * half, 401)
        h = bf.weights_from_cosines(geom, np.sin(acts), 0.0, lam)  # unit-gain incident wave per angle
        ratios = []
        for a, hh in zip(acts, h):
            ys, yd = np.vdot(w_sum, hh), np.vdot(w_diff, hh)
            res = bf.estimate_sumdiff(ys, yd, np.sin(probe), n, d, lam)
            worst = max(worst, abs(np.rad2deg(np.arcsin(res.u) - a)))
            ratios.append((yd / ys).imag)
        steps = np.diff(ratios)
        monotone &= bool(np.all(steps < 0) or np.all(steps > 0))
    measured(f"max error {worst:.2e} deg, monotone {monotone}")
    assert worst <= 1e-6
    assert monotone


# ---------------------------------------------------------------------------
# 8

def _quantization_oracle(lo, hi, count, n=2_000_000, seed=8):
    """Brute-force RMSE (about the mean) of nearest-beam-centre quantization of a uniform angle."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(lo, hi, n)
    centers = bf.beam_centers(lo, hi, count)
    q = centers[np.argmin(np.abs(a[:, None] - centers[None, :]), axis=1)]
    e = q - a
    return float(np.sqrt(np.mean((e - e.mean()) ** 2)))


@pytest.mark.slow
def test_criterion_08_beam_sweep_rmse(crit, sweep_cfg):
    measured = crit(8, "beam-sweep RMSE monotone in SNR, floor within 10% of the quantization oracle")
    spec = case_spec(sweep_cfg, "beam-sweep", drops=500)
    res = run_case(sweep_cfg, spec)
    snrs = sorted(spec.snr_db)
    rmse = []
    for s in snrs:
        e = res.errors(snr_db=s, failures=None)
        assert e.size == 500
        rmse.append(float(np.sqrt(np.mean((e - e.mean()) ** 2))))
    lo, hi = sweep_cfg.abf.sweep_azimuth_deg
    oracle = _quantization_oracle(lo, hi, sweep_cfg.abf.beam_count)
    floor = rmse[-1]
    measured(f"RMSE {[round(r, 3) for r in rmse]}, floor {floor:.3f} vs oracle {oracle:.3f} "
             f"({floor / oracle - 1:+.1%})")
    for a, b in zip(rmse, rmse[1:]):
        assert b <= 1.05 * a
    assert abs(floor / oracle - 1) <= 0.10


# ---------------------------------------------------------------------------
# 9

@pytest.mark.slow
def test_criterion_09_two_beam_cdf(crit, bfangle_cfg):
    measured = crit(9, "two-beam, 10 dB, 500 drops: fraction of errors <= 2 deg >= 0.85")
    cfg = apply_assignments(bfangle_cfg, ["abf.estimators=[two-beam]"])
    spec = case_spec(cfg, "bf-angle", drops=500, snr_db=(10.0,))
    t0 = time.perf_counter()
    res = run_case(cfg, spec)
    elapsed = time.perf_counter() - t0
    e = res.errors("two-beam", 10.0)
    frac = float(np.mean(e <= 2.0))
    measured(f"fraction {frac:.3f} over {e.size} drops, {elapsed:.1f} s")
    assert e.size == 500
    assert frac >= 0.85
    assert elapsed < 300


# ---------------------------------------------------------------------------
# 10

@pytest.mark.slow
def test_criterion_10_localization(crit, loc_cfg):
    measured = crit(10, "localization: noise-free AOA error <= 1e-3 m; TO CDF dominated by HI-off")
    truth_cfg = apply_assignments(loc_cfg, ["system.localization.aoa_method=truth"])
    e_truth = run_case(truth_cfg, case_spec(truth_cfg, "localization-2d", drops=100)).errors()
    off = run_case(loc_cfg, case_spec(loc_cfg, "localization-2d", drops=100)).errors()
    to_cfg = apply_assignments(loc_cfg, ["hi.to.enabled=true"])
    to = run_case(to_cfg, case_spec(to_cfg, "localization-2d", drops=100)).errors()
    q_off, q_to = quantiles(off), quantiles(to)
    measured(f"truth max {np.max(e_truth):.2e} m; off q {np.round(q_off, 3).tolist()} "
             f"vs TO q {np.round(q_to, 3).tolist()}")
    assert e_truth.size == 100
    assert np.max(e_truth) <= 1e-3
    assert np.all(q_off <= q_to)


# ---------------------------------------------------------------------------
# 11

@pytest.mark.slow
def test_criterion_11_beamsteering_robustness(crit, bfangle_cfg):
    measured = crit(11, "two-beam CDFs with 6-bit shifters and phase error <= 3 deg pass KS p > 0.01")
    base = ["abf.estimators=[two-beam]", "hi.beamsteering.enabled=true", "hi.beamsteering.bits=6",
            "hi.beamsteering.amplitude_sigma_db=0.0"]
    runs = {}
    for sigma in (0.0, 1.0, 2.0, 3.0):
        cfg = apply_assignments(bfangle_cfg, base + [f"hi.beamsteering.phase_sigma_deg={sigma}"])
        runs[sigma] = run_case(cfg, case_spec(cfg, "bf-angle", drops=500))
    variant = runs[0.0].variants()[0]
    pvals = {}
    for sigma in (1.0, 2.0, 3.0):
        for snr in bfangle_cfg.system.snr_db:
            ref = runs[0.0].errors(variant, snr)
            alt = runs[sigma].errors(variant, snr)
            pvals[(sigma, snr)] = stats.ks_2samp(ref, alt).pvalue
    measured(", ".join(f"{s:g}deg@{snr:g}dB p={p:.3g}" for (s, snr), p in pvals.items()))
    assert min(pvals.values()) > 0.01


# ---------------------------------------------------------------------------
# 12

@pytest.mark.parametrize("case,config,extra", [
    ("bf-angle", "bf_angle.yaml", ["--drops", "12"]),
    ("beam-sweep", "beam_sweep.yaml", ["--drops", "8", "--emit-beams"]),
    ("localization-2d", "localization.yaml", ["--drops", "4", "--set", "hi.to.enabled=true"]),
])
def test_criterion_12_determinism(crit, tmp_path, case, config, extra):
    measured = crit(12, "identical config and seed give byte-identical tables")
    from conftest import CONFIGS
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        argv = [case, "--config", str(CONFIGS / config), "--out", str(out), "--seed", "7"] + extra
        assert cli_main(argv) == 0
        outs.append(out)
    names = sorted(p.name for p in outs[0].glob("*.csv"))
    assert "results.csv" in names
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
    measured(f"{case}: {len(names)} tables identical")
