"""Hardware-impairment models: APO, TO, beamsteering error, CFO, IQ, PN, PAN.

Together with the fractional-delay path CFR in ``channel.response`` these
are the eight impairment classes.  Each model is a pure function of its
input, parameters, and (where random) a caller-provided stream; with its
parameters at zero or its flag off, each one returns the input unchanged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .channel.antenna import NodeArray
from .channel.response import channel_cfr, path_cfr
from .channel.smallscale import PathSet
from .config import IqParams, PanParams, PnParams, SteeringErrParams, ToParams
from .rng import truncated_normal


# ---------------------------------------------------------------------------
# APO

@dataclass(frozen=True)
class ApoTable:
    """Phase offsets psi [antenna, subcarrier, az, el] in radians.

    Axes: ``subcarriers`` (signed subcarrier index), ``az_rad`` and
    ``el_rad`` (array-frame azimuth and zenith), each strictly increasing.
    """

    phase: np.ndarray
    subcarriers: np.ndarray
    az_rad: np.ndarray
    el_rad: np.ndarray

    def __post_init__(self):
        shape = (len(self.subcarriers), len(self.az_rad), len(self.el_rad))
        if self.phase.ndim != 4 or self.phase.shape[1:] != shape:
            raise ValueError(f"APO phase shape {self.phase.shape} does not match axes {shape}")

    @property
    def n_antennas(self) -> int:
        return self.phase.shape[0]

    def interpolate(self, k_indices, az, el) -> np.ndarray:
        """psi [antenna, path, K] by multilinear interpolation; refuses extrapolation."""
        k = np.asarray(k_indices, float)
        az = np.atleast_1d(np.asarray(az, float))
        el = np.atleast_1d(np.asarray(el, float))
        for name, v, axis in (("subcarrier", k, self.subcarriers), ("azimuth", az, self.az_rad),
                              ("zenith", el, self.el_rad)):
            if v.size and (v.min() < axis[0] - 1e-12 or v.max() > axis[-1] + 1e-12):
                raise ValueError(f"{name} outside the APO table hull [{axis[0]:g}, {axis[-1]:g}]")
        pts = np.stack(np.broadcast_arrays(k[None, :], az[:, None], el[:, None]), axis=-1)
        out = np.empty((self.n_antennas, len(az), len(k)))
        for a in range(self.n_antennas):
            f = RegularGridInterpolator((self.subcarriers, self.az_rad, self.el_rad), self.phase[a],
                                        method="linear", bounds_error=False, fill_value=None)
            out[a] = f(pts)
        return out


def zero_apo_table(n_antennas: int, k_lo: float, k_hi: float) -> ApoTable:
    return ApoTable(np.zeros((n_antennas, 2, 2, 2)), np.array([k_lo, k_hi], float),
                    np.array([-np.pi, np.pi]), np.array([0.0, np.pi]))


def synthetic_apo_table(n_antennas: int, k_lo: float, k_hi: float, amplitude_deg: float,
                        rng: np.random.Generator) -> ApoTable:
    """Smooth random phase surfaces standing in for chamber measurements.

    psi_l = A * sum_j c_lj * s^j (j = 2..4, s = sin(az)/sin(60 deg)) with a
    mild zenith taper and a 10% linear drift across the band; antenna 0 is
    the reference (zero).  The offsets vanish at broadside and grow toward
    large incidence angles.
    """
    az = np.deg2rad(np.arange(-90.0, 90.0 + 1e-9, 2.5))
    el = np.deg2rad(np.arange(0.0, 180.0 + 1e-9, 10.0))
    ks = np.array([k_lo, k_hi], float)
    s = np.sin(az) / np.sin(np.deg2rad(60.0))
    c = rng.normal(size=(n_antennas, 3))
    c[0] = 0.0
    surf = sum(c[:, j, None] * s[None, :] ** (j + 2) for j in range(3))  # [ant, az]
    taper = np.sin(el) ** 2
    drift = 1 + 0.1 * (ks - ks.mean()) / max(np.ptp(ks), 1.0)
    phase = np.deg2rad(amplitude_deg) * surf[:, None, :, None] * drift[None, :, None, None] * taper
    return ApoTable(phase, ks, az, el)


def load_apo_table(path: str | Path) -> ApoTable:
    """Read a CSV with columns antenna, subcarrier, az_deg, el_deg, phase_rad."""
    rows = list(csv.DictReader(open(path, newline="")))
    ant = np.array([int(r["antenna"]) for r in rows])
    sc = np.array([float(r["subcarrier"]) for r in rows])
    az = np.array([float(r["az_deg"]) for r in rows])
    el = np.array([float(r["el_deg"]) for r in rows])
    ph = np.array([float(r["phase_rad"]) for r in rows])
    axes = [np.unique(v) for v in (ant, sc, az, el)]
    phase = np.full(tuple(len(a) for a in axes), np.nan)
    idx = [np.searchsorted(a, v) for a, v in zip(axes, (ant, sc, az, el))]
    phase[tuple(idx)] = ph
    if np.isnan(phase).any():
        raise ValueError(f"{path}: APO table is not a full grid")
    return ApoTable(phase, axes[1], np.deg2rad(axes[2]), np.deg2rad(axes[3]))


def save_apo_table(table: ApoTable, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["antenna", "subcarrier", "az_deg", "el_deg", "phase_rad"])
        for a in range(table.n_antennas):
            for i, k in enumerate(table.subcarriers):
                for j, az in enumerate(table.az_rad):
                    for m, el in enumerate(table.el_rad):
                        w.writerow([a, repr(float(k)), repr(float(np.rad2deg(az))),
                                    repr(float(np.rad2deg(el))), repr(float(table.phase[a, i, j, m]))])


def apply_apo(ps: PathSet, table: ApoTable, rx: NodeArray, k_indices, delta_f: float) -> np.ndarray:
    """CFR [n_rx, n_tx, K] with h_l = sum_p exp(j psi_pl) * f_pl.

    psi is interpolated at each path's arrival direction in the receive
    array frame.  A table that is exactly zero at every path reproduces
    ``channel_cfr`` bit for bit.
    """
    if table.n_antennas != ps.coef.shape[1]:
        raise ValueError("APO table antenna count differs from the receive array")
    az_l, zen_l = rx.to_local(ps.aoa_az, ps.aoa_zen)
    psi = table.interpolate(k_indices, az_l, zen_l)  # [rx, P, K]
    if not np.any(psi):
        return channel_cfr(ps, k_indices, delta_f)
    f = path_cfr(ps.delay_s, np.ones(ps.n_paths), k_indices, delta_f)  # [P, K]
    return np.einsum("prt,rpk,pk->rtk", ps.coef, np.exp(1j * psi), f)


# ---------------------------------------------------------------------------
# TO

def draw_timing_offsets(params: ToParams, n_links: int, rng: np.random.Generator,
                        bound_sigmas: float = 2.0) -> np.ndarray:
    return np.atleast_1d(truncated_normal(rng, params.sigma_s, size=n_links, bound_sigmas=bound_sigmas))


def apply_to(values: np.ndarray, offsets_s, k_indices, delta_f: float, link_axis: int = 0) -> np.ndarray:
    """Multiply subcarrier k (last axis) of link l by exp(-j 2 pi k df t_l)."""
    offsets = np.atleast_1d(np.asarray(offsets_s, float))
    if not np.any(offsets):
        return values
    ramp = np.exp(-2j * np.pi * np.outer(offsets, np.asarray(k_indices, float)) * delta_f)  # [L, K]
    values = np.moveaxis(values, link_axis, 0)
    shape = (ramp.shape[0],) + (1,) * (values.ndim - 2) + (ramp.shape[1],)
    return np.moveaxis(values * ramp.reshape(shape), 0, link_axis)


def apply_to_grid(grid_symbols: np.ndarray, offsets_s, k_indices, delta_f: float) -> np.ndarray:
    """TO on a received grid [K, N_sym, n_rx]; one offset per receive antenna."""
    if not np.any(offsets_s):
        return grid_symbols
    out = apply_to(np.transpose(grid_symbols, (2, 1, 0)), offsets_s, k_indices, delta_f)
    return np.transpose(out, (2, 1, 0))


# ---------------------------------------------------------------------------
# beamsteering error

def quantize_phase(phase, bits: int) -> np.ndarray:
    """Nearest phase-shifter index i in 0..2^M-1."""
    levels = 2 ** bits
    return np.mod(np.rint(np.asarray(phase) * levels / (2 * np.pi)), levels).astype(int)


def perturb_weight(ideal_phase, params: SteeringErrParams, rng: np.random.Generator | None = None,
                   bound_sigmas: float = 2.0) -> np.ndarray:
    """w = 10^(xi/20) exp(j(2 pi i / 2^M + psi)) for each ideal phase."""
    ideal_phase = np.asarray(ideal_phase, float)
    i = quantize_phase(ideal_phase, params.bits)
    xi = psi = 0.0
    if rng is not None:
        xi = truncated_normal(rng, params.amplitude_sigma_db, size=ideal_phase.shape, bound_sigmas=bound_sigmas)
        psi = truncated_normal(rng, params.phase_sigma_rad, size=ideal_phase.shape, bound_sigmas=bound_sigmas)
    return 10 ** (xi / 20) * np.exp(1j * (2 * np.pi * i / 2 ** params.bits + psi))


# ---------------------------------------------------------------------------
# CFO

def apply_cfo(samples: np.ndarray, epsilon: float, fft_length: int, n0: int = 0) -> np.ndarray:
    """Multiply sample n (global index, starting at n0) by exp(j 2 pi eps n / K)."""
    if epsilon == 0:
        return samples
    n = n0 + np.arange(samples.shape[-1])
    return samples * np.exp(2j * np.pi * epsilon * n / fft_length)


# ---------------------------------------------------------------------------
# IQ imbalance

def iq_coefficients(amplitude_mismatch: float, phase_mismatch_rad: float) -> tuple[complex, complex]:
    xi, psi = amplitude_mismatch, phase_mismatch_rad
    alpha = np.cos(psi) + 1j * xi * np.sin(psi)
    beta = xi * np.cos(psi) + 1j * np.sin(psi)
    return complex(alpha), complex(beta)


def image_rejection_db(amplitude_mismatch: float, phase_mismatch_rad: float) -> float:
    a, b = iq_coefficients(amplitude_mismatch, phase_mismatch_rad)
    return float(10 * np.log10(abs(a) ** 2 / abs(b) ** 2))


def _causal_filter(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    return np.apply_along_axis(lambda r: np.convolve(r, taps)[:n], -1, x)


def apply_iq(samples: np.ndarray, params: IqParams, side: str | None = None) -> np.ndarray:
    """y = mu (*) x + nu (*) x^*, filters applied causally and truncated to len(x).

    Transmitter and receiver use the same form; ``side`` (tx/rx) only
    records where the caller inserts it.
    """
    del side
    alpha, beta = iq_coefficients(params.amplitude_mismatch, params.phase_mismatch_rad)
    if params.g_i is None:
        if beta == 0 and alpha == 1:
            return samples
        return alpha * samples - beta * np.conj(samples)
    g_i, g_q = np.asarray(params.g_i, float), np.asarray(params.g_q, float)
    mu = (alpha - beta) / 2 * g_i + (alpha + beta) / 2 * g_q
    nu = (alpha - beta) / 2 * g_i - (alpha + beta) / 2 * g_q
    return _causal_filter(samples, mu) + _causal_filter(np.conj(samples), nu)


# ---------------------------------------------------------------------------
# phase noise

def pn_psd(params: PnParams, f) -> np.ndarray:
    """Multipole/multizero PSD S(f) in rad^2/Hz (two-sided), S(0) from dBc/Hz."""
    f = np.abs(np.asarray(f, float))
    s = np.full(f.shape, 10 ** (params.s0_dbc_hz / 10))
    for fz in params.zero_hz:
        s = s * (1 + (f / fz) ** 2)
    for fp in params.pole_hz:
        s = s / (1 + (f / fp) ** 2)
    return s


def synthesize_pn(params: PnParams, length: int, sample_rate_hz: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Real phase trajectory with two-sided PSD S(f): white noise shaped by sqrt(S fs)."""
    if length < 2:
        raise ValueError("phase-noise length must be >= 2")
    nyq = sample_rate_hz / 2
    for f in params.zero_hz + params.pole_hz:
        if f >= nyq:
            raise ValueError(f"pole/zero frequency {f:g} Hz at or above Nyquist ({nyq:g} Hz)")
    w = rng.standard_normal(length)
    f = np.fft.fftfreq(length, 1 / sample_rate_hz)
    shaped = np.fft.fft(w) * np.sqrt(pn_psd(params, f) * sample_rate_hz)
    return np.real(np.fft.ifft(shaped))


def apply_pn(samples: np.ndarray, phase: np.ndarray) -> np.ndarray:
    if not np.any(phase):
        return samples
    return samples * np.exp(1j * phase)


# ---------------------------------------------------------------------------
# PA nonlinearity

def pan_am_am(r, params: PanParams) -> np.ndarray:
    eta, zeta, a_sat = params.small_signal_gain, params.smoothness, params.a_sat
    g = eta * np.asarray(r, float)
    return g / (1 + (g / a_sat) ** (2 * zeta)) ** (1 / (2 * zeta))


def pan_am_pm_deg(r, params: PanParams) -> np.ndarray:
    r = np.asarray(r, float)
    return params.alpha * r ** params.gamma1 / (1 + (r / params.beta) ** params.gamma2)


def apply_pan(samples: np.ndarray, params: PanParams, normalize: bool = False) -> np.ndarray:
    """Memoryless Rapp AM/AM + modified-Rapp AM/PM; y = 0 where x = 0.

    With ``normalize`` the input is first scaled so its RMS sits
    ``backoff_db`` below A_sat, and the output is scaled back.
    """
    if np.isinf(params.a_sat) and params.alpha == 0 and params.small_signal_gain == 1:
        return samples
    x = np.asarray(samples)
    scale = 1.0
    if normalize:
        rms = np.sqrt(np.mean(np.abs(x) ** 2))
        if rms == 0:
            return x
        scale = params.a_sat * 10 ** (-params.backoff_db / 20) / rms
    xs = x * scale
    r = np.abs(xs)
    unit = np.divide(xs, r, out=np.zeros_like(xs, dtype=complex), where=r > 0)
    y = pan_am_am(r, params) * np.exp(1j * np.deg2rad(pan_am_pm_deg(r, params))) * unit
    return y / scale
