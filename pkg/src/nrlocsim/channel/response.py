"""Frequency responses and channel application.

Path delays are never rounded to the sample grid: each path contributes
A * exp(-j 2 pi df tau k) on subcarrier k, so a delay between two sample
instants disperses its energy over neighbouring CIR taps.
"""

from __future__ import annotations

import warnings

import numpy as np

from ..config import CarrierConfig
from ..waveform import BasebandWaveform, ResourceGrid
from .smallscale import PathSet


class DelayExceedsCP(UserWarning):
    pass


def symmetric_indices(k: int) -> np.ndarray:
    """Subcarrier indices -(K-1)/2 ... (K-1)/2."""
    return np.arange(k) - (k - 1) / 2


def fft_frequency_indices(k_fft: int) -> np.ndarray:
    """Signed frequency index of every FFT bin (bin order)."""
    f = np.arange(k_fft)
    return np.where(f < k_fft // 2, f, f - k_fft)


def path_cfr(tau, amplitude, k_indices, delta_f: float) -> np.ndarray:
    """Per-path CFR A_p exp(-j 2 pi df tau_p k); shape [..., K]."""
    tau = np.asarray(tau, float)
    amplitude = np.asarray(amplitude)
    k = np.asarray(k_indices, float)
    return amplitude[..., None] * np.exp(-2j * np.pi * delta_f * tau[..., None] * k)


def channel_cfr(ps: PathSet, k_indices, delta_f: float, time_s: float = 0.0) -> np.ndarray:
    """Composite CFR [n_rx, n_tx, K] = sum_p coef_p * exp(-j 2 pi df tau_p k)."""
    coef = ps.coef_at(time_s)
    if ps.n_paths == 0:
        return np.zeros(coef.shape[1:] + (len(k_indices),), complex)
    phase = path_cfr(ps.delay_s, np.ones(ps.n_paths), k_indices, delta_f)
    return np.einsum("prt,pk->rtk", coef, phase)


def symbol_times(symbol_indices, carrier: CarrierConfig) -> np.ndarray:
    return np.asarray(symbol_indices) * carrier.symbol_length / carrier.sample_rate_hz


def _check_cp(ps: PathSet, carrier: CarrierConfig) -> None:
    if ps.n_paths and ps.delay_s.max() > carrier.cp_length / carrier.sample_rate_hz:
        warnings.warn(f"path delay {ps.delay_s.max():.3e} s exceeds the cyclic prefix "
                      f"({carrier.cp_length / carrier.sample_rate_hz:.3e} s)", DelayExceedsCP, stacklevel=3)


def apply_channel(waveform: BasebandWaveform, ps: PathSet, carrier: CarrierConfig,
                  cfr: np.ndarray | None = None) -> BasebandWaveform:
    """Filter a CP-OFDM waveform [n_tx, N] through the paths -> [n_rx, N].

    Works symbol by symbol in the frequency domain over all FFT bins, which
    is identical to linear convolution for delays within the cyclic prefix
    (the output CP is regenerated cyclically).  Noise is added by the caller.
    ``cfr`` [n_rx, n_tx, K_fft] in FFT-bin order overrides the static
    path-derived response.
    """
    k_fft, cp = carrier.fft_length, carrier.cp_length
    x = np.atleast_2d(waveform.samples)
    n_sym = len(waveform.symbol_indices)
    if x.shape[1] != n_sym * (k_fft + cp):
        raise ValueError("waveform length does not match its symbol table")
    if ps.coef is None:
        n_rx = 1
    else:
        n_rx = ps.coef.shape[1]
    if ps.n_paths == 0:
        return waveform.with_samples(np.zeros((n_rx, x.shape[1]), complex))
    _check_cp(ps, carrier)
    f = fft_frequency_indices(k_fft)
    body = x.reshape(x.shape[0], n_sym, k_fft + cp)[:, :, cp:]
    xf = np.fft.fft(body, axis=-1)
    times = symbol_times(waveform.symbol_indices, carrier)
    out = np.empty((n_rx, n_sym, k_fft), complex)
    static = ps.doppler_hz is None or cfr is not None
    h = None
    if static:
        h = channel_cfr(ps, f, carrier.subcarrier_spacing_hz) if cfr is None else cfr
    for s in range(n_sym):
        hs = h if static else channel_cfr(ps, f, carrier.subcarrier_spacing_hz, times[s])
        out[:, s] = np.einsum("rtk,tk->rk", hs, xf[:, s])
    yb = np.fft.ifft(out, axis=-1)
    y = np.concatenate([yb[:, :, k_fft - cp:], yb], axis=-1).reshape(n_rx, -1)
    return waveform.with_samples(y)


def apply_channel_grid(grid: ResourceGrid, ps: PathSet, carrier: CarrierConfig,
                       cfr: np.ndarray | None = None) -> ResourceGrid:
    """Grid-domain equivalent of apply_channel (no time-domain impairments).

    ``cfr`` [n_rx, n_tx, K_active] overrides the path-derived response, e.g.
    after APO or TO have been applied to it.
    """
    k = grid.frequency_indices()
    if cfr is None:
        if ps.doppler_hz is not None:
            times = symbol_times(grid.symbol_indices, carrier)
            hs = np.stack([channel_cfr(ps, k, carrier.subcarrier_spacing_hz, t) for t in times], axis=2)
            y = np.einsum("rtsk,kst->ksr", hs, grid.symbols)
            return ResourceGrid(y, np.ones(y.shape, bool), grid.symbol_indices, grid.fft_length)
        cfr = channel_cfr(ps, k, carrier.subcarrier_spacing_hz)
    y = np.einsum("rtk,kst->ksr", cfr, grid.symbols)
    return ResourceGrid(y, np.ones(y.shape, bool), grid.symbol_indices, grid.fft_length)
