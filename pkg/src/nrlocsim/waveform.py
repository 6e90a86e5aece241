"""SRS/PRS generation, resource-grid mapping and CP-OFDM.

FFT normalization is unitary in both directions (``ifft * sqrt(K)``,
``fft / sqrt(K)``), so the energy of a grid equals the energy of the
symbol bodies of its waveform.  Active subcarrier ``k`` (0-based over the
12*RB carrier) sits at signed frequency index ``k - K_active/2``; DC is
the first subcarrier of the upper half.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SLOT_SYMBOLS, CarrierConfig, ConfigError, SignalConfig

# staggered comb offsets per symbol of a PRS allocation (TS 38.211 k')
PRS_STAGGER = {
    2: (0, 1),
    4: (0, 2, 1, 3),
    6: (0, 3, 1, 4, 2, 5),
    12: (0, 6, 3, 9, 1, 7, 4, 10, 2, 8, 5, 11),
}
SRS_MAX_CYCLIC_SHIFTS = {2: 8, 4: 12}


@dataclass(frozen=True)
class ResourceGrid:
    """Complex symbols [K_active, N_sym, N_port] with an occupancy mask.

    ``symbol_indices`` are the OFDM symbol numbers (within the burst) of
    the second axis, so sliced grids keep their timing.
    """

    symbols: np.ndarray
    mask: np.ndarray
    symbol_indices: np.ndarray
    fft_length: int

    def __post_init__(self):
        if self.symbols.shape != self.mask.shape or self.symbols.ndim != 3:
            raise ValueError("symbols and mask must share a [K, N_sym, N_port] shape")
        if self.symbols.shape[1] != len(self.symbol_indices):
            raise ValueError("one symbol index per grid column required")

    @property
    def n_subcarriers(self) -> int:
        return self.symbols.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.symbols.shape[1]

    @property
    def n_ports(self) -> int:
        return self.symbols.shape[2]

    @property
    def subcarrier0_offset(self) -> int:
        """FFT bin of active subcarrier 0."""
        return (-(self.n_subcarriers // 2)) % self.fft_length

    def frequency_indices(self) -> np.ndarray:
        return active_frequency_indices(self.n_subcarriers)

    def select_symbols(self, indices) -> "ResourceGrid":
        pos = [int(np.flatnonzero(self.symbol_indices == i)[0]) for i in indices]
        return ResourceGrid(self.symbols[:, pos], self.mask[:, pos], self.symbol_indices[pos], self.fft_length)

    def occupied_symbols(self) -> np.ndarray:
        return self.symbol_indices[self.mask.any(axis=(0, 2))]


@dataclass(frozen=True)
class BasebandWaveform:
    """Time samples [N_port, N_samples] of consecutive CP-OFDM symbols."""

    samples: np.ndarray
    sample_rate_hz: float
    fft_length: int
    cp_length: int
    symbol_indices: np.ndarray
    n_subcarriers: int
    meta: dict = field(default_factory=dict)

    @property
    def symbol_length(self) -> int:
        return self.fft_length + self.cp_length

    @property
    def symbol_starts(self) -> np.ndarray:
        """Sample index of each symbol's CP start."""
        return np.arange(len(self.symbol_indices)) * self.symbol_length

    @property
    def body_starts(self) -> np.ndarray:
        return self.symbol_starts + self.cp_length

    def with_samples(self, samples: np.ndarray) -> "BasebandWaveform":
        return BasebandWaveform(samples, self.sample_rate_hz, self.fft_length, self.cp_length,
                                self.symbol_indices, self.n_subcarriers, dict(self.meta))


def active_frequency_indices(n_subcarriers: int) -> np.ndarray:
    """Signed subcarrier index (relative to DC) of each active subcarrier."""
    return np.arange(n_subcarriers) - n_subcarriers // 2


def largest_prime_at_most(n: int) -> int:
    for p in range(n, 1, -1):
        if all(p % d for d in range(2, int(math.isqrt(p)) + 1)):
            return p
    raise ValueError(f"no prime <= {n}")


def generate_zc_base(sequence_id: int, length: int, cyclic_shift: float = 0.0) -> np.ndarray:
    """Cyclically extended Zadoff-Chu base sequence of ``length`` samples.

    Group u = sequence_id mod 30 (no hopping, base index v = 0); root q
    follows the TS 38.211 long-sequence rule over the largest prime
    N_ZC <= length.  ``cyclic_shift`` is the phase-ramp slope alpha (rad).
    """
    if length < 3:
        raise ValueError(f"ZC length must be >= 3, got {length}")
    n_zc = largest_prime_at_most(length)
    u = sequence_id % 30
    q_bar = n_zc * (u + 1) / 31
    q = int(math.floor(q_bar + 0.5)) % n_zc
    if q == 0:
        q = 1
    m = np.arange(n_zc)
    x = np.exp(-1j * np.pi * q * m * (m + 1) / n_zc)
    n = np.arange(length)
    return np.exp(1j * cyclic_shift * n) * x[n % n_zc]


def gold_sequence(c_init: int, length: int) -> np.ndarray:
    """Length-31 Gold sequence c(n) of TS 38.211 (Nc = 1600)."""
    nc = 1600
    total = length + nc
    x1 = np.zeros(total + 31, dtype=np.uint8)
    x2 = np.zeros(total + 31, dtype=np.uint8)
    x1[0] = 1
    x2[:31] = [(c_init >> i) & 1 for i in range(31)]
    for n in range(total):
        x1[n + 31] = x1[n + 3] ^ x1[n]
        x2[n + 31] = x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n]
    return (x1[nc:nc + length] ^ x2[nc:nc + length]).astype(np.int8)


def prs_sequence(sequence_id: int, slot: int, symbol: int, length: int) -> np.ndarray:
    nid = sequence_id
    c_init = ((1 << 22) * (nid // 1024)
              + (1 << 10) * (SLOT_SYMBOLS * slot + symbol + 1) * (2 * (nid % 1024) + 1)
              + nid % 1024) % (1 << 31)
    c = gold_sequence(c_init, 2 * length)
    return ((1 - 2 * c[0::2]) + 1j * (1 - 2 * c[1::2])) / np.sqrt(2)


def generate_signal_grid(signal: SignalConfig, carrier: CarrierConfig, n_slots: int = 1,
                         tx_power_dbm: float | None = None) -> ResourceGrid:
    """Single-port grid spanning ``n_slots`` slots with the signal mapped.

    With ``tx_power_dbm`` the symbols are scaled to sqrt(mW) so the total
    power in each occupied OFDM symbol equals the transmit power.
    Periodicity: the signal is present in slots 0, period, 2*period, ...
    """
    if signal.symbol_count < 1:
        raise ConfigError("signal.symbol_count", "zero-length allocation")
    if signal.symbol_start + signal.symbol_count > SLOT_SYMBOLS:
        raise ConfigError("signal.symbol_start", "allocation exceeds the 14-symbol slot")
    k_active = carrier.n_subcarriers
    n_sym = SLOT_SYMBOLS * n_slots
    sym = np.zeros((k_active, n_sym, 1), dtype=complex)
    comb = signal.comb
    n_re = k_active // comb
    for slot in range(0, n_slots, signal.period_slots):
        for j, l in enumerate(signal.symbols):
            if signal.signal_type == "srs":
                offset = signal.comb_offset
                alpha = 2 * np.pi * signal.cyclic_shift / SRS_MAX_CYCLIC_SHIFTS[comb]
                seq = generate_zc_base(signal.sequence_id, n_re, alpha)
            else:
                stagger = PRS_STAGGER[comb]
                offset = (signal.comb_offset + stagger[j % len(stagger)]) % comb
                seq = prs_sequence(signal.sequence_id, slot, l, n_re)
            k = comb * np.arange(n_re) + offset
            sym[k, slot * SLOT_SYMBOLS + l, 0] = seq
    if tx_power_dbm is not None:
        sym *= np.sqrt(10 ** (tx_power_dbm / 10) / n_re)
    mask = sym != 0
    return ResourceGrid(sym, mask, np.arange(n_sym), carrier.fft_length)


def ofdm_modulate(grid: ResourceGrid, carrier: CarrierConfig) -> BasebandWaveform:
    k_fft = carrier.fft_length
    if grid.n_subcarriers > k_fft:
        raise ValueError("grid does not fit the FFT")
    bins = active_frequency_indices(grid.n_subcarriers) % k_fft
    freq = np.zeros((grid.n_ports, grid.n_symbols, k_fft), dtype=complex)
    freq[:, :, bins] = np.transpose(grid.symbols, (2, 1, 0))
    body = np.fft.ifft(freq, axis=-1) * np.sqrt(k_fft)
    cp = carrier.cp_length
    time = np.concatenate([body[:, :, k_fft - cp:], body], axis=-1)
    return BasebandWaveform(time.reshape(grid.n_ports, -1), carrier.sample_rate_hz, k_fft, cp,
                            np.asarray(grid.symbol_indices), grid.n_subcarriers)


def ofdm_demodulate(waveform: BasebandWaveform, carrier: CarrierConfig) -> ResourceGrid:
    k_fft, cp = carrier.fft_length, carrier.cp_length
    n_sym = len(waveform.symbol_indices)
    x = np.atleast_2d(waveform.samples)
    if x.shape[1] != n_sym * (k_fft + cp):
        raise ValueError(f"waveform has {x.shape[1]} samples, expected {n_sym} x {k_fft + cp}")
    body = x.reshape(x.shape[0], n_sym, k_fft + cp)[:, :, cp:]
    freq = np.fft.fft(body, axis=-1) / np.sqrt(k_fft)
    bins = active_frequency_indices(waveform.n_subcarriers) % k_fft
    sym = np.transpose(freq[:, :, bins], (2, 1, 0))
    return ResourceGrid(sym, np.ones(sym.shape, dtype=bool), np.asarray(waveform.symbol_indices), k_fft)


def papr_db(samples: np.ndarray) -> float:
    p = np.abs(samples) ** 2
    return float(10 * np.log10(p.max() / p.mean()))
