"""Simulation parameters: six sections (system, carrier, signal, channel, hi, abf).

Config files are YAML documents with exactly these six top-level sections.
Angles in files are degrees (keys end in ``_deg``); the dataclasses keep the
file values verbatim and expose radians through ``*_rad`` properties, so a
load/dump round trip is exact.  Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import math
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

SPEED_OF_LIGHT = 299_792_458.0
SLOT_SYMBOLS = 14
SUBCARRIERS_PER_RB = 12


class ConfigError(ValueError):
    """Invalid configuration value; ``key`` is the dotted path of the offending field."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def _require(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ConfigError(key, message)


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array in the node's local frame.

    Elements sit in the local y-z plane (y horizontal, z vertical), first
    element at the origin, flattened row-major: index = row * cols + col.
    ``spacing_m`` of None means half a wavelength, resolved when the bundle
    is assembled.  Cross polarization places two slanted elements (+45/-45)
    at every position.
    """

    rows: int = 1
    cols: int = 1
    spacing_m: float | None = None
    element_pattern: str = "isotropic"
    polarization: str = "single"
    downtilt_deg: float = 0.0
    slant_deg: float = 0.0

    def __post_init__(self):
        _require(self.rows >= 1 and self.cols >= 1, "rows", "rows and cols must be >= 1")
        _require(self.spacing_m is None or self.spacing_m > 0, "spacing_m", "must be > 0")
        _require(self.element_pattern in ("isotropic", "directional-3gpp"), "element_pattern",
                 f"unknown pattern {self.element_pattern!r} (isotropic, directional-3gpp)")
        _require(self.polarization in ("single", "cross"), "polarization",
                 f"unknown polarization {self.polarization!r} (single, cross)")

    @property
    def n_positions(self) -> int:
        return self.rows * self.cols

    @property
    def n_elements(self) -> int:
        return self.n_positions * (2 if self.polarization == "cross" else 1)

    def element_positions(self) -> "np.ndarray":
        """Local-frame element positions, shape (n_elements, 3), meters."""
        import numpy as np

        if self.spacing_m is None:
            raise ConfigError("spacing_m", "unresolved; assemble the config bundle first")
        v, h = np.meshgrid(np.arange(self.rows), np.arange(self.cols), indexing="ij")
        pos = np.zeros((self.n_positions, 3))
        pos[:, 1] = h.ravel() * self.spacing_m
        pos[:, 2] = v.ravel() * self.spacing_m
        if self.polarization == "cross":
            pos = np.repeat(pos, 2, axis=0)
        return pos

    def element_slants_rad(self) -> "np.ndarray":
        import numpy as np

        if self.polarization == "cross":
            return np.tile(np.deg2rad([45.0, -45.0]), self.n_positions)
        return np.full(self.n_positions, np.deg2rad(self.slant_deg))


@dataclass(frozen=True)
class DropRegion:
    """Where users are dropped each Monte-Carlo realization.

    ``rectangle``: uniform over x_range_m x y_range_m at height_m.
    ``sector``: around BS ``bs_index`` at 2-D distance ``distance_m``, with the
    local azimuth (array frame of that BS) uniform over ``azimuth_range_deg``.
    """

    region: str = "rectangle"
    x_range_m: tuple[float, float] = (0.0, 0.0)
    y_range_m: tuple[float, float] = (0.0, 0.0)
    height_m: float = 1.5
    bs_index: int = 0
    distance_m: float = 0.0
    azimuth_range_deg: tuple[float, float] = (0.0, 0.0)
    face_bs: bool = True

    def __post_init__(self):
        _require(self.region in ("rectangle", "sector"), "region", "must be rectangle or sector")
        _require(self.height_m > 0, "height_m", "node heights must be > 0")
        if self.region == "sector":
            _require(self.distance_m > 0, "distance_m", "must be > 0 for sector drops")


@dataclass(frozen=True)
class LocalizationConfig:
    aoa_method: str = "dbf"
    scan_range_deg: tuple[float, float] = (-90.0, 90.0)
    scan_step_deg: float = 0.1
    bs_count: int = 2
    max_iter: int = 20
    tol_m: float = 1e-6
    gate_taps: int | None = None

    def __post_init__(self):
        _require(self.aoa_method in ("dbf", "music", "truth"), "aoa_method",
                 "must be dbf, music or truth (geometric LOS azimuths)")
        _require(self.scan_step_deg > 0, "scan_step_deg", "must be > 0")
        _require(self.scan_range_deg[0] < self.scan_range_deg[1], "scan_range_deg", "empty scan range")
        _require(self.bs_count >= 2, "bs_count", "at least 2 BSs are needed for 2-D localization")
        _require(self.max_iter >= 1, "max_iter", "must be >= 1")
        _require(self.gate_taps is None or self.gate_taps >= 1, "gate_taps", "must be >= 1")


@dataclass(frozen=True)
class SystemConfig:
    bandwidth_hz: float = 100e6
    center_frequency_hz: float = 3.5e9
    scenario: str = "indoor-office"
    direction: str = "uplink"
    tx_power_dbm: float = 23.0
    master_seed: int = 0
    frame_number: float = 0.05
    slot_count: int | None = None
    drops: int = 100
    snr_db: tuple[float, ...] = (10.0,)
    workers: int = 1
    bs_positions_m: tuple[tuple[float, float, float], ...] = ((0.0, 0.0, 10.0),)
    bs_orientation_deg: tuple[float, ...] = (0.0,)
    bs_array: ArrayGeometry = field(default_factory=ArrayGeometry)
    user_positions_m: tuple[tuple[float, float, float], ...] = ((10.0, 0.0, 1.5),)
    user_orientation_deg: tuple[float, ...] = (0.0,)
    user_array: ArrayGeometry = field(default_factory=ArrayGeometry)
    user_velocity_mps: tuple[float, float, float] = (0.0, 0.0, 0.0)
    user_drop: DropRegion | None = None
    localization: LocalizationConfig = field(default_factory=LocalizationConfig)

    def __post_init__(self):
        _require(self.bandwidth_hz > 0, "bandwidth_hz", "must be > 0")
        _require(0.5e9 <= self.center_frequency_hz <= 100e9, "center_frequency_hz",
                 f"{self.center_frequency_hz:g} Hz outside [0.5e9, 100e9]")
        _require(self.scenario in ("indoor-office", "umi", "uma", "rmi", "custom"), "scenario",
                 f"unknown scenario {self.scenario!r}")
        _require(self.direction in ("uplink", "downlink"), "direction", "must be uplink or downlink")
        _require(self.master_seed >= 0, "master_seed", "must be an unsigned integer")
        _require(self.frame_number > 0, "frame_number", "must be > 0")
        _require(self.slot_count is None or self.slot_count >= 1, "slot_count", "must be >= 1")
        _require(self.drops >= 1, "drops", "must be >= 1")
        _require(len(self.snr_db) >= 1, "snr_db", "SNR list must be non-empty")
        _require(self.workers >= 1, "workers", "must be >= 1")
        _require(len(self.bs_positions_m) >= 1, "bs_positions_m", "at least one BS is required")
        _require(len(self.user_positions_m) >= 1 or self.user_drop is not None, "user_positions_m",
                 "at least one user (or a user_drop region) is required")
        for i, p in enumerate(self.bs_positions_m):
            _require(len(p) == 3, f"bs_positions_m[{i}]", "positions are 3-D")
            _require(p[2] > 0, f"bs_positions_m[{i}]", "node heights must be > 0")
        for i, p in enumerate(self.user_positions_m):
            _require(len(p) == 3, f"user_positions_m[{i}]", "positions are 3-D")
            _require(p[2] > 0, f"user_positions_m[{i}]", "node heights must be > 0")
        _require(len(self.bs_orientation_deg) in (1, len(self.bs_positions_m)), "bs_orientation_deg",
                 "give one bearing or one per BS")
        _require(len(self.user_orientation_deg) in (1, max(len(self.user_positions_m), 1)),
                 "user_orientation_deg", "give one bearing or one per user")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.center_frequency_hz

    @property
    def n_bs(self) -> int:
        return len(self.bs_positions_m)

    def bs_bearing_rad(self, i: int) -> float:
        o = self.bs_orientation_deg
        return math.radians(o[i] if len(o) > 1 else o[0])

    def user_bearing_rad(self, i: int) -> float:
        o = self.user_orientation_deg
        return math.radians(o[i] if len(o) > 1 else o[0])


@dataclass(frozen=True)
class CarrierConfig:
    subcarrier_spacing_hz: float = 30e3
    fft_length: int = 4096
    grid_length_rb: int = 272
    cp_mode: str = "normal"

    def __post_init__(self):
        _require(self.subcarrier_spacing_hz in (15e3, 30e3, 60e3, 120e3), "subcarrier_spacing_hz",
                 "must be one of 15e3, 30e3, 60e3, 120e3")
        k = self.fft_length
        _require(k >= 16 and (k & (k - 1)) == 0, "fft_length", "must be a power of two >= 16")
        _require(self.grid_length_rb >= 1, "grid_length_rb", "must be >= 1")
        _require(SUBCARRIERS_PER_RB * self.grid_length_rb <= k, "grid_length_rb",
                 f"{SUBCARRIERS_PER_RB * self.grid_length_rb} subcarriers exceed fft_length {k}")
        _require(self.cp_mode == "normal", "cp_mode", "only normal CP is supported")

    @property
    def sample_rate_hz(self) -> float:
        return self.subcarrier_spacing_hz * self.fft_length

    @property
    def n_subcarriers(self) -> int:
        return SUBCARRIERS_PER_RB * self.grid_length_rb

    @property
    def cp_length(self) -> int:
        # normal CP: 144 samples per 2048-point symbol, scaled with the FFT size
        return 144 * self.fft_length // 2048

    @property
    def symbol_length(self) -> int:
        return self.fft_length + self.cp_length

    @property
    def slot_duration_s(self) -> float:
        return 1e-3 * 15e3 / self.subcarrier_spacing_hz

    @property
    def occupied_bandwidth_hz(self) -> float:
        return self.n_subcarriers * self.subcarrier_spacing_hz


_COMBS = {"srs": (2, 4), "prs": (2, 4, 6, 12)}


@dataclass(frozen=True)
class SignalConfig:
    signal_type: str = "srs"
    comb: int = 2
    comb_offset: int = 0
    symbol_start: int = 13
    symbol_count: int = 1
    period_slots: int = 1
    sequence_id: int = 0
    cyclic_shift: int = 0

    def __post_init__(self):
        _require(self.signal_type in _COMBS, "signal_type", "must be srs or prs")
        _require(self.comb in _COMBS[self.signal_type], "comb",
                 f"comb {self.comb} not allowed for {self.signal_type} {_COMBS[self.signal_type]}")
        _require(0 <= self.comb_offset < self.comb, "comb_offset", "must satisfy 0 <= offset < comb")
        _require(self.symbol_count >= 1, "symbol_count", "zero-length allocation")
        _require(0 <= self.symbol_start and self.symbol_start + self.symbol_count <= SLOT_SYMBOLS,
                 "symbol_start", f"allocation {self.symbol_start}+{self.symbol_count} exceeds the 14-symbol slot")
        _require(self.period_slots >= 1, "period_slots", "must be >= 1")
        _require(self.sequence_id >= 0, "sequence_id", "must be unsigned")
        _require(0 <= self.cyclic_shift < 8, "cyclic_shift", "must be in 0..7")

    @property
    def symbols(self) -> range:
        return range(self.symbol_start, self.symbol_start + self.symbol_count)


@dataclass(frozen=True)
class ChannelConfig:
    coefficient_mode: str = "static"
    los_state: str = "los"
    los_probability: str | None = None
    pathloss_model: str = "auto"
    toa_type: str = "absolute"
    ground_reflection: bool = False
    ground_permittivity: float = 5.0
    o2i: bool = False
    o2i_loss_db: float = 0.0
    rays_per_cluster: int = 1
    scenario_table: str | None = None
    lattice_spacing_m: float | None = None

    def __post_init__(self):
        _require(self.coefficient_mode in ("los-only", "static", "dynamic"), "coefficient_mode",
                 "must be los-only, static or dynamic")
        _require(self.los_state in ("los", "nlos", "auto"), "los_state", "must be los, nlos or auto")
        _require(self.los_probability in (None, "inh-open", "inh-mixed", "umi"), "los_probability",
                 "must be inh-open, inh-mixed or umi")
        _require(self.pathloss_model in ("auto", "los", "nlos"), "pathloss_model", "must be auto, los or nlos")
        _require(self.toa_type in ("absolute", "relative"), "toa_type", "must be absolute or relative")
        _require(self.ground_permittivity >= 1.0, "ground_permittivity", "must be >= 1")
        _require(self.o2i_loss_db >= 0, "o2i_loss_db", "must be >= 0")
        _require(self.rays_per_cluster in (1, 20), "rays_per_cluster", "must be 1 or 20")
        _require(self.lattice_spacing_m is None or self.lattice_spacing_m > 0, "lattice_spacing_m", "must be > 0")


@dataclass(frozen=True)
class ApoParams:
    enabled: bool = False
    table_path: str | None = None
    synthetic_amplitude_deg: float = 20.0
    synthetic_seed: int = 0


@dataclass(frozen=True)
class ToParams:
    enabled: bool = False
    sigma_s: float = 5e-9

    def __post_init__(self):
        _require(self.sigma_s >= 0, "sigma_s", "must be >= 0")


@dataclass(frozen=True)
class SteeringErrParams:
    enabled: bool = False
    bits: int = 6
    phase_sigma_deg: float = 0.0
    amplitude_sigma_db: float = 0.0

    def __post_init__(self):
        _require(self.bits >= 1, "bits", "phase shifter needs M >= 1")
        _require(self.phase_sigma_deg >= 0 and self.amplitude_sigma_db >= 0, "phase_sigma_deg",
                 "sigma values must be >= 0")

    @property
    def phase_sigma_rad(self) -> float:
        return math.radians(self.phase_sigma_deg)


@dataclass(frozen=True)
class CfoParams:
    enabled: bool = False
    epsilon: float = 0.0


@dataclass(frozen=True)
class IqParams:
    enabled: bool = False
    amplitude_mismatch: float = 0.0
    phase_mismatch_deg: float = 0.0
    g_i: tuple[float, ...] | None = None
    g_q: tuple[float, ...] | None = None
    side: str = "rx"

    def __post_init__(self):
        _require(self.side in ("tx", "rx"), "side", "must be tx or rx")
        _require((self.g_i is None) == (self.g_q is None), "g_i", "give both g_i and g_q or neither")
        if self.g_i is not None:
            _require(len(self.g_i) == len(self.g_q) and len(self.g_i) >= 1, "g_i",
                     "g_i and g_q must have equal, non-zero length")

    @property
    def phase_mismatch_rad(self) -> float:
        return math.radians(self.phase_mismatch_deg)


@dataclass(frozen=True)
class PnParams:
    enabled: bool = False
    s0_dbc_hz: float = -90.0
    zero_hz: tuple[float, ...] = ()
    pole_hz: tuple[float, ...] = (100e3,)

    def __post_init__(self):
        _require(all(f > 0 for f in self.zero_hz + self.pole_hz), "pole_hz",
                 "pole/zero frequencies must be > 0")


@dataclass(frozen=True)
class PanParams:
    """Rapp AM/AM plus modified-Rapp AM/PM.

    The AM/PM fitting coefficients below are not taken from any measured
    amplifier in this project; they are the widely used 60 GHz values
    (alpha=-345 deg, beta=0.17, gamma1=4, gamma2=10) and should be replaced
    for a specific device.
    """

    enabled: bool = False
    small_signal_gain: float = 1.0
    smoothness: float = 1.1
    a_sat: float = 1.0
    alpha: float = -345.0
    beta: float = 0.17
    gamma1: float = 4.0
    gamma2: float = 10.0
    backoff_db: float = 6.0

    def __post_init__(self):
        _require(self.a_sat > 0, "a_sat", "must be > 0")
        _require(self.smoothness > 0, "smoothness", "must be > 0")
        _require(self.beta > 0, "beta", "must be > 0")


@dataclass(frozen=True)
class ImpairmentProfile:
    """The ``hi`` section: one activation flag + parameter block per model."""

    apo: ApoParams = field(default_factory=ApoParams)
    to: ToParams = field(default_factory=ToParams)
    beamsteering: SteeringErrParams = field(default_factory=SteeringErrParams)
    cfo: CfoParams = field(default_factory=CfoParams)
    iq: IqParams = field(default_factory=IqParams)
    pn: PnParams = field(default_factory=PnParams)
    pan: PanParams = field(default_factory=PanParams)
    truncation_sigmas: float = 2.0

    def __post_init__(self):
        _require(self.truncation_sigmas > 0, "truncation_sigmas", "must be > 0")

    @property
    def active(self) -> tuple[str, ...]:
        return tuple(n for n in ("apo", "to", "beamsteering", "cfo", "iq", "pn", "pan")
                     if getattr(self, n).enabled)


@dataclass(frozen=True)
class AbfConfig:
    enabled: bool = False
    beam_count: int = 12
    sweep_azimuth_deg: tuple[float, float] = (-60.0, 60.0)
    sweep_zenith_deg: float | None = None
    estimators: tuple[str, ...] = ("two-beam",)
    initial_azimuth_deg: tuple[float, float] = (-51.0, -39.0)
    initial_zenith_deg: tuple[float, float] = (84.0, 96.0)
    two_beam_spacing: int = 1
    three_beam_spacing: int = 2

    def __post_init__(self):
        _require(self.beam_count >= 1, "beam_count", "must be >= 1")
        _require(self.sweep_azimuth_deg[0] < self.sweep_azimuth_deg[1], "sweep_azimuth_deg",
                 "sweep range is degenerate")
        for e in self.estimators:
            _require(e in ("sum-diff", "two-beam", "three-beam"), "estimators",
                     f"unknown estimator {e!r} (sum-diff, two-beam, three-beam)")
        _require(self.initial_azimuth_deg[0] <= self.initial_azimuth_deg[1], "initial_azimuth_deg",
                 "range is reversed")
        _require(self.initial_zenith_deg[0] <= self.initial_zenith_deg[1], "initial_zenith_deg",
                 "range is reversed")
        _require(self.two_beam_spacing >= 1 and self.three_beam_spacing >= 1, "two_beam_spacing",
                 "aux beam spacings are positive multiples of pi/N")


SECTIONS = {
    "system": SystemConfig,
    "carrier": CarrierConfig,
    "signal": SignalConfig,
    "channel": ChannelConfig,
    "hi": ImpairmentProfile,
    "abf": AbfConfig,
}


@dataclass(frozen=True)
class SimConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    carrier: CarrierConfig = field(default_factory=CarrierConfig)
    signal: SignalConfig = field(default_factory=SignalConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    hi: ImpairmentProfile = field(default_factory=ImpairmentProfile)
    abf: AbfConfig = field(default_factory=AbfConfig)

    def __post_init__(self):
        _require(self.carrier.occupied_bandwidth_hz <= self.system.bandwidth_hz * (1 + 1e-12),
                 "carrier.grid_length_rb",
                 f"occupied bandwidth {self.carrier.occupied_bandwidth_hz:g} Hz exceeds "
                 f"system bandwidth {self.system.bandwidth_hz:g} Hz")

    @property
    def sample_rate_hz(self) -> float:
        return self.carrier.sample_rate_hz

    @property
    def wavelength_m(self) -> float:
        return self.system.wavelength_m

    @property
    def slot_count(self) -> int:
        """Simulated slots; the frame number is read as a duration in 10 ms frames."""
        if self.system.slot_count is not None:
            return self.system.slot_count
        return max(1, round(self.system.frame_number * 10e-3 / self.carrier.slot_duration_s))

    def resolved(self) -> "SimConfig":
        """Fill half-wavelength defaults for array spacing."""
        half = self.wavelength_m / 2
        sysc = self.system
        arrays = {}
        for name in ("bs_array", "user_array"):
            arr = getattr(sysc, name)
            if arr.spacing_m is None:
                arrays[name] = dataclasses.replace(arr, spacing_m=half)
        if not arrays:
            return self
        return dataclasses.replace(self, system=dataclasses.replace(sysc, **arrays))


# ---------------------------------------------------------------------------
# dict <-> dataclass

def _strip_optional(tp):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1:
            return args[0], True
    return tp, False


def _coerce(tp, value, key: str):
    tp, optional = _strip_optional(tp)
    if value is None:
        if optional:
            return None
        raise ConfigError(key, "value is required")
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(key, "expected a mapping")
        return _from_dict(tp, value, key)
    origin = typing.get_origin(tp)
    if origin is tuple:
        args = typing.get_args(tp)
        if not isinstance(value, (list, tuple)):
            if len(args) == 2 and args[1] is Ellipsis:
                value = [value]
            else:
                raise ConfigError(key, "expected a list")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(args[0], v, f"{key}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ConfigError(key, f"expected {len(args)} entries, got {len(value)}")
        return tuple(_coerce(a, v, f"{key}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        try:
            f = float(value)
        except ValueError:
            raise ConfigError(key, f"expected an integer, got {value!r}") from None
        if f != int(f):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(f)
    if tp is float:
        if isinstance(value, bool):
            raise ConfigError(key, f"expected a number, got {value!r}")
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected a number, got {value!r}") from None
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    raise ConfigError(key, f"unsupported field type {tp}")


def _from_dict(cls, data: dict, prefix: str):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{prefix}.{unknown[0]}", "unknown key")
    kwargs = {k: _coerce(hints[k], v, f"{prefix}.{k}") for k, v in data.items()}
    try:
        return cls(**kwargs)
    except ConfigError as e:
        if e.key.startswith(prefix + ".") or "." in e.key:
            raise
        raise ConfigError(f"{prefix}.{e.key}", str(e).split(": ", 1)[1]) from None


def _to_plain(value):
    if dataclasses.is_dataclass(value):
        return {f.name: _to_plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, tuple):
        return [_to_plain(v) for v in value]
    return value


def config_from_dict(data: dict) -> SimConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config document must be a mapping")
    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise ConfigError(unknown[0], f"unknown section (expected {', '.join(SECTIONS)})")
    sections = {}
    for name, cls in SECTIONS.items():
        sec = data.get(name) or {}
        if not isinstance(sec, dict):
            raise ConfigError(name, "section must be a mapping")
        sections[name] = _from_dict(cls, sec, name)
    try:
        return SimConfig(**sections).resolved()
    except ConfigError:
        raise


def config_to_dict(cfg: SimConfig) -> dict:
    return {name: _to_plain(getattr(cfg, name)) for name in SECTIONS}


def dump_config(cfg: SimConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


def load_config(path: str | Path) -> SimConfig:
    """Read, validate, and resolve a YAML config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(str(path), f"cannot read config file ({e.strerror})") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(str(path), f"parse error: {e}") from None
    cfg = config_from_dict(data or {})
    if cfg.channel.scenario_table is not None and not Path(cfg.channel.scenario_table).is_absolute():
        table = (path.parent / cfg.channel.scenario_table).resolve()
        cfg = dataclasses.replace(cfg, channel=dataclasses.replace(cfg.channel, scenario_table=str(table)))
    return cfg


def with_overrides(cfg: SimConfig, **sections: dict[str, Any]) -> SimConfig:
    """Return a copy with fields replaced per section, e.g. ``system={"drops": 5}``."""
    data = config_to_dict(cfg)
    for name, values in sections.items():
        if name not in SECTIONS:
            raise ConfigError(name, "unknown section")
        data[name].update(values)
    return config_from_dict(data)


def apply_assignments(cfg: SimConfig, assignments: list[str]) -> SimConfig:
    """Apply ``section.field[.sub]=value`` overrides; values are parsed as YAML."""
    if not assignments:
        return cfg
    data = config_to_dict(cfg)
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(item, "override must look like section.field=value")
        parts = key.split(".")
        node = data
        for p in parts[:-1]:
            if not isinstance(node, dict) or p not in node:
                raise ConfigError(key, f"unknown key {p!r}")
            if node[p] is None:
                node[p] = {}
            node = node[p]
        if not isinstance(node, dict):
            raise ConfigError(key, "not a section")
        try:
            node[parts[-1]] = yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise ConfigError(key, f"cannot parse value: {e}") from None
    return config_from_dict(data)
