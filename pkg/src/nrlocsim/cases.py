"""Monte-Carlo drivers for the three application cases.

Each drop is a pure function of (config, case spec, drop index): every
random draw comes from a stream keyed by (master_seed, drop, link, tag), so
drops can run in any order or process and any one of them can be replayed
alone.  Results are sorted by drop before they are returned.

Link pipeline per drop: user placement, channel realization, element CFR
(with APO / TO), transmit grid precoding, optional time-domain path for
PAN / IQ / PN / CFO, analog or digital combining, AWGN, LS CFR and RSRP.
The SNR is defined per receive element and resource element before any
beamforming, for each link separately.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache, partial

import numpy as np

from . import beamforming as bf
from .channel.antenna import NodeArray, unit_vector
from .channel.link import realize_link
from .channel.response import apply_channel, channel_cfr
from .channel.smallscale import PathSet
from .config import ConfigError, SimConfig
from .estimation import (SingularGeometry, bearing_from_azimuth, estimate_aoa, estimate_cfr_ls,
                         estimate_rsrp, localize_2d, scan_grid, select_best_beam)
from .impairments import (apply_apo, apply_cfo, apply_iq, apply_pan, apply_pn, apply_to,
                          draw_timing_offsets, load_apo_table, perturb_weight, synthesize_pn,
                          synthetic_apo_table)
from .rng import stream, stream_label, truncated_normal_range
from .waveform import ResourceGrid, generate_signal_grid, ofdm_demodulate, ofdm_modulate

CASES = ("localization-2d", "beam-sweep", "bf-angle")
TIME_DOMAIN_HI = ("cfo", "iq", "pn", "pan")
USER_LINK = 0


class CaseError(RuntimeError):
    """A case cannot run with the given configuration (beyond per-drop failures)."""


@dataclass(frozen=True)
class CaseSpec:
    case: str
    snr_db: tuple[float, ...]
    drops: int
    out_dir: str | None = None
    emit_pathsets: bool = False
    emit_beam_reports: bool = False
    emit_cdf: bool = True
    only_drop: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigError("case", f"unknown case {self.case!r} ({', '.join(CASES)})")
        if self.drops < 1:
            raise ConfigError("drops", "must be >= 1")
        if len(self.snr_db) < 1:
            raise ConfigError("snr_db", "SNR list must be non-empty")
        if self.only_drop is not None and not 0 <= self.only_drop < self.drops:
            raise ConfigError("only_drop", f"drop {self.only_drop} outside 0..{self.drops - 1}")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")

    @property
    def drop_indices(self) -> list[int]:
        return [self.only_drop] if self.only_drop is not None else list(range(self.drops))


def case_spec(cfg: SimConfig, case: str, **overrides) -> CaseSpec:
    """CaseSpec from the config's system section; keyword overrides win."""
    base = dict(case=case, snr_db=tuple(cfg.system.snr_db), drops=cfg.system.drops,
                workers=cfg.system.workers)
    base.update({k: v for k, v in overrides.items() if v is not None})
    base["snr_db"] = tuple(float(s) for s in base["snr_db"])
    return CaseSpec(**base)


@dataclass(frozen=True)
class ResultRow:
    case: str
    variant: str
    drop: int
    snr_db: float
    truth: tuple[float, ...]
    estimate: tuple[float, ...]
    error: float
    flag: str
    stream: str


@dataclass(frozen=True)
class BeamReport:
    """One beam measurement; angles are array-frame azimuth and elevation (90 deg - zenith)."""

    variant: str
    drop: int
    snr_db: float
    beam: int
    az_deg: float
    el_deg: float
    rsrp_dbm: float


@dataclass
class DropOutput:
    drop: int
    rows: list[ResultRow] = field(default_factory=list)
    beams: list[BeamReport] = field(default_factory=list)
    pathsets: list[tuple[int, int, PathSet]] = field(default_factory=list)


@dataclass
class CaseResult:
    spec: CaseSpec
    rows: list[ResultRow]
    beams: list[BeamReport]
    pathsets: list[tuple[int, int, PathSet]]

    def variants(self) -> list[str]:
        return sorted({r.variant for r in self.rows})

    def errors(self, variant: str | None = None, snr_db: float | None = None,
               failures: float | None = np.inf) -> np.ndarray:
        """Errors in drop order; failed drops map to ``failures`` (dropped if None)."""
        out = []
        for r in self.rows:
            if (variant is None or r.variant == variant) and (snr_db is None or r.snr_db == snr_db):
                if np.isfinite(r.error):
                    out.append(r.error)
                elif failures is not None:
                    out.append(failures)
        return np.array(out, float)


# ---------------------------------------------------------------------------
# shared link machinery

@lru_cache(maxsize=8)
def tx_grid(cfg: SimConfig) -> ResourceGrid:
    grid = generate_signal_grid(cfg.signal, cfg.carrier, cfg.slot_count, cfg.system.tx_power_dbm)
    used = grid.occupied_symbols()
    if used.size == 0:
        raise CaseError("the configured signal occupies no symbol in the simulated slots")
    return grid.select_symbols(used)


@lru_cache(maxsize=8)
def _apo_table(cfg: SimConfig, n_antennas: int):
    p = cfg.hi.apo
    if p.table_path:
        return load_apo_table(p.table_path)
    k = tx_grid(cfg).frequency_indices()
    return synthetic_apo_table(n_antennas, float(k.min()), float(k.max()), p.synthetic_amplitude_deg,
                               np.random.default_rng(p.synthetic_seed))


def hi_label(cfg: SimConfig) -> str:
    return "+".join(cfg.hi.active) or "hi-off"


def user_for_drop(cfg: SimConfig, drop: int) -> tuple[np.ndarray, float]:
    """User position and array bearing for one drop."""
    sysc = cfg.system
    region = sysc.user_drop
    if region is None:
        return np.asarray(sysc.user_positions_m[0], float), sysc.user_bearing_rad(0)
    rng = stream(sysc.master_seed, drop, USER_LINK, "user")
    if region.region == "rectangle":
        x = rng.uniform(*region.x_range_m)
        y = rng.uniform(*region.y_range_m)
        pos = np.array([x, y, region.height_m])
        return pos, sysc.user_bearing_rad(0)
    bs = np.asarray(sysc.bs_positions_m[region.bs_index], float)
    az_local = np.deg2rad(rng.uniform(*region.azimuth_range_deg))
    az = sysc.bs_bearing_rad(region.bs_index) + az_local
    pos = np.array([bs[0] + region.distance_m * np.cos(az), bs[1] + region.distance_m * np.sin(az),
                    region.height_m])
    bearing = az + np.pi if region.face_bs else sysc.user_bearing_rad(0)
    return pos, float(bearing)


def _arrays(cfg: SimConfig, bs_index: int, user_bearing: float) -> tuple[NodeArray, NodeArray]:
    """(rx, tx) arrays for the configured direction."""
    sysc = cfg.system
    bs = NodeArray(sysc.bs_array, sysc.bs_bearing_rad(bs_index))
    ut = NodeArray(sysc.user_array, user_bearing)
    return (bs, ut) if sysc.direction == "uplink" else (ut, bs)


def link_cfr(cfg: SimConfig, ps: PathSet, rx: NodeArray, k, drop: int, link: int) -> np.ndarray:
    """Element CFR [n_rx, n_tx, K] with APO and TO when enabled."""
    df = cfg.carrier.subcarrier_spacing_hz
    if cfg.hi.apo.enabled:
        h = apply_apo(ps, _apo_table(cfg, rx.n_elements), rx, k, df)
    else:
        h = channel_cfr(ps, k, df)
    if cfg.hi.to.enabled:
        offsets = draw_timing_offsets(cfg.hi.to, rx.n_elements, stream(cfg.system.master_seed, drop, link, "to"),
                                      cfg.hi.truncation_sigmas)
        h = apply_to(h, offsets, k, df, link_axis=0)
    return h


def tx_weights(n_tx: int) -> np.ndarray:
    """Constant broadside transmit beam with unit total power."""
    return np.ones(n_tx, complex) / np.sqrt(n_tx)


def element_power(h: np.ndarray, tx: ResourceGrid, w_tx: np.ndarray) -> float:
    """Mean received power per element and occupied RE (noiseless)."""
    g2 = np.sum(np.abs(np.einsum("rtk,t->rk", h, w_tx)) ** 2, axis=0)  # [K]
    x2 = np.where(tx.mask[:, :, 0], np.abs(tx.symbols[:, :, 0]) ** 2, 0.0)
    return float(np.sum(g2[:, None] * x2) / (tx.mask[:, :, 0].sum() * h.shape[0]))


def _needs_waveform(cfg: SimConfig) -> bool:
    return any(getattr(cfg.hi, n).enabled for n in TIME_DOMAIN_HI)


def _complex_noise(rng: np.random.Generator, shape, var) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(np.asarray(var) / 2)


def receive(cfg: SimConfig, h: np.ndarray, tx: ResourceGrid, snr_db, noise_rngs,
            combiner: np.ndarray | None = None, ps: PathSet | None = None, drop: int = 0,
            link: int = 0) -> list[ResourceGrid]:
    """Received grids [K, S, C], one per SNR, after channel, impairments, combining and noise.

    ``combiner`` [S, n_rx] holds one analog receive beam per symbol (C = 1);
    None keeps every element (digital, C = n_rx).  Noise variance per
    element is set from the element SNR; after combining it is
    sigma^2 * ||w_s||^2.  ``noise_rngs`` supplies one stream per SNR.
    """
    snrs = np.atleast_1d(np.asarray(snr_db, float))
    if len(noise_rngs) != len(snrs):
        raise ValueError("one noise stream per SNR point required")
    w_tx = tx_weights(h.shape[1])
    p_el = element_power(h, tx, w_tx)
    n_sym = tx.n_symbols
    if combiner is not None and combiner.shape[0] != n_sym:
        raise ValueError("one receive beam per transmitted symbol required")
    gain = np.ones(n_sym) if combiner is None else np.sum(np.abs(combiner) ** 2, axis=1)
    if _needs_waveform(cfg):
        return [_receive_waveform(cfg, h, tx, w_tx, p_el / 10 ** (snr / 10), gain, rng, combiner, ps, drop, link)
                for snr, rng in zip(snrs, noise_rngs)]
    g = np.einsum("rtk,t->kr", h, w_tx)  # [K, R]
    if combiner is None:
        y0 = g[:, None, :] * tx.symbols  # [K, S, R]
    else:
        y0 = ((g @ np.conj(combiner).T) * tx.symbols[:, :, 0])[..., None]  # [K, S, 1]
    out = []
    for snr, rng in zip(snrs, noise_rngs):
        var = (p_el / 10 ** (snr / 10)) * gain[None, :, None]
        y = y0 + _complex_noise(rng, y0.shape, var)
        out.append(ResourceGrid(y, np.ones(y.shape, bool), tx.symbol_indices, tx.fft_length))
    return out


def _receive_waveform(cfg, h, tx, w_tx, sigma2, gain, noise_rng, combiner, ps, drop, link) -> ResourceGrid:
    carrier, hi = cfg.carrier, cfg.hi
    seed = cfg.system.master_seed
    ports = ResourceGrid(tx.symbols * w_tx[None, None, :], np.repeat(tx.mask, len(w_tx), axis=2),
                         tx.symbol_indices, tx.fft_length)
    wf = ofdm_modulate(ports, carrier)
    x = wf.samples
    if hi.pan.enabled:
        x = apply_pan(x, hi.pan, normalize=True)
    if hi.iq.enabled and hi.iq.side == "tx":
        x = apply_iq(x, hi.iq)
    # out-of-band bins are treated as an ideal band-limiting filter
    h_fft = np.zeros(h.shape[:2] + (carrier.fft_length,), complex)
    h_fft[:, :, tx.frequency_indices() % carrier.fft_length] = h
    y = apply_channel(wf.with_samples(x), ps, carrier, cfr=h_fft).samples  # [R, N]
    n_sym, length = tx.n_symbols, wf.symbol_length
    y = y.reshape(y.shape[0], n_sym, length)
    if combiner is not None:
        y = np.einsum("rsl,sr->sl", y, np.conj(combiner))[None]
    y = y + _complex_noise(noise_rng, y.shape, sigma2 * gain[None, :, None])
    if hi.pn.enabled:
        phase = synthesize_pn(hi.pn, y.shape[-1] * n_sym, carrier.sample_rate_hz, stream(seed, drop, link, "pn"))
        y = apply_pn(y.reshape(y.shape[0], -1), phase).reshape(y.shape)
    if hi.cfo.enabled:
        for s, idx in enumerate(tx.symbol_indices):
            y[:, s] = apply_cfo(y[:, s], hi.cfo.epsilon, carrier.fft_length, int(idx) * length)
    if hi.iq.enabled and hi.iq.side == "rx":
        y = apply_iq(y, hi.iq)
    return ofdm_demodulate(wf.with_samples(y.reshape(y.shape[0], -1)), carrier)


def _noise_rng(cfg: SimConfig, drop: int, link: int, tag: str, snr_index: int) -> np.random.Generator:
    return stream(cfg.system.master_seed, drop, link, f"noise:{tag}:{snr_index}")


def _run(cfg: SimConfig, spec: CaseSpec, drop_fn) -> CaseResult:
    cfg = cfg.resolved()
    fn = partial(drop_fn, cfg, spec)
    drops = spec.drop_indices
    if spec.workers > 1 and len(drops) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            outs = list(ex.map(fn, drops, chunksize=max(1, len(drops) // (4 * spec.workers))))
    else:
        outs = [fn(d) for d in drops]
    outs.sort(key=lambda o: o.drop)
    return CaseResult(spec, [r for o in outs for r in o.rows], [b for o in outs for b in o.beams],
                      [p for o in outs for p in o.pathsets])


# ---------------------------------------------------------------------------
# 2-D AOA localization

def _localization_drop(cfg: SimConfig, spec: CaseSpec, drop: int) -> DropOutput:
    sysc, loc = cfg.system, cfg.system.localization
    seed = sysc.master_seed
    out = DropOutput(drop)
    pos, bearing = user_for_drop(cfg, drop)
    tx = tx_grid(cfg)
    k = tx.frequency_indices()
    n_bs = sysc.n_bs
    rsrp = np.full((len(spec.snr_db), n_bs), -np.inf)
    cfrs = [[None] * n_bs for _ in spec.snr_db]
    true_az = np.empty(n_bs)
    rx_arrays = []
    for b in range(n_bs):
        ps = realize_link(cfg, b, pos, bearing, drop)
        if spec.emit_pathsets:
            out.pathsets.append((drop, b, ps))
        rx, _ = _arrays(cfg, b, bearing)
        rx_arrays.append(rx)
        d = pos - np.asarray(sysc.bs_positions_m[b], float)
        true_az[b] = np.arctan2(d[1], d[0])
        h = link_cfr(cfg, ps, rx, k, drop, b)
        ys = receive(cfg, h, tx, spec.snr_db, [_noise_rng(cfg, drop, b, "srs", si) for si in range(len(spec.snr_db))],
                     ps=ps, drop=drop, link=b)
        for si, y in enumerate(ys):
            rsrp[si, b] = estimate_rsrp(y, tx)
            cfrs[si][b] = estimate_cfr_ls(y, tx)
    bs_xy = np.asarray(sysc.bs_positions_m, float)[:, :2]
    scan = scan_grid(loc.scan_range_deg[0], loc.scan_range_deg[1], loc.scan_step_deg)
    variant = f"{loc.aoa_method}/{hi_label(cfg)}"
    label = stream_label(seed, drop, "*", "drop")
    for si, snr in enumerate(spec.snr_db):
        order = np.argsort(-rsrp[si], kind="stable")[: loc.bs_count]
        chosen = np.sort(order)
        if loc.aoa_method == "truth":
            az = true_az[chosen]
        else:
            az = np.array([rx_arrays[b].bearing_rad + estimate_aoa(
                cfrs[si][b], sysc.bs_array, cfg.wavelength_m, scan, loc.aoa_method,
                gate_taps=loc.gate_taps).angle_rad for b in chosen])
        flag, est, err = "", (np.nan, np.nan), np.nan
        try:
            res = localize_2d(bearing_from_azimuth(az), bs_xy[chosen], None, loc.max_iter, loc.tol_m)
            est = (float(res.position[0]), float(res.position[1]))
            err = float(np.hypot(est[0] - pos[0], est[1] - pos[1]))
            if not res.converged:
                flag = "no-convergence"
        except SingularGeometry:
            flag = "singular-geometry"
        except ValueError as e:
            flag = f"failed: {e}"
        bs_tag = "bs=" + "/".join(map(str, chosen))
        out.rows.append(ResultRow(spec.case, variant, drop, float(snr), (float(pos[0]), float(pos[1])), est,
                                  err, f"{flag};{bs_tag}" if flag else bs_tag, label))
    return out


def run_localization_case(cfg: SimConfig, spec: CaseSpec) -> CaseResult:
    if cfg.system.n_bs < 2:
        raise ConfigError("system.bs_positions_m", "localization needs at least two BSs")
    if cfg.system.localization.bs_count > cfg.system.n_bs:
        raise ConfigError("system.localization.bs_count", "more BSs selected than deployed")
    return _run(cfg, spec, _localization_drop)


# ---------------------------------------------------------------------------
# beam sweep

def _local_los(cfg: SimConfig, pos, bs_index: int = 0) -> tuple[float, float]:
    bs = NodeArray(cfg.system.bs_array, cfg.system.bs_bearing_rad(bs_index))
    d = np.asarray(pos, float) - np.asarray(cfg.system.bs_positions_m[bs_index], float)
    az = np.arctan2(d[1], d[0])
    zen = np.arccos(d[2] / np.linalg.norm(d))
    a, z = bs.to_local(az, zen)
    return float(a), float(z)


def _beamsweep_drop(cfg: SimConfig, spec: CaseSpec, drop: int) -> DropOutput:
    sysc, abf = cfg.system, cfg.abf
    seed = sysc.master_seed
    out = DropOutput(drop)
    bs_index = sysc.user_drop.bs_index if sysc.user_drop is not None else 0
    pos, bearing = user_for_drop(cfg, drop)
    ps = realize_link(cfg, bs_index, pos, bearing, drop)
    if spec.emit_pathsets:
        out.pathsets.append((drop, bs_index, ps))
    rx, _ = _arrays(cfg, bs_index, bearing)
    tx_all = tx_grid(cfg)
    if tx_all.n_symbols < abf.beam_count:
        raise CaseError(f"{abf.beam_count} beams need {abf.beam_count} signal symbols, "
                        f"got {tx_all.n_symbols}")
    tx = tx_all.select_symbols(tx_all.symbol_indices[: abf.beam_count])
    az_true, zen_true = _local_los(cfg, pos, bs_index)
    zen_beam = np.deg2rad(abf.sweep_zenith_deg) if abf.sweep_zenith_deg is not None else zen_true
    steer = cfg.hi.beamsteering
    beams = bf.allocate_beams(np.deg2rad(abf.sweep_azimuth_deg), abf.beam_count, sysc.bs_array,
                              cfg.wavelength_m, zen_beam, steer if steer.enabled else None,
                              stream(seed, drop, bs_index, "steer") if steer.enabled else None)
    h = link_cfr(cfg, ps, rx, tx.frequency_indices(), drop, bs_index)
    variant = f"{sysc.bs_array.rows}x{sysc.bs_array.cols}/{abf.sweep_azimuth_deg[0]:g}:{abf.sweep_azimuth_deg[1]:g}"
    label = stream_label(seed, drop, bs_index, "drop")
    rngs = [_noise_rng(cfg, drop, bs_index, "sweep", si) for si in range(len(spec.snr_db))]
    ys = receive(cfg, h, tx, spec.snr_db, rngs, beams.weights, ps, drop, bs_index)
    for snr, y in zip(spec.snr_db, ys):
        rsrp = estimate_rsrp(y, tx, per_symbol=True)
        best = select_best_beam(rsrp)
        if spec.emit_beam_reports:
            for b in range(beams.n_beams):
                out.beams.append(BeamReport(variant, drop, float(snr), b, float(np.rad2deg(beams.az_rad[b])),
                                            90 - float(np.rad2deg(beams.zen_rad[b])), float(rsrp[b])))
        est = float(np.rad2deg(beams.az_rad[best]))
        truth = float(np.rad2deg(az_true))
        out.rows.append(ResultRow(spec.case, variant, drop, float(snr), (truth,), (est,), est - truth,
                                  f"beam={best}", label))
    return out


def run_beamsweep_case(cfg: SimConfig, spec: CaseSpec) -> CaseResult:
    return _run(cfg, spec, _beamsweep_drop)


# ---------------------------------------------------------------------------
# beamforming-based angle estimation

def great_circle_deg(az1, zen1, az2, zen2) -> float:
    a, b = unit_vector(az1, zen1), unit_vector(az2, zen2)
    return float(np.rad2deg(np.arctan2(np.linalg.norm(np.cross(a, b)), np.dot(a, b))))


def estimator_beams(estimator: str, geometry, wavelength: float, u_h0: float, u_v0: float,
                    eta_h: float, eta_v: float) -> tuple[np.ndarray, np.ndarray]:
    """Ideal beam weights [B, n] in measurement order and their pointing cosines [B, 2]."""
    d = geometry.spacing_m
    du_h = bf.cosine_from_spatial_frequency(eta_h, d, wavelength)
    du_v = bf.cosine_from_spatial_frequency(eta_v, d, wavelength)
    w0 = bf.weights_from_cosines(geometry, u_h0, u_v0, wavelength)
    if estimator == "sum-diff":
        w = np.stack([w0, bf.diff_weights(w0, geometry, "h"), bf.diff_weights(w0, geometry, "v")])
        return w, np.tile([u_h0, u_v0], (3, 1))
    cos = np.array([[u_h0 - du_h, u_v0], [u_h0 + du_h, u_v0], [u_h0, u_v0 - du_v], [u_h0, u_v0 + du_v]])
    if estimator == "three-beam":
        cos = np.vstack([[u_h0, u_v0], cos])
    elif estimator != "two-beam":
        raise ValueError(f"unknown estimator {estimator!r}")
    return bf.weights_from_cosines(geometry, cos[:, 0], cos[:, 1], wavelength), cos


def _perturbed(w: np.ndarray, estimator: str, geometry, steer, rng) -> np.ndarray:
    """Pass beams through the phase shifters; difference beams keep their exact pi flip."""
    if estimator != "sum-diff":
        return perturb_weight(np.angle(w), steer, rng)
    w0 = perturb_weight(np.angle(w[0]), steer, rng)
    return np.stack([w0, bf.diff_weights(w0, geometry, "h"), bf.diff_weights(w0, geometry, "v")])


def refine_angle(estimator: str, y: ResourceGrid, tx: ResourceGrid, geometry, wavelength: float,
                 u_h0: float, u_v0: float, eta_h: float, eta_v: float,
                 noise_floor_dbm: float = -np.inf) -> tuple[float, float, str]:
    """(u_h, u_v, flag) from the per-beam measurements of one estimator."""
    d = geometry.spacing_m
    syms = tx.symbol_indices
    if estimator == "sum-diff":
        hs = [estimate_cfr_ls(y.select_symbols([s]), tx.select_symbols([s])).values[0] for s in syms[:3]]
        y_sum = np.vdot(hs[0], hs[0])
        rh = bf.estimate_sumdiff(y_sum, np.vdot(hs[0], hs[1]), u_h0, geometry.cols, d, wavelength)
        rv = bf.estimate_sumdiff(y_sum, np.vdot(hs[0], hs[2]), u_v0, geometry.rows, d, wavelength)
        flag = "out-of-coverage" if (rh.out_of_coverage or rv.out_of_coverage) else ""
        return rh.u, rv.u, flag
    p = [float(v) for v in estimate_rsrp(y, tx, per_symbol=True)]
    center = None
    if estimator == "three-beam":
        center, p = p[0], p[1:]
    mu_h0 = bf.spatial_frequency(u_h0, d, wavelength)
    mu_v0 = bf.spatial_frequency(u_v0, d, wavelength)
    mu_h = bf.estimate_aux_pair(p[0], p[1], mu_h0, eta_h, estimator, center, noise_floor_dbm)
    mu_v = bf.estimate_aux_pair(p[2], p[3], mu_v0, eta_v, estimator, center, noise_floor_dbm)
    return (float(bf.cosine_from_spatial_frequency(mu_h, d, wavelength)),
            float(bf.cosine_from_spatial_frequency(mu_v, d, wavelength)), "")


def _bfangle_drop(cfg: SimConfig, spec: CaseSpec, drop: int) -> DropOutput:
    sysc, abf = cfg.system, cfg.abf
    seed = sysc.master_seed
    geom = sysc.bs_array
    lam = cfg.wavelength_m
    out = DropOutput(drop)
    pos, bearing = user_for_drop(cfg, drop)
    ps = realize_link(cfg, 0, pos, bearing, drop)
    if spec.emit_pathsets:
        out.pathsets.append((drop, 0, ps))
    rx, _ = _arrays(cfg, 0, bearing)
    tx_all = tx_grid(cfg)
    h = link_cfr(cfg, ps, rx, tx_all.frequency_indices(), drop, 0)
    az_true, zen_true = _local_los(cfg, pos)
    init = stream(seed, drop, 0, "initial-beam")
    az0 = np.deg2rad(truncated_normal_range(init, *abf.initial_azimuth_deg))
    zen0 = np.deg2rad(truncated_normal_range(init, *abf.initial_zenith_deg))
    u_h0, u_v0 = (float(v) for v in bf.direction_cosines(az0, zen0))
    steer = cfg.hi.beamsteering
    truth = (float(np.rad2deg(az_true)), float(np.rad2deg(zen_true)))
    label = stream_label(seed, drop, 0, "drop")
    for est in abf.estimators:
        spacing = abf.three_beam_spacing if est == "three-beam" else abf.two_beam_spacing
        eta_h, eta_v = spacing * np.pi / geom.cols, spacing * np.pi / geom.rows
        w, cos = estimator_beams(est, geom, lam, u_h0, u_v0, eta_h, eta_v)
        if steer.enabled:
            w = _perturbed(w, est, geom, steer, stream(seed, drop, 0, f"steer:{est}"))
        if tx_all.n_symbols < len(w):
            raise CaseError(f"{est} needs {len(w)} signal symbols, got {tx_all.n_symbols}")
        tx = tx_all.select_symbols(tx_all.symbol_indices[: len(w)])
        variant = est if not cfg.hi.active else f"{est}/{hi_label(cfg)}"
        rngs = [_noise_rng(cfg, drop, 0, est, si) for si in range(len(spec.snr_db))]
        ys = receive(cfg, h, tx, spec.snr_db, rngs, w, ps, drop, 0)
        for snr, y in zip(spec.snr_db, ys):
            if spec.emit_beam_reports:
                rsrp = estimate_rsrp(y, tx, per_symbol=True)
                for b in range(len(w)):
                    baz, bzen = bf.angles_from_cosines(*cos[b])
                    out.beams.append(BeamReport(variant, drop, float(snr), b, float(np.rad2deg(baz)),
                                                90 - float(np.rad2deg(bzen)), float(rsrp[b])))
            try:
                u_h, u_v, flag = refine_angle(est, y, tx, geom, lam, u_h0, u_v0, eta_h, eta_v)
                az, zen = bf.angles_from_cosines(u_h, u_v)
                estimate = (float(np.rad2deg(az)), float(np.rad2deg(zen)))
                err = great_circle_deg(az, zen, az_true, zen_true)
            except ValueError as e:
                estimate, err, flag = (np.nan, np.nan), np.nan, f"failed: {e}"
            out.rows.append(ResultRow(spec.case, variant, drop, float(snr), truth, estimate, err,
                                      flag, label))
    return out


def run_bfangle_case(cfg: SimConfig, spec: CaseSpec) -> CaseResult:
    if not cfg.abf.estimators:
        raise ConfigError("abf.estimators", "select at least one estimator")
    return _run(cfg, spec, _bfangle_drop)


RUNNERS = {"localization-2d": run_localization_case, "beam-sweep": run_beamsweep_case,
           "bf-angle": run_bfangle_case}


def run_case(cfg: SimConfig, spec: CaseSpec) -> CaseResult:
    return RUNNERS[spec.case](cfg, spec)


__all__ = ["CASES", "BeamReport", "CaseError", "CaseResult", "CaseSpec", "DropOutput", "ResultRow",
           "case_spec", "great_circle_deg", "receive", "run_beamsweep_case", "run_bfangle_case", "run_case",
           "run_localization_case", "user_for_drop"]
