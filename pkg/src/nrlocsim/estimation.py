"""Receiver processing: LS channel estimates, RSRP, beam selection, AOA, 2-D localization, metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamforming import weights_from_cosines
from .config import ArrayGeometry
from .waveform import ResourceGrid


@dataclass(frozen=True)
class Cfr:
    """LS channel estimate ``values`` [n_rx, K_occ] on signed subcarrier indices ``k``."""

    values: np.ndarray
    k: np.ndarray
    time_s: float = 0.0

    def __post_init__(self):
        if self.values.shape[-1] != len(self.k):
            raise ValueError("one subcarrier index per CFR column required")
        if len(self.k) > 1 and np.any(np.diff(self.k) <= 0):
            raise ValueError("subcarrier indices must be strictly increasing")


def _matched(received: ResourceGrid, known: ResourceGrid):
    if received.n_subcarriers != known.n_subcarriers:
        raise ValueError("received and known grids have different subcarrier counts")
    if known.n_ports != 1:
        raise ValueError("known grid must be single-port")
    pos = [int(np.flatnonzero(received.symbol_indices == s)[0]) for s in known.symbol_indices
           if s in set(received.symbol_indices.tolist())]
    if len(pos) != known.n_symbols:
        raise ValueError("received grid lacks symbols of the known grid")
    y = received.symbols[:, pos]  # [K, S, R]
    x = known.symbols[:, :, 0]  # [K, S]
    occ = known.mask[:, :, 0]
    if not occ.any():
        raise ValueError("known grid has no occupied resource elements")
    if np.any(np.abs(x[occ]) == 0):
        raise ValueError("known symbol with zero magnitude")
    return y, x, occ


def estimate_cfr_ls(received: ResourceGrid, known: ResourceGrid, time_s: float = 0.0) -> Cfr:
    """Y/X on occupied REs; repeated subcarriers (several symbols) are averaged."""
    y, x, occ = _matched(received, known)
    ratio = np.where(occ[..., None], y / np.where(occ, x, 1)[..., None], 0)
    counts = occ.sum(axis=1)
    keep = counts > 0
    h = ratio.sum(axis=1)[keep] / counts[keep, None]  # [K_occ, R]
    return Cfr(h.T.copy(), received.frequency_indices()[keep], time_s)


def estimate_rsrp(received: ResourceGrid, known: ResourceGrid, per_antenna: bool = False,
                  per_symbol: bool = False):
    """Mean per-RE power of the matched-correlated signal, |Y X*|^2 / |X|^2, in dBm.

    Grid values carry sqrt(mW).  Averages over receive antennas unless
    ``per_antenna`` and over symbols unless ``per_symbol`` (then the
    leading axis runs over the known grid's symbols).
    """
    y, x, occ = _matched(received, known)
    xx = np.where(occ, x, 1)
    p = np.abs(y * np.conj(xx)[..., None]) ** 2 / (np.abs(xx) ** 2)[..., None]  # [K, S, R]
    p = np.where(occ[..., None], p, 0.0)
    if per_symbol:
        n = occ.sum(axis=0)
        if np.any(n == 0):
            raise ValueError("a known symbol has no occupied resource elements")
        lin = p.sum(axis=0) / n[:, None]  # [S, R]
    else:
        lin = p.sum(axis=(0, 1)) / occ.sum()  # [R]
    if not per_antenna:
        lin = lin.mean(axis=-1)
    with np.errstate(divide="ignore"):
        return 10 * np.log10(lin)


def select_best_beam(rsrp) -> int:
    """Index of the maximal RSRP; ties go to the lowest index."""
    r = np.asarray(rsrp, float)
    if r.size == 0:
        raise ValueError("no beam reports")
    return int(np.argmax(r))


def gate_delay_taps(cfr: Cfr, n_taps: int) -> np.ndarray:
    """Keep the ``n_taps`` strongest CIR taps; returns tap snapshots [n_rx, n_taps].

    Assumes uniformly spaced subcarriers (a comb).
    """
    cir = np.fft.ifft(cfr.values, axis=-1)
    power = np.sum(np.abs(cir) ** 2, axis=0)
    keep = np.sort(np.argsort(power, kind="stable")[::-1][:n_taps])
    return cir[:, keep]


@dataclass(frozen=True)
class AoaEstimate:
    angle_rad: float
    scan_rad: np.ndarray
    spectrum: np.ndarray


def scan_grid(lo_deg: float = -90.0, hi_deg: float = 90.0, step_deg: float = 0.1) -> np.ndarray:
    n = int(round((hi_deg - lo_deg) / step_deg)) + 1
    return np.deg2rad(lo_deg + step_deg * np.arange(n))


def estimate_aoa(cfr: Cfr, geometry: ArrayGeometry, wavelength: float, scan_rad=None,
                 method: str = "dbf", n_sources: int = 1, gate_taps: int | None = None) -> AoaEstimate:
    """Local azimuth of arrival from a 1-D scan along the array's horizontal axis.

    dbf: P(theta) = sum_k |a(theta)^H h_k|^2.  music: 1 / ||E_n^H a||^2 with
    the noise subspace of the sample covariance over subcarriers.
    """
    if geometry.n_elements < 2:
        raise ValueError("AOA estimation needs at least two antennas")
    scan = scan_grid() if scan_rad is None else np.asarray(scan_rad, float)
    if scan.size == 0:
        raise ValueError("empty scan grid")
    h = cfr.values if gate_taps is None else gate_delay_taps(cfr, gate_taps)
    a = weights_from_cosines(geometry, np.sin(scan), 0.0, wavelength)  # [S, R]
    if method == "dbf":
        spec = np.sum(np.abs(np.conj(a) @ h) ** 2, axis=-1)
    elif method == "music":
        r = h @ h.conj().T / h.shape[1]
        _, vec = np.linalg.eigh(r)
        en = vec[:, : r.shape[0] - n_sources]
        spec = 1.0 / np.maximum(np.sum(np.abs(np.conj(a) @ en) ** 2, axis=-1), 1e-300)
    else:
        raise ValueError(f"unknown AOA method {method!r}")
    return AoaEstimate(float(scan[int(np.argmax(spec))]), scan, spec)


# ---------------------------------------------------------------------------
# localization
#
# Bearings follow the observation model g_i(p) = atan2(x - x_i, y - y_i): the
# angle from the +y axis toward +x, so g = pi/2 - (azimuth from +x).

def bearing_from_azimuth(az_rad):
    return np.angle(np.exp(1j * (np.pi / 2 - np.asarray(az_rad, float))))


def bearings(p, bs_xy) -> np.ndarray:
    d = np.asarray(p, float)[None, :2] - np.asarray(bs_xy, float)[:, :2]
    return np.arctan2(d[:, 0], d[:, 1])


def bearing_jacobian(p, bs_xy) -> np.ndarray:
    """Rows [(y - y_i) / r^2, -(x - x_i) / r^2]."""
    d = np.asarray(p, float)[None, :2] - np.asarray(bs_xy, float)[:, :2]
    r2 = np.sum(d ** 2, axis=1)
    if np.any(r2 == 0):
        raise ValueError("estimate coincides with a BS position")
    return np.stack([d[:, 1] / r2, -d[:, 0] / r2], axis=1)


class SingularGeometry(ValueError):
    pass


def bearing_lines_intersection(theta, bs_xy) -> np.ndarray:
    """Least-squares intersection of the bearing lines (x - x_i) cos t - (y - y_i) sin t = 0."""
    theta = np.asarray(theta, float)
    bs = np.asarray(bs_xy, float)[:, :2]
    a = np.stack([np.cos(theta), -np.sin(theta)], axis=1)
    b = bs[:, 0] * np.cos(theta) - bs[:, 1] * np.sin(theta)
    ata = a.T @ a
    if np.linalg.cond(ata) > 1e12:
        raise SingularGeometry("bearing lines are parallel (collinear geometry)")
    return np.linalg.solve(ata, a.T @ b)


@dataclass(frozen=True)
class LocalizationResult:
    position: np.ndarray
    iterations: int
    converged: bool


def localize_2d(theta, bs_xy, p0=None, max_iter: int = 20, tol: float = 1e-6) -> LocalizationResult:
    """Gauss-Newton on the bearing model: p <- (B^T B)^-1 B^T (theta - g(p)) + p.

    ``p0``: an explicit start, ``"centroid"`` of the BS positions, or None
    for the least-squares intersection of the bearing lines.
    """
    theta = np.asarray(theta, float)
    bs = np.asarray(bs_xy, float)[:, :2]
    if len(theta) != len(bs) or len(bs) < 2:
        raise ValueError("need one bearing per BS and at least two BSs")
    if p0 is None:
        p = bearing_lines_intersection(theta, bs)
    elif isinstance(p0, str) and p0 == "centroid":
        p = bs.mean(axis=0)
    else:
        p = np.asarray(p0, float)[:2].copy()
    for it in range(1, max_iter + 1):
        b = bearing_jacobian(p, bs)
        btb = b.T @ b
        if np.linalg.cond(btb) > 1e12:
            raise SingularGeometry("B^T B is singular (collinear geometry)")
        resid = np.angle(np.exp(1j * (theta - bearings(p, bs))))
        step = np.linalg.solve(btb, b.T @ resid)
        p = p + step
        if np.linalg.norm(step) < tol:
            return LocalizationResult(p, it, True)
    return LocalizationResult(p, max_iter, False)


# ---------------------------------------------------------------------------
# metrics

@dataclass(frozen=True)
class Metrics:
    """``rmse`` is the spread about the sample mean; ``rms`` is about zero (ground truth)."""

    n: int
    mean: float
    rmse: float
    rms: float
    cdf_x: np.ndarray
    cdf_p: np.ndarray


def ecdf(values) -> tuple[np.ndarray, np.ndarray]:
    x = np.sort(np.asarray(values, float))
    return x, np.arange(1, len(x) + 1) / len(x)


def compute_metrics(errors) -> Metrics:
    e = np.asarray(errors, float).ravel()
    if e.size == 0:
        raise ValueError("no samples")
    m = float(np.mean(e))
    x, p = ecdf(e)
    return Metrics(e.size, m, float(np.sqrt(np.mean((e - m) ** 2))), float(np.sqrt(np.mean(e ** 2))), x, p)
