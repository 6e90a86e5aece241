"""Grid-of-beams allocation, steering weights and beam-based angle refinement.

Weights follow the channel's array-phase convention: element m of a beam
pointing along unit vector u gets exp(j 2 pi d_m . u / lambda), and a
receive beam combines y = w^H h.  For a planar array in the local y-z plane
the horizontal direction cosine is u_h = sin(zen) sin(az) and the vertical
one is u_v = cos(zen) (local angles, zenith 90 deg = horizon).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ArrayGeometry, SteeringErrParams
from .impairments import perturb_weight

HALF_POWER_FACTOR = 0.886
SERIES_THRESHOLD = 1e-6


def beamwidth_3db(n: int, d: float, wavelength: float, theta: float = 0.0) -> float:
    """Approximate 3 dB beamwidth 0.886 lambda / (N d cos theta), radians."""
    if n < 2:
        raise ValueError("beamwidth needs N >= 2 elements")
    c = np.cos(theta)
    if abs(c) < 1e-12:
        raise ValueError("beamwidth undefined at endfire (theta = +-90 deg)")
    return HALF_POWER_FACTOR * wavelength / (n * d * c)


def direction_cosines(az, zen) -> tuple[np.ndarray, np.ndarray]:
    az, zen = np.asarray(az, float), np.asarray(zen, float)
    return np.sin(zen) * np.sin(az), np.cos(zen)


def angles_from_cosines(u_h, u_v) -> tuple[np.ndarray, np.ndarray]:
    zen = np.arccos(np.clip(u_v, -1.0, 1.0))
    s = np.sin(zen)
    az = np.arcsin(np.clip(np.divide(u_h, s, out=np.zeros_like(np.asarray(u_h, float)), where=s > 0), -1, 1))
    return az, zen


def weights_from_cosines(geometry: ArrayGeometry, u_h, u_v, wavelength: float) -> np.ndarray:
    """Unit-modulus weights [..., n_elements] for direction cosines (u_h, u_v)."""
    pos = geometry.element_positions()
    u_h = np.asarray(u_h, float)[..., None]
    u_v = np.asarray(u_v, float)[..., None]
    return np.exp(2j * np.pi * (pos[:, 1] * u_h + pos[:, 2] * u_v) / wavelength)


def steering_weights(geometry: ArrayGeometry, az, zen, wavelength: float,
                     steering_error: SteeringErrParams | None = None,
                     rng: np.random.Generator | None = None, bound_sigmas: float = 2.0) -> np.ndarray:
    """Weights for local angles (az, zen), optionally through the phase-shifter model."""
    w = weights_from_cosines(geometry, *direction_cosines(az, zen), wavelength)
    if steering_error is not None and steering_error.enabled:
        w = perturb_weight(np.angle(w), steering_error, rng, bound_sigmas)
    return w


def half_mask(geometry: ArrayGeometry | None, n: int, axis: str = "h") -> np.ndarray:
    """True for elements in the second half along ``axis`` (h: columns, v: rows)."""
    if geometry is None:
        if n % 2:
            raise ValueError("difference beam needs an even element count")
        m = np.zeros(n, bool)
        m[n // 2:] = True
        return m
    count = geometry.cols if axis == "h" else geometry.rows
    if count % 2:
        raise ValueError(f"difference beam needs an even element count along axis {axis!r}")
    v, h = np.meshgrid(np.arange(geometry.rows), np.arange(geometry.cols), indexing="ij")
    idx = (h if axis == "h" else v).ravel()
    m = idx >= count // 2
    if geometry.polarization == "cross":
        m = np.repeat(m, 2)
    return m


def diff_weights(w_sum: np.ndarray, geometry: ArrayGeometry | None = None, axis: str = "h") -> np.ndarray:
    """Sum-beam weights with the second half (along ``axis``) negated."""
    w = np.array(w_sum, dtype=complex)
    w[..., half_mask(geometry, w.shape[-1], axis)] *= -1
    return w


@dataclass(frozen=True)
class SumDiffResult:
    u: float
    alpha: float
    out_of_coverage: bool


def coverage_alpha() -> float:
    """|alpha| bound for half the 3 dB beamwidth: pi * 0.886 / 2."""
    return np.pi * HALF_POWER_FACTOR / 2


def estimate_sumdiff(y_sum: complex, y_diff: complex, u_probe: float, n: int, d: float,
                     wavelength: float) -> SumDiffResult:
    """Invert y_diff / y_sum = -j tan(alpha/2), alpha = pi d N (u_act - u_probe) / lambda.

    The ratio is monotone for |alpha| < pi (the sum-beam main lobe);
    estimates with |alpha| beyond half the 3 dB beamwidth are flagged.
    """
    if abs(y_sum) <= 1e-300 or not np.isfinite(y_sum):
        raise ValueError("sum-beam output is zero; ratio undefined")
    ratio = y_diff / y_sum
    x = -ratio.imag
    alpha = 2 * x if abs(x) < SERIES_THRESHOLD else 2 * np.arctan(x)
    u = u_probe + alpha * wavelength / (np.pi * d * n)
    return SumDiffResult(float(u), float(alpha), bool(abs(alpha) > coverage_alpha()))


def aux_pair_offset(p_plus: float, p_minus: float, eta: float) -> float:
    """Spatial-frequency offset from the pair centre given linear powers.

    Exact for array-factor beams steered to centre +- eta with
    eta = pi l / N and the target inside (-eta, eta).
    """
    if p_plus <= 0 and p_minus <= 0:
        raise ValueError("both auxiliary beams have zero power")
    if p_minus <= 0:
        return float(eta)
    if p_plus <= 0:
        return float(-eta)
    r = np.sqrt(p_plus / p_minus)
    return float(2 * np.arctan(np.tan(eta / 2) * (r - 1) / (r + 1)))


def estimate_aux_pair(rsrp_minus_dbm: float, rsrp_plus_dbm: float, mu0: float, eta: float,
                      mode: str = "two-beam", rsrp_center_dbm: float | None = None,
                      noise_floor_dbm: float = -np.inf) -> float:
    """Refined spatial frequency mu (= 2 pi d u / lambda) around initial beam mu0.

    two-beam: beams at mu0 +- eta.  three-beam: the initial beam plus the
    stronger of the two neighbours at mu0 +- eta form a pair centred half
    way between them with half-spacing eta/2.
    """
    levels = [rsrp_minus_dbm, rsrp_plus_dbm] + ([] if rsrp_center_dbm is None else [rsrp_center_dbm])
    if all(v <= noise_floor_dbm for v in levels):
        raise ValueError("all beam RSRPs are below the noise floor")
    lin = lambda v: 10 ** (v / 10)
    if mode == "two-beam":
        return mu0 + aux_pair_offset(lin(rsrp_plus_dbm), lin(rsrp_minus_dbm), eta)
    if mode == "three-beam":
        if rsrp_center_dbm is None:
            raise ValueError("three-beam mode needs the initial-beam RSRP")
        half = eta / 2
        if rsrp_plus_dbm >= rsrp_minus_dbm:
            return mu0 + half + aux_pair_offset(lin(rsrp_plus_dbm), lin(rsrp_center_dbm), half)
        return mu0 - half + aux_pair_offset(lin(rsrp_center_dbm), lin(rsrp_minus_dbm), half)
    raise ValueError(f"unknown aux-pair mode {mode!r}")


def spatial_frequency(u, d: float, wavelength: float):
    return 2 * np.pi * d * np.asarray(u) / wavelength


def cosine_from_spatial_frequency(mu, d: float, wavelength: float):
    return np.asarray(mu) * wavelength / (2 * np.pi * d)


@dataclass(frozen=True)
class BeamSet:
    """Ordered beams: local angles, weights [B, n_elements], 3 dB widths."""

    az_rad: np.ndarray
    zen_rad: np.ndarray
    weights: np.ndarray
    beamwidth_rad: np.ndarray
    bits: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_beams(self) -> int:
        return len(self.az_rad)


def beam_centers(lo: float, hi: float, count: int) -> np.ndarray:
    if count < 1:
        raise ValueError("beam count must be >= 1")
    if not hi > lo:
        raise ValueError("sweep range is degenerate")
    return lo + (np.arange(count) + 0.5) * (hi - lo) / count


def allocate_beams(az_range_rad, count: int, geometry: ArrayGeometry, wavelength: float,
                   zen_rad: float = np.pi / 2, steering_error: SteeringErrParams | None = None,
                   rng: np.random.Generator | None = None) -> BeamSet:
    """Evenly partition an azimuth range; adjacent spacing must not exceed the 3 dB width."""
    az = beam_centers(az_range_rad[0], az_range_rad[1], count)
    n = geometry.cols
    bw = np.array([beamwidth_3db(n, geometry.spacing_m, wavelength, a) for a in az]) if n >= 2 \
        else np.full(count, np.inf)
    if count > 1:
        spacing = (az_range_rad[1] - az_range_rad[0]) / count
        if spacing > bw.min():
            raise ValueError(f"beam spacing {np.rad2deg(spacing):.3g} deg exceeds the 3 dB "
                             f"beamwidth {np.rad2deg(bw.min()):.3g} deg")
    zen = np.full(count, zen_rad)
    w = steering_weights(geometry, az, zen, wavelength, steering_error, rng)
    bits = steering_error.bits if steering_error is not None and steering_error.enabled else None
    return BeamSet(az, zen, w, bw, bits)


def combine(weights: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Beam outputs w^H h; weights [..., n], h [n, ...] -> [..., ...]."""
    return np.tensordot(np.conj(weights), h, axes=([-1], [0]))
