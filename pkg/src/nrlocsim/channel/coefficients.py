"""Per-path, per-antenna-pair channel coefficients."""

from __future__ import annotations

import dataclasses

import numpy as np

from .antenna import NodeArray, unit_vector
from .smallscale import PathSet

MODES = ("los-only", "static", "dynamic")


def polarization_matrices(ps: PathSet, wavelength: float) -> np.ndarray:
    """2x2 coupling matrix per path, [P, 2, 2] over (theta, phi) components."""
    n = ps.n_paths
    m = np.zeros((n, 2, 2), complex)
    kappa_inv = np.sqrt(10 ** (-np.where(np.isfinite(ps.xpr_db), ps.xpr_db, np.inf) / 10))
    ph = np.exp(1j * ps.phases)
    m[:, 0, 0] = ph[:, 0]
    m[:, 0, 1] = kappa_inv * ph[:, 1]
    m[:, 1, 0] = kappa_inv * ph[:, 2]
    m[:, 1, 1] = ph[:, 3]
    geo = ps.geometry
    if ps.is_los.any():
        d = geo.d3d if geo is not None else 0.0
        m[ps.is_los] = np.array([[1, 0], [0, -1]]) * np.exp(-2j * np.pi * d / wavelength)
    gr = ps.is_ground_reflection
    if gr.any():
        d = geo.ground_reflection_distance
        rot = np.exp(-2j * np.pi * d / wavelength)
        m[gr, 0, 0] = ps.gr_coeff[gr, 0] * rot
        m[gr, 0, 1] = 0
        m[gr, 1, 0] = 0
        m[gr, 1, 1] = -ps.gr_coeff[gr, 1] * rot
    return m


def generate_coefficients(ps: PathSet, rx: NodeArray, tx: NodeArray, wavelength: float,
                          mode: str = "static", ut_velocity=(0.0, 0.0, 0.0),
                          o2i_loss_db: float = 0.0) -> PathSet:
    """Fill ``coef`` [P, n_rx, n_tx]; arrival angles are at ``rx``.

    Every coefficient carries field patterns, polarization coupling, array
    phases exp(j 2 pi r_hat . d / lambda) at both ends, sqrt(path power), and
    the large-scale loss 10^(-(PL + SF + O2I)/20).  ``los-only`` keeps the
    LOS path alone at unit power; ``dynamic`` adds the Doppler frequency of
    the moving user to each path.
    """
    if mode not in MODES:
        raise ValueError(f"unknown coefficient mode {mode!r}")
    if mode == "los-only":
        if not ps.is_los.any():
            raise ValueError("los-only coefficients need a LOS link")
        ps = ps.subset(ps.is_los)
        ps = dataclasses.replace(ps, power=np.ones(1))

    f_rx_t, f_rx_p = rx.field_gcs(ps.aoa_az, ps.aoa_zen)
    f_tx_t, f_tx_p = tx.field_gcs(ps.aod_az, ps.aod_zen)
    m = polarization_matrices(ps, wavelength)
    # rx row vector [F_t, F_p] . M . [F_t; F_p] tx column vector
    t_theta = m[:, 0, 0, None] * f_tx_t + m[:, 0, 1, None] * f_tx_p
    t_phi = m[:, 1, 0, None] * f_tx_t + m[:, 1, 1, None] * f_tx_p
    h = f_rx_t[:, :, None] * t_theta[:, None, :] + f_rx_p[:, :, None] * t_phi[:, None, :]
    h *= rx.array_phase(ps.aoa_az, ps.aoa_zen, wavelength)[:, :, None]
    h *= tx.array_phase(ps.aod_az, ps.aod_zen, wavelength)[:, None, :]
    h *= np.sqrt(ps.power)[:, None, None]

    lsp = ps.lsp
    loss_db = o2i_loss_db + (lsp.pathloss_db + lsp.sf_db if lsp is not None else 0.0)
    h *= 10 ** (-loss_db / 20)

    doppler = None
    if mode == "dynamic":
        v = np.asarray(ut_velocity, float)
        # direction of the path as seen from the user end
        az, zen = (ps.aoa_az, ps.aoa_zen) if ps.tx_is_bs else (ps.aod_az, ps.aod_zen)
        doppler = unit_vector(az, zen) @ v / wavelength
    return dataclasses.replace(ps, coef=h, doppler_hz=doppler)
