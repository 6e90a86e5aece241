"""Cluster delays, powers, angles, XPRs and random phases (TR 38.901 steps 5-10).

Generation follows the downlink convention: departure at the BS, arrival
at the user.  ``PathSet.swap`` turns a set around for uplink links.

One deliberate departure from the standard recipe: after the clusters are
drawn, delays and angle offsets (relative to the LOS direction) are scaled
so that each realization's power-weighted RMS delay spread and angle
spreads equal the large-scale parameters exactly.  The LOS K-factor
corrections (C_tau and friends) become redundant under this scaling and are
not applied to delays.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from ..config import SPEED_OF_LIGHT
from ..scenarios import ScenarioTable
from .geometry import LinkGeometry
from .lsp import LargeScaleParams

CLUSTER_CUTOFF_DB = -25.0
NEGLIGIBLE_NLOS = 1e-9

_C_PHI = {4: 0.779, 5: 0.860, 8: 1.018, 10: 1.090, 11: 1.123, 12: 1.146, 14: 1.190,
          15: 1.211, 16: 1.226, 19: 1.273, 20: 1.289, 25: 1.358}
_C_THETA = {8: 0.889, 10: 0.957, 11: 1.031, 12: 1.104, 15: 1.1088, 19: 1.184, 20: 1.178, 25: 1.282}
RAY_OFFSETS = np.array([0.0447, 0.1413, 0.2492, 0.3715, 0.5129, 0.6797, 0.8844, 1.1481, 1.5195, 2.1551])


def _table_value(table: dict, n: int) -> float:
    keys = np.array(sorted(table))
    return float(np.interp(n, keys, [table[k] for k in keys]))


@dataclass(frozen=True)
class PathSet:
    """Propagation paths of one link, arrays of length P.

    Angles are global radians (zenith from +z).  ``coef`` [P, n_rx, n_tx]
    is filled by generate_coefficients; ``gr_coeff`` [P, 2] holds the
    (vertical, horizontal) Fresnel coefficients of ground reflections.
    """

    delay_s: np.ndarray
    power: np.ndarray
    aod_az: np.ndarray
    aod_zen: np.ndarray
    aoa_az: np.ndarray
    aoa_zen: np.ndarray
    xpr_db: np.ndarray
    phases: np.ndarray
    is_los: np.ndarray
    is_ground_reflection: np.ndarray
    cluster: np.ndarray
    gr_coeff: np.ndarray
    tx_is_bs: bool = True
    geometry: LinkGeometry | None = None
    lsp: LargeScaleParams | None = None
    coef: np.ndarray | None = None
    doppler_hz: np.ndarray | None = None

    @property
    def n_paths(self) -> int:
        return len(self.delay_s)

    def coef_at(self, time_s: float = 0.0) -> np.ndarray:
        """Coefficients with the Doppler phase ramp evaluated at ``time_s``."""
        if self.coef is None:
            raise ValueError("path coefficients not generated")
        if self.doppler_hz is None or time_s == 0:
            return self.coef
        return self.coef * np.exp(2j * np.pi * self.doppler_hz * time_s)[:, None, None]

    def swap(self) -> "PathSet":
        """Exchange transmitter and receiver ends (downlink <-> uplink)."""
        # reciprocity: the polarization coupling matrix is transposed, so the
        # cross-terms of the random phases trade places
        ph = self.phases[:, [0, 2, 1, 3]]
        coef = None if self.coef is None else np.transpose(self.coef, (0, 2, 1))
        return dataclasses.replace(self, aod_az=self.aoa_az, aod_zen=self.aoa_zen,
                                   aoa_az=self.aod_az, aoa_zen=self.aod_zen, phases=ph,
                                   tx_is_bs=not self.tx_is_bs, coef=coef)

    def subset(self, keep) -> "PathSet":
        keep = np.asarray(keep)
        arrays = {f.name: getattr(self, f.name)[keep] for f in dataclasses.fields(self)
                  if isinstance(getattr(self, f.name), np.ndarray)}
        return dataclasses.replace(self, **arrays)


def empty_pathset(tx_is_bs: bool = True) -> PathSet:
    z = np.zeros(0)
    return PathSet(z, z, z, z, z, z, z, np.zeros((0, 4)), np.zeros(0, bool), np.zeros(0, bool),
                   np.zeros(0, int), np.ones((0, 2), complex), tx_is_bs)


def wrap_angle(a):
    return np.angle(np.exp(1j * np.asarray(a, float)))


def fold_zenith(z):
    z = np.mod(np.asarray(z, float), 2 * np.pi)
    return np.where(z > np.pi, 2 * np.pi - z, z)


def weighted_spread(x: np.ndarray, p: np.ndarray) -> float:
    p = p / p.sum()
    m = np.sum(p * x)
    return float(np.sqrt(max(np.sum(p * (x - m) ** 2), 0.0)))


def _rescale(offsets: np.ndarray, p: np.ndarray, target: float) -> np.ndarray:
    s = weighted_spread(offsets, p)
    if s <= 0 or target <= 0:
        return offsets
    return offsets * (target / s)


def fresnel_coefficients(grazing_rad: float, permittivity: float) -> tuple[complex, complex]:
    """(Gamma_V, Gamma_H) for a smooth dielectric ground."""
    s, c2 = np.sin(grazing_rad), np.cos(grazing_rad) ** 2
    root = np.sqrt(complex(permittivity - c2))
    gv = (permittivity * s - root) / (permittivity * s + root)
    gh = (s - root) / (s + root)
    return complex(gv), complex(gh)


def generate_small_scale(lsp: LargeScaleParams, geometry: LinkGeometry, table: ScenarioTable,
                         rng: np.random.Generator, rays_per_cluster: int = 1,
                         absolute_toa: bool = True, ground_reflection: bool = False,
                         ground_permittivity: float = 5.0, cluster_count: int | None = None) -> PathSet:
    n = table.cluster_count if cluster_count is None else cluster_count
    if n < 1:
        raise ValueError("cluster_count must be >= 1")
    los = geometry.los_state
    k_r = lsp.kf_linear if los else 0.0
    r_tau = table.delay_scaling
    ds = lsp.ds_s

    # delays and powers
    tau = np.sort(-r_tau * ds * np.log(rng.uniform(size=n)))
    tau -= tau[0]
    z = rng.normal(0.0, table.cluster_shadowing_db, size=n)
    p = np.exp(-tau * (r_tau - 1) / (r_tau * ds)) * 10 ** (-z / 10)
    p /= p.sum()
    keep = p >= p.max() * 10 ** (CLUSTER_CUTOFF_DB / 10)
    tau, p = tau[keep], p[keep] / p[keep].sum()
    n_kept = len(p)

    # cluster angle offsets; the LOS cluster (first) sits on the LOS direction
    c_phi = _table_value(_C_PHI, n)
    c_theta = _table_value(_C_THETA, n)
    if los:
        kdb = lsp.kf_db
        c_phi *= 1.1035 - 0.028 * kdb - 0.002 * kdb ** 2 + 0.0001 * kdb ** 3
        c_theta *= 1.3086 + 0.0339 * kdb - 0.0077 * kdb ** 2 + 0.0002 * kdb ** 3
    lp = np.log(p / p.max())

    def az_offsets(spread_deg):
        s = np.deg2rad(spread_deg)
        base = 2 * (s / 1.4) * np.sqrt(-lp) / c_phi
        off = rng.choice([-1.0, 1.0], size=n_kept) * base + rng.normal(0, s / 7, size=n_kept)
        return off - off[0] if los else off

    def zen_offsets(spread_deg):
        s = np.deg2rad(spread_deg)
        base = -s * lp / c_theta
        off = rng.choice([-1.0, 1.0], size=n_kept) * base + rng.normal(0, s / 7, size=n_kept)
        return off - off[0] if los else off

    aoa = az_offsets(lsp.asa_deg)
    aod = az_offsets(lsp.asd_deg)
    zoa = zen_offsets(lsp.zsa_deg)
    zod = zen_offsets(lsp.zsd_deg)
    cluster = np.arange(n_kept)

    if rays_per_cluster > 1:
        m = rays_per_cluster
        alpha = np.concatenate([RAY_OFFSETS, -RAY_OFFSETS])[:m]

        def spread_rays(off, c_deg):
            rays = np.stack([rng.permutation(alpha) for _ in range(n_kept)])
            return (off[:, None] + np.deg2rad(c_deg) * rays).ravel()

        aoa = spread_rays(aoa, table.c_asa_deg)
        aod = spread_rays(aod, table.c_asd_deg)
        zoa = spread_rays(zoa, table.c_zsa_deg)
        zod = spread_rays(zod, 3 / 8 * lsp.zsd_deg)
        tau = np.repeat(tau, m)
        p = np.repeat(p, m) / m
        cluster = np.repeat(cluster, m)

    # NLOS powers scaled down, LOS path prepended
    p_nlos = p / (k_r + 1)
    n_paths = len(p_nlos)
    is_los = np.zeros(n_paths, bool)
    if los:
        tau = np.concatenate([[0.0], tau])
        p_all = np.concatenate([[k_r / (k_r + 1)], p_nlos])
        aoa, aod, zoa, zod = (np.concatenate([[0.0], a]) for a in (aoa, aod, zoa, zod))
        is_los = np.concatenate([[True], is_los])
        cluster = np.concatenate([[-1], cluster])
    else:
        p_all = p_nlos

    # per-realization spread normalization
    if p_nlos.sum() > NEGLIGIBLE_NLOS:
        tau = _rescale(tau, p_all, ds)
        tau -= tau.min()
        aoa = _rescale(aoa, p_all, np.deg2rad(lsp.asa_deg))
        aod = _rescale(aod, p_all, np.deg2rad(lsp.asd_deg))
        zoa = _rescale(zoa, p_all, np.deg2rad(lsp.zsa_deg))
        zod = _rescale(zod, p_all, np.deg2rad(lsp.zsd_deg))

    aoa_az = wrap_angle(geometry.los_az_ut + aoa)
    aod_az = wrap_angle(geometry.los_az_bs + aod)
    aoa_zen = fold_zenith(geometry.los_zen_ut + zoa)
    aod_zen = fold_zenith(geometry.los_zen_bs + zod)

    total = len(p_all)
    xpr = rng.normal(table.xpr_mu_db, table.xpr_sigma_db, size=total)
    phases = rng.uniform(-np.pi, np.pi, size=(total, 4))
    is_gr = np.zeros(total, bool)
    gr = np.ones((total, 2), complex)

    if ground_reflection and los:
        h_sum = geometry.h_bs + geometry.h_ut
        graze = np.arctan2(h_sum, geometry.d2d)
        gv, gh = fresnel_coefficients(graze, ground_permittivity)
        p_gr = p_all[0] * abs(gv) ** 2 * (geometry.d3d / geometry.ground_reflection_distance) ** 2
        tau_gr = (geometry.ground_reflection_distance - geometry.d3d) / SPEED_OF_LIGHT
        # image-source directions: both ends look below the horizon
        tau = np.concatenate([tau, [tau_gr]])
        p_all = np.concatenate([p_all, [p_gr]])
        aod_az = np.concatenate([aod_az, [geometry.los_az_bs]])
        aoa_az = np.concatenate([aoa_az, [geometry.los_az_ut]])
        aod_zen = np.concatenate([aod_zen, [np.pi / 2 + graze]])
        aoa_zen = np.concatenate([aoa_zen, [np.pi / 2 + graze]])
        xpr = np.concatenate([xpr, [np.inf]])
        phases = np.concatenate([phases, np.zeros((1, 4))])
        is_los = np.concatenate([is_los, [False]])
        is_gr = np.concatenate([is_gr, [True]])
        cluster = np.concatenate([cluster, [-2]])
        gr = np.concatenate([gr, [[gv, gh]]])
        p_all = p_all / p_all.sum()

    if absolute_toa:
        tau = tau + geometry.d3d / SPEED_OF_LIGHT

    return PathSet(tau, p_all, aod_az, aod_zen, aoa_az, aoa_zen, xpr, phases, is_los, is_gr,
                   cluster, gr, True, geometry, lsp)
