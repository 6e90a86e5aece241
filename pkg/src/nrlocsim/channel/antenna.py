"""Array orientation, element field patterns and array phases.

Angle convention everywhere in the channel code: azimuth phi measured from
+x toward +y, zenith theta measured from +z (90 deg = horizon).  A node's
local frame (LCS) has its array broadside along local +x; the local frame is
the global one rotated by bearing alpha about z, then downtilt beta about
the rotated y axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import ArrayGeometry

DIRECTIONAL_GAIN_DBI = 8.0
DIRECTIONAL_HPBW_DEG = 65.0
DIRECTIONAL_CAP_DB = 30.0


def rotation(bearing_rad: float, downtilt_rad: float = 0.0) -> np.ndarray:
    """LCS -> GCS rotation matrix R = Rz(alpha) Ry(beta)."""
    ca, sa = np.cos(bearing_rad), np.sin(bearing_rad)
    cb, sb = np.cos(downtilt_rad), np.sin(downtilt_rad)
    rz = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]])
    return rz @ ry


def unit_vector(az, zen) -> np.ndarray:
    """Direction vectors [..., 3] for azimuth/zenith arrays (radians)."""
    az, zen = np.asarray(az, float), np.asarray(zen, float)
    return np.stack([np.sin(zen) * np.cos(az), np.sin(zen) * np.sin(az), np.cos(zen)], axis=-1)


def angles_of(vec) -> tuple[np.ndarray, np.ndarray]:
    vec = np.asarray(vec, float)
    r = np.linalg.norm(vec, axis=-1)
    zen = np.arccos(np.clip(vec[..., 2] / r, -1.0, 1.0))
    az = np.arctan2(vec[..., 1], vec[..., 0])
    return az, zen


@dataclass(frozen=True)
class NodeArray:
    """An ArrayGeometry placed in the world with a bearing (radians)."""

    geometry: ArrayGeometry
    bearing_rad: float = 0.0

    @property
    def downtilt_rad(self) -> float:
        return np.deg2rad(self.geometry.downtilt_deg)

    @property
    def rot(self) -> np.ndarray:
        return rotation(self.bearing_rad, self.downtilt_rad)

    @property
    def n_elements(self) -> int:
        return self.geometry.n_elements

    def positions_gcs(self) -> np.ndarray:
        return self.geometry.element_positions() @ self.rot.T

    def to_local(self, az, zen) -> tuple[np.ndarray, np.ndarray]:
        """Global direction angles -> local (array-frame) angles."""
        v = unit_vector(az, zen) @ self.rot  # R^T v for row vectors
        return angles_of(v)

    def to_global(self, az_local, zen_local) -> tuple[np.ndarray, np.ndarray]:
        v = unit_vector(az_local, zen_local) @ self.rot.T
        return angles_of(v)

    def polarization_rotation(self, az, zen) -> np.ndarray:
        """Angle psi rotating LCS field components into GCS (zero roll assumed)."""
        alpha, beta = self.bearing_rad, self.downtilt_rad
        dphi = np.asarray(az) - alpha
        re = np.cos(beta) * np.sin(zen) - np.sin(beta) * np.cos(zen) * np.cos(dphi)
        im = np.sin(beta) * np.sin(dphi)
        return np.angle(re + 1j * im)

    def field_gcs(self, az, zen) -> tuple[np.ndarray, np.ndarray]:
        """GCS field components (F_theta, F_phi), shape [..., n_elements]."""
        az_l, zen_l = self.to_local(az, zen)
        amp = np.sqrt(element_gain_linear(self.geometry.element_pattern, az_l, zen_l))[..., None]
        slant = self.geometry.element_slants_rad()
        psi = self.polarization_rotation(az, zen)[..., None]
        f_th_l, f_ph_l = amp * np.cos(slant), amp * np.sin(slant)
        return (np.cos(psi) * f_th_l - np.sin(psi) * f_ph_l,
                np.sin(psi) * f_th_l + np.cos(psi) * f_ph_l)

    def array_phase(self, az, zen, wavelength: float) -> np.ndarray:
        """exp(j 2 pi r_hat . d / lambda) per element, shape [..., n_elements]."""
        r = unit_vector(az, zen)
        return np.exp(2j * np.pi * (r @ self.positions_gcs().T) / wavelength)


def element_gain_db(pattern: str, az_local, zen_local) -> np.ndarray:
    """Element power gain (dBi) in the local frame."""
    az_local = np.asarray(az_local, float)
    zen_local = np.asarray(zen_local, float)
    if pattern == "isotropic":
        return np.zeros(np.broadcast(az_local, zen_local).shape)
    if pattern == "directional-3gpp":
        az_d = np.rad2deg(np.angle(np.exp(1j * az_local)))
        zen_d = np.rad2deg(zen_local)
        a_v = -np.minimum(12 * ((zen_d - 90) / DIRECTIONAL_HPBW_DEG) ** 2, DIRECTIONAL_CAP_DB)
        a_h = -np.minimum(12 * (az_d / DIRECTIONAL_HPBW_DEG) ** 2, DIRECTIONAL_CAP_DB)
        return DIRECTIONAL_GAIN_DBI - np.minimum(-(a_v + a_h), DIRECTIONAL_CAP_DB)
    raise ValueError(f"no field pattern for {pattern!r}")


def element_gain_linear(pattern: str, az_local, zen_local) -> np.ndarray:
    return 10 ** (element_gain_db(pattern, az_local, zen_local) / 10)
