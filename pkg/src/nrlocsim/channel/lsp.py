"""Spatially correlated large-scale parameters.

Each of the seven LSPs gets an independent unit-variance Gaussian field on a
2-D lattice, filtered along x then y by a one-sided exponential (AR(1))
filter with coefficient exp(-spacing/d_corr).  Cross-parameter correlation
is applied when a field is sampled, through the Cholesky factor of the
scenario correlation matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from ..scenarios import LSP_NAMES, ScenarioTable, pathloss_db
from .geometry import LinkGeometry

# TR 38.901 clipping of log-normal angle spreads
MAX_AZIMUTH_SPREAD_DEG = 104.0
MAX_ZENITH_SPREAD_DEG = 52.0
MIN_LATTICE_SPACING_M = 0.5


@dataclass(frozen=True)
class LargeScaleParams:
    sf_db: float
    kf_db: float
    ds_s: float
    asd_deg: float
    asa_deg: float
    zsd_deg: float
    zsa_deg: float
    pathloss_db: float = 0.0

    @property
    def esa_deg(self) -> float:
        return self.zsa_deg

    @property
    def esd_deg(self) -> float:
        return self.zsd_deg

    @property
    def kf_linear(self) -> float:
        return 10 ** (self.kf_db / 10)


def exp_filter(x: np.ndarray, a: float, axis: int = 0, stationary: bool = False) -> np.ndarray:
    """One-sided exponential smoother y[n] = a*y[n-1] + (1-a)*x[n] along ``axis``.

    The coefficients sum to one, so a constant input passes unchanged (the
    filter starts in its steady state for x[0]).  With ``stationary`` the
    first output is instead drawn at the stationary variance (1-a)/(1+a) of
    a white unit input, so there is no start-up transient.
    """
    x = np.moveaxis(np.asarray(x, float), axis, 0)
    if a == 0:
        y = x.copy()
    elif len(x) == 1:
        y = x * math.sqrt((1 - a) / (1 + a)) if stationary else x.copy()
    else:
        y0 = x[0] * math.sqrt((1 - a) / (1 + a)) if stationary else x[0]
        rest = signal.lfilter([1 - a], [1, -a], x[1:], axis=0, zi=(a * y0)[None])[0]
        y = np.concatenate([y0[None], rest], axis=0)
    return np.moveaxis(y, 0, axis)


def unit_variance_scale(a: float) -> float:
    """Standard deviation of exp_filter output for a white unit-variance input."""
    return math.sqrt((1 - a) / (1 + a))


def filtered_field(white: np.ndarray, spacing: float, dcorr: float) -> np.ndarray:
    """Unit-variance field with autocorrelation exp(-d/dcorr) along both axes."""
    a = math.exp(-spacing / dcorr)
    s = unit_variance_scale(a)
    f = exp_filter(white, a, axis=0, stationary=True) / s
    return exp_filter(f, a, axis=1, stationary=True) / s


def lattice_spacing(dcorr: np.ndarray) -> float:
    return max(float(np.min(dcorr)) / 4, MIN_LATTICE_SPACING_M)


@dataclass(frozen=True)
class CorrelatedFieldGrid:
    """Independent unit fields [n_lsp, nx, ny] plus the mixing factor."""

    values: np.ndarray
    origin: tuple[float, float]
    spacing: float
    dcorr: np.ndarray
    mixing: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[1:]

    def _locate(self, position):
        gx = (position[0] - self.origin[0]) / self.spacing
        gy = (position[1] - self.origin[1]) / self.spacing
        nx, ny = self.shape
        if not (0 <= gx <= nx - 1 and 0 <= gy <= ny - 1):
            raise ValueError(f"position {tuple(position[:2])} outside the field lattice")
        ix, iy = min(int(gx), nx - 2), min(int(gy), ny - 2)
        return ix, iy, gx - ix, gy - iy

    def sample_independent(self, position) -> np.ndarray:
        """Bilinear sample of each independent field, rescaled to unit variance."""
        ix, iy, u, v = self._locate(position)
        c = self.values[:, ix:ix + 2, iy:iy + 2]
        val = ((1 - u) * (1 - v) * c[:, 0, 0] + u * (1 - v) * c[:, 1, 0]
               + (1 - u) * v * c[:, 0, 1] + u * v * c[:, 1, 1])
        a = np.exp(-self.spacing / self.dcorr)
        var = ((1 - u) ** 2 + u ** 2 + 2 * u * (1 - u) * a) * ((1 - v) ** 2 + v ** 2 + 2 * v * (1 - v) * a)
        return val / np.sqrt(var)

    def sample(self, position) -> np.ndarray:
        """Cross-correlated standard-normal LSP variates (LSP_NAMES order)."""
        return self.mixing @ self.sample_independent(position)


def cholesky_factor(corr: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        raise ValueError("LSP correlation matrix is not positive definite") from None


def generate_lsp_fields(table: ScenarioTable, bounds, rng: np.random.Generator,
                        spacing: float | None = None) -> CorrelatedFieldGrid:
    """Fields covering ``bounds`` = (xmin, xmax, ymin, ymax) in meters."""
    dcorr = table.dcorr()
    mixing = cholesky_factor(table.correlation_matrix())
    spacing = lattice_spacing(dcorr) if spacing is None else spacing
    xmin, xmax, ymin, ymax = bounds
    nx = int(math.floor((xmax - xmin) / spacing)) + 2
    ny = int(math.floor((ymax - ymin) / spacing)) + 2
    white = rng.standard_normal((len(LSP_NAMES), nx, ny))
    values = np.stack([filtered_field(white[i], spacing, dcorr[i]) for i in range(len(LSP_NAMES))])
    return CorrelatedFieldGrid(values, (xmin, ymin), spacing, dcorr, mixing)


def lsp_from_variates(z: np.ndarray, table: ScenarioTable, fc_hz: float,
                      pathloss: float = 0.0) -> LargeScaleParams:
    mu, sd = table.lsp_mean_std(fc_hz)
    v = mu + sd * np.asarray(z)
    vals = dict(zip(LSP_NAMES, v))
    return LargeScaleParams(
        sf_db=float(vals["sf"]),
        kf_db=float(vals["kf"]),
        ds_s=float(10 ** vals["ds"]),
        asd_deg=float(min(10 ** vals["asd"], MAX_AZIMUTH_SPREAD_DEG)),
        asa_deg=float(min(10 ** vals["asa"], MAX_AZIMUTH_SPREAD_DEG)),
        zsd_deg=float(min(10 ** vals["zsd"], MAX_ZENITH_SPREAD_DEG)),
        zsa_deg=float(min(10 ** vals["zsa"], MAX_ZENITH_SPREAD_DEG)),
        pathloss_db=float(pathloss),
    )


def draw_lsp(fields: CorrelatedFieldGrid, position, table: ScenarioTable, fc_hz: float,
             geometry: LinkGeometry | None = None, los_table: ScenarioTable | None = None,
             pathloss_table: ScenarioTable | None = None) -> LargeScaleParams:
    """LSPs at ``position`` (user location; fields are per BS).

    Pathloss uses ``pathloss_table`` when given (override of the LOS-state
    row), else ``table``; it is only computed when ``geometry`` is supplied.
    """
    z = fields.sample(position)
    pl = 0.0
    if geometry is not None:
        plt = pathloss_table or table
        pl = pathloss_db(plt, geometry.d2d, geometry.d3d, fc_hz, geometry.h_bs, geometry.h_ut, los_table)
    return lsp_from_variates(z, table, fc_hz, pl)


# ---------------------------------------------------------------------------
# spatial-consistency variates (LOS / O2I state)

def interpolate_consistency(eta00, eta10, eta01, eta11, alpha, beta, dcorr):
    """Normal variate at offset (alpha, beta) inside a d_corr x d_corr cell.

    Square-root weights keep the variance at one for i.i.d. corner values.
    """
    alpha = np.asarray(alpha, float)
    beta = np.asarray(beta, float)
    if np.any((alpha < 0) | (alpha > dcorr) | (beta < 0) | (beta > dcorr)):
        raise ValueError("interpolation offsets must lie in [0, d_corr]")
    ra, rb = alpha / dcorr, beta / dcorr
    return (np.sqrt(1 - rb) * (np.sqrt(1 - ra) * eta00 + np.sqrt(ra) * eta10)
            + np.sqrt(rb) * (np.sqrt(1 - ra) * eta01 + np.sqrt(ra) * eta11))


@dataclass(frozen=True)
class ConsistencyGrid:
    """i.i.d. normal corners on a d_corr lattice; interior values via interpolate_consistency."""

    corners: np.ndarray
    origin: tuple[float, float]
    dcorr: float

    def variate(self, position) -> float:
        gx = (position[0] - self.origin[0]) / self.dcorr
        gy = (position[1] - self.origin[1]) / self.dcorr
        nx, ny = self.corners.shape
        if not (0 <= gx <= nx - 1 and 0 <= gy <= ny - 1):
            raise ValueError("position outside the consistency lattice")
        ix, iy = min(int(gx), nx - 2), min(int(gy), ny - 2)
        c = self.corners
        return float(interpolate_consistency(c[ix, iy], c[ix + 1, iy], c[ix, iy + 1], c[ix + 1, iy + 1],
                                             (gx - ix) * self.dcorr, (gy - iy) * self.dcorr, self.dcorr))


def consistency_grid(bounds, dcorr: float, rng: np.random.Generator) -> ConsistencyGrid:
    xmin, xmax, ymin, ymax = bounds
    nx = int(math.floor((xmax - xmin) / dcorr)) + 2
    ny = int(math.floor((ymax - ymin) / dcorr)) + 2
    return ConsistencyGrid(rng.standard_normal((nx, ny)), (xmin, ymin), dcorr)
