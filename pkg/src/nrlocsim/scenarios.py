"""Scenario statistic tables, pathloss and LOS-probability models.

Rows live in ``data/scenarios.csv`` (provenance in the file header).  A
custom table with the same columns can be supplied for any scenario name;
the ``custom`` scenario requires one.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .config import SPEED_OF_LIGHT, ConfigError

# order of the seven large-scale parameters everywhere in the channel code
LSP_NAMES = ("sf", "kf", "ds", "asd", "asa", "zsd", "zsa")
_LOG_LSPS = ("ds", "asd", "asa", "zsa", "zsd")


@dataclass(frozen=True)
class ScenarioTable:
    """One (scenario, LOS state) row.

    Log-domain statistics follow ``a * log10(1 + fc_GHz) + b`` with fc
    clamped below at ``fc_min_ghz``; DS in seconds, angle spreads in degrees.
    """

    scenario: str
    los_state: str
    fc_min_ghz: float
    mu_lgds_a: float
    mu_lgds_b: float
    sigma_lgds_a: float
    sigma_lgds_b: float
    mu_lgasd_a: float
    mu_lgasd_b: float
    sigma_lgasd_a: float
    sigma_lgasd_b: float
    mu_lgasa_a: float
    mu_lgasa_b: float
    sigma_lgasa_a: float
    sigma_lgasa_b: float
    mu_lgzsa_a: float
    mu_lgzsa_b: float
    sigma_lgzsa_a: float
    sigma_lgzsa_b: float
    mu_lgzsd_a: float
    mu_lgzsd_b: float
    sigma_lgzsd_a: float
    sigma_lgzsd_b: float
    mu_kf_db: float
    sigma_kf_db: float
    sigma_sf_db: float
    dcorr_sf_m: float
    dcorr_kf_m: float
    dcorr_ds_m: float
    dcorr_asd_m: float
    dcorr_asa_m: float
    dcorr_zsd_m: float
    dcorr_zsa_m: float
    dcorr_los_m: float
    rho_sf_kf: float
    rho_sf_ds: float
    rho_sf_asd: float
    rho_sf_asa: float
    rho_sf_zsd: float
    rho_sf_zsa: float
    rho_kf_ds: float
    rho_kf_asd: float
    rho_kf_asa: float
    rho_kf_zsd: float
    rho_kf_zsa: float
    rho_ds_asd: float
    rho_ds_asa: float
    rho_ds_zsd: float
    rho_ds_zsa: float
    rho_asd_asa: float
    rho_asd_zsd: float
    rho_asd_zsa: float
    rho_asa_zsd: float
    rho_asa_zsa: float
    rho_zsd_zsa: float
    delay_scaling: float
    xpr_mu_db: float
    xpr_sigma_db: float
    cluster_count: int
    rays_per_cluster: int
    c_asd_deg: float
    c_asa_deg: float
    c_zsa_deg: float
    cluster_shadowing_db: float
    pl_rule: str
    pl_a: float
    pl_b: float
    pl_c: float
    pl_hut: float
    los_prob_model: str

    def __post_init__(self):
        for f in dataclasses.fields(self):
            # log-domain sigma slopes (sigma_lg*_a) may be negative; the
            # evaluated sigma is floored at zero in lsp_mean_std
            if f.name.endswith("_db") and ("sigma" in f.name or "shadowing" in f.name):
                if getattr(self, f.name) < 0:
                    raise ConfigError(f.name, "standard deviations must be >= 0")
            if f.name.startswith("dcorr_") and getattr(self, f.name) <= 0:
                raise ConfigError(f.name, "decorrelation distances must be > 0")
        if self.cluster_count < 1:
            raise ConfigError("cluster_count", "must be >= 1")
        if self.pl_rule not in ("loglinear", "max-los", "umi-los-breakpoint"):
            raise ConfigError("pl_rule", f"unknown pathloss rule {self.pl_rule!r}")
        if self.los_prob_model not in LOS_PROBABILITY:
            raise ConfigError("los_prob_model", f"unknown LOS probability model {self.los_prob_model!r}")

    @property
    def is_los(self) -> bool:
        return self.los_state == "los"

    def _fc(self, fc_hz: float) -> float:
        return max(fc_hz / 1e9, self.fc_min_ghz)

    def lsp_mean_std(self, fc_hz: float) -> tuple[np.ndarray, np.ndarray]:
        """(mu, sigma) per LSP in LSP_NAMES order.

        SF and KF are in dB; the other five are log10 of seconds / degrees.
        """
        lf = math.log10(1 + self._fc(fc_hz))
        mu = {"sf": 0.0, "kf": self.mu_kf_db}
        sd = {"sf": self.sigma_sf_db, "kf": self.sigma_kf_db}
        for n in _LOG_LSPS:
            mu[n] = getattr(self, f"mu_lg{n}_a") * lf + getattr(self, f"mu_lg{n}_b")
            sd[n] = getattr(self, f"sigma_lg{n}_a") * lf + getattr(self, f"sigma_lg{n}_b")
        return (np.array([mu[n] for n in LSP_NAMES]),
                np.maximum(np.array([sd[n] for n in LSP_NAMES]), 0.0))

    def correlation_matrix(self) -> np.ndarray:
        n = len(LSP_NAMES)
        c = np.eye(n)
        for i in range(n):
            for j in range(i + 1, n):
                c[i, j] = c[j, i] = getattr(self, f"rho_{LSP_NAMES[i]}_{LSP_NAMES[j]}")
        return c

    def dcorr(self) -> np.ndarray:
        return np.array([getattr(self, f"dcorr_{n}_m") for n in LSP_NAMES])


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioTable)}


def _parse_row(row: dict, source: str) -> ScenarioTable:
    kwargs = {}
    for name, tp in _FIELD_TYPES.items():
        raw = row.get(name)
        key = f"{source}[{row.get('scenario')},{row.get('los_state')}].{name}"
        if raw is None or raw.strip() == "":
            raise ConfigError(key, "missing value (custom tables must supply every column)")
        raw = raw.strip()
        try:
            if tp in ("float", float):
                kwargs[name] = float(raw)
            elif tp in ("int", int):
                kwargs[name] = int(raw)
            else:
                kwargs[name] = raw
        except ValueError:
            raise ConfigError(key, f"cannot parse {raw!r}") from None
    try:
        return ScenarioTable(**kwargs)
    except ConfigError as e:
        raise ConfigError(f"{source}.{e.key}", str(e).split(": ", 1)[1]) from None


def read_table(path: str | Path | None = None) -> dict[tuple[str, str], ScenarioTable]:
    """Parse a scenario CSV (``#`` comment lines allowed) into {(scenario, los_state): row}."""
    if path is None:
        text = resources.files("nrlocsim").joinpath("data/scenarios.csv").read_text()
        source = "scenarios.csv"
    else:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(str(path), f"cannot read scenario table ({e.strerror})") from None
        source = Path(path).name
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    missing = sorted(set(_FIELD_TYPES) - set(reader.fieldnames or ()))
    if missing:
        raise ConfigError(f"{source}.{missing[0]}", "column missing from scenario table")
    out = {}
    for row in reader:
        t = _parse_row(row, source)
        out[(t.scenario, t.los_state)] = t
    return out


@lru_cache(maxsize=None)
def _shipped() -> dict:
    return read_table(None)


def scenario_lookup(scenario: str, los_state: str, table_path: str | Path | None = None) -> ScenarioTable:
    """Statistics row for (scenario, los_state); ``los_state`` is 'los' or 'nlos'."""
    if los_state not in ("los", "nlos"):
        raise ConfigError("los_state", f"must be los or nlos, got {los_state!r}")
    if table_path is not None:
        rows = read_table(table_path)
        if (scenario, los_state) in rows:
            return rows[(scenario, los_state)]
        raise ConfigError("channel.scenario_table", f"no row for ({scenario}, {los_state}) in {table_path}")
    rows = _shipped()
    if (scenario, los_state) not in rows:
        raise ConfigError("system.scenario",
                          f"no shipped statistics for {scenario!r}; supply channel.scenario_table")
    return rows[(scenario, los_state)]


# ---------------------------------------------------------------------------
# pathloss

def _loglinear(t: ScenarioTable, d3d: float, fc_ghz: float, h_ut: float) -> float:
    return t.pl_a + t.pl_b * math.log10(d3d) + t.pl_c * math.log10(fc_ghz) + t.pl_hut * (h_ut - 1.5)


def _umi_los(t: ScenarioTable, d2d: float, d3d: float, fc_hz: float, h_bs: float, h_ut: float) -> float:
    fc_ghz = fc_hz / 1e9
    d_bp = 4 * (h_bs - 1.0) * (h_ut - 1.0) * fc_hz / SPEED_OF_LIGHT
    pl1 = _loglinear(t, d3d, fc_ghz, h_ut)
    if d2d <= d_bp:
        return pl1
    return (32.4 + 40 * math.log10(d3d) + 20 * math.log10(fc_ghz)
            - 9.5 * math.log10(d_bp ** 2 + (h_bs - h_ut) ** 2))


def pathloss_db(table: ScenarioTable, d2d: float, d3d: float, fc_hz: float, h_bs: float, h_ut: float,
                los_table: ScenarioTable | None = None) -> float:
    """Basic transmission loss in dB (no shadowing).

    NLOS rules of the form max(PL_LOS, PL_NLOS') need the LOS row of the
    same scenario as ``los_table``.
    """
    fc_ghz = fc_hz / 1e9
    if table.pl_rule == "loglinear":
        return _loglinear(table, d3d, fc_ghz, h_ut)
    if table.pl_rule == "umi-los-breakpoint":
        return _umi_los(table, d2d, d3d, fc_hz, h_bs, h_ut)
    if los_table is None:
        raise ConfigError("pl_rule", "max-los rule needs the LOS row of the scenario")
    pl_los = pathloss_db(los_table, d2d, d3d, fc_hz, h_bs, h_ut)
    return max(pl_los, _loglinear(table, d3d, fc_ghz, h_ut))


# ---------------------------------------------------------------------------
# LOS probability (2-D distance in meters)

def _inh_open(d):
    if d <= 5:
        return 1.0
    if d <= 49:
        return math.exp(-(d - 5) / 70.8)
    return 0.54 * math.exp(-(d - 49) / 211.7)


def _inh_mixed(d):
    if d <= 1.2:
        return 1.0
    if d < 6.5:
        return math.exp(-(d - 1.2) / 4.7)
    return 0.32 * math.exp(-(d - 6.5) / 32.6)


def _umi(d):
    if d <= 18:
        return 1.0
    return 18 / d + math.exp(-d / 36) * (1 - 18 / d)


LOS_PROBABILITY = {"inh-open": _inh_open, "inh-mixed": _inh_mixed, "umi": _umi}


def los_probability(model: str, d2d: float) -> float:
    try:
        return LOS_PROBABILITY[model](d2d)
    except KeyError:
        raise ConfigError("channel.los_probability", f"unknown model {model!r}") from None
