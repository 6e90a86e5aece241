"""Per-link distances, LOS angles and LOS/O2I state."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..config import ChannelConfig, ConfigError, SystemConfig
from ..scenarios import los_probability, scenario_lookup
from .antenna import NodeArray, angles_of


@dataclass(frozen=True)
class LinkGeometry:
    """Geometry of one BS-user link.

    Angles are global (radians).  ``*_bs`` is the direction seen from the BS
    toward the user, ``*_ut`` the direction seen from the user toward the BS.
    The ``*_local`` variants are in each node's array frame.
    """

    bs_position: tuple
    ut_position: tuple
    d2d: float
    d3d: float
    ground_reflection_distance: float
    los_az_bs: float
    los_zen_bs: float
    los_az_ut: float
    los_zen_ut: float
    los_az_bs_local: float
    los_zen_bs_local: float
    los_az_ut_local: float
    los_zen_ut_local: float
    los_state: bool
    o2i_state: bool = False

    @property
    def h_bs(self) -> float:
        return self.bs_position[2]

    @property
    def h_ut(self) -> float:
        return self.ut_position[2]


def link_geometry(bs_pos, ut_pos, bs_array: NodeArray, ut_array: NodeArray,
                  los_state: bool, o2i_state: bool = False) -> LinkGeometry:
    bs_pos = np.asarray(bs_pos, float)
    ut_pos = np.asarray(ut_pos, float)
    delta = ut_pos - bs_pos
    d3d = float(np.linalg.norm(delta))
    if d3d == 0:
        raise ValueError("BS and user positions coincide")
    d2d = float(np.hypot(delta[0], delta[1]))
    d_gr = math.sqrt(d2d ** 2 + (bs_pos[2] + ut_pos[2]) ** 2)
    az_b, zen_b = angles_of(delta)
    az_u, zen_u = angles_of(-delta)
    azl_b, zenl_b = bs_array.to_local(az_b, zen_b)
    azl_u, zenl_u = ut_array.to_local(az_u, zen_u)
    return LinkGeometry(tuple(bs_pos), tuple(ut_pos), d2d, d3d, d_gr,
                        float(az_b), float(zen_b), float(az_u), float(zen_u),
                        float(azl_b), float(zenl_b), float(azl_u), float(zenl_u),
                        bool(los_state), bool(o2i_state))


def node_arrays(system: SystemConfig, bs_index: int, user_index: int = 0,
                user_bearing_rad: float | None = None) -> tuple[NodeArray, NodeArray]:
    bs = NodeArray(system.bs_array, system.bs_bearing_rad(bs_index))
    ub = system.user_bearing_rad(user_index) if user_bearing_rad is None else user_bearing_rad
    return bs, NodeArray(system.user_array, ub)


def draw_los_state(channel: ChannelConfig, scenario: str, d2d: float, rng=None, variate=None,
                   table_path=None) -> bool:
    """Forced LOS state, or a draw against the LOS-probability model.

    ``variate`` is a standard-normal (spatially consistent) value mapped to
    a uniform through the normal CDF; otherwise ``rng`` supplies a uniform.
    """
    if channel.los_state == "los":
        return True
    if channel.los_state == "nlos":
        return False
    model = channel.los_probability or scenario_lookup(scenario, "los", table_path).los_prob_model
    p = los_probability(model, d2d)
    if variate is not None:
        u = float(stats.norm.cdf(variate))
    elif rng is not None:
        u = float(rng.uniform())
    else:
        raise ValueError("LOS state 'auto' needs a random stream or variate")
    return u < p


def compute_geometry(system: SystemConfig, channel: ChannelConfig, bs_index: int, user_index: int = 0,
                     user_position=None, user_bearing_rad: float | None = None,
                     rng=None, los_variate=None) -> LinkGeometry:
    if not 0 <= bs_index < system.n_bs:
        raise ConfigError("system.bs_positions_m", f"BS index {bs_index} out of range")
    if user_position is None:
        if not 0 <= user_index < len(system.user_positions_m):
            raise ConfigError("system.user_positions_m", f"user index {user_index} out of range")
        user_position = system.user_positions_m[user_index]
    bs_arr, ut_arr = node_arrays(system, bs_index, user_index, user_bearing_rad)
    bs_pos = np.asarray(system.bs_positions_m[bs_index], float)
    ut_pos = np.asarray(user_position, float)
    d2d = float(np.hypot(*(ut_pos - bs_pos)[:2]))
    los = draw_los_state(channel, system.scenario, d2d, rng, los_variate, channel.scenario_table)
    return link_geometry(bs_pos, ut_pos, bs_arr, ut_arr, los, channel.o2i)
