"""One-call realization of a BS-user link: geometry -> LSP -> SSP -> coefficients."""

from __future__ import annotations

from ..config import SimConfig
from ..rng import stream
from ..scenarios import scenario_lookup
from .coefficients import generate_coefficients
from .geometry import compute_geometry, node_arrays
from .lsp import CorrelatedFieldGrid, draw_lsp, generate_lsp_fields, lattice_spacing
from .smallscale import PathSet, generate_small_scale


def link_tables(cfg: SimConfig, los: bool):
    ch = cfg.channel
    path = ch.scenario_table
    state = "los" if los else "nlos"
    table = scenario_lookup(cfg.system.scenario, state, path)
    pl_state = state if ch.pathloss_model == "auto" else ch.pathloss_model
    pl_table = table if pl_state == state else scenario_lookup(cfg.system.scenario, pl_state, path)
    los_table = None
    if pl_table.pl_rule == "max-los":
        los_table = scenario_lookup(cfg.system.scenario, "los", path)
    return table, pl_table, los_table


def realize_link(cfg: SimConfig, bs_index: int, user_position=None, user_bearing_rad: float | None = None,
                 drop: int = 0, user_index: int = 0, fields: CorrelatedFieldGrid | None = None) -> PathSet:
    """PathSet with coefficients for one link, oriented per ``system.direction``.

    Each link draws from its own streams (tags ``los``, ``lsp``, ``ssp``)
    keyed by (master_seed, drop, bs_index).
    """
    sysc, ch = cfg.system, cfg.channel
    seed = sysc.master_seed
    if user_position is None:
        user_position = sysc.user_positions_m[user_index]
    geo = compute_geometry(sysc, ch, bs_index, user_index, user_position, user_bearing_rad,
                           rng=stream(seed, drop, bs_index, "los"))
    table, pl_table, los_table = link_tables(cfg, geo.los_state)
    if fields is None:
        spacing = ch.lattice_spacing_m or lattice_spacing(table.dcorr())
        x, y = user_position[0], user_position[1]
        bounds = (x - spacing, x + spacing, y - spacing, y + spacing)
        fields = generate_lsp_fields(table, bounds, stream(seed, drop, bs_index, "lsp"), spacing)
    lsp = draw_lsp(fields, user_position, table, sysc.center_frequency_hz, geo, los_table, pl_table)
    ps = generate_small_scale(lsp, geo, table, stream(seed, drop, bs_index, "ssp"),
                              rays_per_cluster=ch.rays_per_cluster,
                              absolute_toa=ch.toa_type == "absolute",
                              ground_reflection=ch.ground_reflection,
                              ground_permittivity=ch.ground_permittivity)
    bs_arr, ut_arr = node_arrays(sysc, bs_index, user_index, user_bearing_rad)
    o2i = ch.o2i_loss_db if geo.o2i_state else 0.0
    if sysc.direction == "uplink":
        ps = ps.swap()
        rx, tx = bs_arr, ut_arr
    else:
        rx, tx = ut_arr, bs_arr
    return generate_coefficients(ps, rx, tx, cfg.wavelength_m, ch.coefficient_mode,
                                 sysc.user_velocity_mps, o2i)

