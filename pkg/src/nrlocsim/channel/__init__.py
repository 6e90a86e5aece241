"""Geometry-based stochastic channel."""

from .antenna import NodeArray, rotation, unit_vector
from .coefficients import generate_coefficients
from .geometry import LinkGeometry, compute_geometry, link_geometry
from .link import realize_link
from .lsp import (ConsistencyGrid, CorrelatedFieldGrid, LargeScaleParams, consistency_grid, draw_lsp,
                  exp_filter, generate_lsp_fields, interpolate_consistency)
from .response import apply_channel, apply_channel_grid, channel_cfr, path_cfr, symmetric_indices
from .smallscale import PathSet, empty_pathset, generate_small_scale
