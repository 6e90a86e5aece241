"""Deterministic random-stream fan-out.

Every (drop, link, model) consumer gets its own generator derived from the
master seed, so adding or disabling one model never shifts the draws seen by
another, and any single drop can be replayed in isolation.
"""

from __future__ import annotations

import zlib

import numpy as np
from scipy import stats


def tag_id(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def stream(master_seed: int, drop: int, link: int, tag: str) -> np.random.Generator:
    """Independent generator for one (drop, link, model-tag) triple."""
    ss = np.random.SeedSequence([int(master_seed), int(drop), int(link), tag_id(tag)])
    return np.random.default_rng(ss)


def stream_label(master_seed: int, drop: int, link: int | str, tag: str) -> str:
    """Human-readable replay key written next to every result row."""
    return f"{master_seed}:{drop}:{link}:{tag}"


def truncated_normal(rng: np.random.Generator, sigma: float, size=None,
                     bound_sigmas: float = 2.0, mean: float = 0.0):
    """Zero-mean Gaussian clipped to +-bound_sigmas*sigma (resampled, not clamped)."""
    if sigma == 0:
        out = np.full(size if size is not None else (), mean, dtype=float)
        return out if size is not None else float(out)
    draw = stats.truncnorm.rvs(-bound_sigmas, bound_sigmas, loc=mean, scale=sigma,
                               size=size, random_state=rng)
    return draw


def truncated_normal_range(rng: np.random.Generator, lo: float, hi: float, size=None):
    """Truncated normal on [lo, hi] centred at the midpoint, sigma = half-width / 2.

    Used for initial-beam draws given only a range: the range spans +-2 sigma,
    matching the default truncation bound elsewhere.
    """
    half = (hi - lo) / 2
    return truncated_normal(rng, half / 2, size=size, bound_sigmas=2.0, mean=(lo + hi) / 2)
