"""Block Rayleigh fading gains with probabilistic shadowing on cross links."""

from __future__ import annotations

import numpy as np

from .model import ChannelParams


def direct_gain_from_uniform(u):
    """Exp(1) gain by inversion; ``u`` in [0, 1)."""
    return -np.log1p(-np.asarray(u, dtype=float))


def cross_gain_from_uniforms(params: ChannelParams, u):
    """Cross gains from uniforms of shape ``(..., 3)``.

    Columns are (presence, shadowing, fading). Absent links (probability
    ``1 - alpha``) give exactly 0; shadowing is only evaluated where present.
    """
    u = np.asarray(u, dtype=float)
    present = u[..., 0] < params.alpha
    out = np.zeros(u.shape[:-1])
    if present.any():
        beta = params.shadowing.ppf(u[..., 1][present])
        out[present] = beta * direct_gain_from_uniform(u[..., 2][present])
    return out


def draw_direct_gain(rng: np.random.Generator, size=None):
    return direct_gain_from_uniform(rng.random(size))


def draw_cross_gain(params: ChannelParams, rng: np.random.Generator, size=None):
    shape = (3,) if size is None else (*np.atleast_1d(size), 3)
    g = cross_gain_from_uniforms(params, rng.random(shape))
    return float(g) if size is None else g
