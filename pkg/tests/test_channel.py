import math

import numpy as np
import pytest
from scipy import stats

from onoffnet.channel import (cross_gain_from_uniforms, direct_gain_from_uniform,
                              draw_cross_gain, draw_direct_gain)
from onoffnet.model import ChannelParams, ShadowingSpec


def test_direct_gain_is_unit_exponential():
    h = draw_direct_gain(np.random.default_rng(0), 200_000)
    assert stats.kstest(h, "expon").pvalue > 1e-3
    assert direct_gain_from_uniform(0.0) == 0.0


def test_threshold_exceedance_is_e_to_minus_tau():
    h = draw_direct_gain(np.random.default_rng(1), 400_000)
    tau = 2.6534
    p = math.exp(-tau)
    assert abs(np.mean(h > tau) - p) < 4 * math.sqrt(p * (1 - p) / h.size)


def test_absent_cross_links_are_exactly_zero():
    u = np.array([[0.39, 0.5, 0.5], [0.41, 0.5, 0.5], [0.0, 0.1, 0.0]])
    g = cross_gain_from_uniforms(ChannelParams(0.4), u)
    assert g[1] == 0.0 and g[2] == 0.0
    assert g[0] == pytest.approx(ShadowingSpec().ppf(0.5) * math.log(2))


def test_cross_gain_moments():
    ch = ChannelParams(0.4)
    g = draw_cross_gain(ch, np.random.default_rng(2), 400_000)
    assert np.mean(g == 0) == pytest.approx(0.6, abs=0.005)
    # E[L] = alpha * E[beta] * E[h]
    se = g.std() / math.sqrt(g.size)
    assert abs(g.mean() - ch.alpha_hat()) < 4 * se
    # E[L^2] = alpha * E[beta^2] * E[h^2] = 0.4 * 1.25 * 2
    g2 = g * g
    assert abs(g2.mean() - 1.0) < 5 * g2.std() / math.sqrt(g.size)


def test_scalar_draw():
    assert isinstance(draw_cross_gain(ChannelParams(1.0), np.random.default_rng(3)), float)
