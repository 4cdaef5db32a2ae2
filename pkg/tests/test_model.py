import math

import numpy as np
import pytest
from scipy import integrate, stats

from onoffnet.model import (ArrivalSpec, ChannelParams, ConfigError, NetworkConfig,
                            OnOffPolicy, ShadowingSpec, config_errors, default_warmup,
                            derived_quantities, validate)


def lognorm_frozen(mean, var):
    s2 = math.log1p(var / mean**2)
    return stats.lognorm(s=math.sqrt(s2), scale=math.exp(math.log(mean) - s2 / 2))


def test_default_shadowing_moments_match_scipy():
    sh = ShadowingSpec()
    ref = lognorm_frozen(0.5, 1.0)
    assert sh.first_moment() == pytest.approx(ref.mean(), rel=1e-12)
    assert sh.second_moment() == pytest.approx(ref.moment(2), rel=1e-12)
    assert sh.second_moment() == pytest.approx(1.25, rel=1e-12)


def test_truncated_lognormal_moments_by_quadrature():
    sh = ShadowingSpec.lognormal(0.5, 1.0, lower=0.1, upper=2.0)
    ref = lognorm_frozen(0.5, 1.0)
    z = ref.cdf(2.0) - ref.cdf(0.1)
    for k in (1, 2):
        num, _ = integrate.quad(lambda b: b**k * ref.pdf(b), 0.1, 2.0)
        assert sh.raw_moment(k) == pytest.approx(num / z, rel=1e-9)


def test_shadowing_ppf_matches_distribution():
    u = np.array([0.01, 0.3, 0.5, 0.9, 0.999])
    ref = lognorm_frozen(0.5, 1.0)
    np.testing.assert_allclose(ShadowingSpec().ppf(u), ref.ppf(u), rtol=1e-10)
    bu = ShadowingSpec.bounded_uniform(0.2, 0.6)
    np.testing.assert_allclose(bu.ppf(u), 0.2 + 0.4 * u)
    assert bu.first_moment() == pytest.approx(0.4)
    assert bu.second_moment() == pytest.approx((0.6**3 - 0.2**3) / (3 * 0.4))
    c = ShadowingSpec.constant(0.7)
    assert c.second_moment() == pytest.approx(0.49)
    assert np.all(c.ppf(u) == 0.7)


def test_truncated_ppf_stays_in_bounds():
    sh = ShadowingSpec.lognormal(0.5, 1.0, lower=0.1, upper=2.0)
    x = sh.ppf(np.linspace(0, 0.999999, 1001))
    assert x.min() >= 0.1 - 1e-12 and x.max() <= 2.0 + 1e-9


def test_channel_alpha_hat_and_kappa():
    ch = ChannelParams(0.4)
    assert ch.alpha_hat() == pytest.approx(0.2)
    assert ch.kappa() == pytest.approx(1.25)


def test_policy_round_trip():
    p = OnOffPolicy.from_activation_prob(0.0704)
    assert p.activation_prob() == pytest.approx(0.0704, rel=1e-14)
    assert OnOffPolicy(0.0).activation_prob() == 1.0


def test_default_warmup():
    assert default_warmup(ArrivalSpec("pap", 10)) == 1000
    assert default_warmup(ArrivalSpec("pap", 250.5)) == 2510
    assert NetworkConfig().warmup == 1000
    assert NetworkConfig(horizon=5000, warmup=10).window == 4990


def test_valid_default_config():
    cfg = NetworkConfig()
    assert validate(cfg) is cfg
    assert config_errors(cfg) == []


def test_alpha_out_of_range_is_reported():
    cfg = NetworkConfig(channel=ChannelParams(1.5))
    with pytest.raises(ConfigError) as e:
        validate(cfg)
    assert ("channel.alpha", "alpha out of [0,1]") in e.value.errors


def test_cap_needs_integer_lambda():
    errs = config_errors(NetworkConfig(arrivals=ArrivalSpec("cap", 2.5)))
    assert ("arrivals.lambda", "CAP requires integer λ") in errs


def test_all_violations_listed_together():
    cfg = NetworkConfig(n=0, channel=ChannelParams(-0.1, noise_power=0.0),
                        arrivals=ArrivalSpec("xyz", 0.5), policy=OnOffPolicy(-1.0),
                        horizon=100, warmup=100, rate_mode="bogus")
    paths = {p for p, _ in config_errors(cfg)}
    assert {"n", "channel.alpha", "channel.noise_power", "arrivals.kind", "arrivals.lambda",
            "policy.threshold", "warmup", "rate_mode"} <= paths


def test_bad_shadowing():
    assert ShadowingSpec("weird").errors()
    assert ShadowingSpec.lognormal(2.0, 1.0).errors()  # mean outside (0, 1]
    assert ShadowingSpec("bounded-uniform", 0.5, 0.0).errors()


def test_threshold_mode_needs_cross_gain():
    cfg = NetworkConfig(channel=ChannelParams(0.0), rate_mode="threshold")
    assert [p for p, _ in config_errors(cfg)] == ["rate_mode"]


def test_derived_quantities():
    d = derived_quantities(NetworkConfig(policy=OnOffPolicy.from_activation_prob(0.1)))
    assert d.q == pytest.approx(0.1)
    assert d.alpha_hat == pytest.approx(0.2)
    assert d.kappa == pytest.approx(1.25)
    assert d.rho == pytest.approx(0.1)
