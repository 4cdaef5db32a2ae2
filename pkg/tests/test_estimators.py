import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from onoffnet import analytics, sim
from onoffnet.estimators import (Tolerances, ValidationRow, binomial_ci, compare,
                                 delay_summary, hist_percentile, summarize_histogram)
from onoffnet.model import ArrivalSpec, ChannelParams, NetworkConfig, OnOffPolicy


def test_binomial_examples():
    assert binomial_ci(0, 100) == (0.0, 0.0)
    assert binomial_ci(50, 100) == pytest.approx((0.5, 0.05))
    est, se = binomial_ci(348678, 10**6)
    assert est == 0.348678 and se == pytest.approx(0.000477, abs=5e-7)
    with pytest.raises(ValueError):
        binomial_ci(0, 0)


def test_delay_summary_small():
    s = delay_summary([0, 1, 2, 3])
    assert (s.mean, s.p50, s.p95, s.max, s.count) == (1.5, 1, 3, 3, 4)
    assert list(s.histogram) == [1, 1, 1, 1]
    z = delay_summary([0, 0, 0])
    assert z.mean == 0 and z.p95 == 0
    with pytest.raises(ValueError):
        delay_summary([])
    with pytest.raises(ValueError):
        delay_summary([1, -1])


@given(st.lists(st.integers(0, 500), min_size=1, max_size=300), st.floats(0.01, 1.0))
def test_lower_percentile_matches_sorted_samples(xs, p):
    s = sorted(xs)
    k = max(math.ceil(p * len(s) - 1e-9), 1) - 1
    assert hist_percentile(np.bincount(xs), p) == s[k]
    assert delay_summary(xs).mean == pytest.approx(float(np.mean(xs)), abs=1e-12)


def test_summarize_histogram_empty():
    with pytest.raises(ValueError):
        summarize_histogram([0, 0])


def _stats(n=20):
    cfg = NetworkConfig(n=n, channel=ChannelParams(0.4), arrivals=ArrivalSpec("cap", 10),
                        policy=OnOffPolicy.from_activation_prob(0.3), horizon=20000,
                        warmup=200, seed=3)
    return cfg, sim.run(cfg), analytics.report(cfg)


def test_compare_rows_and_columns():
    cfg, stats, rep = _stats()
    rows = compare(stats, rep)
    names = [r.quantity for r in rows]
    assert names[:5] == ["delta", "drop_prob", "activation", "interference_mean",
                         "interference_var_bound"]
    assert ValidationRow.field_names() == ["quantity", "analytic", "empirical", "stderr",
                                           "z_score", "passed"]
    d = rows[0]
    assert d.z_score == pytest.approx((d.empirical - d.analytic) / d.stderr)


def test_compare_flags_large_z():
    cfg, stats, rep = _stats()
    se = stats.stderr["delta"]
    shifted = replace(rep, delta=stats.network["delta"] - 4.4 * se)
    row = compare(stats, shifted)[0]
    assert row.z_score == pytest.approx(4.4) and not row.passed
    assert compare(stats, shifted, Tolerances(z=5))[0].passed


def test_variance_row_is_one_sided():
    cfg, stats, rep = _stats()
    loose = replace(rep, interference_var_bound=10 * rep.interference_var_bound)
    row = [r for r in compare(stats, loose) if r.quantity == "interference_var_bound"][0]
    assert row.passed and row.z_score < 0


def test_throughput_row_uses_relative_tolerance():
    cfg, stats, rep = _stats(n=80)
    assert rep.strong_interference
    t = stats.network["throughput"]
    rows = compare(stats, replace(rep, throughput_approx=t * 1.1))
    row = rows[-1]
    assert row.quantity == "throughput" and row.passed
    assert row.z_score == pytest.approx(abs(t - 1.1 * t) / (1.1 * t))
    assert not compare(stats, replace(rep, throughput_approx=t * 1.3))[-1].passed


def test_compare_rejects_mismatched_report():
    cfg, stats, _ = _stats()
    other = analytics.report(replace(cfg, n=21))
    with pytest.raises(ValueError):
        compare(stats, other)


def test_zero_stderr_rows():
    cfg = NetworkConfig(n=1, channel=ChannelParams(0.0), arrivals=ArrivalSpec("cap", 1),
                        policy=OnOffPolicy(0.0), horizon=500, warmup=0)
    stats = sim.run(cfg)
    rows = compare(stats, analytics.report(cfg))
    assert all(r.passed for r in rows)
    assert [r.quantity for r in rows] == ["delta", "drop_prob", "activation",
                                          "interference_mean", "interference_var_bound"]
