import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onoffnet.arrivals import (ArrivalStream, arrival_counts, bap_interarrival_pmf,
                               draw_phases, first_arrival_offset, pap_interarrival_density)
from onoffnet.model import ArrivalSpec


def test_cap_arrives_every_lambda_slots_from_phase():
    c = arrival_counts(ArrivalSpec("cap", 4), None, np.arange(12), 1)
    assert list(np.flatnonzero(c)) == [1, 5, 9]


def test_bap_is_threshold_on_uniform():
    u = np.array([0.05, 0.1, 0.0999, 0.5])
    assert list(arrival_counts(ArrivalSpec("bap", 10), u, np.arange(4), 0)) == [1, 0, 1, 0]


def test_pap_counts_follow_poisson():
    rng = np.random.default_rng(1)
    c = arrival_counts(ArrivalSpec("pap", 2.0), rng.random(400_000), np.arange(400_000), 0)
    mu = 0.5
    for k in range(4):
        p = math.exp(-mu) * mu**k / math.factorial(k)
        se = math.sqrt(p * (1 - p) / c.size)
        assert abs(np.mean(c == k) - p) < 4 * se


def test_first_offset_is_min_of_uniforms():
    rng = np.random.default_rng(2)
    v = rng.random(200_000)
    off = first_arrival_offset(ArrivalSpec("pap", 1.0), np.full(v.size, 3), v)
    # min of 3 uniforms has mean 1/4
    assert abs(off.mean() - 0.25) < 4 * math.sqrt(3 / 80 / v.size)
    assert np.all(first_arrival_offset(ArrivalSpec("pap", 1.0), np.zeros(3, int), v[:3]) == 0)
    assert np.all(first_arrival_offset(ArrivalSpec("cap", 1.0), np.ones(3, int), v[:3]) == 0)


def test_phases():
    rng = np.random.default_rng(0)
    ph = draw_phases(ArrivalSpec("cap", 7), 1000, rng)
    assert ph.min() >= 0 and ph.max() <= 6 and len(set(ph)) == 7
    assert list(draw_phases(ArrivalSpec("cap", 5, cap_phase=12), 3, rng)) == [2, 2, 2]
    assert list(draw_phases(ArrivalSpec("pap", 5), 2, rng)) == [0, 0]


def test_stream_counts_equal_single_slot_calls():
    spec = ArrivalSpec("pap", 3.0)
    a = ArrivalStream(spec, np.random.default_rng(5))
    b = ArrivalStream(spec, np.random.default_rng(5))
    assert list(a.counts(0, 50)) == [b.arrivals_in_slot(t) for t in range(50)]


def test_stream_rejects_going_back():
    s = ArrivalStream(ArrivalSpec("bap", 2.0), np.random.default_rng(0))
    s.arrivals_in_slot(5)
    with pytest.raises(ValueError):
        s.arrivals_in_slot(4)


@given(st.floats(1, 1000))
@settings(max_examples=50, deadline=None)
def test_bap_pmf_sums_to_one_with_mean_lambda(lam):
    m = np.arange(1, int(60 * lam) + 200)
    p = np.array([bap_interarrival_pmf(int(k), lam) for k in m[:5]])
    assert np.all(p >= 0)
    rho = 1 / lam
    tail = (1 - rho) ** (m[-1])
    total = sum(bap_interarrival_pmf(int(k), lam) for k in m) if lam < 20 else 1 - tail
    assert total == pytest.approx(1 - tail, abs=1e-9)


def test_pap_density_integrates_to_one():
    from scipy.integrate import quad
    val, _ = quad(lambda x: pap_interarrival_density(x, 10.0), 1e-12, np.inf)
    mean, _ = quad(lambda x: x * pap_interarrival_density(x, 10.0), 1e-12, np.inf)
    assert val == pytest.approx(1.0, abs=1e-9)
    assert mean == pytest.approx(10.0, rel=1e-8)


def test_interarrival_domain_errors():
    with pytest.raises(ValueError):
        pap_interarrival_density(0.0, 10)
    with pytest.raises(ValueError):
        bap_interarrival_pmf(0, 10)
