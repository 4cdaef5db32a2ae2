"""Closed-form buffer, dropping, interference and throughput expressions.

Everything here is exact in its stated model; the only approximations are
the throughput expressions, which are themselves large-``n`` formulas.
All logarithms are natural, throughput is in nats per channel use.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .model import KINDS, NetworkConfig, derived_quantities


def _check(kind, lam, q):
    if kind not in KINDS:
        raise ValueError(f"unknown arrival kind {kind!r}")
    if not lam >= 1:
        raise ValueError("lambda must be >= 1")
    if not (0 < q <= 1):
        raise ValueError("q must lie in (0, 1]")
    if kind == "cap" and lam != math.floor(lam):
        warnings.warn("CAP formulas assume an integer lambda", stacklevel=3)


def _neg_log1m(q):
    # log(1/(1-q)), infinite at q = 1
    return math.inf if q == 1 else -math.log1p(-q)


def full_buffer_prob(kind: str, lam: float, q: float) -> float:
    """Stationary probability that the one-packet buffer is full."""
    _check(kind, lam, q)
    if kind == "pap":
        return 1.0 / (1.0 + lam * _neg_log1m(q))
    if kind == "bap":
        return 1.0 / (1.0 + (lam - 1.0) * q)
    if q == 1:
        return 1.0 / lam
    return -math.expm1(lam * math.log1p(-q)) / (lam * q)


def drop_prob(kind: str, lam: float, q: float) -> float:
    """Probability that a buffered packet is displaced before service."""
    _check(kind, lam, q)
    if q == 1:
        return 0.0
    if kind == "pap":
        return 1.0 / (1.0 + lam * _neg_log1m(q))
    if kind == "bap":
        r = (1.0 - q) / (lam * q)
        return r / (1.0 + r)
    return math.exp(lam * math.log1p(-q))


def full_buffer_prob_dtau(kind: str, lam: float, q: float) -> float:
    """d(full_buffer_prob)/d(threshold), using dq/dtau = -q."""
    d = full_buffer_prob(kind, lam, q)
    if kind == "pap":
        return q * lam * d * d / (1.0 - q)
    if kind == "bap":
        return q * (lam - 1.0) * d * d
    return d - (1.0 - q) ** (lam - 1.0)


def q_for_drop(kind: str, lam: float, epsilon: float) -> float:
    """Activation probability at which the drop probability equals ``epsilon``."""
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    if not lam >= 1:
        raise ValueError("lambda must be >= 1")
    if kind == "pap":
        return -math.expm1(-(1.0 / epsilon - 1.0) / lam)
    if kind == "bap":
        return (1.0 - epsilon) / (1.0 + epsilon * (lam - 1.0))
    if kind == "cap":
        return -math.expm1(math.log(epsilon) / lam)
    raise ValueError(f"unknown arrival kind {kind!r}")


def interference_moments(n, alpha, shadowing, q, delta):
    """Mean and variance upper bound of the aggregate interference at a receiver.

    ``shadowing`` is a :class:`~onoffnet.model.ShadowingSpec`.
    """
    p = q * delta
    mean = (n - 1) * alpha * shadowing.first_moment() * p
    var_bound = (n - 1) * 2.0 * alpha * shadowing.second_moment() * p
    return mean, var_bound


def network_throughput_approx(n, alpha_hat, q, delta) -> float:
    """Large-n effective network throughput under strong interference."""
    if not (0 < q <= 1):
        raise ValueError("q must lie in (0, 1]")
    tau = -math.log(q)
    if tau == 0:
        return 0.0
    load = n * alpha_hat * q * delta
    if not load > 0:
        raise ValueError("n * alpha_hat * q * delta must be > 0")
    return n * q * delta * math.log1p(tau / load)


def throughput_bounds(n, alpha_hat, q, delta):
    """(lower, upper): the log numerator uses tau and E[h | h > tau] = tau + 1."""
    lower = network_throughput_approx(n, alpha_hat, q, delta)
    tau = -math.log(q)
    load = n * alpha_hat * q * delta
    if not load > 0:
        raise ValueError("n * alpha_hat * q * delta must be > 0")
    upper = n * q * delta * math.log1p((tau + 1.0) / load)
    return lower, upper


@dataclass(frozen=True)
class AnalyticReport:
    delta: float
    drop_prob: float
    activation: float
    interference_mean: float
    interference_var_bound: float
    throughput_approx: float
    throughput_lower: float
    throughput_upper: float
    key: tuple = ()
    noise_power: float = 1.0

    @property
    def strong_interference(self) -> bool:
        return self.interference_mean >= self.noise_power


def model_key(config: NetworkConfig) -> tuple:
    """The part of a config the closed forms depend on."""
    return (config.n, config.channel, config.arrivals.kind,
            float(config.arrivals.mean_interarrival), config.policy)


def report(config: NetworkConfig) -> AnalyticReport:
    d = derived_quantities(config)
    kind, lam = config.arrivals.kind, config.arrivals.mean_interarrival
    delta = full_buffer_prob(kind, lam, d.q)
    mean, var_bound = interference_moments(
        config.n, config.channel.alpha, config.channel.shadowing, d.q, delta)
    try:
        lo, hi = throughput_bounds(config.n, d.alpha_hat, d.q, delta)
    except ValueError:
        lo = hi = math.nan
    return AnalyticReport(
        delta=delta,
        drop_prob=drop_prob(kind, lam, d.q),
        activation=d.q * delta,
        interference_mean=mean,
        interference_var_bound=var_bound,
        throughput_approx=lo,
        throughput_lower=lo,
        throughput_upper=hi,
        key=model_key(config),
        noise_power=config.channel.noise_power,
    )

