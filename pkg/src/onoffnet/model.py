"""Shared domain types: channel, shadowing, arrivals, policy and network config.

All types are frozen dataclasses. Construction never validates; call
:func:`validate` (or :func:`config_errors`) to check invariants, so a bad
configuration can be reported in full rather than one field at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtr, ndtri

KINDS = ("pap", "bap", "cap")
SHADOWING_KINDS = ("lognormal", "constant", "bounded-uniform")
RATE_MODES = ("instantaneous", "threshold")


class ConfigError(ValueError):
    """Raised by :func:`validate`; ``errors`` holds every ``(path, reason)`` pair."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{p}: {r}" for p, r in self.errors))


@dataclass(frozen=True)
class ShadowingSpec:
    """Distribution of the cross-link shadowing factor.

    For ``lognormal``, ``mean`` and ``variance`` parametrize the parent
    distribution; an optional ``lower``/``upper`` truncation renormalizes it
    and :meth:`first_moment` / :meth:`second_moment` report the truncated
    moments. For ``bounded-uniform`` the support is ``[lower, upper]`` and
    ``mean`` must be its midpoint (use :meth:`bounded_uniform`).
    """

    kind: str = "lognormal"
    mean: float = 0.5
    variance: float = 1.0
    lower: Optional[float] = None
    upper: Optional[float] = None

    @classmethod
    def lognormal(cls, mean, variance, lower=None, upper=None):
        return cls("lognormal", float(mean), float(variance), lower, upper)

    @classmethod
    def constant(cls, value):
        return cls("constant", float(value), 0.0)

    @classmethod
    def bounded_uniform(cls, lower, upper):
        return cls("bounded-uniform", 0.5 * (lower + upper), (upper - lower) ** 2 / 12.0,
                   float(lower), float(upper))

    def _log_params(self):
        # parent lognormal: log(beta) ~ N(mu, s2)
        s2 = math.log1p(self.variance / self.mean**2)
        return math.log(self.mean) - 0.5 * s2, s2

    def _truncated(self):
        return self.kind == "lognormal" and self.variance > 0 and (
            self.lower is not None or self.upper is not None)

    def _log_bounds(self):
        a = -math.inf if not self.lower else math.log(self.lower)
        b = math.inf if self.upper is None else math.log(self.upper)
        return a, b

    def raw_moment(self, k: int) -> float:
        """E[beta**k] under the (possibly truncated) distribution."""
        if self.kind == "constant" or (self.kind == "lognormal" and self.variance == 0):
            return self.mean**k
        if self.kind == "bounded-uniform":
            lo, hi = self.lower, self.upper
            if hi == lo:
                return lo**k
            return (hi ** (k + 1) - lo ** (k + 1)) / ((k + 1) * (hi - lo))
        mu, s2 = self._log_params()
        full = math.exp(k * mu + 0.5 * k * k * s2)
        if not self._truncated():
            return full
        s = math.sqrt(s2)
        a, b = self._log_bounds()
        z = float(ndtr((b - mu) / s) - ndtr((a - mu) / s))
        zk = float(ndtr((b - mu - k * s2) / s) - ndtr((a - mu - k * s2) / s))
        return full * zk / z

    def first_moment(self) -> float:
        return self.raw_moment(1)

    def second_moment(self) -> float:
        return self.raw_moment(2)

    def ppf(self, u):
        """Inverse CDF, vectorized over uniforms ``u`` in [0, 1)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "constant" or (self.kind == "lognormal" and self.variance == 0):
            return np.full(u.shape, self.mean)
        if self.kind == "bounded-uniform":
            return self.lower + (self.upper - self.lower) * u
        mu, s2 = self._log_params()
        s = math.sqrt(s2)
        if self._truncated():
            a, b = self._log_bounds()
            fa, fb = ndtr((a - mu) / s), ndtr((b - mu) / s)
            u = fa + (fb - fa) * u
        return np.exp(mu + s * ndtri(u))

    def errors(self, path="shadowing"):
        out = []
        if self.kind not in SHADOWING_KINDS:
            return [(f"{path}.kind", f"unknown shadowing kind {self.kind!r}")]
        if not self.mean > 0:
            out.append((f"{path}.mean", "mean must be > 0"))
        if self.variance < 0:
            out.append((f"{path}.variance", "variance must be >= 0"))
        if self.kind == "bounded-uniform":
            if self.lower is None or self.upper is None:
                out.append((path, "bounded-uniform requires lower and upper"))
            elif not (0 < self.lower <= self.upper < math.inf):
                out.append((path, "bounds must satisfy 0 < lower <= upper < inf"))
            elif abs(self.mean - 0.5 * (self.lower + self.upper)) > 1e-12 * self.upper:
                out.append((f"{path}.mean", "mean must equal the midpoint of [lower, upper]"))
        if self.kind == "lognormal" and (self.lower is not None or self.upper is not None):
            lo = self.lower or 0.0
            hi = math.inf if self.upper is None else self.upper
            if not (0 <= lo < hi):
                out.append((path, "truncation must satisfy 0 <= lower < upper"))
        if not out:
            m = self.first_moment()
            if not (0 < m <= 1):
                out.append((f"{path}.mean", f"effective mean {m:g} outside (0, 1]"))
        return out


@dataclass(frozen=True)
class ChannelParams:
    alpha: float = 0.4
    shadowing: ShadowingSpec = field(default_factory=ShadowingSpec)
    noise_power: float = 1.0

    def alpha_hat(self) -> float:
        return self.alpha * self.shadowing.first_moment()

    def kappa(self) -> float:
        return self.shadowing.second_moment()

    def errors(self, path="channel"):
        out = []
        if not (0 <= self.alpha <= 1):
            out.append((f"{path}.alpha", "alpha out of [0,1]"))
        if not self.noise_power > 0:
            out.append((f"{path}.noise_power", "noise power must be > 0"))
        out += self.shadowing.errors(f"{path}.shadowing")
        return out


@dataclass(frozen=True)
class ArrivalSpec:
    """Arrival process; ``cap_phase=None`` draws a uniform phase per link."""

    kind: str = "pap"
    mean_interarrival: float = 10.0
    cap_phase: Optional[int] = None

    @property
    def rate(self) -> float:
        return 1.0 / self.mean_interarrival

    def errors(self, path="arrivals"):
        out = []
        lam = self.mean_interarrival
        if self.kind not in KINDS:
            out.append((f"{path}.kind", f"unknown arrival kind {self.kind!r}"))
        if not lam >= 1:
            out.append((f"{path}.lambda", "mean interarrival must be >= 1"))
        if self.kind == "cap" and lam != math.floor(lam):
            out.append((f"{path}.lambda", "CAP requires integer λ"))
        if self.cap_phase is not None and self.cap_phase < 0:
            out.append((f"{path}.cap_phase", "fixed phase must be >= 0"))
        return out


@dataclass(frozen=True)
class OnOffPolicy:
    threshold: float = 0.0

    @classmethod
    def from_activation_prob(cls, q):
        return cls(-math.log(q))

    def activation_prob(self) -> float:
        return math.exp(-self.threshold)

    def errors(self, path="policy"):
        if not (self.threshold >= 0 and math.isfinite(self.threshold)):
            return [(f"{path}.threshold", "threshold must be finite and >= 0")]
        return []


def default_warmup(arrivals: ArrivalSpec) -> int:
    return int(max(10 * math.ceil(arrivals.mean_interarrival), 1000))


@dataclass(frozen=True)
class NetworkConfig:
    """Everything a simulation run needs. ``warmup=None`` resolves to the default."""

    n: int = 500
    channel: ChannelParams = field(default_factory=ChannelParams)
    arrivals: ArrivalSpec = field(default_factory=ArrivalSpec)
    policy: OnOffPolicy = field(default_factory=OnOffPolicy)
    horizon: int = 1_000_000
    warmup: Optional[int] = None
    seed: int = 0
    rate_mode: str = "instantaneous"

    def __post_init__(self):
        if self.warmup is None:
            object.__setattr__(self, "warmup", default_warmup(self.arrivals))

    @property
    def window(self) -> int:
        return self.horizon - self.warmup

    def replace(self, **changes) -> "NetworkConfig":
        import dataclasses
        return dataclasses.replace(self, **changes)


def config_errors(config: NetworkConfig):
    """Every violated invariant as a list of ``(field path, reason)``."""
    out = []
    if not (isinstance(config.n, (int, np.integer)) and config.n >= 1):
        out.append(("n", "link count must be an integer >= 1"))
    out += config.channel.errors()
    out += config.arrivals.errors()
    out += config.policy.errors()
    if not (isinstance(config.horizon, (int, np.integer)) and config.horizon >= 1):
        out.append(("horizon", "horizon must be an integer >= 1"))
    if not (isinstance(config.warmup, (int, np.integer)) and config.warmup >= 0):
        out.append(("warmup", "warmup must be an integer >= 0"))
    elif isinstance(config.horizon, (int, np.integer)) and config.warmup >= config.horizon:
        out.append(("warmup", "warmup must be < horizon"))
    if not (0 <= config.seed < 2**64):
        out.append(("seed", "seed must be a 64-bit unsigned integer"))
    if config.rate_mode not in RATE_MODES:
        out.append(("rate_mode", f"unknown rate mode {config.rate_mode!r}"))
    elif config.rate_mode == "threshold" and not out and config.channel.alpha_hat() == 0:
        out.append(("rate_mode", "threshold rate needs alpha_hat > 0"))
    return out


def validate(config: NetworkConfig) -> NetworkConfig:
    """Return ``config`` unchanged, or raise :class:`ConfigError` listing all violations."""
    errs = config_errors(config)
    if errs:
        raise ConfigError(errs)
    return config


@dataclass(frozen=True)
class Derived:
    q: float
    alpha_hat: float
    kappa: float
    rho: float


def derived_quantities(config: NetworkConfig) -> Derived:
    return Derived(
        q=config.policy.activation_prob(),
        alpha_hat=config.channel.alpha_hat(),
        kappa=config.channel.kappa(),
        rho=config.arrivals.rate,
    )
