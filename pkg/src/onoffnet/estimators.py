"""Uncertainty for simulation tallies and simulation-vs-closed-form tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np

from .analytics import AnalyticReport, model_key


class Estimate(NamedTuple):
    estimate: float
    standard_error: float


def binomial_ci(successes: int, trials: int) -> Estimate:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    return Estimate(p, math.sqrt(p * (1 - p) / trials))


@dataclass(frozen=True)
class Tolerances:
    z: float = 3.0
    throughput_rel: float = 0.15


@dataclass(frozen=True)
class ValidationRow:
    quantity: str
    analytic: float
    empirical: float
    stderr: float
    z_score: float
    passed: bool

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


def _z_row(name, analytic, empirical, se, z_max):
    if se > 0:
        z = (empirical - analytic) / se
        ok = abs(z) <= z_max
    else:
        z = 0.0 if empirical == analytic else math.copysign(math.inf, empirical - analytic)
        ok = empirical == analytic
    return ValidationRow(name, analytic, empirical, se, z, bool(ok))


def compare(stats, report: AnalyticReport, tolerances: Tolerances = Tolerances()):
    """Validation rows pairing each closed form with its simulation estimate.

    The interference variance row passes when the estimate does not exceed
    the bound by more than ``z`` standard errors. The throughput row uses a
    relative tolerance and is only produced under strong interference.
    """
    if report.key != model_key(stats.config):
        raise ValueError("stats and report come from different configurations")
    net, se = stats.network, stats.stderr
    z = tolerances.z
    rows = [
        _z_row("delta", report.delta, net["delta"], se["delta"], z),
        _z_row("activation", report.activation, net["activation"], se["activation"], z),
    ]
    if math.isfinite(net["drop_prob"]):
        rows.insert(1, _z_row("drop_prob", report.drop_prob, net["drop_prob"],
                              se["drop_prob"], z))
    if stats.interference_samples.size > 1:
        rows.append(_z_row("interference_mean", report.interference_mean,
                           net["interference_mean"], se["interference_mean"], z))
        v, vse = net["interference_variance"], se["interference_variance"]
        zv = (v - report.interference_var_bound) / vse if vse > 0 else 0.0
        rows.append(ValidationRow("interference_var_bound", report.interference_var_bound,
                                  v, vse, zv, bool(zv <= z)))
    if report.strong_interference and math.isfinite(report.throughput_approx):
        t = net["throughput"]
        rel = abs(t - report.throughput_approx) / report.throughput_approx
        rows.append(ValidationRow("throughput", report.throughput_approx, t,
                                  se["throughput"], rel, bool(rel <= tolerances.throughput_rel)))
    return rows


@dataclass(frozen=True)
class DelaySummary:
    mean: float
    p50: int
    p95: int
    max: int
    histogram: np.ndarray
    count: int


def hist_percentile(hist, p) -> int:
    """Smallest d whose empirical CDF reaches ``p`` (lower percentile)."""
    c = np.cumsum(hist)
    if not c.size or c[-1] == 0:
        raise ValueError("no delay samples")
    return int(np.searchsorted(c, math.ceil(p * c[-1] - 1e-9), side="left"))


def summarize_histogram(hist) -> DelaySummary:
    """Summary of a delay histogram (``hist[d]`` = number of samples equal to d)."""
    h = np.asarray(hist, dtype=np.int64)
    total = int(h.sum())
    if total == 0:
        raise ValueError("no delay samples")
    d = np.arange(h.size)
    return DelaySummary(
        mean=float(np.dot(d, h) / total),
        p50=hist_percentile(h, 0.5),
        p95=hist_percentile(h, 0.95),
        max=int(d[h > 0][-1]),
        histogram=h,
        count=total,
    )


def delay_summary(delay_samples) -> DelaySummary:
    """Exact order statistics of integer delays, lower-percentile convention."""
    x = np.asarray(list(delay_samples), dtype=np.int64)
    if x.size == 0:
        raise ValueError("no delay samples")
    if x.min() < 0:
        raise ValueError("delays must be >= 0")
    s = summarize_histogram(np.bincount(x))
    # exact arithmetic mean of the samples themselves
    return DelaySummary(float(x.mean()), s.p50, s.p95, s.max, s.histogram, s.count)
