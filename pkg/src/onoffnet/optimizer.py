"""Threshold selection and the throughput / delay / dropping tradeoff formulas.

The objective throughout is the large-n effective throughput
``f(q) = n q D(q) log(1 + tau / (n a q D(q)))`` with ``tau = -log q``,
``a`` the effective cross gain and ``D`` the exact full-buffer probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect, brentq, minimize_scalar

from . import analytics
from .model import KINDS

Q_MIN, Q_MAX = 1e-6, 0.999


@dataclass(frozen=True)
class OptimumResult:
    q_star: float
    tau_star: float
    t_eff_star: float
    method: str
    regime: str = "n/a"
    foc_residual: float = math.nan
    flags: tuple = ()


def objective(kind, n, alpha_hat, lam, q) -> float:
    delta = analytics.full_buffer_prob(kind, lam, q)
    return analytics.network_throughput_approx(n, alpha_hat, q, delta)


def foc_residual(kind, n, alpha_hat, lam, q) -> float:
    """Relative residual of ``n a q D^2 = (D - dD/dtau) tau^2``."""
    d = analytics.full_buffer_prob(kind, lam, q)
    dd = analytics.full_buffer_prob_dtau(kind, lam, q)
    tau = -math.log(q)
    lhs = n * alpha_hat * q * d * d
    return abs(lhs - (d - dd) * tau * tau) / lhs


def _check(kind, n, alpha_hat, lam):
    if kind not in KINDS:
        raise ValueError(f"unknown arrival kind {kind!r}")
    if n < 2:
        raise ValueError("n must be >= 2")
    if not (0 < alpha_hat <= 1):
        raise ValueError("alpha_hat must lie in (0, 1]")
    if not lam >= 1:
        raise ValueError("lambda must be >= 1")


def _count_peaks(y):
    inner = (y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])
    return int(inner.sum())


def _grid_then_golden(f, lo, hi, num):
    """Maximize ``f`` over [lo, hi]: coarse grid, then golden section on the bracket."""
    xs = np.linspace(lo, hi, num)
    ys = np.array([f(x) for x in xs])
    i = int(np.nanargmax(ys))
    flags = []
    if _count_peaks(np.nan_to_num(ys, nan=-np.inf)) > 1:
        flags.append("multimodal")
    if i in (0, num - 1):
        flags.append("boundary")
        return xs[i], ys[i], tuple(flags)
    res = minimize_scalar(lambda x: -f(x), bracket=(xs[i - 1], xs[i], xs[i + 1]),
                          method="golden", tol=1e-12)
    x = min(max(res.x, xs[i - 1]), xs[i + 1])
    return x, f(x), tuple(flags)


def optimize_q_numeric(kind, n, alpha_hat, lam, grid_points=400) -> OptimumResult:
    """Maximize the large-n throughput over q in log space."""
    _check(kind, n, alpha_hat, lam)

    def f(x):
        return objective(kind, n, alpha_hat, lam, math.exp(x))

    x, val, flags = _grid_then_golden(f, math.log(Q_MIN), math.log(Q_MAX), grid_points)
    q = math.exp(x)
    return OptimumResult(q, -math.log(q), val, "numeric",
                         foc_residual=foc_residual(kind, n, alpha_hat, lam, q), flags=flags)


def solve_foc(kind, n, alpha_hat, lam) -> OptimumResult:
    """Root of the first-order condition with the exact full-buffer probability."""
    _check(kind, n, alpha_hat, lam)

    def g(tau):
        q = math.exp(-tau)
        d = analytics.full_buffer_prob(kind, lam, q)
        dd = analytics.full_buffer_prob_dtau(kind, lam, q)
        return n * alpha_hat * q * d * d - (d - dd) * tau * tau

    taus = np.linspace(-math.log(Q_MAX), -math.log(Q_MIN), 400)
    vals = np.array([g(t) for t in taus])
    sign = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if sign.size == 0:
        raise ValueError("first-order condition has no root on the search interval")
    flags = ("multiple-roots",) if sign.size > 1 else ()
    k = sign[0]
    tau = brentq(g, taus[k], taus[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
    q = math.exp(-tau)
    return OptimumResult(q, tau, objective(kind, n, alpha_hat, lam, q), "foc",
                         foc_residual=foc_residual(kind, n, alpha_hat, lam, q), flags=flags)


def solve_tau_fixed_point(n, alpha_hat) -> float:
    """The root tau > 1 of ``n a exp(-tau) = tau**2`` (by bisection)."""
    na = n * alpha_hat
    if not na > math.e:
        raise ValueError("n * alpha_hat must exceed e for a root with tau > 1")

    def g(tau):
        return na * math.exp(-tau) - tau * tau

    return bisect(g, 1.0, math.log(na) + 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                  maxiter=500)


def cap_regime(psi: float) -> str:
    if psi >= 10:
        return "case1"
    if psi > 0.1:
        return "case2"
    return "case3"


def q_opt_asymptotic(kind, n, alpha_hat, lam) -> OptimumResult:
    _check(kind, n, alpha_hat, lam)
    tau = solve_tau_fixed_point(n, alpha_hat)
    regime = "n/a"
    if kind == "cap":
        regime = cap_regime(n * alpha_hat / (tau * tau * lam))
        if regime == "case3":
            x = lam * math.log(lam) ** 2 / (n * alpha_hat)
            q = math.log(x) / lam if x > 1 else math.nan
            if not (0 < q < 1):
                num = optimize_q_numeric(kind, n, alpha_hat, lam)
                return OptimumResult(num.q_star, num.tau_star, num.t_eff_star, "numeric",
                                     regime, num.foc_residual,
                                     num.flags + ("case3-fallback",))
            tau = math.log(lam) - math.log(math.log(x))
    q = math.exp(-tau)
    return OptimumResult(q, tau, objective(kind, n, alpha_hat, lam, q), "asymptotic",
                         regime, foc_residual(kind, n, alpha_hat, lam, q))


def lambda_epsilon(kind, q, epsilon, exact=True) -> float:
    """Mean interarrival at which the drop probability equals ``epsilon``.

    ``exact=False`` gives the small-q forms ``(1/eps - 1)/q``, ``(1/eps)/q``
    and ``log(1/eps)/q`` for PAP, BAP and CAP.
    """
    if not (0 < q < 1):
        raise ValueError("q must lie in (0, 1)")
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    if kind == "pap":
        return (1 / epsilon - 1) / (-math.log1p(-q) if exact else q)
    if kind == "bap":
        return (1 - q) * (1 / epsilon - 1) / q if exact else 1 / (epsilon * q)
    if kind == "cap":
        return math.log(1 / epsilon) / (-math.log1p(-q) if exact else q)
    raise ValueError(f"unknown arrival kind {kind!r}")


def lambda_opt(kind, n, alpha_hat, epsilon) -> float:
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    na = n * alpha_hat
    if kind in ("pap", "bap"):
        arg = na / epsilon
    elif kind == "cap":
        arg = na * math.log(1 / epsilon)
    else:
        raise ValueError(f"unknown arrival kind {kind!r}")
    if not arg > 1:
        raise ValueError("lambda_opt needs its log argument to exceed 1")
    return na / math.log(arg) ** 2


def degradation(kind, epsilon, alpha_hat) -> float:
    """Throughput lost, in nats per channel use, by holding the drop rate at ``epsilon``."""
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    if kind in ("pap", "bap"):
        return math.log(1 / epsilon) / alpha_hat
    if kind == "cap":
        if epsilon >= math.exp(-1):
            raise ValueError("CAP degradation needs epsilon < 1/e")
        return math.log(math.log(1 / epsilon)) / alpha_hat
    raise ValueError(f"unknown arrival kind {kind!r}")


class TradeoffPoint(NamedTuple):
    lam: float
    t_eff: float
    skipped: bool


def tradeoff_throughput(kind, n, alpha_hat, epsilon, lam) -> float:
    """Throughput at delay bound ``lam`` when the drop rate is pinned to ``epsilon``."""
    if kind in ("pap", "bap"):
        tau = math.log(lam * epsilon)
    elif kind == "cap":
        tau = math.log(lam / math.log(1 / epsilon))
    else:
        raise ValueError(f"unknown arrival kind {kind!r}")
    if not tau > 0:
        raise ValueError("lambda outside the domain (threshold would be <= 0)")
    return (n / lam) * math.log1p(lam * tau / (n * alpha_hat))


def tradeoff_curve(kind, n, alpha_hat, epsilon, lambda_grid):
    out = []
    for lam in lambda_grid:
        try:
            out.append(TradeoffPoint(float(lam),
                                     tradeoff_throughput(kind, n, alpha_hat, epsilon, lam),
                                     False))
        except ValueError:
            out.append(TradeoffPoint(float(lam), math.nan, True))
    return out


def tradeoff_domain_min(kind, epsilon) -> float:
    """Smallest lambda of the tradeoff curve's domain (exclusive)."""
    return 1 / epsilon if kind in ("pap", "bap") else math.log(1 / epsilon)


def tradeoff_peak(kind, n, alpha_hat, epsilon, lam_max=1e7) -> TradeoffPoint:
    """Numerical maximizer of the tradeoff curve over lambda."""
    lo = math.log(max(1.0, tradeoff_domain_min(kind, epsilon)) * (1 + 1e-9))
    if not lo < math.log(lam_max):
        raise ValueError("empty lambda domain")

    def f(x):
        return tradeoff_throughput(kind, n, alpha_hat, epsilon, math.exp(x))

    x, val, _ = _grid_then_golden(f, lo, math.log(lam_max), 400)
    return TradeoffPoint(math.exp(x), val, False)
