"""Per-slot packet arrivals for the Poisson, Bernoulli and constant processes.

Arrivals use two of a link's per-slot uniforms: one decides the count
and, for PAP, one places the first arrival inside the slot. Keeping the
draw layout fixed lets the vectorized engine and the slot-by-slot
reference engine consume identical random streams.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.stats import poisson

from .model import ArrivalSpec


@lru_cache(maxsize=64)
def _poisson_cdf(mu: float) -> np.ndarray:
    kmax = int(mu + 20.0 * math.sqrt(mu)) + 30
    cdf = poisson.cdf(np.arange(kmax + 1), mu)
    cdf[-1] = 1.0
    return cdf


def arrival_counts(spec: ArrivalSpec, u, slots, phase):
    """Arrival counts for ``slots`` given per-slot uniforms ``u``.

    CAP ignores ``u``; BAP is ``u < 1/λ``; PAP inverts the Poisson(1/λ) CDF.
    """
    slots = np.asarray(slots)
    if spec.kind == "cap":
        lam = int(spec.mean_interarrival)
        return ((slots - phase) % lam == 0).astype(np.int64)
    u = np.asarray(u, dtype=float)
    if spec.kind == "bap":
        return (u < spec.rate).astype(np.int64)
    return np.searchsorted(_poisson_cdf(spec.rate), u, side="right").astype(np.int64)


def first_arrival_offset(spec: ArrivalSpec, counts, v):
    """Position in (0, 1) of the earliest arrival of a slot, 0 if none.

    Only PAP arrivals are spread inside the slot; the minimum of ``c``
    uniform positions is ``1 - v**(1/c)``. BAP/CAP arrive at slot start.
    """
    counts = np.asarray(counts)
    if spec.kind != "pap":
        return np.zeros(counts.shape)
    v = np.asarray(v, dtype=float)
    c = np.maximum(counts, 1)
    return np.where(counts > 0, 1.0 - (1.0 - v) ** (1.0 / c), 0.0)


def draw_phases(spec: ArrivalSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.kind != "cap":
        return np.zeros(n, dtype=np.int64)
    lam = int(spec.mean_interarrival)
    if spec.cap_phase is not None:
        return np.full(n, spec.cap_phase % lam, dtype=np.int64)
    return rng.integers(0, lam, size=n)


class ArrivalStream:
    """Single-link arrival generator; slots must be queried in nondecreasing order."""

    def __init__(self, spec: ArrivalSpec, rng: np.random.Generator, phase=None):
        self.spec = spec
        self.rng = rng
        if phase is None:
            phase = int(draw_phases(spec, 1, rng)[0])
        self.link_phase = phase
        self._last = -1

    def arrivals_in_slot(self, slot: int) -> int:
        if slot < self._last:
            raise ValueError("slots must be queried in nondecreasing order")
        self._last = slot
        u = self.rng.random()
        return int(arrival_counts(self.spec, u, slot, self.link_phase))

    def counts(self, start: int, stop: int) -> np.ndarray:
        """Counts for ``range(start, stop)``; same stream as repeated single-slot calls."""
        if start < self._last:
            raise ValueError("slots must be queried in nondecreasing order")
        self._last = stop - 1
        u = self.rng.random(stop - start)
        return arrival_counts(self.spec, u, np.arange(start, stop), self.link_phase)


def pap_interarrival_density(x: float, lam: float) -> float:
    if x <= 0:
        raise ValueError("interarrival density is defined for x > 0")
    return math.exp(-x / lam) / lam


def bap_interarrival_pmf(m: int, lam: float) -> float:
    if m < 1:
        raise ValueError("interarrival pmf is defined for m >= 1")
    rho = 1.0 / lam
    return (1.0 - rho) ** (m - 1) * rho
