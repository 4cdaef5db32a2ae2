"""Slotted Monte Carlo simulation of the on-off network.

Random stream layout (shared by both engines, so they draw identical numbers):

* ``SeedSequence(seed).spawn(n + 2)``: child 0 sets up CAP phases, child 1
  feeds the cross gains, child ``2 + i`` is link ``i``.
* Link ``i`` consumes three uniforms per slot: arrival count, position of
  the first arrival inside the slot (PAP only), direct gain.
* In each slot with ``k >= 2`` active links the cross stream yields
  ``k (k - 1)`` triples, receiver-major over the active links in id order.
  Every active receiver gives one interference sample, 0 when it is alone.

Within a slot: arrivals (a held packet is dropped when a new one lands),
buffer-fullness sampling, service (``holding and h > tau``), interference,
rate accrual, departure.

Two fullness measures are kept. ``decision_full_hat`` is the fraction of
decision instants at which the buffer holds a packet. ``delta_hat`` is the
time-average occupancy when PAP arrivals are placed uniformly inside the
slot and service completes at the slot's end; for BAP and CAP (arrivals at
slot start) the two coincide.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import analytics
from .arrivals import arrival_counts, draw_phases, first_arrival_offset
from .channel import cross_gain_from_uniforms, direct_gain_from_uniform
from .estimators import hist_percentile
from .model import NetworkConfig, derived_quantities, validate

N_BATCHES = 50
_NEVER = np.iinfo(np.int64).max // 4
_PAIR_BUDGET = 1 << 20


class SimulationInvariantError(RuntimeError):
    """A conservation or consistency invariant failed during a run."""


# --------------------------------------------------------------------------
# helpers shared by both engines


def _streams(config: NetworkConfig, seed_sequence=None):
    ss = seed_sequence if seed_sequence is not None else np.random.SeedSequence(config.seed)
    kids = ss.spawn(config.n + 2)
    setup, cross = (np.random.Generator(np.random.PCG64(k)) for k in kids[:2])
    links = [np.random.Generator(np.random.PCG64(k)) for k in kids[2:]]
    phases = draw_phases(config.arrivals, config.n, setup)
    return phases, cross, links


def _segment_sums(values, lengths):
    """Sums of consecutive segments of ``values``; empty segments give 0."""
    lengths = np.asarray(lengths, dtype=np.int64)
    out = np.zeros(lengths.size)
    nz = lengths > 0
    if nz.any():
        starts = (np.cumsum(lengths) - lengths)[nz]
        out[nz] = np.add.reduceat(values, starts)
    return out


def threshold_rate(config: NetworkConfig) -> float:
    """Per-active-slot rate under ``rate_mode=threshold``."""
    d = derived_quantities(config)
    tau = config.policy.threshold
    if tau == 0:
        return 0.0
    delta = analytics.full_buffer_prob(config.arrivals.kind, config.arrivals.mean_interarrival, d.q)
    return math.log1p(tau / (config.n * d.alpha_hat * d.q * delta))


def _batch_edges(warmup, horizon):
    b = min(N_BATCHES, horizon - warmup)
    return warmup + (np.arange(b + 1) * (horizon - warmup)) // b


def _hist(values, weights=None) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    if values.size == 0:
        return np.zeros(0, dtype=np.int64)
    if weights is None:
        return np.bincount(values)
    return np.bincount(values, weights=weights).astype(np.int64)


def _add_hist(a, b):
    if a.size < b.size:
        a, b = b, a
    out = a.copy()
    out[: b.size] += b
    return out


@dataclass
class _Tallies:
    """Raw window tallies; both engines fill this and share :func:`_finalize`."""

    n: int
    edges: np.ndarray
    arrived: np.ndarray = None
    served: np.ndarray = None
    dropped: np.ndarray = None
    active: np.ndarray = None
    full: np.ndarray = None
    occupancy: np.ndarray = None
    nats: np.ndarray = None
    holding_end: np.ndarray = None
    delay_hist: list = None
    drop_delay_hist: list = None
    b_occupancy: np.ndarray = None
    b_full: np.ndarray = None
    b_active: np.ndarray = None
    b_served: np.ndarray = None
    b_dropped: np.ndarray = None
    b_nats: np.ndarray = None
    interference: np.ndarray = None
    interference_slot: np.ndarray = None

    def __post_init__(self):
        n, b = self.n, self.edges.size - 1
        for name in ("arrived", "served", "dropped", "active", "full", "holding_end"):
            setattr(self, name, np.zeros(n, dtype=np.int64))
        self.occupancy = np.zeros(n)
        self.nats = np.zeros(n)
        self.delay_hist = [np.zeros(0, dtype=np.int64) for _ in range(n)]
        self.drop_delay_hist = [np.zeros(0, dtype=np.int64) for _ in range(n)]
        for name in ("b_full", "b_active", "b_served", "b_dropped"):
            setattr(self, name, np.zeros(b, dtype=np.int64))
        self.b_occupancy = np.zeros(b)
        self.b_nats = np.zeros(b)

    def batch_of(self, slots):
        return np.searchsorted(self.edges, slots, side="right") - 1


# --------------------------------------------------------------------------
# statistics


def _ratio(num, den):
    return num / den if den > 0 else math.nan


def _binom_se(p, trials):
    if not trials > 0 or not math.isfinite(p):
        return math.nan
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def _batch_se(values):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size < 2:
        return math.nan
    return float(np.std(v, ddof=1) / math.sqrt(v.size))


def _nanmax(*xs):
    xs = [x for x in xs if math.isfinite(x)]
    return max(xs) if xs else math.nan


def _hist_mean(h):
    total = h.sum()
    return float(np.dot(np.arange(h.size), h) / total) if total else math.nan


def _hist_quantile(h, p):
    return hist_percentile(h, p) if h.sum() else math.nan


@dataclass
class SimStats:
    """Window statistics of one run. Per-link arrays have length ``n``."""

    config: NetworkConfig
    seed: int
    horizon: int
    warmup: int
    delta_hat: np.ndarray
    decision_full_hat: np.ndarray
    drop_hat: np.ndarray
    activation_hat: np.ndarray
    throughput: np.ndarray
    mean_delay: np.ndarray
    p95_delay: np.ndarray
    arrived: np.ndarray
    served: np.ndarray
    dropped: np.ndarray
    holding_end: np.ndarray
    delay_hist: np.ndarray
    drop_delay_hist: np.ndarray
    link_delay_hist: list
    link_drop_delay_hist: list
    interference_samples: np.ndarray
    interference_slots: np.ndarray
    network: dict = field(default_factory=dict)
    stderr: dict = field(default_factory=dict)
    batches: dict = field(default_factory=dict)
    engine: str = "fast"

    @property
    def window(self) -> int:
        return self.horizon - self.warmup

    @property
    def interference_mean(self) -> float:
        return self.network["interference_mean"]

    @property
    def interference_variance(self) -> float:
        return self.network["interference_variance"]

    def summary(self) -> dict:
        """Network statistic name -> (value, standard error)."""
        return {k: (v, self.stderr.get(k, math.nan)) for k, v in self.network.items()}


def _finalize(config: NetworkConfig, t: _Tallies, engine: str, seed) -> SimStats:
    n, window = config.n, config.window
    lens = np.diff(t.edges)

    delay_hist = np.zeros(0, dtype=np.int64)
    drop_hist = np.zeros(0, dtype=np.int64)
    for h in t.delay_hist:
        delay_hist = _add_hist(delay_hist, h)
    for h in t.drop_delay_hist:
        drop_hist = _add_hist(drop_hist, h)

    packets = t.dropped + t.served
    with np.errstate(invalid="ignore", divide="ignore"):
        drop_link = np.where(packets > 0, t.dropped / np.maximum(packets, 1), np.nan)

    tot_packets = int(packets.sum())
    slots = n * window
    net = {
        "delta": float(t.occupancy.sum() / slots),
        "decision_full": float(t.full.sum() / slots),
        "drop_prob": _ratio(float(t.dropped.sum()), tot_packets),
        "activation": float(t.active.sum() / slots),
        "throughput": float(t.nats.sum() / window),
    }
    samples = t.interference
    net["interference_mean"] = float(samples.mean()) if samples.size else math.nan
    net["interference_variance"] = float(samples.var(ddof=1)) if samples.size > 1 else math.nan

    b_pk = t.b_dropped + t.b_served
    with np.errstate(invalid="ignore", divide="ignore"):
        b_drop = np.where(b_pk > 0, t.b_dropped / np.maximum(b_pk, 1), np.nan)
    se = {
        "delta": _nanmax(_binom_se(net["delta"], slots), _batch_se(t.b_occupancy / (n * lens))),
        "decision_full": _nanmax(_binom_se(net["decision_full"], slots),
                                 _batch_se(t.b_full / (n * lens))),
        "drop_prob": _nanmax(_binom_se(net["drop_prob"], tot_packets), _batch_se(b_drop)),
        "activation": _nanmax(_binom_se(net["activation"], slots),
                              _batch_se(t.b_active / (n * lens))),
        "throughput": _batch_se(t.b_nats / lens),
    }
    if samples.size > 1:
        bi = t.batch_of(t.interference_slot)
        m = net["interference_mean"]
        nb = lens.size
        cnt = np.bincount(bi, minlength=nb)
        keep = cnt > 0
        bm = np.bincount(bi, weights=samples, minlength=nb)[keep] / cnt[keep]
        bv = np.bincount(bi, weights=(samples - m) ** 2, minlength=nb)[keep] / cnt[keep]
        se["interference_mean"] = _batch_se(bm)
        se["interference_variance"] = _batch_se(bv)
    else:
        se["interference_mean"] = se["interference_variance"] = math.nan

    return SimStats(
        config=config,
        seed=seed,
        horizon=config.horizon,
        warmup=config.warmup,
        delta_hat=t.occupancy / window,
        decision_full_hat=t.full / window,
        drop_hat=drop_link,
        activation_hat=t.active / window,
        throughput=t.nats / window,
        mean_delay=np.array([_hist_mean(h) for h in t.delay_hist]),
        p95_delay=np.array([_hist_quantile(h, 0.95) for h in t.delay_hist], dtype=float),
        arrived=t.arrived,
        served=t.served,
        dropped=t.dropped,
        holding_end=t.holding_end,
        delay_hist=delay_hist,
        drop_delay_hist=drop_hist,
        link_delay_hist=t.delay_hist,
        link_drop_delay_hist=t.drop_delay_hist,
        interference_samples=samples,
        interference_slots=t.interference_slot,
        network=net,
        stderr=se,
        batches={"edges": t.edges, "occupancy": t.b_occupancy, "full": t.b_full,
                 "active": t.b_active, "served": t.b_served, "dropped": t.b_dropped,
                 "nats": t.b_nats},
        engine=engine,
    )


# --------------------------------------------------------------------------
# vectorized engine


def _link_timeline(config, u, phase, tally, i):
    """Replay one link's buffer over the whole horizon; returns its service slots."""
    T, W = config.horizon, config.warmup
    spec = config.arrivals
    slots = np.arange(T)
    counts = arrival_counts(spec, u[:, 0], slots, phase)
    offs = first_arrival_offset(spec, counts, u[:, 1])
    h = direct_gain_from_uniform(u[:, 2])

    A = np.flatnonzero(counts)
    G = np.flatnonzero(h > config.policy.threshold)
    if G.size:
        gi = np.searchsorted(G, A)
        g = np.where(gi < G.size, G[np.minimum(gi, G.size - 1)], _NEVER)
    else:
        g = np.full(A.size, _NEVER)
    nxt = np.append(A[1:], _NEVER)
    served = g < nxt
    dropped = ~served & (nxt < _NEVER)
    leave = np.where(served, g, nxt)
    end = np.where(served, g, np.minimum(nxt - 1, T - 1))

    diff = np.zeros(T + 1, dtype=np.int64)
    np.add.at(diff, A, 1)
    np.add.at(diff, end + 1, -1)
    full = np.cumsum(diff[:T])
    occ = full.astype(float)
    carried = np.zeros(A.size, dtype=bool)
    carried[1:] = dropped[:-1]
    occ[A] = np.where(carried, 1.0, 1.0 - offs[A])

    extra = counts[A] - 1
    holding_end = int((~served & ~dropped).sum())
    if counts.sum() != served.sum() + dropped.sum() + extra.sum() + holding_end:
        raise SimulationInvariantError(f"link {i}: arrivals not conserved")

    carried_in = int(((A < W) & (leave >= W)).sum())
    sw = served & (g >= W)
    dw = dropped & (nxt >= W)
    ew = A >= W
    tally.arrived[i] = int(counts[W:].sum()) + carried_in
    tally.served[i] = int(sw.sum())
    tally.dropped[i] = int(dw.sum() + extra[ew].sum())
    tally.holding_end[i] = holding_end
    if tally.arrived[i] != tally.served[i] + tally.dropped[i] + holding_end:
        raise SimulationInvariantError(f"link {i}: window arrivals not conserved")
    tally.full[i] = int(full[W:].sum())
    tally.occupancy[i] = float(np.cumsum(occ[W:])[-1])

    tally.delay_hist[i] = _hist(g[sw] - A[sw])
    dd = _hist(nxt[dw] - A[dw])
    nz = int(extra[ew].sum())
    if nz:
        dd = _add_hist(dd, np.array([nz], dtype=np.int64))
    tally.drop_delay_hist[i] = dd

    e = tally.edges
    tally.b_occupancy += np.add.reduceat(occ[W:], e[:-1] - W)
    tally.b_full += np.add.reduceat(full[W:], e[:-1] - W)
    nb = e.size - 1
    tally.b_served += np.bincount(tally.batch_of(g[sw]), minlength=nb)
    tally.b_dropped += np.bincount(tally.batch_of(nxt[dw]), minlength=nb)
    if nz:
        tally.b_dropped += np.bincount(tally.batch_of(A[ew]), weights=extra[ew],
                                       minlength=nb).astype(np.int64)

    svc = g[served]
    return svc, h[svc]


def _run_fast(config, seed_sequence=None) -> SimStats:
    n, T, W = config.n, config.horizon, config.warmup
    phases, cross, links = _streams(config, seed_sequence)
    tally = _Tallies(n, _batch_edges(W, T))

    ev_slot, ev_link, ev_h = [], [], []
    for i, rng in enumerate(links):
        u = rng.random((T, 3))
        s, hv = _link_timeline(config, u, int(phases[i]), tally, i)
        ev_slot.append(s)
        ev_link.append(np.full(s.size, i, dtype=np.int64))
        ev_h.append(hv)
        del u
    slot = np.concatenate(ev_slot) if ev_slot else np.zeros(0, dtype=np.int64)
    order = np.argsort(slot, kind="stable")
    slot = slot[order]
    link = np.concatenate(ev_link)[order]
    hval = np.concatenate(ev_h)[order]
    del ev_slot, ev_link, ev_h, order

    # interference, chunked to bound the number of cross-gain pairs in memory
    interference = np.zeros(slot.size)
    k_slot = np.bincount(slot, minlength=T)
    pairs_slot = k_slot * (k_slot - 1)
    ends = np.cumsum(pairs_slot)
    ev_start = np.cumsum(k_slot) - k_slot
    t0 = 0
    while t0 < T:
        base = ends[t0 - 1] if t0 else 0
        t1 = int(np.searchsorted(ends, base + _PAIR_BUDGET, side="right"))
        t1 = min(max(t1, t0 + 1), T)
        p = int(ends[t1 - 1] - base)
        lo, hi = ev_start[t0], ev_start[t1 - 1] + k_slot[t1 - 1]
        if p:
            gains = cross_gain_from_uniforms(config.channel, cross.random((p, 3)))
            seg = k_slot[slot[lo:hi]] - 1
            interference[lo:hi] = _segment_sums(gains, seg)
        t0 = t1

    inwin = slot >= W
    if config.rate_mode == "threshold":
        rates = np.full(slot.size, threshold_rate(config))
    else:
        rates = np.log1p(hval / (interference + config.channel.noise_power))
    np.add.at(tally.nats, link[inwin], rates[inwin])
    tally.active += np.bincount(link[inwin], minlength=n)
    bi = tally.batch_of(slot[inwin])
    nb = tally.edges.size - 1
    tally.b_active += np.bincount(bi, minlength=nb)
    np.add.at(tally.b_nats, bi, rates[inwin])

    tally.interference = interference[inwin]
    tally.interference_slot = slot[inwin]
    if np.any(tally.active > tally.full):
        raise SimulationInvariantError("service outside full-buffer slots")
    return _finalize(config, tally, "fast", config.seed)


# --------------------------------------------------------------------------
# slot-by-slot reference engine


@dataclass
class LinkState:
    """Per-link buffer and window counters; ``holding`` is the arrival slot or None."""

    holding: Optional[int] = None
    arrived: int = 0
    served: int = 0
    dropped: int = 0
    nats_accumulated: float = 0.0
    active_slots: int = 0
    full_buffer_slots: int = 0
    occupancy: float = 0.0
    delay_samples: Counter = field(default_factory=Counter)
    drop_delay_samples: Counter = field(default_factory=Counter)

    def begin_window(self):
        """Zero the window counters; a packet already buffered counts as arrived."""
        self.arrived = 0 if self.holding is None else 1
        self.served = self.dropped = self.active_slots = self.full_buffer_slots = 0
        self.nats_accumulated = self.occupancy = 0.0
        self.delay_samples.clear()
        self.drop_delay_samples.clear()

    def conserved(self) -> bool:
        return self.arrived == self.served + self.dropped + (self.holding is not None)


@dataclass
class LinkStream:
    """One link's uniforms: (arrival, first-arrival position, direct gain) per slot."""

    rng: np.random.Generator
    phase: int = 0

    def draw(self, spec, slot):
        u = self.rng.random(3)
        c = int(arrival_counts(spec, u[0], slot, self.phase))
        off = float(first_arrival_offset(spec, c, u[1]))
        return c, off, direct_gain_from_uniform(u[2])


@dataclass
class SlotRecord:
    slot: int
    active_set: frozenset
    interference_samples: dict
    drops_this_slot: int
    served_this_slot: int = 0
    occupancy: float = 0.0
    full_count: int = 0
    nats: float = 0.0


def step_slot(states: List[LinkState], streams: List[LinkStream], config: NetworkConfig,
              rng: np.random.Generator, slot: int, rate: Optional[float] = None) -> SlotRecord:
    """Advance every link by one slot. ``rng`` is the cross-gain stream."""
    if not 0 <= slot < config.horizon:
        raise ValueError("slot outside [0, horizon)")
    if slot == config.warmup:
        for s in states:
            s.begin_window()
    spec, tau = config.arrivals, config.policy.threshold
    drops = 0
    occ_total = 0.0
    full_count = 0
    gains = []
    for s, st in zip(states, streams):
        c, off, h = st.draw(spec, slot)
        carried = s.holding is not None
        if c:
            s.arrived += c
            if carried:
                s.dropped += 1
                s.drop_delay_samples[slot - s.holding] += 1
            if c > 1:
                s.dropped += c - 1
                s.drop_delay_samples[0] += c - 1
            drops += carried + c - 1
            s.holding = slot
        occ = 1.0 if carried else (1.0 - off if c else 0.0)
        s.occupancy += occ
        occ_total += occ
        if s.holding is not None:
            s.full_buffer_slots += 1
            full_count += 1
        gains.append(h)

    active = [i for i, s in enumerate(states) if s.holding is not None and gains[i] > tau]
    k = len(active)
    interference = {i: 0.0 for i in active}
    if k >= 2:
        g = cross_gain_from_uniforms(config.channel, rng.random((k * (k - 1), 3)))
        sums = _segment_sums(g, [k - 1] * k)
        interference = {i: float(v) for i, v in zip(active, sums)}
    if rate is None and config.rate_mode == "threshold":
        rate = threshold_rate(config)
    nats = 0.0
    for i in active:
        s = states[i]
        if config.rate_mode == "threshold":
            r = rate
        else:
            r = float(np.log1p(np.array([gains[i]]) /
                               (np.array([interference.get(i, 0.0)]) + config.channel.noise_power))[0])
        s.nats_accumulated += r
        nats += r
        s.active_slots += 1
        s.served += 1
        s.delay_samples[slot - s.holding] += 1
        s.holding = None
    return SlotRecord(slot, frozenset(active), interference, drops, k, occ_total, full_count, nats)


class SlotSimulator:
    """Reference engine: one :func:`step_slot` per slot, with invariant checks."""

    def __init__(self, config: NetworkConfig, seed_sequence=None, check=True):
        self.config = validate(config)
        phases, self.cross, links = _streams(config, seed_sequence)
        self.streams = [LinkStream(r, int(p)) for r, p in zip(links, phases)]
        self.states = [LinkState() for _ in range(config.n)]
        self.check = check
        self.slot = 0
        self._rate = threshold_rate(config) if config.rate_mode == "threshold" else None

    def step(self) -> SlotRecord:
        rec = step_slot(self.states, self.streams, self.config, self.cross, self.slot, self._rate)
        if self.check:
            for i, s in enumerate(self.states):
                if not s.conserved():
                    raise SimulationInvariantError(f"link {i}: arrivals not conserved")
        self.slot += 1
        return rec

    def run(self) -> SimStats:
        cfg = self.config
        tally = _Tallies(cfg.n, _batch_edges(cfg.warmup, cfg.horizon))
        inter, inter_slot = [], []
        b = -1
        while self.slot < cfg.horizon:
            rec = self.step()
            if rec.slot < cfg.warmup:
                continue
            if rec.slot == tally.edges[b + 1]:
                b += 1
            tally.b_occupancy[b] += rec.occupancy
            tally.b_full[b] += rec.full_count
            tally.b_active[b] += len(rec.active_set)
            tally.b_served[b] += rec.served_this_slot
            tally.b_dropped[b] += rec.drops_this_slot
            tally.b_nats[b] += rec.nats
            for i in sorted(rec.interference_samples):
                inter.append(rec.interference_samples[i])
                inter_slot.append(rec.slot)
        for i, s in enumerate(self.states):
            tally.arrived[i], tally.served[i], tally.dropped[i] = s.arrived, s.served, s.dropped
            tally.active[i], tally.full[i] = s.active_slots, s.full_buffer_slots
            tally.occupancy[i], tally.nats[i] = s.occupancy, s.nats_accumulated
            tally.holding_end[i] = s.holding is not None
            tally.delay_hist[i] = _counter_hist(s.delay_samples)
            tally.drop_delay_hist[i] = _counter_hist(s.drop_delay_samples)
        tally.interference = np.array(inter, dtype=float)
        tally.interference_slot = np.array(inter_slot, dtype=np.int64)
        return _finalize(cfg, tally, "reference", cfg.seed)


def _counter_hist(c: Counter) -> np.ndarray:
    if not c:
        return np.zeros(0, dtype=np.int64)
    out = np.zeros(max(c) + 1, dtype=np.int64)
    for d, m in c.items():
        out[d] = m
    return out


# --------------------------------------------------------------------------
# public entry points


def run(config: NetworkConfig, engine: str = "fast", seed_sequence=None) -> SimStats:
    """Simulate ``config``; statistics cover slots ``[warmup, horizon)``."""
    validate(config)
    if engine == "fast":
        return _run_fast(config, seed_sequence)
    if engine == "reference":
        return SlotSimulator(config, seed_sequence).run()
    raise ValueError(f"unknown engine {engine!r}")


def replication_seed(seed: int, index: int):
    """Replication 0 uses the base seed itself; later ones a derived spawn key."""
    if index == 0:
        return np.random.SeedSequence(seed)
    return np.random.SeedSequence(entropy=seed, spawn_key=(index,))


def _one_replication(args):
    config, index, engine = args
    return run(config, engine, replication_seed(config.seed, index))


@dataclass
class ReplicatedStats:
    runs: list
    network: dict
    stderr: dict

    @property
    def count(self) -> int:
        return len(self.runs)

    def link_mean(self, name) -> np.ndarray:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return np.nanmean(np.stack([getattr(r, name) for r in self.runs]), axis=0)

    def link_stderr(self, name) -> np.ndarray:
        if self.count < 2:
            return np.full(self.runs[0].config.n, math.nan)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            a = np.stack([getattr(r, name) for r in self.runs])
            return np.nanstd(a, axis=0, ddof=1) / math.sqrt(self.count)

    def summary(self) -> dict:
        return {k: (v, self.stderr[k]) for k, v in self.network.items()}


def aggregate(runs) -> ReplicatedStats:
    """Mean and standard error across replications (order as given)."""
    runs = list(runs)
    if len(runs) == 1:
        return ReplicatedStats(runs, dict(runs[0].network), dict(runs[0].stderr))
    net, se = {}, {}
    for k in runs[0].network:
        v = np.array([r.network[k] for r in runs], dtype=float)
        net[k] = float(np.mean(v))
        se[k] = float(np.std(v, ddof=1) / math.sqrt(v.size))
    return ReplicatedStats(runs, net, se)


def run_replications(config: NetworkConfig, count: int, jobs: int = 1,
                     engine: str = "fast", order=None) -> ReplicatedStats:
    """``count`` independent runs; ``order`` permutes execution, never the result."""
    if count < 1:
        raise ValueError("count must be >= 1")
    validate(config)
    idx = list(range(count)) if order is None else list(order)
    if sorted(idx) != list(range(count)):
        raise ValueError("order must be a permutation of range(count)")
    tasks = [(config, i, engine) for i in idx]
    if jobs > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            done = list(ex.map(_one_replication, tasks))
    else:
        done = [_one_replication(t) for t in tasks]
    by_index = dict(zip(idx, done))
    return aggregate(by_index[i] for i in range(count))


@dataclass(frozen=True)
class ConcentrationResult:
    mean_rel_err: float
    var_within_bound: bool
    samples: int
    mean: float
    variance: float
    variance_slack: float
    tail_fraction: float


def concentration_check(stats: SimStats, report, min_samples: int = 1000,
                        band: float = 0.25) -> ConcentrationResult:
    """Compare the interference samples with the analytic mean and variance bound.

    ``tail_fraction`` is the share of samples with ``|I - mu| > band * mu``.
    """
    x = stats.interference_samples
    if x.size < min_samples:
        raise ValueError(f"insufficient samples ({x.size} < {min_samples})")
    mu = report.interference_mean
    var = stats.network["interference_variance"]
    slack = 3 * stats.stderr["interference_variance"]
    if not math.isfinite(slack):
        slack = 0.0
    return ConcentrationResult(
        mean_rel_err=abs(stats.network["interference_mean"] - mu) / mu,
        var_within_bound=bool(var <= report.interference_var_bound + slack),
        samples=int(x.size),
        mean=stats.network["interference_mean"],
        variance=var,
        variance_slack=slack,
        tail_fraction=float(np.mean(np.abs(x - mu) > band * mu)),
    )
