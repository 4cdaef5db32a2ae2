"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 usage or config error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__, analytics, estimators, optimizer, sim
from .model import (ArrivalSpec, ChannelParams, ConfigError, NetworkConfig, OnOffPolicy,
                    ShadowingSpec, default_warmup, validate)
from .svg import line_chart

STATS_COLUMNS = ["link_id", "delta_hat", "drop_hat", "activation_hat", "throughput_nats",
                 "mean_delay", "p95_delay"]
SWEEP_COLUMNS = ["axis", "value", "kind", "quantity", "analytic", "simulated", "stderr",
                 "skipped"]
VALIDATION_COLUMNS = ["quantity", "analytic", "empirical", "stderr", "z_score", "pass"]
OPTIMIZE_COLUMNS = ["method", "kind", "n", "alpha_hat", "lambda", "q_star", "tau_star",
                    "t_eff_star", "regime", "foc_residual", "flags"]

# --------------------------------------------------------------------------
# config files

CONFIG_KEYS = [
    "n", "horizon", "warmup", "seed", "rate_mode",
    "channel.alpha", "channel.noise_power",
    "channel.shadowing.kind", "channel.shadowing.mean", "channel.shadowing.variance",
    "channel.shadowing.lower", "channel.shadowing.upper",
    "arrivals.kind", "arrivals.lambda", "arrivals.cap_phase",
    "policy.threshold", "policy.q",
]


class UsageError(Exception):
    pass


def parse_config_text(text: str) -> dict:
    """``key = value`` lines with ``#`` comments; later keys override earlier ones."""
    out = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append((f"line {lineno}", "expected 'key = value'"))
            continue
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in CONFIG_KEYS:
            errors.append((k, "unknown key"))
            continue
        out[k] = v
    if errors:
        raise ConfigError(errors)
    return out


def parse_set(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError([(item, "--set expects key=value")])
        k, v = (s.strip() for s in item.split("=", 1))
        if k not in CONFIG_KEYS:
            raise ConfigError([(k, "unknown key")])
        out[k] = v
    return out


def _num(errors, key, value, kind=float, optional=False):
    if optional and value.lower() in ("none", ""):
        return None
    try:
        if kind is int:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return float(value)
    except (ValueError, OverflowError):
        errors.append((key, f"expected {'an integer' if kind is int else 'a number'}, got {value!r}"))
        return None


def build_config(mapping: dict) -> NetworkConfig:
    """Resolve a key/value mapping into a validated :class:`NetworkConfig`."""
    m = dict(mapping)
    errors = []
    g = m.get

    n = _num(errors, "n", g("n", "500"), int)
    horizon = _num(errors, "horizon", g("horizon", "1000000"), int)
    seed = _num(errors, "seed", g("seed", "0"), int)
    w = g("warmup", "auto")
    warmup = None if w == "auto" else _num(errors, "warmup", w, int)
    sh_kind = g("channel.shadowing.kind", "lognormal")
    lower = _num(errors, "channel.shadowing.lower", g("channel.shadowing.lower", "none"),
                 optional=True)
    upper = _num(errors, "channel.shadowing.upper", g("channel.shadowing.upper", "none"),
                 optional=True)
    if sh_kind == "bounded-uniform" and lower is not None and upper is not None:
        shadowing = ShadowingSpec.bounded_uniform(lower, upper)
    elif sh_kind == "constant":
        shadowing = ShadowingSpec.constant(
            _num(errors, "channel.shadowing.mean", g("channel.shadowing.mean", "0.5")) or 0.5)
    else:
        shadowing = ShadowingSpec(
            sh_kind,
            _num(errors, "channel.shadowing.mean", g("channel.shadowing.mean", "0.5")),
            _num(errors, "channel.shadowing.variance", g("channel.shadowing.variance", "1.0")),
            lower, upper)
    channel = ChannelParams(
        _num(errors, "channel.alpha", g("channel.alpha", "0.4")),
        shadowing,
        _num(errors, "channel.noise_power", g("channel.noise_power", "1.0")))
    phase = g("arrivals.cap_phase", "uniform")
    cap_phase = None if phase == "uniform" else _num(errors, "arrivals.cap_phase", phase, int)
    arrivals = ArrivalSpec(g("arrivals.kind", "pap"),
                           _num(errors, "arrivals.lambda", g("arrivals.lambda", "10")),
                           cap_phase)
    if errors:
        raise ConfigError(errors)

    if "policy.q" in m and "policy.threshold" in m:
        raise ConfigError([("policy", "set either policy.q or policy.threshold, not both")])
    if "policy.q" in m:
        qv = m["policy.q"]
        if qv == "auto":
            errs = channel.errors() + arrivals.errors()
            if errs:
                raise ConfigError(errs)
            try:
                res = optimizer.q_opt_asymptotic(arrivals.kind, n, channel.alpha_hat(),
                                                 arrivals.mean_interarrival)
            except ValueError as e:
                raise ConfigError([("policy.q", f"auto: {e}")]) from None
            policy = OnOffPolicy(res.tau_star)
        else:
            q = _num(errors, "policy.q", qv)
            if errors:
                raise ConfigError(errors)
            if not (0 < q <= 1):
                raise ConfigError([("policy.q", "q must lie in (0, 1]")])
            policy = OnOffPolicy.from_activation_prob(q)
    else:
        t = _num(errors, "policy.threshold", g("policy.threshold", "0"))
        if errors:
            raise ConfigError(errors)
        policy = OnOffPolicy(t)

    cfg = NetworkConfig(n=n, channel=channel, arrivals=arrivals, policy=policy,
                        horizon=horizon,
                        warmup=warmup if warmup is not None else min(
                            default_warmup(arrivals), max(horizon - 1, 0)),
                        seed=seed, rate_mode=g("rate_mode", "instantaneous"))
    return validate(cfg)


def config_to_mapping(cfg: NetworkConfig) -> dict:
    """Fully resolved mapping; feeding it back to :func:`build_config` gives ``cfg``."""
    sh = cfg.channel.shadowing

    def opt(x):
        return "none" if x is None else repr(float(x))

    return {
        "n": str(cfg.n),
        "horizon": str(cfg.horizon),
        "warmup": str(cfg.warmup),
        "seed": str(cfg.seed),
        "rate_mode": cfg.rate_mode,
        "channel.alpha": repr(float(cfg.channel.alpha)),
        "channel.noise_power": repr(float(cfg.channel.noise_power)),
        "channel.shadowing.kind": sh.kind,
        "channel.shadowing.mean": repr(float(sh.mean)),
        "channel.shadowing.variance": repr(float(sh.variance)),
        "channel.shadowing.lower": opt(sh.lower),
        "channel.shadowing.upper": opt(sh.upper),
        "arrivals.kind": cfg.arrivals.kind,
        "arrivals.lambda": repr(float(cfg.arrivals.mean_interarrival)),
        "arrivals.cap_phase": ("uniform" if cfg.arrivals.cap_phase is None
                               else str(cfg.arrivals.cap_phase)),
        "policy.threshold": repr(float(cfg.policy.threshold)),
    }


def config_text(cfg: NetworkConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in config_to_mapping(cfg).items())


# --------------------------------------------------------------------------
# output helpers


def fmt(x) -> str:
    """Shortest round-trip text for floats; ints and strings unchanged."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


class Outputs:
    """Collects files written by one invocation, then emits the manifest."""

    def __init__(self, out_dir):
        self.dir = out_dir
        self.paths = []

    def write(self, name, text):
        os.makedirs(self.dir, exist_ok=True)
        path = os.path.join(self.dir, name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        self.paths.append(path)
        return path

    def manifest(self, args, cfg, argv):
        replay = _replay_argv(argv, cfg)
        data = {
            "subcommand": args.command,
            "config": config_to_mapping(cfg) if cfg is not None else None,
            "version": __version__,
            "seed": cfg.seed if cfg is not None else None,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "outputs": [os.path.basename(p) for p in self.paths],
            "argv": list(argv),
            "replay_argv": replay,
        }
        self.write("manifest.json", json.dumps(data, indent=2) + "\n")


def _strip_flags(argv, with_value, bare=()):
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        name = a.split("=", 1)[0]
        if name in with_value:
            skip = "=" not in a
            continue
        if name in bare:
            continue
        out.append(a)
    return out


def _replay_argv(argv, cfg):
    """argv with the config file and overrides replaced by the resolved config."""
    rest = _strip_flags(argv, {"--config", "--set", "--seed", "--out"})
    if cfg is None:
        return rest
    sets = []
    for k, v in config_to_mapping(cfg).items():
        sets += ["--set", f"{k}={v}"]
    return rest + sets


# --------------------------------------------------------------------------
# argument parsing


def _common(p):
    p.add_argument("--config", metavar="PATH", help="key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
    p.add_argument("--out", default=".", metavar="DIR", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--svg", action="store_true", help="also write SVG plots")


def _kind_arg(p, default=None):
    p.add_argument("--kind", choices=["pap", "bap", "cap"], default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onoffnet", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form quantities at one operating point")
    _common(p)
    _kind_arg(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--q", type=float)
    g.add_argument("--threshold", type=float)
    p.add_argument("--n", type=int)

    p = sub.add_parser("simulate", help="run the slotted simulation")
    _common(p)
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--engine", choices=["fast", "reference"], default="fast")

    p = sub.add_parser("sweep", help="tradeoff curves over lambda, epsilon or q")
    _common(p)
    p.add_argument("--axis", choices=["lambda", "epsilon", "q"], required=True)
    p.add_argument("--grid", help="comma list or log:LO:HI:COUNT")
    _kind_arg(p)
    p.add_argument("--kinds", help="comma-separated arrival kinds")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha-hat", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--with-sim", action="store_true")

    p = sub.add_parser("validate", help="simulate and compare with the closed forms")
    _common(p)
    p.add_argument("--z", type=float, default=3.0)
    p.add_argument("--throughput-rel", type=float, default=0.15)

    p = sub.add_parser("optimize", help="activation probability maximizing throughput")
    _common(p)
    _kind_arg(p)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha-hat", type=float)
    p.add_argument("--lambda", dest="lam", type=float)

    p = sub.add_parser("replay", help="rerun the invocation recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", metavar="DIR", help="output directory (default: the manifest's)")
    return parser


def load_config(args, extra=None) -> NetworkConfig:
    mapping = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as f:
                mapping.update(parse_config_text(f.read()))
        except OSError as e:
            raise ConfigError([("--config", str(e))]) from None
    mapping.update(parse_set(args.set))
    if args.seed is not None:
        mapping["seed"] = str(args.seed)
    if extra:
        mapping.update({k: v for k, v in extra.items() if v is not None})
    return build_config(mapping)


def _alpha_for(alpha_hat, mapping_cfg: NetworkConfig):
    return repr(alpha_hat / mapping_cfg.channel.shadowing.first_moment())


# --------------------------------------------------------------------------
# subcommands


def cmd_analytic(args, out, argv):
    extra = {"arrivals.lambda": repr(args.lam)}
    if args.kind:
        extra["arrivals.kind"] = args.kind
    if args.n is not None:
        extra["n"] = str(args.n)
    if args.q is not None:
        extra["policy.q"] = repr(args.q)
    if args.threshold is not None:
        extra["policy.threshold"] = repr(args.threshold)
    cfg = _analytic_config(args, extra)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = analytics.report(cfg)
    rows = [(k, getattr(rep, k)) for k in (
        "delta", "drop_prob", "activation", "interference_mean", "interference_var_bound",
        "throughput_approx", "throughput_lower", "throughput_upper")]
    text = csv_text(["quantity", "value"], rows)
    sys.stdout.write(text)
    out.write("analytic.csv", text)
    out.manifest(args, cfg, argv)
    return 0


def _analytic_config(args, extra):
    mapping = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            mapping.update(parse_config_text(f.read()))
    mapping.update(parse_set(args.set))
    if args.seed is not None:
        mapping["seed"] = str(args.seed)
    if "policy.q" in extra or "policy.threshold" in extra:
        mapping.pop("policy.q", None)
        mapping.pop("policy.threshold", None)
    mapping.update(extra)
    return build_config(mapping)


def stats_rows(stats):
    rows = []
    for i in range(stats.config.n):
        rows.append((i, stats.delta_hat[i], stats.drop_hat[i], stats.activation_hat[i],
                     stats.throughput[i], stats.mean_delay[i], stats.p95_delay[i]))
    net = stats.network
    dh = stats.delay_hist
    mean_d = estimators.summarize_histogram(dh).mean if dh.sum() else math.nan
    p95 = float(estimators.hist_percentile(dh, 0.95)) if dh.sum() else math.nan
    rows.append(("network", net["delta"], net["drop_prob"], net["activation"],
                 net["throughput"], mean_d, p95))
    return rows


def _replicated_rows(rep):
    cols = ["delta_hat", "drop_hat", "activation_hat", "throughput", "mean_delay", "p95_delay"]
    means = [rep.link_mean(c) for c in cols]
    ses = [rep.link_stderr(c) for c in cols]
    n = rep.runs[0].config.n
    mrows = [(i, *[m[i] for m in means]) for i in range(n)]
    srows = [(i, *[s[i] for s in ses]) for i in range(n)]
    net = rep.network
    mrows.append(("network", net["delta"], net["drop_prob"], net["activation"],
                  net["throughput"], math.nan, math.nan))
    se = rep.stderr
    srows.append(("network", se["delta"], se["drop_prob"], se["activation"],
                  se["throughput"], math.nan, math.nan))
    return mrows, srows


def _summary_text(summary):
    return csv_text(["quantity", "value", "stderr"],
                    [(k, v, s) for k, (v, s) in summary.items()])


def cmd_simulate(args, out, argv):
    cfg = load_config(args)
    if args.replications < 1:
        raise UsageError("--replications must be >= 1")
    if args.replications == 1:
        stats = sim.run(cfg, engine=args.engine)
        out.write("stats.csv", csv_text(STATS_COLUMNS, stats_rows(stats)))
        out.write("summary.csv", _summary_text(stats.summary()))
        summary = stats.summary()
    else:
        rep = sim.run_replications(cfg, args.replications, jobs=args.jobs, engine=args.engine)
        mrows, srows = _replicated_rows(rep)
        out.write("stats.csv", csv_text(STATS_COLUMNS, mrows))
        out.write("stats_stderr.csv", csv_text(STATS_COLUMNS, srows))
        out.write("summary.csv", _summary_text(rep.summary()))
        summary = rep.summary()
    if args.svg:
        out.write("stats.svg", _stats_svg(cfg, summary))
    out.manifest(args, cfg, argv)
    for k, (v, s) in summary.items():
        print(f"{k:22s} {fmt(v):>24s}  +- {fmt(s)}")
    return 0


def _stats_svg(cfg, summary):
    names = ["delta", "decision_full", "drop_prob", "activation"]
    xs = list(range(len(names)))
    return line_chart({"simulated": (xs, [summary[k][0] for k in names])},
                      title=f"{cfg.arrivals.kind} n={cfg.n}", xlabel="statistic index "
                      + " ".join(f"{i}:{k}" for i, k in enumerate(names)), ylabel="value")


def parse_grid(text, axis):
    if not text:
        return {"lambda": list(np.geomspace(1, 1e4, 41)),
                "epsilon": list(np.geomspace(1e-4, 0.3, 25)),
                "q": list(np.geomspace(1e-3, 0.999, 31))}[axis]
    if text.startswith("log:"):
        try:
            _, lo, hi, num = text.split(":")
            return [float(v) for v in np.geomspace(float(lo), float(hi), int(num))]
        except ValueError:
            raise UsageError(f"bad grid {text!r}; expected log:LO:HI:COUNT") from None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}") from None


def _sim_point(args):
    cfg, = args
    s = sim.run(cfg)
    return s.summary()


def cmd_sweep(args, out, argv):
    extra = {}
    base = load_config(args)
    if args.n is not None:
        extra["n"] = str(args.n)
    if args.alpha_hat is not None:
        extra["channel.alpha"] = _alpha_for(args.alpha_hat, base)
    if args.lam is not None:
        extra["arrivals.lambda"] = repr(args.lam)
    if extra:
        base = load_config(args, extra)
    kinds = (args.kinds.split(",") if args.kinds else
             [args.kind] if args.kind else [base.arrivals.kind])
    for k in kinds:
        if k not in ("pap", "bap", "cap"):
            raise UsageError(f"unknown arrival kind {k!r}")
    grid = parse_grid(args.grid, args.axis)
    if not grid:
        raise UsageError("empty grid")
    n, ah, eps = base.n, base.channel.alpha_hat(), args.epsilon
    if not (0 < eps < 1):
        raise UsageError("--epsilon must lie in (0, 1)")

    rows, sim_jobs = [], []
    for kind in kinds:
        for x in grid:
            for quantity, value, cfg in _sweep_point(args.axis, kind, x, n, ah, eps, base):
                rows.append([args.axis, x, kind, quantity, value, None, None,
                             "domain" if value is None or (isinstance(value, float)
                                                           and math.isnan(value)) else ""])
                if args.with_sim and cfg is not None:
                    sim_jobs.append((len(rows) - 1, quantity, cfg))
    headline = rows[0][3]
    if all(r[7] for r in rows if r[3] == headline):
        raise UsageError(f"every grid point is outside the domain of {headline}")

    if args.with_sim:
        cfgs = []
        for _, _, c in sim_jobs:
            if c not in cfgs:
                cfgs.append(c)
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                results = list(ex.map(_sim_point, [(c,) for c in cfgs]))
        else:
            results = [_sim_point((c,)) for c in cfgs]
        lookup = dict(zip(range(len(cfgs)), results))
        for i, quantity, c in sim_jobs:
            v, s = lookup[cfgs.index(c)][_SIM_NAME[quantity]]
            rows[i][5], rows[i][6] = v, s

    out.write("sweep.csv", csv_text(SWEEP_COLUMNS, rows))
    if args.svg:
        for quantity in dict.fromkeys(r[3] for r in rows):
            series = {}
            for kind in kinds:
                pts = [(r[1], r[4]) for r in rows if r[2] == kind and r[3] == quantity
                       and not r[7]]
                if pts:
                    series[kind] = ([p[0] for p in pts], [p[1] for p in pts])
                spts = [(r[1], r[5]) for r in rows if r[2] == kind and r[3] == quantity
                        and r[5] is not None]
                if spts:
                    series[f"{kind} (sim)"] = ([p[0] for p in spts], [p[1] for p in spts])
            if series:
                out.write(f"sweep_{quantity}.svg",
                          line_chart(series, title=f"{quantity} vs {args.axis}",
                                     xlabel=args.axis, ylabel=quantity, logx=True))
    out.manifest(args, base, argv)
    return 0


_SIM_NAME = {"t_eff_exact": "throughput", "drop_prob": "drop_prob", "delta": "delta",
             "activation": "activation", "t_eff": "throughput"}


def _safe(f, *a):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            v = f(*a)
        return v if math.isfinite(v) else None
    except (ValueError, ZeroDivisionError, OverflowError):
        return None


def _sweep_point(axis, kind, x, n, ah, eps, base):
    """Yield (quantity, analytic value or None, simulation config or None)."""
    if axis == "lambda":
        lam = x
        q = _safe(analytics.q_for_drop, kind, lam, eps)
        cfg = None
        if q is not None and 0 < q <= 1 and not (kind == "cap" and lam != int(lam)):
            cfg = base.replace(arrivals=ArrivalSpec(kind, lam, base.arrivals.cap_phase),
                               policy=OnOffPolicy.from_activation_prob(q), warmup=None)
            if cfg.warmup >= cfg.horizon:
                cfg = cfg.replace(warmup=cfg.horizon // 10)
        yield "t_eff", _safe(optimizer.tradeoff_throughput, kind, n, ah, eps, lam), None
        yield ("t_eff_exact",
               None if q is None else _safe(optimizer.objective, kind, n, ah, lam, q), cfg)
        yield "q", q, None
        yield ("drop_prob", None if q is None else _safe(analytics.drop_prob, kind, lam, q),
               cfg)
    elif axis == "epsilon":
        yield "degradation", _safe(optimizer.degradation, kind, x, ah), None
        yield "lambda_opt", _safe(optimizer.lambda_opt, kind, n, ah, x), None
        peak = _safe(lambda: optimizer.tradeoff_peak(kind, n, ah, x).t_eff)
        yield "t_eff_max", peak, None
    else:
        q, lam = x, base.arrivals.mean_interarrival
        cfg = None
        if 0 < q <= 1 and not (kind == "cap" and lam != int(lam)):
            cfg = base.replace(arrivals=ArrivalSpec(kind, lam, base.arrivals.cap_phase),
                               policy=OnOffPolicy.from_activation_prob(q))
        yield "delta", _safe(analytics.full_buffer_prob, kind, lam, q), cfg
        yield "drop_prob", _safe(analytics.drop_prob, kind, lam, q), cfg
        yield "activation", _safe(lambda: q * analytics.full_buffer_prob(kind, lam, q)), cfg
        yield "t_eff", _safe(optimizer.objective, kind, n, ah, lam, q), cfg


def cmd_validate(args, out, argv):
    cfg = load_config(args)
    stats = sim.run(cfg)
    rep = analytics.report(cfg)
    rows = estimators.compare(stats, rep, estimators.Tolerances(args.z, args.throughput_rel))
    text = csv_text(VALIDATION_COLUMNS, [(r.quantity, r.analytic, r.empirical, r.stderr,
                                          r.z_score, r.passed) for r in rows])
    out.write("validation.csv", text)
    out.manifest(args, cfg, argv)
    sys.stdout.write(text)
    return 0 if all(r.passed for r in rows) else 1


def cmd_optimize(args, out, argv):
    extra = {}
    if args.kind:
        extra["arrivals.kind"] = args.kind
    if args.n is not None:
        extra["n"] = str(args.n)
    if args.lam is not None:
        extra["arrivals.lambda"] = repr(args.lam)
    cfg = load_config(args, extra)
    if args.alpha_hat is not None:
        cfg = load_config(args, {**extra, "channel.alpha": _alpha_for(args.alpha_hat, cfg)})
    kind, n, lam = cfg.arrivals.kind, cfg.n, cfg.arrivals.mean_interarrival
    ah = args.alpha_hat if args.alpha_hat is not None else cfg.channel.alpha_hat()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            results = [optimizer.optimize_q_numeric(kind, n, ah, lam),
                       optimizer.q_opt_asymptotic(kind, n, ah, lam)]
            try:
                results.append(optimizer.solve_foc(kind, n, ah, lam))
            except ValueError:
                pass
    except ValueError as e:
        raise UsageError(str(e)) from None
    rows = [(r.method, kind, n, ah, lam, r.q_star, r.tau_star, r.t_eff_star, r.regime,
             r.foc_residual, ";".join(r.flags)) for r in results]
    text = csv_text(OPTIMIZE_COLUMNS, rows)
    out.write("optimize.csv", text)
    out.manifest(args, cfg, argv)
    print(f"{'':14s}" + "".join(f" {r.method:>24s}" for r in results))
    for label, attr in (("q*", "q_star"), ("tau*", "tau_star"), ("T_eff*", "t_eff_star"),
                        ("regime", "regime"), ("foc residual", "foc_residual")):
        print(f"{label:14s}" + "".join(f" {fmt(getattr(r, attr)):>24s}" for r in results))
    return 0


def cmd_replay(args, argv):
    try:
        with open(args.manifest, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError([("manifest", str(e))]) from None
    out_dir = args.out or os.path.dirname(os.path.abspath(args.manifest))
    return main(list(data["replay_argv"]) + ["--out", out_dir])


COMMANDS = {"analytic": cmd_analytic, "simulate": cmd_simulate, "sweep": cmd_sweep,
            "validate": cmd_validate, "optimize": cmd_optimize}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "replay":
            return cmd_replay(args, argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be >= 1")
        return COMMANDS[args.command](args, Outputs(args.out), argv)
    except (ConfigError, UsageError) as e:
        print(f"onoffnet {args.command}: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"onoffnet {args.command}: error: {e}", file=sys.stderr)
        return 2
    except sim.SimulationInvariantError as e:
        print(f"onoffnet {args.command}: internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
