"""``evoflow`` command line: simulate, sweep, oracle, bs.

Exit status is 0 on success, 2 for configuration errors and 3 for runtime or
resource failures (including an interval count escaping its births/t_n
bracket at a checkpoint).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import MISSING, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import oracles
from .baksneppen import Ring, bs_run, bs_threshold_estimate
from .chain import ModelParams, critical_value, histogram_of, new_chain, run
from .errors import ConfigurationError, EvoflowError, ParameterError, ResourceError
from .laws import parse_law
from .rng import derive_seed
from .svg import histogram_svg
from .trackers import (Trackers, check_brackets, density_target, excursion_summary, ks_above_critical,
                       merge, tail_bound_check)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
TIMESERIES_HEADER = ["n", "pop_size", "l_size", "t_n", "k_n", "N_n"]
HISTOGRAM_HEADER = ["bin_lo", "bin_hi", "count", "density"]
SWEEP_HEADER = ["p", "f_c", "v_c", "a", "b", "estimate", "target", "applies"]
BS_SAMPLE_HEADER = ["update", "site", "fitness"]


def parse_probability(text: str) -> float:
    """Decimal or fraction literal such as ``0.6667`` or ``2/3``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"not a probability: {text!r}") from exc


def parse_interval(text: str) -> tuple[float, float]:
    try:
        a, b = (float(Fraction(t)) for t in text.split(","))
    except ValueError as exc:
        raise ParameterError(f"interval must look like A,B: {text!r}") from exc
    if not a < b:
        raise ParameterError(f"interval needs a < b: {text!r}")
    return a, b


@dataclass
class RunConfig:
    """Validated settings of one command; ``to_argv`` gives its textual form."""

    command: str
    p: str = "2/3"
    law: str = "uniform"
    steps: int = 100_000
    seed: int = 0
    replicates: int = 1
    jobs: int = 1
    report_every: int | None = None
    intervals: list[tuple[float, float]] = field(default_factory=list)
    hist_bins: int = 20
    eps: float = 0.1
    csv: str | None = None
    json: str | None = None
    svg: str | None = None
    hist_csv: str | None = None
    event_log: str | None = None
    p_values: list[str] = field(default_factory=list)
    oracle: str | None = None
    n: int | None = None
    k: int | None = None
    sites: int = 128
    burn_in: int = 0
    sample_every: int | None = None

    def __post_init__(self):
        self.validate()

    @property
    def p_value(self) -> float:
        return parse_probability(self.p)

    def validate(self) -> None:
        if self.command not in ("simulate", "sweep", "oracle", "bs"):
            raise ParameterError(f"unknown command {self.command!r}")
        if self.steps < 0:
            raise ParameterError("--steps must be nonnegative")
        if self.replicates < 1 or self.jobs < 1:
            raise ParameterError("--replicates and --jobs must be at least 1")
        if self.report_every is not None and self.report_every < 1:
            raise ParameterError("--report-every must be positive")
        if self.hist_bins < 1:
            raise ParameterError("--hist-bins must be at least 1")
        if not self.eps > 0:
            raise ParameterError("--eps must be positive")
        for a, b in self.intervals:
            if not a < b:
                raise ParameterError("intervals need a < b")
        parse_law(self.law)
        if self.command in ("simulate",):
            ModelParams(self.p_value)
        if self.command == "sweep":
            if not self.p_values:
                raise ParameterError("sweep needs --p-values")
            for text in self.p_values:
                if not 0.5 < parse_probability(text) < 1.0:
                    raise ParameterError(f"sweep p={text} is outside (1/2, 1)")
            if not self.intervals:
                raise ParameterError("sweep needs at least one --interval")
        if self.command == "oracle":
            if self.oracle not in ("lpmf", "srw", "binomial", "geometric"):
                raise ParameterError("oracle kind must be lpmf, srw, binomial or geometric")
            if self.n is None and self.oracle != "geometric":
                raise ParameterError("oracle needs --n")
            if self.n is not None and self.n < 0:
                raise ParameterError("--n must be nonnegative")
            if self.oracle == "lpmf":
                ModelParams(self.p_value)
        if self.command == "bs":
            if self.sites < 3:
                raise ParameterError("--sites must be at least 3")
            if not 0 <= self.burn_in <= self.steps:
                raise ParameterError("need 0 <= --burn-in <= --steps")
            if self.sample_every is not None and self.sample_every < 1:
                raise ParameterError("--sample-every must be at least 1")

    def to_argv(self) -> list[str]:
        argv = [self.command]
        if self.command == "oracle":
            argv.append(self.oracle)
        for f in fields(RunConfig):
            if f.name in ("command", "oracle"):
                continue
            value = getattr(self, f.name)
            default = f.default if f.default is not MISSING else f.default_factory()
            if value == default:
                continue
            if f.name == "intervals":
                for a, b in value:
                    argv += ["--interval", f"{a!r},{b!r}"]
            elif f.name == "p_values":
                argv += ["--p-values", ",".join(value)]
            else:
                argv += ["--" + f.name.replace("_", "-"), str(value)]
        return argv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evoflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, steps_default=100_000):
        sp.add_argument("--law", default="uniform", help="uniform | exp:RATE | pareto:ALPHA")
        sp.add_argument("--steps", type=int, default=steps_default)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--json", help="write the JSON summary here (default: stdout)")
        sp.add_argument("--svg", help="write a histogram SVG here")

    sim = sub.add_parser("simulate", help="run independent chains and summarise them")
    sim.add_argument("--p", default="2/3", help="birth probability, decimal or fraction")
    common(sim)
    sim.add_argument("--replicates", type=int, default=1)
    sim.add_argument("--jobs", type=int, default=1, help="worker processes for replicates")
    sim.add_argument("--report-every", type=int)
    sim.add_argument("--interval", dest="intervals", action="append", type=parse_interval, default=[],
                     metavar="A,B", help="open interval for density estimates (repeatable)")
    sim.add_argument("--hist-bins", type=int, default=20)
    sim.add_argument("--eps", type=float, default=0.1, help="exponent slack of the t_n tail check")
    sim.add_argument("--csv", help="timeseries CSV path")
    sim.add_argument("--hist-csv", help="final-population histogram CSV path")
    sim.add_argument("--event-log", help="per-step event CSV (replicate 0 only)")

    sw = sub.add_parser("sweep", help="density estimates across birth probabilities")
    sw.add_argument("--p-values", type=lambda s: [t for t in s.split(",") if t], required=True)
    sw.add_argument("--interval", dest="intervals", action="append", type=parse_interval, default=[],
                    metavar="A,B")
    sw.add_argument("--law", default="uniform")
    sw.add_argument("--steps", type=int, default=100_000)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--csv", help="output CSV path (default: stdout)")

    orc = sub.add_parser("oracle", help="exact reference distributions as k,probability CSV")
    orc.add_argument("oracle", choices=["lpmf", "srw", "binomial", "geometric"])
    orc.add_argument("--p", default="2/3")
    orc.add_argument("--n", type=int)
    orc.add_argument("--k", type=int)
    orc.add_argument("--csv", help="output CSV path (default: stdout)")

    bs = sub.add_parser("bs", help="Bak-Sneppen ring with threshold estimates")
    common(bs, steps_default=1_100_000)
    bs.add_argument("--sites", type=int, default=128)
    bs.add_argument("--burn-in", type=int, default=0)
    bs.add_argument("--sample-every", type=int, help="default: one record per N updates")
    bs.add_argument("--hist-bins", type=int, default=20)
    bs.add_argument("--csv", help="samples CSV path")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = {f.name: getattr(ns, f.name) for f in fields(RunConfig) if hasattr(ns, f.name)}
    return RunConfig(**values)


def parse_config(argv) -> RunConfig:
    return config_from_args(build_parser().parse_args(argv))


# -- output helpers ---------------------------------------------------------

def _open_out(path: str | None):
    if path is None or path == "-":
        return None
    target = Path(path)
    if target.parent and not target.parent.exists():
        raise OSError(f"output directory does not exist: {target.parent}")
    return target


def _write_text(path: str | None, text: str, stdout) -> None:
    target = _open_out(path)
    if target is None:
        stdout.write(text)
    else:
        target.write_text(text, encoding="utf-8", newline="")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(v):
    """JSON-safe number: NaN and infinities become null."""
    if v is None:
        return None
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def _hist_range(law):
    lo, hi = law.support
    if not math.isfinite(hi):
        hi = float(law.quantile(0.999))
    return lo, hi


# -- simulate ---------------------------------------------------------------

def simulate_replicate(cfg: RunConfig, index: int) -> dict:
    params = ModelParams(cfg.p_value)
    law = parse_law(cfg.law)
    seed = derive_seed(cfg.seed, index)
    state = new_chain(params, law, seed)
    trackers = Trackers(intervals=cfg.intervals)
    report_every = cfg.report_every or max(1, cfg.steps // 100)
    rows = []

    def report(st, tr):
        if params.supercritical:
            check_brackets(st, tr)
        rows.append((st.n, st.size(), st.l_count, tr.t_n, tr.k_n, tr.births))

    report(state, trackers)
    log = None
    try:
        if cfg.event_log and index == 0:
            log = open(cfg.event_log, "w", encoding="utf-8", newline="")
            log.write("n,event_type,fitness\n")
        run(state, cfg.steps, trackers, report_every=report_every, on_report=report, event_log=log)
    finally:
        if log is not None:
            log.close()
    if state.n % report_every:
        report(state, trackers)
    tail = tail_bound_check(trackers, params, cfg.eps) if params.supercritical and cfg.steps > 0 else None
    return {
        "trackers": trackers,
        "rows": rows,
        "values": state.population.values(),
        "pop_size": state.size(),
        "l_size": state.l_count,
        "counts": [state.population.count_in(a, b) for a, b in cfg.intervals],
        "tail": tail,
    }


def _merge_rows(parts):
    merged = {}
    for part in parts:
        for row in part["rows"]:
            acc = merged.setdefault(row[0], [row[0], 0, 0, 0, 0, 0])
            for j in range(1, 6):
                acc[j] += row[j]
    return [merged[n] for n in sorted(merged)]


def cmd_simulate(cfg: RunConfig, stdout=sys.stdout) -> int:
    params = ModelParams(cfg.p_value)
    law = parse_law(cfg.law)
    for path in (cfg.csv, cfg.json, cfg.svg, cfg.hist_csv, cfg.event_log):
        _open_out(path)
    if cfg.jobs > 1 and cfg.replicates > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            parts = list(pool.map(simulate_replicate, [cfg] * cfg.replicates, range(cfg.replicates)))
    else:
        parts = [simulate_replicate(cfg, i) for i in range(cfg.replicates)]

    trackers = parts[0]["trackers"]
    for part in parts[1:]:
        trackers = merge(trackers, part["trackers"])
    values = np.concatenate([part["values"] for part in parts])
    total_steps = cfg.steps * cfg.replicates
    v_c = critical_value(law, params) if params.supercritical else None

    densities = []
    for j, (a, b) in enumerate(cfg.intervals):
        count = sum(part["counts"][j] for part in parts)
        births = trackers.births_in(a, b)
        densities.append({
            "a": a, "b": b,
            "estimate": _num(count / total_steps) if total_steps else None,
            "target": _num(density_target(params, law, a, b)),
            "applies": bool(v_c is not None and a >= v_c),
            "count": count, "births_in": births,
        })
    tails = [part["tail"] for part in parts if part["tail"] is not None]
    tail_check = None
    if tails:
        tail_check = {"eps": cfg.eps, "threshold": _num(tails[0].threshold),
                      "pass": all(t.passed for t in tails), "margin": _num(max(t.margin for t in tails))}
    summary = excursion_summary(trackers)
    payload = {
        "p": params.p, "f_c": params.f_c, "v_c": _num(v_c), "law": law.spec(),
        "steps": cfg.steps, "seed": cfg.seed, "replicates": cfg.replicates,
        "pop_size": sum(part["pop_size"] for part in parts),
        "l_size": sum(part["l_size"] for part in parts),
        "t_n": trackers.t_n, "k_n": trackers.k_n, "N_n": trackers.births,
        "deaths": trackers.deaths, "null_deaths": trackers.null_deaths,
        "tail_check": tail_check,
        "densities": densities,
        "excursions": {k: _num(v) for k, v in summary.to_dict().items()},
        "ks_above_vc": _num(ks_above_critical(values, law, params)),
    }

    if cfg.csv:
        _write_text(cfg.csv, _csv_text(TIMESERIES_HEADER, _merge_rows(parts)), stdout)
    lo, hi = _hist_range(law)
    hist = histogram_of(values, cfg.hist_bins, lo, hi)
    if cfg.hist_csv:
        dens = hist.density()
        rows = [(repr(float(l)), repr(float(h)), int(c), repr(float(d)))
                for l, h, c, d in zip(hist.edges[:-1], hist.edges[1:], hist.counts, dens)]
        _write_text(cfg.hist_csv, _csv_text(HISTOGRAM_HEADER, rows), stdout)
    if cfg.svg:
        title = f"fitness histogram, p={params.p:.4g}, n={cfg.steps}, {law.label}"
        _write_text(cfg.svg, histogram_svg(hist.edges, hist.counts, title, v_c, "critical value"), stdout)
    _write_text(cfg.json, _json_text(payload), stdout)
    return EXIT_OK


# -- sweep ------------------------------------------------------------------

def cmd_sweep(cfg: RunConfig, stdout=sys.stdout) -> int:
    law = parse_law(cfg.law)
    _open_out(cfg.csv)
    rows = []
    for i, text in enumerate(cfg.p_values):
        params = ModelParams(parse_probability(text))
        v_c = critical_value(law, params)
        state = run(new_chain(params, law, derive_seed(cfg.seed, i)), cfg.steps)
        for a, b in cfg.intervals:
            est = state.population.count_in(a, b) / cfg.steps if cfg.steps else math.nan
            rows.append((repr(params.p), repr(params.f_c), repr(v_c), repr(a), repr(b), repr(est),
                         repr(density_target(params, law, a, b)), int(a >= v_c)))
    _write_text(cfg.csv, _csv_text(SWEEP_HEADER, rows), stdout)
    return EXIT_OK


# -- oracle -----------------------------------------------------------------

def cmd_oracle(cfg: RunConfig, stdout=sys.stdout) -> int:
    _open_out(cfg.csv)
    if cfg.oracle == "lpmf":
        pmf = oracles.exact_l_pmf(ModelParams(cfg.p_value), cfg.n)
        rows = [(int(k), repr(float(v))) for k, v in zip(pmf.support, pmf.probs)]
    elif cfg.oracle == "srw":
        table = oracles.srw_survival_table(cfg.n)
        rows = [(k, repr(float(v))) for k, v in enumerate(table)]
    elif cfg.oracle == "binomial":
        ks = [cfg.k] if cfg.k is not None else range(cfg.n + 1)
        rows = [(k, repr(oracles.binomial_pmf(cfg.n, cfg.p_value, k))) for k in ks]
    else:
        success = cfg.p_value
        ks = [cfg.k] if cfg.k is not None else range(1, (cfg.n or 20) + 1)
        rows = [(k, repr(oracles.geometric_pmf(success, k))) for k in ks]
    _write_text(cfg.csv, _csv_text(["k", "probability"], rows), stdout)
    return EXIT_OK


# -- bs ---------------------------------------------------------------------

def cmd_bs(cfg: RunConfig, stdout=sys.stdout) -> int:
    law = parse_law(cfg.law)
    for path in (cfg.csv, cfg.json, cfg.svg):
        _open_out(path)
    every = cfg.sample_every or cfg.sites
    ring = Ring(cfg.sites, law, cfg.seed)
    samples = bs_run(ring, cfg.steps, cfg.burn_in, every)
    values = samples.values
    payload = {
        "sites": cfg.sites, "law": law.spec(), "updates": cfg.steps, "burn_in": cfg.burn_in,
        "sample_every": every, "seed": cfg.seed, "records": len(samples), "samples": int(values.size),
        "threshold": None, "ks_above_threshold": None,
    }
    if values.size >= 1000:
        from scipy import stats

        est = bs_threshold_estimate(values, law)
        payload["threshold"] = {k: _num(v) for k, v in est.to_dict().items()}
        cut = est.u_moment + 0.05
        u = law.cdf(values)
        above = u[u > cut]
        if above.size >= 2 and cut < 1.0:
            payload["ks_above_threshold"] = float(
                stats.kstest(above, "uniform", args=(cut, 1.0 - cut)).statistic)
    if cfg.csv:
        rows = [(upd, site, repr(x)) for upd, site, x in samples.rows()]
        _write_text(cfg.csv, _csv_text(BS_SAMPLE_HEADER, rows), stdout)
    if cfg.svg:
        lo, hi = _hist_range(law)
        hist = histogram_of(values, cfg.hist_bins, lo, hi)
        marker = payload["threshold"]["moment"] if payload["threshold"] else None
        _write_text(cfg.svg, histogram_svg(hist.edges, hist.counts, f"Bak-Sneppen N={cfg.sites}, {law.label}",
                                           marker, "f*"), stdout)
    _write_text(cfg.json, _json_text(payload), stdout)
    return EXIT_OK


def load_schema(name: str = "summary") -> dict:
    """Shipped JSON schema for the ``simulate`` (``summary``) or ``bs`` output."""
    from importlib.resources import files

    return json.loads(files("evoflow").joinpath("schemas", f"{name}.schema.json").read_text())


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "oracle": cmd_oracle, "bs": cmd_bs}


def main(argv=None, stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    except (ParameterError, ConfigurationError) as exc:
        print(f"evoflow: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[cfg.command](cfg, stdout)
    except (ParameterError, ConfigurationError) as exc:
        print(f"evoflow: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ResourceError, MemoryError, AssertionError, EvoflowError) as exc:
        print(f"evoflow: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
