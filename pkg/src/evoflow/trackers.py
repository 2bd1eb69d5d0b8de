"""Streaming statistics of a chain run.

Counters kept exactly, for steps ``k = 1..n`` after each event:

* ``t_n`` steps with no species below the critical value (``|L_k| = 0``);
* ``k_n`` transitions of ``|L|`` from 1 to 0;
* ``births`` (``N_n``), ``deaths``, ``null_deaths``;
* births inside each configured open interval ``(a, b)``;
* an optional histogram of newborn fitnesses.

Time is split into alternating stretches.  A *G* stretch runs while ``L`` is
empty and ends (inclusively) at the step where ``L`` becomes nonempty; an *E*
stretch runs while ``L`` is nonempty and ends at the step where it empties.
Completed lengths go to two logs capped by reservoir sampling; their sums and
counts are exact, so ``sum(G) + sum(E) + partial_G + partial_E == n`` always.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _tracking as tk
from .chain import Birth, ChainState, Death, ModelParams, NullDeath, StepEvent, critical_value
from .errors import ConfigurationError, ParameterError, TheoremNotApplicableWarning, UsageError

DEFAULT_LOG_CAP = 10**6


class Trackers:
    """Mergeable per-run statistics; see the module docstring for definitions.

    Parameters
    ----------
    intervals : sequence of (a, b)
        Open intervals whose birth counts are tracked.
    hist_bins, hist_range : int, (float, float)
        Histogram of newborn fitnesses; ``hist_bins=0`` disables it.
    log_cap : int
        Maximum retained entries per excursion log.
    seed : int
        Seed of the reservoir sampler used once a log is full.
    """

    def __init__(self, intervals=(), hist_bins: int = 0, hist_range=(0.0, 1.0),
                 log_cap: int = DEFAULT_LOG_CAP, seed: int = 0):
        self.interval_array = np.array([(float(a), float(b)) for a, b in intervals],
                                       dtype=np.float64).reshape(-1, 2)
        if np.any(self.interval_array[:, 0] > self.interval_array[:, 1]):
            raise ParameterError("tracked intervals need a <= b")
        self.hist_lo, self.hist_hi = float(hist_range[0]), float(hist_range[1])
        if hist_bins < 0 or (hist_bins and not self.hist_lo < self.hist_hi):
            raise ParameterError("bad histogram configuration")
        self.hist_counts = np.zeros(hist_bins + 2 if hist_bins else 0, dtype=np.int64)
        self.births_in_counts = np.zeros(len(self.interval_array), dtype=np.int64)
        self.core = tk.empty_core()
        self.log_cap = int(log_cap)
        self.seed = int(seed)
        self._reservoir = np.random.Generator(np.random.PCG64(self.seed))
        self.g_log = np.zeros(0, dtype=np.int64)
        self.e_log = np.zeros(0, dtype=np.int64)

    # -- counters -------------------------------------------------------
    n = property(lambda self: int(self.core[tk.N]))
    t_n = property(lambda self: int(self.core[tk.T_N]))
    k_n = property(lambda self: int(self.core[tk.K_N]))
    births = property(lambda self: int(self.core[tk.BIRTHS]))
    deaths = property(lambda self: int(self.core[tk.DEATHS]))
    null_deaths = property(lambda self: int(self.core[tk.NULL_DEATHS]))
    l_size = property(lambda self: int(self.core[tk.L_SIZE]))
    partial_g = property(lambda self: int(self.core[tk.PARTIAL_G]))
    partial_e = property(lambda self: int(self.core[tk.PARTIAL_E]))
    sum_g = property(lambda self: int(self.core[tk.SUM_G]))
    count_g = property(lambda self: int(self.core[tk.COUNT_G]))
    sum_e = property(lambda self: int(self.core[tk.SUM_E]))
    count_e = property(lambda self: int(self.core[tk.COUNT_E]))
    replicates = property(lambda self: int(self.core[tk.REPLICATES]))

    @property
    def N_n(self) -> int:
        return self.births

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return [tuple(row) for row in self.interval_array.tolist()]

    def births_in(self, a: float, b: float) -> int:
        for j, (lo, hi) in enumerate(self.intervals):
            if lo == a and hi == b:
                return int(self.births_in_counts[j])
        raise KeyError(f"interval ({a}, {b}) is not tracked")

    @property
    def birth_histogram(self) -> np.ndarray | None:
        return self.hist_counts[1:-1] if self.hist_counts.size else None

    def partition_holds(self) -> bool:
        """Exact split of observed time into completed and in-progress stretches."""
        c = self.core
        return int(c[tk.SUM_G] + c[tk.SUM_E] + c[tk.PARTIAL_G] + c[tk.PARTIAL_E]) == int(c[tk.N])

    # -- observation ----------------------------------------------------
    def attach(self, state: ChainState) -> None:
        """Bind to a chain before its next event; starts from the chain's current |L|."""
        if self.replicates > 1:
            raise UsageError("merged trackers cannot observe further events")
        if self.replicates == 0:
            self.core[tk.REPLICATES] = 1
            self.core[tk.L_SIZE] = state.l_count
        elif self.core[tk.L_SIZE] != state.l_count:
            raise UsageError("trackers are bound to a different chain")

    def observe(self, event: StepEvent, l_size_after: int) -> "Trackers":
        """Account for one step, given the event and ``|L|`` right after it."""
        if self.replicates > 1:
            raise UsageError("merged trackers cannot observe further events")
        if event.n is not None and event.n != self.n + 1:
            raise UsageError(f"event for step {event.n} observed after step {self.n}")
        if l_size_after < 0:
            raise ParameterError("l_size_after must be nonnegative")
        self.core[tk.REPLICATES] = 1
        if isinstance(event, Birth):
            kind, x = tk.EV_BIRTH, float(event.fitness)
        elif isinstance(event, Death):
            kind, x = tk.EV_DEATH, float(event.fitness)
        elif isinstance(event, NullDeath):
            kind, x = tk.EV_NULL, math.nan
        else:
            raise TypeError(f"not a step event: {event!r}")
        gbuf = np.empty(1, dtype=np.int64)
        ebuf = np.empty(1, dtype=np.int64)
        self.core[tk.G_PENDING] = 0
        self.core[tk.E_PENDING] = 0
        tk.observe_event(self.core, self.interval_array, self.births_in_counts, self.hist_counts,
                         self.hist_lo, self.hist_hi, gbuf, ebuf, kind, x, int(l_size_after))
        self._absorb(gbuf[:self.core[tk.G_PENDING]], ebuf[:self.core[tk.E_PENDING]])
        return self

    def _absorb(self, g_new: np.ndarray, e_new: np.ndarray) -> None:
        self.core[tk.G_PENDING] = 0
        self.core[tk.E_PENDING] = 0
        seen_g = int(self.core[tk.COUNT_G]) - len(g_new)
        seen_e = int(self.core[tk.COUNT_E]) - len(e_new)
        self.g_log = self._reservoir_add(self.g_log, g_new, seen_g)
        self.e_log = self._reservoir_add(self.e_log, e_new, seen_e)

    def _reservoir_add(self, log: np.ndarray, new: np.ndarray, seen: int) -> np.ndarray:
        if new.size == 0:
            return log
        room = self.log_cap - log.size
        if room > 0:
            log = np.concatenate([log, new[:room]])
            new = new[room:]
            seen += room
        if new.size == 0:
            return log
        # Algorithm R on the overflow; later replacements win.
        slots = self._reservoir.integers(0, seen + 1 + np.arange(new.size))
        keep = slots < self.log_cap
        for slot, value in zip(slots[keep].tolist(), new[keep].tolist()):
            log[slot] = value
        return log

    # -- merging --------------------------------------------------------
    def config(self) -> tuple:
        return (self.interval_array.tobytes(), self.hist_counts.size, self.hist_lo, self.hist_hi,
                self.log_cap)

    def copy(self) -> "Trackers":
        out = Trackers.__new__(Trackers)
        out.__dict__.update({k: (v.copy() if isinstance(v, np.ndarray) else v)
                             for k, v in self.__dict__.items()})
        out._reservoir = np.random.Generator(np.random.PCG64(self.seed))
        out._reservoir.bit_generator.state = self._reservoir.bit_generator.state
        return out

    def __eq__(self, other):
        if not isinstance(other, Trackers):
            return NotImplemented
        return (self.config() == other.config()
                and np.array_equal(self.core, other.core)
                and np.array_equal(self.births_in_counts, other.births_in_counts)
                and np.array_equal(self.hist_counts, other.hist_counts)
                and np.array_equal(self.g_log, other.g_log)
                and np.array_equal(self.e_log, other.e_log))

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "n": self.n, "t_n": self.t_n, "k_n": self.k_n, "N_n": self.births,
            "deaths": self.deaths, "null_deaths": self.null_deaths,
            "replicates": self.replicates,
            "births_in": [{"a": a, "b": b, "count": int(c)}
                          for (a, b), c in zip(self.intervals, self.births_in_counts)],
        }


def merge(a: Trackers, b: Trackers) -> Trackers:
    """Sum the counters of two runs and concatenate their excursion logs.

    The result summarises both runs and cannot observe further events.  The
    log cap bounds observation only; merged logs keep every entry so that
    merging stays associative.
    """
    if a.config() != b.config():
        raise ConfigurationError("cannot merge trackers with different intervals, histograms or log caps")
    out = a.copy()
    out.core = a.core + b.core
    out.births_in_counts = a.births_in_counts + b.births_in_counts
    out.hist_counts = a.hist_counts + b.hist_counts
    out.g_log = np.concatenate([a.g_log, b.g_log])
    out.e_log = np.concatenate([a.e_log, b.e_log])
    return out


# -- statistics ---------------------------------------------------------

def density_target(params: ModelParams, law, a: float, b: float) -> float:
    """Almost-sure limit of ``count_in(a, b) / n`` above the critical value: ``p P(a < X < b)``."""
    return params.p * law.prob(a, b)


def density_estimate(state: ChainState, a: float, b: float) -> float:
    """``count_in(a, b) / n``.

    Warns with :class:`TheoremNotApplicableWarning` when ``(a, b)`` does not
    lie above the critical value; the ratio is returned regardless.
    """
    if not a < b:
        raise ParameterError("need a < b")
    if state.n < 1:
        raise ParameterError("density needs at least one step")
    v_c = None
    if state.params.supercritical:
        v_c = critical_value(state.law, state.params)
    if v_c is None or a <= v_c:
        warnings.warn(f"interval ({a}, {b}) is not above the critical value {v_c}",
                      TheoremNotApplicableWarning, stacklevel=2)
    return state.population.count_in(a, b) / state.n


@dataclass(frozen=True)
class Bracket:
    """``births_in - t_n <= count <= births_in`` for one interval."""

    a: float
    b: float
    lower: int
    count: int
    upper: int

    @property
    def holds(self) -> bool:
        return self.lower <= self.count <= self.upper


def density_bracket(state: ChainState, trackers: Trackers, a: float, b: float) -> Bracket:
    """Deterministic sandwich of the interval count by births and empty-L steps.

    Valid for intervals at or above the critical value, where a death can
    only strike while ``L`` is empty.
    """
    births = trackers.births_in(a, b)
    return Bracket(a, b, births - trackers.t_n, state.population.count_in(a, b), births)


def check_brackets(state: ChainState, trackers: Trackers) -> list[Bracket]:
    """Bracket every tracked interval lying above the critical value; raise on violation."""
    v_c = critical_value(state.law, state.params)
    out = []
    for a, b in trackers.intervals:
        if a >= v_c:
            br = density_bracket(state, trackers, a, b)
            if not br.holds:
                raise AssertionError(f"interval count outside births/t_n bracket at n={state.n}: {br}")
            out.append(br)
    return out


@dataclass(frozen=True)
class TailCheck:
    eps: float
    threshold: float
    passed: bool
    margin: float

    def to_dict(self) -> dict:
        return {"eps": self.eps, "threshold": self.threshold, "pass": self.passed, "margin": self.margin}


def tail_threshold(params: ModelParams, n: int, eps: float = 0.1) -> float:
    """``(2 / (p f_c)) * n ** (1/2 + eps)``."""
    return 2.0 / (params.p * params.f_c) * float(n) ** (0.5 + eps)


def tail_bound_check(trackers: Trackers | int, params: ModelParams, eps: float = 0.1, n: int | None = None) -> TailCheck:
    """Is ``t_n`` below ``(2 / (p f_c)) n^(1/2 + eps)``?  ``margin`` is ``t_n / threshold``.

    ``trackers`` may also be a bare ``t_n`` count, in which case ``n`` is required.
    """
    if eps <= 0:
        raise ParameterError("eps must be positive")
    if not params.supercritical:
        raise ParameterError("the empty-L tail bound needs p > 1/2")
    if isinstance(trackers, Trackers):
        t_n, n = trackers.t_n, trackers.n if n is None else n
    else:
        t_n = int(trackers)
        if n is None:
            raise ParameterError("n is required with a bare t_n")
    if n < 1:
        return TailCheck(eps, 0.0, t_n == 0, 0.0)
    threshold = tail_threshold(params, n, eps)
    return TailCheck(eps, threshold, t_n <= threshold, t_n / threshold)


def _length_histogram(values: np.ndarray, log_bins: bool) -> tuple[np.ndarray, np.ndarray]:
    if values.size == 0:
        return np.array([1], dtype=np.int64), np.zeros(0, dtype=np.int64)
    top = int(values.max())
    if log_bins:
        edges = 2 ** np.arange(0, max(1, top.bit_length()) + 1, dtype=np.int64)
    else:
        edges = np.arange(1, top + 2, dtype=np.int64)
    counts, _ = np.histogram(values, bins=edges)
    return edges, counts.astype(np.int64)


@dataclass
class ExcursionSummary:
    """Completed stretch statistics.  Histogram bins are ``[edges[i], edges[i+1])``."""

    count: int
    mean_G: float
    mean_E: float
    G_histogram: tuple[np.ndarray, np.ndarray]
    E_histogram: tuple[np.ndarray, np.ndarray]

    def to_dict(self) -> dict:
        clean = lambda v: None if math.isnan(v) else v
        return {"count": self.count, "mean_G": clean(self.mean_G), "mean_E": clean(self.mean_E)}


def excursion_summary(trackers: Trackers) -> ExcursionSummary:
    """Means use exact sums over all completed stretches; histograms use the logs.

    ``count`` is the number of completed empty-L stretches.  G lengths are
    binned by unit, E lengths (heavy tailed) by powers of two.
    """
    mean_g = trackers.sum_g / trackers.count_g if trackers.count_g else math.nan
    mean_e = trackers.sum_e / trackers.count_e if trackers.count_e else math.nan
    return ExcursionSummary(trackers.count_g, mean_g, mean_e,
                            _length_histogram(trackers.g_log, False),
                            _length_histogram(trackers.e_log, True))


def excursion_survival(trackers: Trackers, ns) -> tuple[np.ndarray, np.ndarray]:
    """Empirical ``P(E > n)`` from the E log, with binomial standard errors."""
    e = np.sort(trackers.e_log)
    m = e.size
    if m == 0:
        raise UsageError("no completed nonempty stretches")
    ns = np.asarray(ns)
    surv = (m - np.searchsorted(e, ns, side="right")) / m
    return surv, np.sqrt(surv * (1 - surv) / m)


def ks_above_critical(values, law, params: ModelParams) -> float | None:
    """KS distance of the values above the critical value from the law conditioned there.

    Works on the probability scale: ``law.cdf(values) > f_c`` against
    uniform(f_c, 1).  ``None`` when fewer than two values qualify.
    """
    from scipy import stats

    if not params.supercritical:
        return None
    u = np.asarray(law.cdf(np.asarray(values, dtype=float)), dtype=float).ravel()
    u = u[u > params.f_c]
    if u.size < 2:
        return None
    return float(stats.kstest(u, "uniform", args=(params.f_c, 1.0 - params.f_c)).statistic)
