"""Birth/death dynamics with kill-the-least-fit deaths.

At every step a uniform coin decides the event: a birth when the draw is
below ``p`` (a second uniform then fixes the newborn's fitness through the
law's quantile), otherwise a death that removes the least-fit species, or a
null death when nothing is alive.  Deaths consume exactly one uniform.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, TextIO, Union

import numpy as np
from numba import njit

from . import _tracking as tk
from .errors import ParameterError, UsageError
from .laws import FitnessLaw, UniformLaw, law_quantile
from .population import Population, pop_count_below, pop_insert, pop_remove_min
from .rng import ScriptedStream, UniformStream

CHUNK = 1 << 20


def critical_fitness(p: float) -> float:
    """``(1 - p) / p``; below 1 exactly when ``p > 1/2``."""
    p = _check_probability(p)
    return (1.0 - p) / p


def _check_probability(p) -> float:
    if isinstance(p, (Fraction, str)):
        p = float(Fraction(p))
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ParameterError(f"birth probability must lie in (0, 1), got {p!r}")
    return p


@dataclass(frozen=True)
class ModelParams:
    """Birth probability ``p`` with derived death probability and critical fitness."""

    p: float
    q: float = field(init=False)
    f_c: float = field(init=False)

    def __post_init__(self):
        p = _check_probability(self.p)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", 1.0 - p)
        object.__setattr__(self, "f_c", critical_fitness(p))

    @property
    def supercritical(self) -> bool:
        """True when ``f_c < 1``; theorem-specific statistics need this."""
        return self.f_c < 1.0


def critical_value(law: FitnessLaw, p: float | ModelParams) -> float:
    """Fitness below which a newborn lands with probability ``f_c``.

    For the uniform law this is ``f_c`` itself.
    """
    params = p if isinstance(p, ModelParams) else ModelParams(p)
    if not params.supercritical:
        raise ParameterError(
            f"p={params.p!r} <= 1/2 gives f_c={params.f_c:.6g} >= 1: there is no finite "
            "critical value, every fitness level is subcritical"
        )
    return float(law.quantile(params.f_c))


@dataclass(frozen=True)
class Birth:
    fitness: float
    n: int | None = None


@dataclass(frozen=True)
class Death:
    fitness: float
    n: int | None = None


@dataclass(frozen=True)
class NullDeath:
    n: int | None = None


StepEvent = Union[Birth, Death, NullDeath]
EVENT_NAMES = {tk.EV_BIRTH: "birth", tk.EV_DEATH: "death", tk.EV_NULL: "null_death"}


@dataclass
class Histogram:
    """Equal-width bin counts over ``[lo, hi)`` plus out-of-range tallies."""

    edges: np.ndarray
    counts: np.ndarray
    underflow: int = 0
    overflow: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    def density(self) -> np.ndarray:
        """Counts normalised so the in-range histogram integrates to its share of the total."""
        total = self.total
        widths = np.diff(self.edges)
        if total == 0:
            return np.zeros_like(widths)
        return self.counts / (total * widths)


class ChainState:
    """Mutable state of one chain: step index, population, draw stream."""

    def __init__(self, params: ModelParams, law: FitnessLaw, stream: UniformStream, population: Population | None = None):
        self.params = params
        self.law = law
        self.stream = stream
        self.population = population if population is not None else Population(law)
        self.n = 0
        # Threshold used for |L| bookkeeping.  Beyond p <= 1/2 it is the
        # law's upper end, i.e. every species counts as subcritical.
        self.l_threshold = float(law.quantile(min(params.f_c, 1.0)))
        self.l_count = self.population.count_lt(self.l_threshold)
        self._scratch = np.zeros(2, dtype=np.float64)

    @property
    def rng(self) -> UniformStream:
        return self.stream

    def size(self) -> int:
        return self.population.size()

    def fingerprint(self) -> str:
        """Digest of step index, sorted population and stream position."""
        h = hashlib.sha256()
        h.update(str(self.n).encode())
        h.update(self.population.values().tobytes())
        h.update(self.stream.fingerprint().encode())
        return h.hexdigest()

    def __repr__(self):
        return (f"ChainState(n={self.n}, size={self.size()}, p={self.params.p!r}, "
                f"law={self.law.label})")


def new_chain(params: ModelParams | float, law: FitnessLaw | None = None, seed: int = 0) -> ChainState:
    """Empty chain at ``n = 0`` driven by a PCG64 stream seeded with ``seed``."""
    if not isinstance(params, ModelParams):
        params = ModelParams(params)
    return ChainState(params, law if law is not None else UniformLaw(), UniformStream(seed))


def scripted_chain(params: ModelParams | float, uniforms, law: FitnessLaw | None = None,
                   population=()) -> ChainState:
    """Chain whose draws are the given uniforms, optionally pre-populated."""
    if not isinstance(params, ModelParams):
        params = ModelParams(params)
    law = law if law is not None else UniformLaw()
    pop = Population(law)
    for x in population:
        pop.insert(x)
    return ChainState(params, law, ScriptedStream(uniforms), pop)


@njit(cache=True)
def _advance(bk, blk, fen, val, nxt, pmeta, kind, param, p, l_threshold,
             buf, bpos, steps, l_count,
             core, intervals, births_in, hist, hist_lo, hist_hi, gbuf, ebuf,
             track, log_kind, log_fit, logging):
    """Run up to ``steps`` events.  Returns (done, bpos, l_count, last_kind, last_fitness)."""
    nbuf = buf.shape[0]
    done = 0
    ev = -1
    x = np.nan
    while done < steps:
        if bpos >= nbuf:
            break
        u = buf[bpos]
        if u < p:
            if bpos + 1 >= nbuf:
                break
            x = law_quantile(buf[bpos + 1], kind, param)
            bpos += 2
            pop_insert(bk, blk, fen, val, nxt, pmeta, kind, param, x)
            if x < l_threshold:
                l_count += 1
            ev = 0
        else:
            bpos += 1
            if pmeta[0] > 0:
                x = pop_remove_min(bk, blk, fen, val, nxt, pmeta)
                if x < l_threshold:
                    l_count -= 1
                ev = 1
            else:
                x = np.nan
                ev = 2
        if track:
            tk.observe_event(core, intervals, births_in, hist, hist_lo, hist_hi,
                             gbuf, ebuf, ev, x, l_count)
        if logging:
            log_kind[done] = ev
            log_fit[done] = x
        done += 1
    return done, bpos, l_count, ev, x


_NO_INTERVALS = np.zeros((0, 2), dtype=np.float64)
_NO_COUNTS = np.zeros(0, dtype=np.int64)
_NO_KIND = np.zeros(0, dtype=np.int8)
_NO_FIT = np.zeros(0, dtype=np.float64)


def _advance_chunk(state: ChainState, steps: int, trackers=None, logging: bool = False):
    pop = state.population
    stream = state.stream
    pop.reserve(steps)
    stream.ensure(2 * steps)
    if trackers is not None:
        core, intervals, births_in = trackers.core, trackers.interval_array, trackers.births_in_counts
        hist, hlo, hhi = trackers.hist_counts, trackers.hist_lo, trackers.hist_hi
        gbuf = np.empty(steps, dtype=np.int64)
        ebuf = np.empty(steps, dtype=np.int64)
        core[tk.G_PENDING] = 0
        core[tk.E_PENDING] = 0
    else:
        core = tk.empty_core()
        intervals, births_in, hist, hlo, hhi = _NO_INTERVALS, _NO_COUNTS, _NO_COUNTS, 0.0, 1.0
        gbuf = ebuf = _NO_COUNTS
    log_kind = np.empty(steps, dtype=np.int8) if logging else _NO_KIND
    log_fit = np.empty(steps, dtype=np.float64) if logging else _NO_FIT
    done, bpos, l_count, ev, x = _advance(
        pop.bk, pop.blk, pop.fen, pop.val, pop.nxt, pop.meta, pop.kind, pop.param,
        state.params.p, state.l_threshold, stream.buf, stream.pos, steps, state.l_count,
        core, intervals, births_in, hist, hlo, hhi, gbuf, ebuf,
        trackers is not None, log_kind, log_fit, logging,
    )
    stream.advance(bpos)
    state.l_count = l_count
    first = state.n + 1
    state.n += done
    if trackers is not None:
        trackers._absorb(gbuf[:core[tk.G_PENDING]], ebuf[:core[tk.E_PENDING]])
    pop.maybe_rebucket()
    log = (first, log_kind[:done], log_fit[:done]) if logging else None
    return done, ev, x, log


def step(state: ChainState) -> StepEvent:
    """Advance one event and report it."""
    done, ev, x, _ = _advance_chunk(state, 1)
    if done == 0:
        raise UsageError("uniform stream exhausted")
    if ev == tk.EV_BIRTH:
        return Birth(float(x), state.n)
    if ev == tk.EV_DEATH:
        return Death(float(x), state.n)
    return NullDeath(state.n)


def write_event_log(out: TextIO, first: int, kinds: np.ndarray, fits: np.ndarray) -> None:
    """Write records ``n,event_type,fitness`` (empty fitness for null deaths)."""
    lines = []
    for i, (k, x) in enumerate(zip(kinds.tolist(), fits.tolist())):
        fit = "" if k == tk.EV_NULL else repr(x)
        lines.append(f"{first + i},{EVENT_NAMES[k]},{fit}\n")
    out.write("".join(lines))


def run(state: ChainState, steps: int, trackers=None, *, report_every: int | None = None,
        on_report: Callable[[ChainState, object], None] | None = None,
        event_log: TextIO | None = None) -> ChainState:
    """Advance ``state`` by exactly ``steps`` events.

    ``trackers`` (a :class:`evoflow.trackers.Trackers`) observes every event in
    order.  When ``report_every`` is set, ``on_report(state, trackers)`` fires
    whenever ``state.n`` reaches a multiple of it.  Only streaming statistics
    are kept; pass ``event_log`` to record every event as CSV text.
    """
    steps = int(steps)
    if steps < 0:
        raise ParameterError("steps must be nonnegative")
    if trackers is not None:
        trackers.attach(state)
    if report_every is not None and report_every <= 0:
        raise ParameterError("report_every must be positive")
    growth = max(0.0, 2.0 * state.params.p - 1.0)
    state.population.maybe_rebucket(state.size() + int(growth * steps))
    remaining = steps
    while remaining > 0:
        chunk = min(remaining, CHUNK)
        if report_every:
            chunk = min(chunk, report_every - state.n % report_every)
        done, _, _, log = _advance_chunk(state, chunk, trackers, logging=event_log is not None)
        if log is not None:
            write_event_log(event_log, *log)
        if done < chunk:
            raise UsageError("uniform stream exhausted")
        remaining -= done
        if report_every and on_report is not None and state.n % report_every == 0:
            on_report(state, trackers)
    return state


def count_in(state: ChainState, a: float, b: float) -> int:
    """Living species with fitness strictly inside (a, b)."""
    return state.population.count_in(a, b)


def l_size(state: ChainState) -> int:
    """Number of living species below the critical value."""
    critical_value(state.law, state.params)
    return state.l_count


def snapshot_histogram(state: ChainState, bins: int, lo: float, hi: float) -> Histogram:
    """Bin the living fitnesses into ``bins`` equal cells over ``[lo, hi)``."""
    if bins < 1:
        raise ParameterError("bins must be at least 1")
    if not lo < hi:
        raise ParameterError("need lo < hi")
    return histogram_of(state.population.values(), bins, lo, hi)


def histogram_of(values: np.ndarray, bins: int, lo: float, hi: float) -> Histogram:
    values = np.asarray(values, dtype=float)
    edges = np.linspace(lo, hi, bins + 1)
    inside = (values >= lo) & (values < hi)
    idx = np.floor((values[inside] - lo) / (hi - lo) * bins).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    counts = np.bincount(idx, minlength=bins).astype(np.int64)
    return Histogram(edges, counts, int(np.count_nonzero(values < lo)), int(np.count_nonzero(values >= hi)))


@njit(cache=True)
def _endpoint_l(buf, bpos, replicates, n, p, kind, param, l_threshold,
                bk, blk, fen, val, nxt, pmeta, out):
    for r in range(replicates):
        bk[:, 0] = -1
        bk[:, 1] = 0
        blk[:] = 0
        fen[:] = 0
        pmeta[0] = 0
        pmeta[1] = 0
        pmeta[2] = -1
        pmeta[3] = 0
        l = 0
        for _ in range(n):
            u = buf[bpos]
            if u < p:
                x = law_quantile(buf[bpos + 1], kind, param)
                bpos += 2
                pop_insert(bk, blk, fen, val, nxt, pmeta, kind, param, x)
                if x < l_threshold:
                    l += 1
            else:
                bpos += 1
                if pmeta[0] > 0:
                    x = pop_remove_min(bk, blk, fen, val, nxt, pmeta)
                    if x < l_threshold:
                        l -= 1
        out[r] = l
    return bpos


def endpoint_l_sizes(params: ModelParams | float, n: int, replicates: int, seed: int = 0,
                     law: FitnessLaw | None = None, batch: int = 100_000) -> np.ndarray:
    """|L_n| at a fixed horizon for many independent chains.

    Replicates run one after another on a single seeded stream, each from the
    empty state, through the same insert/remove-min kernels as :func:`run`.
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(params)
    law = law if law is not None else UniformLaw()
    l_threshold = float(law.quantile(min(params.f_c, 1.0)))
    stream = UniformStream(seed)
    pop = Population(law, capacity=n + 1)
    out = np.empty(replicates, dtype=np.int64)
    for start in range(0, replicates, batch):
        m = min(batch, replicates - start)
        stream.ensure(2 * n * m)
        bpos = _endpoint_l(stream.buf, stream.pos, m, n, params.p, law.kind, law.param, l_threshold,
                           pop.bk, pop.blk, pop.fen, pop.val, pop.nxt, pop.meta,
                           out[start:start + m])
        stream.advance(bpos)
    return out
