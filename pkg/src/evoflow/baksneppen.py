"""Bak–Sneppen dynamics on a ring, for comparison with the birth/death model.

Each update finds the least-fit site (lowest index on ties) and gives it and
its two ring neighbours fresh fitnesses, drawn in the order left neighbour,
site, right neighbour.  The ring starts from i.i.d. draws of the law.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ParameterError
from .laws import FitnessLaw, UniformLaw, law_quantile
from .rng import UniformStream

MIN_THRESHOLD_SAMPLES = 1000


@njit(cache=True)
def _argmin(f):
    best = 0
    for i in range(1, f.shape[0]):
        if f[i] < f[best]:
            best = i
    return best


@njit(cache=True)
def _bs_updates(f, buf, bpos, updates, kind, param, argmins, sample_from, sample_every, samples, sample_updates, update0):
    n = f.shape[0]
    k = 0
    for u in range(updates):
        i = _argmin(f)
        argmins[u] = i
        left = i - 1 if i > 0 else n - 1
        right = i + 1 if i < n - 1 else 0
        f[left] = law_quantile(buf[bpos], kind, param)
        f[i] = law_quantile(buf[bpos + 1], kind, param)
        f[right] = law_quantile(buf[bpos + 2], kind, param)
        bpos += 3
        done = update0 + u + 1
        if done > sample_from and (done - sample_from) % sample_every == 0:
            samples[k, :] = f
            sample_updates[k] = done
            k += 1
    return bpos, k


class Ring:
    """``N >= 3`` fitnesses on a cycle with a seeded draw stream."""

    def __init__(self, sites: int, law: FitnessLaw | None = None, seed: int = 0):
        if sites < 3:
            raise ParameterError("a ring needs at least 3 sites")
        self.law = law if law is not None else UniformLaw()
        self.stream = UniformStream(seed)
        self.fitness = self.law.quantile(self.stream.take(sites))
        self.updates = 0

    @property
    def N(self) -> int:
        return self.fitness.shape[0]

    def _run(self, updates, sample_from=None, sample_every=1):
        nsamp = 0
        if sample_from is not None:
            first = max(sample_from, self.updates)
            last = self.updates + updates
            nsamp = max(0, (last - sample_from) // sample_every - (first - sample_from) // sample_every)
        samples = np.empty((nsamp, self.N))
        sample_updates = np.empty(nsamp, dtype=np.int64)
        argmins = np.empty(updates, dtype=np.int64)
        self.stream.ensure(3 * updates)
        bpos, k = _bs_updates(self.fitness, self.stream.buf, self.stream.pos, updates,
                              self.law.kind, self.law.param, argmins,
                              sample_from if sample_from is not None else np.iinfo(np.int64).max,
                              sample_every, samples, sample_updates, self.updates)
        self.stream.advance(bpos)
        self.updates += updates
        return argmins, samples[:k], sample_updates[:k]


@dataclass(frozen=True)
class BSUpdate:
    argmin_index: int
    replaced_indices: tuple[int, int, int]


@dataclass
class BSSamples:
    """Fitness vectors recorded after the listed update counts (one row per record)."""

    vectors: np.ndarray
    updates: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self.vectors.ravel()

    def __len__(self):
        return self.vectors.shape[0]

    def rows(self):
        """``(update, site, fitness)`` triples in recording order."""
        for upd, vec in zip(self.updates.tolist(), self.vectors.tolist()):
            for site, x in enumerate(vec):
                yield upd, site, x


def bs_step(ring: Ring) -> BSUpdate:
    argmins, _, _ = ring._run(1)
    i = int(argmins[0])
    n = ring.N
    return BSUpdate(i, ((i - 1) % n, i, (i + 1) % n))


def bs_run(ring: Ring, updates: int, burn_in: int = 0, sample_every: int = 1) -> BSSamples:
    """Perform ``updates`` updates; after ``burn_in`` of them, record every ``sample_every``-th state."""
    if updates < burn_in or burn_in < 0:
        raise ParameterError("need 0 <= burn_in <= updates")
    if sample_every < 1:
        raise ParameterError("sample_every must be at least 1")
    start = ring.updates
    _, vectors, at = ring._run(updates, start + burn_in, sample_every)
    return BSSamples(vectors, at - start)


@dataclass(frozen=True)
class ThresholdEstimate:
    """Two estimates of the level above which the stationary fitnesses look uniform.

    Both are reported on the fitness scale; ``u_moment``/``u_quantile`` are the
    same estimates on the probability scale of the law.
    """

    moment: float
    quantile01: float
    u_moment: float
    u_quantile01: float

    def to_dict(self) -> dict:
        return {"moment": self.moment, "quantile01": self.quantile01,
                "u_moment": self.u_moment, "u_quantile01": self.u_quantile01}


def bs_threshold_estimate(samples, law: FitnessLaw | None = None) -> ThresholdEstimate:
    """Moment inversion ``2 * mean - 1`` and the 1% quantile, both on the cdf scale.

    If the cdf-transformed samples were uniform on ``(f, 1)`` their mean would
    be ``(1 + f) / 2``.  This is a heuristic; nothing guarantees the shape.
    """
    law = law if law is not None else UniformLaw()
    x = np.asarray(samples.values if isinstance(samples, BSSamples) else samples, dtype=float).ravel()
    if x.size < MIN_THRESHOLD_SAMPLES:
        raise ParameterError(f"need at least {MIN_THRESHOLD_SAMPLES} samples, got {x.size}")
    u = law.cdf(x)
    u_mom = 2.0 * float(np.mean(u)) - 1.0
    u_q = float(np.quantile(u, 0.01))
    return ThresholdEstimate(float(law.quantile(min(max(u_mom, 0.0), 1.0))), float(law.quantile(u_q)), u_mom, u_q)
