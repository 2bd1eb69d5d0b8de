"""Exact, simulation-free reference distributions.

``|L_n|`` is a birth and death chain on the nonnegative integers.  From a
positive state it moves up with probability ``p f_c``, down with ``q`` and
stays with ``p (1 - f_c)``; at 0 a death leaves it at 0.  Two independent
routes give its law at a fixed horizon: repeated application of the
tridiagonal kernel (:func:`exact_l_pmf`) and brute-force enumeration of all
``3**n`` coarse paths (:func:`enumerate_l_paths`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ModelParams
from .errors import ParameterError, ResourceError

MAX_ENUMERATION_STEPS = 16


@dataclass(frozen=True)
class OraclePmf:
    """Probabilities of ``offset, offset + 1, ...``; ``truncated`` is the mass left out."""

    offset: int
    probs: np.ndarray
    truncated: float = 0.0

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if np.any(probs < 0):
            raise ParameterError("negative probability in pmf")
        object.__setattr__(self, "probs", probs)

    @property
    def support(self) -> np.ndarray:
        return self.offset + np.arange(self.probs.size)

    def __getitem__(self, k: int) -> float:
        i = k - self.offset
        return float(self.probs[i]) if 0 <= i < self.probs.size else 0.0

    def mass(self) -> float:
        return float(self.probs.sum())

    def mean(self) -> float:
        return float((self.support * self.probs).sum())

    def total_variation(self, other: "OraclePmf | np.ndarray") -> float:
        """Half the L1 distance; arrays are read as pmfs starting at 0."""
        if not isinstance(other, OraclePmf):
            other = OraclePmf(0, other)
        lo = min(self.offset, other.offset)
        hi = max(self.offset + self.probs.size, other.offset + other.probs.size)
        a = np.zeros(hi - lo)
        b = np.zeros(hi - lo)
        a[self.offset - lo:self.offset - lo + self.probs.size] = self.probs
        b[other.offset - lo:other.offset - lo + other.probs.size] = other.probs
        return 0.5 * float(np.abs(a - b).sum())


@dataclass(frozen=True)
class LTransitions:
    up: float
    stay: float
    down: float
    stay_at_zero: float


def _supercritical(params) -> ModelParams:
    params = params if isinstance(params, ModelParams) else ModelParams(params)
    if not params.supercritical:
        raise ParameterError("the |L| chain is defined for p > 1/2 only")
    return params


def l_transition_probs(params: ModelParams | float) -> LTransitions:
    params = _supercritical(params)
    up = params.p * params.f_c
    return LTransitions(up=up, stay=params.p * (1.0 - params.f_c), down=params.q, stay_at_zero=1.0 - up)


def exact_l_pmf(params: ModelParams | float, n: int, cap: int | None = None) -> OraclePmf:
    """Law of ``|L_n|`` from the empty state by ``n`` tridiagonal sweeps.

    States above ``cap`` are dropped and their mass reported as ``truncated``;
    ``cap >= n`` loses nothing because ``|L_n| <= n``.
    """
    if n < 0:
        raise ParameterError("n must be nonnegative")
    cap = n if cap is None else int(cap)
    if cap < 0:
        raise ParameterError("cap must be nonnegative")
    tr = l_transition_probs(params)
    v = np.zeros(cap + 1)
    v[0] = 1.0
    lost = 0.0
    for _ in range(n):
        w = np.empty_like(v)
        w[0] = v[0] * tr.stay_at_zero + (v[1] * tr.down if cap >= 1 else 0.0)
        if cap >= 1:
            w[1:] = v[1:] * tr.stay
            w[1:] += v[:-1] * tr.up
            w[1:-1] += v[2:] * tr.down
        lost += v[cap] * tr.up
        v = w
    return OraclePmf(0, v, lost)


def enumerate_l_paths(params: ModelParams | float, n: int) -> OraclePmf:
    """Law of ``|L_n|`` by summing over every sequence of coarse step outcomes.

    Each step is one of: birth below the critical value, birth above it, or a
    death (which lowers a positive count and leaves 0 alone).  Cost ``3**n``.
    """
    params = _supercritical(params)
    if n < 0:
        raise ParameterError("n must be nonnegative")
    if n > MAX_ENUMERATION_STEPS:
        raise ResourceError(f"path enumeration is limited to n <= {MAX_ENUMERATION_STEPS} (3**n paths)")
    p_low = params.p * params.f_c
    p_high = params.p * (1.0 - params.f_c)
    p_death = params.q
    paths = np.arange(3**n, dtype=np.int64)
    state = np.zeros(paths.size, dtype=np.int64)
    weight = np.ones(paths.size)
    digits = paths.copy()
    for _ in range(n):
        outcome = digits % 3
        digits //= 3
        low, high = outcome == 0, outcome == 1
        death = ~(low | high)
        weight[low] *= p_low
        weight[high] *= p_high
        weight[death] *= p_death
        state[low] += 1
        state[death & (state > 0)] -= 1
    probs = np.bincount(state, weights=weight, minlength=n + 1)
    return OraclePmf(0, probs)


def srw_survival_table(n: int) -> np.ndarray:
    """``P_1(T_0 > m)`` for ``m = 0..n``, simple symmetric walk absorbed at 0."""
    if n < 0:
        raise ParameterError("n must be nonnegative")
    out = np.empty(n + 1)
    out[0] = 1.0
    # v[j] = P(walk at j and not yet absorbed); positions 0..n+1
    v = np.zeros(n + 2)
    v[1] = 1.0
    for m in range(1, n + 1):
        w = np.zeros_like(v)
        w[2:] += 0.5 * v[1:-1]
        w[1:-1] += 0.5 * v[2:]
        v = w
        out[m] = v.sum()
    return out


def srw_survival(n: int) -> float:
    """``P_1(T_0 > n)`` for the simple symmetric ±1 walk started at 1.

    Uses the strict event ``T_0 > n``; it shares the ``1/sqrt(pi n / 2)``
    asymptotic with ``P_1(T_0 >= n)``.
    """
    return float(srw_survival_table(n)[-1])


def geometric_pmf(success: float, k: int) -> float:
    """``(1 - success)**(k - 1) * success`` on ``k = 1, 2, ...``."""
    if not 0.0 < success <= 1.0:
        raise ParameterError("success probability must lie in (0, 1]")
    if k < 1:
        raise ParameterError("geometric support starts at 1")
    return (1.0 - success) ** (k - 1) * success


def binomial_pmf(n: int, p: float, k: int) -> float:
    if not 0.0 <= p <= 1.0:
        raise ParameterError("p must lie in [0, 1]")
    if not 0 <= k <= n:
        raise ParameterError(f"k={k} outside 0..{n}")
    if n <= 50:
        return math.comb(n, k) * p**k * (1.0 - p) ** (n - k)
    if p in (0.0, 1.0):
        return float(k == n * p)
    log_pmf = (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
               + k * math.log(p) + (n - k) * math.log1p(-p))
    return math.exp(log_pmf)


def binomial_pmf_table(n: int, p: float) -> OraclePmf:
    return OraclePmf(0, np.array([binomial_pmf(n, p, k) for k in range(n + 1)]))


def geometric_pmf_table(success: float, kmax: int) -> OraclePmf:
    """Geometric pmf on ``1..kmax``; the tail beyond ``kmax`` is ``truncated``."""
    probs = np.array([geometric_pmf(success, k) for k in range(1, kmax + 1)])
    return OraclePmf(1, probs, (1.0 - success) ** kmax)
