"""Fitness distributions.

Every law is sampled by inverse transform from a single uniform draw, so the
simulator consumes exactly one uniform per birth regardless of the law.  Each
law also carries an integer ``kind`` and a scalar ``param`` that the compiled
kernels use to evaluate the same quantile and cdf without Python callbacks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ParameterError

KIND_UNIFORM = 0
KIND_EXPONENTIAL = 1
KIND_PARETO = 2


@njit(cache=True)
def law_quantile(u, kind, param):
    if kind == KIND_UNIFORM:
        return u
    if kind == KIND_EXPONENTIAL:
        return -math.log1p(-u) / param
    return (1.0 - u) ** (-1.0 / param)


@njit(cache=True)
def law_cdf(x, kind, param):
    # NaN falls through every comparison and is mapped to 0.
    if kind == KIND_UNIFORM:
        c = x
    elif kind == KIND_EXPONENTIAL:
        if x <= 0.0:
            return 0.0
        c = -math.expm1(-param * x)
    else:
        if x <= 1.0:
            return 0.0
        c = 1.0 - x ** (-param)
    if c > 1.0:
        return 1.0
    if c >= 0.0:
        return c
    return 0.0


@dataclass(frozen=True)
class FitnessLaw:
    """A continuous fitness distribution with a compiled cdf/quantile pair.

    Subclasses fix ``kind`` and interpret ``param``.  Instances are immutable
    and can be shared between chains.
    """

    kind: int
    param: float

    @property
    def label(self) -> str:
        raise NotImplementedError

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def cdf(self, x):
        """Distribution function, vectorised over ``x``."""
        x = np.asarray(x, dtype=float)
        out = np.vectorize(lambda v: law_cdf(v, self.kind, self.param), otypes=[float])(x)
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        """Inverse distribution function on [0, 1]; ``quantile(1)`` is the support's upper end."""
        u = np.asarray(u, dtype=float)
        if np.any((u < 0.0) | (u > 1.0)):
            raise ParameterError("quantile level must lie in [0, 1]")
        out = np.vectorize(lambda v: law_quantile(v, self.kind, self.param), otypes=[float])(u)
        if self.kind == KIND_UNIFORM:
            out = np.where(u == 1.0, 1.0, out)
        else:
            out = np.where(u == 1.0, math.inf, out)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, size=None):
        return self.quantile(rng.random(size))

    def prob(self, a: float, b: float) -> float:
        """P(a < X < b) for the law (atoms have zero mass)."""
        return float(self.cdf(b) - self.cdf(a))

    def spec(self) -> str:
        """Textual form accepted by :func:`parse_law`."""
        raise NotImplementedError


class UniformLaw(FitnessLaw):
    def __init__(self):
        super().__init__(KIND_UNIFORM, 0.0)

    @property
    def label(self):
        return "uniform(0,1)"

    @property
    def support(self):
        return (0.0, 1.0)

    def spec(self):
        return "uniform"

    def __repr__(self):
        return "UniformLaw()"


class ExponentialLaw(FitnessLaw):
    def __init__(self, rate: float = 1.0):
        if not (rate > 0.0 and math.isfinite(rate)):
            raise ParameterError(f"exponential rate must be positive, got {rate!r}")
        super().__init__(KIND_EXPONENTIAL, float(rate))

    @property
    def rate(self) -> float:
        return self.param

    @property
    def label(self):
        return f"exponential(rate={self.param:g})"

    @property
    def support(self):
        return (0.0, math.inf)

    def spec(self):
        return f"exp:{self.param!r}"

    def __repr__(self):
        return f"ExponentialLaw(rate={self.param!r})"


class ParetoLaw(FitnessLaw):
    """Pareto law with unit scale: P(X > x) = x**(-alpha) for x >= 1."""

    def __init__(self, alpha: float = 2.0):
        if not (alpha > 0.0 and math.isfinite(alpha)):
            raise ParameterError(f"pareto alpha must be positive, got {alpha!r}")
        super().__init__(KIND_PARETO, float(alpha))

    @property
    def alpha(self) -> float:
        return self.param

    @property
    def label(self):
        return f"pareto(alpha={self.param:g})"

    @property
    def support(self):
        return (1.0, math.inf)

    def spec(self):
        return f"pareto:{self.param!r}"

    def __repr__(self):
        return f"ParetoLaw(alpha={self.param!r})"


def parse_law(text: str) -> FitnessLaw:
    """Build a law from ``uniform``, ``exp:RATE`` or ``pareto:ALPHA``."""
    name, _, arg = text.strip().partition(":")
    name = name.lower()
    try:
        if name == "uniform" and not arg:
            return UniformLaw()
        if name in ("exp", "exponential"):
            return ExponentialLaw(float(arg) if arg else 1.0)
        if name == "pareto":
            return ParetoLaw(float(arg) if arg else 2.0)
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"bad law parameter in {text!r}") from exc
    raise ParameterError(f"unknown fitness law {text!r}; expected uniform, exp:RATE or pareto:ALPHA")
