import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from evoflow import (ExponentialLaw, ModelParams, ParameterError, ParetoLaw, UniformLaw, critical_fitness,
                     critical_value, parse_law)


@pytest.mark.parametrize("p, expected", [(2 / 3, 0.5), (3 / 4, 1 / 3), (0.51, 49 / 51)])
def test_critical_fitness_examples(p, expected):
    assert critical_fitness(p) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.5, math.nan])
def test_critical_fitness_rejects_bad_p(p):
    with pytest.raises(ParameterError):
        critical_fitness(p)


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_params_identity_within_one_ulp(p):
    params = ModelParams(p)
    assert params.q == 1.0 - params.p
    assert abs(params.p * params.f_c - params.q) <= math.ulp(params.q)
    assert params.supercritical == (params.p > 0.5)
    if params.p > 0.5:
        assert 0.0 < params.f_c < 1.0
    else:
        assert params.f_c >= 1.0


def test_params_accept_fraction_text():
    assert ModelParams("2/3").p == 2 / 3


@pytest.mark.parametrize("law, p, expected", [
    (UniformLaw(), 2 / 3, 0.5),
    (ExponentialLaw(1.0), 2 / 3, math.log(2)),
    (UniformLaw(), 3 / 4, 1 / 3),
])
def test_critical_value_examples(law, p, expected):
    assert critical_value(law, p) == pytest.approx(expected, rel=1e-12)


def test_critical_value_subcritical_explains():
    with pytest.raises(ParameterError, match="no finite critical value"):
        critical_value(UniformLaw(), 0.5)


LAWS = [UniformLaw(), ExponentialLaw(1.0), ExponentialLaw(3.5), ParetoLaw(2.0), ParetoLaw(0.7)]


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.label)
def test_cdf_inverts_quantile_on_grid(law):
    u = np.linspace(0.0, 0.999, 1000)
    np.testing.assert_allclose(law.cdf(law.quantile(u)), u, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.label)
def test_cdf_nondecreasing(law):
    lo, _ = law.support
    x = np.concatenate([[-1.0, lo], np.sort(law.quantile(np.random.default_rng(0).random(2000))), [1e9]])
    assert np.all(np.diff(law.cdf(x)) >= 0)


def test_uniform_samples_in_unit_interval():
    x = UniformLaw().sample(np.random.default_rng(1), 10_000)
    assert x.min() >= 0.0 and x.max() <= 1.0


def test_law_probabilities():
    assert ExponentialLaw(1.0).prob(1.0, 2.0) == pytest.approx(math.exp(-1) - math.exp(-2), rel=1e-14)
    assert UniformLaw().prob(0.6, 0.8) == pytest.approx(0.2, rel=1e-14)
    assert ParetoLaw(2.0).prob(1.0, 2.0) == pytest.approx(0.75, rel=1e-14)


@pytest.mark.parametrize("text, law", [
    ("uniform", UniformLaw()), ("exp:1", ExponentialLaw(1.0)), ("exp:2.5", ExponentialLaw(2.5)),
    ("pareto:3", ParetoLaw(3.0)),
])
def test_parse_law_round_trip(text, law):
    assert parse_law(text) == law
    assert parse_law(law.spec()) == law


@pytest.mark.parametrize("text", ["gauss", "exp:-1", "pareto:x", "uniform:2"])
def test_parse_law_rejects(text):
    with pytest.raises(ParameterError):
        parse_law(text)
