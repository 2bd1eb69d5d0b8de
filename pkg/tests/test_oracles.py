import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from evoflow import (ParameterError, ResourceError, binomial_pmf, enumerate_l_paths, exact_l_pmf, geometric_pmf,
                     l_transition_probs, srw_survival, srw_survival_table)
from evoflow.oracles import binomial_pmf_table, geometric_pmf_table


def test_transition_examples():
    t = l_transition_probs(2 / 3)
    assert (t.up, t.stay, t.down, t.stay_at_zero) == pytest.approx((1 / 3, 1 / 3, 1 / 3, 2 / 3), abs=1e-15)
    t = l_transition_probs(3 / 4)
    assert (t.up, t.stay, t.down) == pytest.approx((1 / 4, 1 / 2, 1 / 4), abs=1e-15)
    with pytest.raises(ParameterError):
        l_transition_probs(0.5)


def test_exact_pmf_small_n():
    assert exact_l_pmf(2 / 3, 0)[0] == 1.0
    one = exact_l_pmf(2 / 3, 1)
    assert (one[0], one[1]) == pytest.approx((2 / 3, 1 / 3), abs=1e-15)
    two = exact_l_pmf(2 / 3, 2)
    assert (two[0], two[1], two[2]) == pytest.approx((5 / 9, 1 / 3, 1 / 9), abs=1e-15)


def test_enumeration_small_n():
    assert enumerate_l_paths(2 / 3, 0)[0] == 1.0
    assert enumerate_l_paths(2 / 3, 1)[1] == pytest.approx(1 / 3, abs=1e-15)
    two = enumerate_l_paths(2 / 3, 2)
    np.testing.assert_allclose(two.probs, [5 / 9, 1 / 3, 1 / 9], atol=1e-15)


@pytest.mark.parametrize("p", [0.55, 2 / 3, 0.9])
def test_sweep_matches_enumeration(p):
    for n in range(13):
        np.testing.assert_allclose(exact_l_pmf(p, n).probs, enumerate_l_paths(p, n).probs, rtol=0, atol=1e-12)


def test_enumeration_resource_limit():
    with pytest.raises(ResourceError):
        enumerate_l_paths(2 / 3, 17)


def test_pmf_normalised_and_truncation():
    full = exact_l_pmf(0.7, 200)
    assert full.mass() == pytest.approx(1.0, abs=1e-12)
    cut = exact_l_pmf(0.7, 200, cap=20)
    assert cut.mass() + cut.truncated == pytest.approx(1.0, abs=1e-12)
    assert cut.truncated > 0


def test_mean_grows_like_sqrt_n():
    for n in (256, 1024, 4096):
        ratio = exact_l_pmf(2 / 3, 4 * n).mean() / exact_l_pmf(2 / 3, n).mean()
        assert abs(ratio - 2.0) < 0.1


def _srw_survival_brute(n):
    count = 0
    for steps in itertools.product((-1, 1), repeat=n):
        pos = 1
        for s in steps:
            pos += s
            if pos == 0:
                break
        else:
            count += 1
    return Fraction(count, 2**n)


def test_srw_matches_brute_force():
    for n in range(0, 15):
        assert srw_survival(n) == pytest.approx(float(_srw_survival_brute(n)), abs=1e-15)


def test_srw_examples():
    assert srw_survival(1) == 0.5
    assert srw_survival(3) == 0.375
    assert srw_survival(2) == srw_survival(1)
    assert srw_survival(4) == srw_survival(3)


def test_srw_asymptotic():
    n = 10**4
    assert 0.98 <= srw_survival(n) * math.sqrt(math.pi * n / 2) <= 1.02


def test_srw_table_monotone():
    t = srw_survival_table(500)
    assert t[0] == 1.0 and np.all(np.diff(t) <= 1e-15)


def test_geometric_examples():
    assert geometric_pmf(1 / 3, 1) == pytest.approx(1 / 3)
    assert geometric_pmf(1 / 3, 2) == pytest.approx(2 / 9)
    tab = geometric_pmf_table(1 / 3, 200)
    assert tab.mean() == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(ParameterError):
        geometric_pmf(1 / 3, 0)


def test_binomial_examples():
    assert binomial_pmf(2, 2 / 3, 2) == pytest.approx(4 / 9)
    assert binomial_pmf(2, 2 / 3, 0) == pytest.approx(1 / 9)
    with pytest.raises(ParameterError):
        binomial_pmf(2, 2 / 3, 3)


@pytest.mark.parametrize("n, p", [(10, 0.3), (60, 2 / 3), (1000, 0.5)])
def test_binomial_normalised(n, p):
    assert binomial_pmf_table(n, p).mass() == pytest.approx(1.0, abs=1e-12)
    assert binomial_pmf_table(n, p).mean() == pytest.approx(n * p, rel=1e-10)
