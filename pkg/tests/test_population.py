import bisect

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evoflow import ExponentialLaw, ParameterError, Population
from evoflow.population import FREE_HEAD


def make(values, law=None):
    pop = Population(law)
    for v in values:
        pop.insert(v)
    return pop


def test_count_in_examples():
    pop = make([0.3, 0.55, 0.7, 0.9])
    assert pop.count_in(0.5, 0.8) == 2
    assert Population().count_in(0.2, 0.9) == 0
    assert pop.count_in(0.55, 0.55) == 0
    with pytest.raises(ParameterError):
        pop.count_in(0.8, 0.5)


def test_open_interval_excludes_endpoints():
    pop = make([0.25, 0.5, 0.75])
    assert pop.count_in(0.25, 0.75) == 1
    assert pop.count_in(0.0, 1.0) == 3


def test_min_and_remove_min():
    pop = make([0.7, 0.3, 0.9])
    assert pop.min() == 0.3
    assert pop.remove_min() == 0.3
    assert pop.remove_min() == 0.7
    assert pop.size() == 1
    assert Population().min() is None
    with pytest.raises(IndexError):
        Population().remove_min()


def test_nan_rejected():
    with pytest.raises(ValueError):
        Population().insert(float("nan"))


def test_ties_remove_oldest_first():
    pop = Population()
    pop.insert(0.5)          # slot 0
    pop.insert(0.5)          # slot 1
    pop.insert(0.5)          # slot 2
    pop.remove_min()
    assert pop.meta[FREE_HEAD] == 0
    pop.remove_min()
    assert pop.meta[FREE_HEAD] == 1


def test_ties_survive_rebucketing():
    pop = Population()
    pop.insert(0.5)
    for v in np.random.default_rng(3).random(5000):
        pop.insert(v)
    pop.insert(0.5)
    assert pop.buckets > 64
    while pop.min() < 0.5:
        pop.remove_min()
    pop.remove_min()
    assert pop.meta[FREE_HEAD] == 0


def _reference_workload(seed, n_ops, law=None, p_insert=0.6):
    rng = np.random.default_rng(seed)
    pop, ref = Population(law), []
    sample = (lambda: float(rng.exponential())) if law is not None else (lambda: float(rng.random()))
    for i in range(n_ops):
        if rng.random() < p_insert:
            x = sample()
            pop.insert(x)
            bisect.insort(ref, x)
        elif ref:
            assert pop.remove_min() == ref.pop(0)
        assert pop.size() == len(ref)
        assert pop.min() == (ref[0] if ref else None)
        if i % 250 == 0:
            a, b = sorted(rng.random(2) * (3.0 if law is not None else 1.0))
            assert pop.count_in(a, b) == sum(a < v < b for v in ref)
    np.testing.assert_array_equal(pop.values(), np.array(ref))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_matches_sorted_list_reference(seed):
    _reference_workload(seed, 10_000)


def test_matches_reference_under_exponential_bucketing():
    _reference_workload(7, 10_000, law=ExponentialLaw(1.0))


def test_matches_reference_when_growing_fast():
    _reference_workload(11, 10_000, p_insert=0.95)


grid_values = st.lists(st.sampled_from([0.1, 0.2, 0.25, 0.5, 0.5, 0.75, 0.9]), max_size=60)


@given(grid_values, st.sampled_from([0.1, 0.25, 0.5, 0.75]))
def test_count_in_additive_with_atoms(values, mid):
    pop = make(values)
    a, c = 0.0, 1.0
    assert pop.count_in(a, c) == pop.count_in(a, mid) + pop.count_in(mid, c) + pop.multiplicity(mid)


@given(st.lists(st.floats(min_value=-5, max_value=5, allow_nan=False), max_size=200),
       st.floats(min_value=-6, max_value=6), st.floats(min_value=-6, max_value=6))
@settings(max_examples=200)
def test_count_in_matches_brute_force_any_floats(values, a, b):
    a, b = min(a, b), max(a, b)
    pop = make(values)
    assert pop.count_in(a, b) == sum(a < v < b for v in values)
    assert pop.count_lt(b) == sum(v < b for v in values)
    assert pop.count_le(a) == sum(v <= a for v in values)


@given(st.lists(st.tuples(st.booleans(), st.floats(min_value=0, max_value=1, exclude_max=True)), max_size=300))
def test_size_counts_inserts_minus_removals(ops):
    pop = Population()
    inserted = removed = 0
    for is_insert, x in ops:
        if is_insert:
            pop.insert(x)
            inserted += 1
        elif pop.size():
            pop.remove_min()
            removed += 1
    assert pop.size() == inserted - removed


def test_rebucket_preserves_contents():
    rng = np.random.default_rng(5)
    xs = rng.random(50_000)
    pop = make(xs)
    assert pop.buckets >= 1024
    np.testing.assert_array_equal(pop.values(), np.sort(xs))
    assert pop.count_in(0.25, 0.5) == np.count_nonzero((xs > 0.25) & (xs < 0.5))
