import numpy as np
import pytest

from evoflow import ExponentialLaw, ParameterError, Ring, bs_run, bs_step, bs_threshold_estimate


def ring_with(values, seed=0):
    r = Ring(len(values), seed=seed)
    r.fitness[:] = values
    return r


def test_update_example():
    r = ring_with([0.9, 0.1, 0.8, 0.7])
    u = bs_step(r)
    assert u.argmin_index == 1 and set(u.replaced_indices) == {0, 1, 2}
    assert r.fitness[3] == 0.7


def test_three_sites_all_replaced():
    r = ring_with([0.2, 0.5, 0.9])
    before = r.fitness.copy()
    bs_step(r)
    assert np.all(r.fitness != before)


def test_tie_goes_to_lowest_index():
    u = bs_step(ring_with([0.5, 0.9, 0.5]))
    assert u.argmin_index == 0 and u.replaced_indices == (2, 0, 1)


def test_draw_order_left_site_right():
    r = Ring(5, seed=3)
    r.fitness[:] = [0.9, 0.8, 0.1, 0.7, 0.6]
    draws = r.stream.take(3)
    r2 = Ring(5, seed=3)
    r2.fitness[:] = [0.9, 0.8, 0.1, 0.7, 0.6]
    bs_step(r2)
    np.testing.assert_array_equal(r2.fitness[1:4], draws)


def test_update_locality():
    r = Ring(64, seed=1)
    for _ in range(500):
        before = r.fitness.copy()
        u = bs_step(r)
        changed = set(np.flatnonzero(before != r.fitness).tolist())
        assert changed <= set(u.replaced_indices)
        untouched = np.setdiff1d(np.arange(64), u.replaced_indices)
        np.testing.assert_array_equal(before[untouched], r.fitness[untouched])


def test_same_seed_same_argmins():
    a, b = Ring(32, seed=9), Ring(32, seed=9)
    assert [bs_step(a).argmin_index for _ in range(300)] == [bs_step(b).argmin_index for _ in range(300)]


def test_bulk_run_equals_single_steps():
    a, b = Ring(16, seed=4), Ring(16, seed=4)
    bs_run(a, 1000)
    for _ in range(1000):
        bs_step(b)
    np.testing.assert_array_equal(a.fitness, b.fitness)


def test_sampling_counts():
    assert len(bs_run(Ring(16), 50, burn_in=50)) == 0
    s = bs_run(Ring(16), 1000, burn_in=0, sample_every=1000)
    assert s.vectors.shape == (1, 16) and list(s.updates) == [1000]
    s = bs_run(Ring(8), 100, burn_in=10, sample_every=30)
    assert list(s.updates) == [40, 70, 100]
    with pytest.raises(ParameterError):
        bs_run(Ring(8), 10, burn_in=11)


def test_ring_needs_three_sites():
    with pytest.raises(ParameterError):
        Ring(2)


def test_threshold_estimator_examples():
    x = np.linspace(0.6, 1.0, 100_001)
    assert bs_threshold_estimate(x).moment == pytest.approx(0.6, abs=1e-9)
    assert bs_threshold_estimate(np.linspace(0, 1, 10_001)).moment == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ParameterError):
        bs_threshold_estimate(np.linspace(0, 1, 999))


def test_threshold_estimator_law_scale():
    law = ExponentialLaw(1.0)
    u = np.linspace(0.6, 1.0, 100_001)[:-1]
    est = bs_threshold_estimate(law.quantile(u), law)
    assert est.u_moment == pytest.approx(0.6, abs=1e-4)
    assert est.moment == pytest.approx(-np.log(0.4), rel=1e-3)


def test_short_ring_threshold_band():
    s = bs_run(Ring(64, seed=2), 300_000, burn_in=50_000, sample_every=64)
    assert 0.5 < bs_threshold_estimate(s).moment < 0.8
