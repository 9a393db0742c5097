import math

import numpy as np
import pytest

from grflab import (DegenerateZero, Monomial, PositiveOnBox, Scaled,
                    SupNormBelow, ZeroCountEquals, empirical_sup_mean,
                    estimate_probability, gaussian_ratio, kl_field, limit_study,
                    normal_cdf, unit_interval)
from grflab._accel import HAVE_NUMBA, numba_enabled, set_numba_enabled
from grflab.mc import _zero_count_rows

ONE = Monomial((0,), (1.0,))
T = Monomial((1,), (1.0,))
BOX = unit_interval()


def test_constant_field_sup_norm_probability():
    f = kl_field([ONE])
    est = estimate_probability(f, SupNormBelow(BOX, 0, 1.0), 20000, 0)
    want = 2.0 * normal_cdf(1.0) - 1.0
    assert abs(est.p_hat - want) <= 4.0 * est.stderr
    assert 0.0 <= est.ci95[0] <= est.ci95[1] <= 1.0


def test_empty_field_probability_one():
    f = kl_field([], m=1, k=1)
    est = estimate_probability(f, SupNormBelow(BOX, 0, 0.5), 500, 0)
    assert est.p_hat == 1.0 and est.stderr == 0.0 and est.ci95 == (1.0, 1.0)


def test_zero_count_quarter():
    # a + b t has a zero in [0,1] iff a and a+b have opposite signs;
    # for iid standard normals that probability is exactly 1/4
    f = kl_field([ONE, T])
    est = estimate_probability(f, ZeroCountEquals(BOX, 1), 20000, 0)
    oracle = 2.0 * (0.25 - math.asin(1.0 / math.sqrt(2.0)) / (2.0 * math.pi))
    assert abs(oracle - 0.25) < 1e-15
    assert abs(est.p_hat - 0.25) <= 4.0 * est.stderr


def test_zero_count_scan_semantics():
    vals = np.array([
        [1.0, -1.0, 1.0, 1.0],   # two strict sign changes
        [1.0, 0.0, 1.0, 1.0],    # exact zero, no double count
        [1.0, 0.0, -1.0, -1.0],  # crossing through an exact zero
        [0.0, 0.0, 1.0, 1.0],    # two exact zeros
        [2.0, 1.0, 3.0, 4.0],    # no zeros
    ])
    want = np.array([2, 1, 1, 2, 0])
    assert np.array_equal(_zero_count_rows(vals), want)
    if HAVE_NUMBA:
        state = numba_enabled()
        try:
            set_numba_enabled(True)
            a = _zero_count_rows(vals)
            set_numba_enabled(False)
            b = _zero_count_rows(vals)
        finally:
            set_numba_enabled(state)
        assert np.array_equal(a, b)


def test_positive_on_box():
    f = kl_field([ONE])
    est = estimate_probability(f, PositiveOnBox(BOX), 20000, 1)
    assert abs(est.p_hat - 0.5) <= 4.0 * est.stderr


def test_degenerate_zero_constant_field():
    # constant paths have zero derivative everywhere, so the event reduces
    # to |xi| < value_eps
    f = kl_field([ONE])
    eps = 0.1
    est = estimate_probability(f, DegenerateZero(BOX, eps, 1e-9), 20000, 2)
    want = 2.0 * normal_cdf(eps) - 1.0
    assert abs(est.p_hat - want) <= 4.0 * est.stderr


def test_requires_minimum_samples():
    with pytest.raises(ValueError):
        estimate_probability(kl_field([ONE]), SupNormBelow(BOX, 0, 1.0), 50, 0)


def test_reproducibility_bitwise():
    f = kl_field([ONE, T])
    e1 = estimate_probability(f, SupNormBelow(BOX, 0, 1.0), 2000, 7)
    e2 = estimate_probability(f, SupNormBelow(BOX, 0, 1.0), 2000, 7)
    assert e1 == e2


def test_seed_independence():
    f = kl_field([ONE, T])
    ests = [estimate_probability(f, SupNormBelow(BOX, 0, 1.5), 5000, s)
            for s in range(5)]
    for i in range(5):
        for j in range(i + 1, 5):
            combined = math.hypot(ests[i].stderr, ests[j].stderr)
            assert abs(ests[i].p_hat - ests[j].p_hat) <= 4.0 * combined


def test_monotone_in_threshold():
    f = kl_field([ONE, T])
    ps = [estimate_probability(f, SupNormBelow(BOX, 0, c), 2000, 3).p_hat
          for c in (0.5, 1.0, 2.0, 4.0)]
    assert ps == sorted(ps)


def test_empirical_sup_mean_half_normal():
    f = kl_field([ONE])
    est = empirical_sup_mean(f, BOX, 0, 20000, 0)
    want = math.sqrt(2.0 / math.pi)
    assert abs(est.p_hat - want) <= 4.0 * est.stderr
    empty = kl_field([], m=1, k=1)
    est0 = empirical_sup_mean(empty, BOX, 0, 200, 0)
    assert est0.p_hat == 0.0


def test_gaussian_ratio_constant_field():
    f = kl_field([ONE])
    res = gaussian_ratio(f, BOX, 1, 20000, 0)
    assert not res.zero_denominator
    assert res.denominator == 1.0
    assert abs(res.ratio - math.sqrt(2.0 / math.pi)) < 0.02
    empty = kl_field([], m=1, k=1)
    res0 = gaussian_ratio(empty, BOX, 1, 200, 0)
    assert res0.zero_denominator and res0.ratio == 0.0
    with pytest.raises(ValueError):
        gaussian_ratio(f, BOX, 0)


def test_limit_study_perturbation_family():
    fields = [kl_field([ONE, Scaled(T, 1.0 / d)]) for d in (1, 4, 16)]
    limit = kl_field([ONE])
    rows = limit_study(fields, limit, SupNormBelow(BOX, 0, 1.0), BOX, 0,
                       n_samples=5000, seed=0)
    dists = [r.kernel_distance for r in rows[:-1]]
    assert all(d1 > d2 for d1, d2 in zip(dists, dists[1:]))
    assert np.allclose(dists, [1.0, 1.0 / 16, 1.0 / 256])
    assert rows[-1].kernel_distance == 0.0 and rows[-1].is_limit
    want = 2.0 * normal_cdf(1.0) - 1.0
    assert abs(rows[-1].estimate.p_hat - want) <= 4.0 * rows[-1].estimate.stderr


def test_limit_study_constant_sequence():
    f = kl_field([ONE, T])
    rows = limit_study([f, f, f], f, SupNormBelow(BOX, 0, 1.0), BOX, 0,
                       n_samples=1000, seed=0)
    assert all(r.kernel_distance == 0.0 for r in rows)
    assert len({r.estimate.p_hat for r in rows}) == 1  # shared seed, same law


def test_limit_study_counterexample_failure_mode():
    # kernels converge to zero at order (0,0) while the small-sup-norm
    # probabilities head to 0, not to the limit field's value 1
    from grflab import counterexample as cx

    ns = (2, 3, 5)
    fields = [cx.build_X_n(cx.config(n)) for n in ns]
    limit = kl_field([], m=1, k=1)
    # resolution 1800 = lcm of 2 n^2 over n in {2, 3, 5}: every bump center
    # of every field is a grid point
    common = unit_interval(1800)
    event = SupNormBelow(common, 0, 1.0)
    rows = limit_study(fields, limit, event, common, 0, n_samples=2000,
                       seed=0, distance_order=0)
    dists = [r.kernel_distance for r in rows[:-1]]
    assert all(d1 > d2 for d1, d2 in zip(dists, dists[1:]))
    probs = [r.estimate.p_hat for r in rows[:-1]]
    assert all(p1 > p2 for p1, p2 in zip(probs, probs[1:]))
    assert probs[-1] < 0.05
    assert rows[-1].estimate.p_hat == 1.0  # the limit field is identically zero
