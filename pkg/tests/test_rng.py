import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grflab import DomainError, RandomStream, normal_cdf, normal_quantile
from grflab._accel import HAVE_NUMBA, numba_enabled, set_numba_enabled
from grflab.rng import normal_matrix, uniform_matrix

from conftest import bisect_normal_quantile


def test_stream_determinism_bitwise():
    a = RandomStream(42, 7).normals(64)
    b = RandomStream(42, 7).normals(64)
    assert np.array_equal(a, b)


def test_distinct_indices_differ():
    a = RandomStream(42, 0).uniforms(32)
    b = RandomStream(42, 1).uniforms(32)
    assert not np.array_equal(a, b)


def test_counter_continuation_matches_one_shot():
    s = RandomStream(5, 3)
    first = s.uniforms(3)
    second = s.uniforms(4)
    whole = RandomStream(5, 3).uniforms(7)
    assert np.array_equal(np.concatenate([first, second]), whole)


def test_uniform_matrix_matches_streams():
    mat = uniform_matrix(9, np.arange(5), 11)
    for i in range(5):
        assert np.array_equal(mat[i], RandomStream(9, i).uniforms(11))


def test_uniforms_open_interval():
    u = uniform_matrix(0, np.arange(100), 500)
    assert np.all(u > 0.0) and np.all(u < 1.0)


def test_derive():
    s = RandomStream(1, 0)
    d = s.derive(17)
    assert (d.seed, d.index, d.counter) == (1, 17, 0)
    assert np.array_equal(d.uniforms(4), RandomStream(1, 17).uniforms(4))


def test_normal_cdf_values():
    assert normal_cdf(0.0) == 0.5
    assert abs(normal_cdf(1.2815515655446004) - 0.9) < 1e-12
    for x in (-3.2, -0.7, 0.4, 2.9):
        assert abs(normal_cdf(-x) - (1.0 - normal_cdf(x))) < 1e-15


def test_normal_quantile_against_bisection_oracle():
    for u in (0.001, 0.02, 0.25, 0.5, 0.75, 0.9, 0.995, 0.9999):
        assert abs(normal_quantile(u) - bisect_normal_quantile(u)) < 1e-10


def test_normal_quantile_frozen_values():
    assert normal_quantile(0.5) == 0.0
    assert abs(normal_quantile(0.9) - 1.2815515655446004) < 1e-9
    assert abs(normal_quantile(0.995) - 2.5758293035489004) < 1e-9


def test_normal_quantile_domain_error():
    for bad in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(DomainError):
            normal_quantile(bad)
    with pytest.raises(DomainError):
        normal_quantile(np.array([0.5, 1.0]))


def test_quantile_cdf_round_trip():
    xs = np.linspace(-6.0, 6.0, 241)
    worst = max(abs(normal_quantile(normal_cdf(float(x))) - x) for x in xs)
    assert worst <= 1e-8


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=1e-12, max_value=1.0 - 1e-12))
def test_quantile_inverts_cdf_property(u):
    assert abs(normal_cdf(normal_quantile(u)) - u) < 1e-11


def test_normal_moments():
    z = normal_matrix(2024, np.arange(200), 500)
    n = z.size
    assert abs(z.mean()) < 5.0 / np.sqrt(n)
    assert abs(z.var() - 1.0) < 5.0 * np.sqrt(2.0 / n)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_paths_agree():
    state = numba_enabled()
    try:
        set_numba_enabled(True)
        u1 = uniform_matrix(3, np.arange(20), 64)
        z1 = normal_matrix(3, np.arange(20), 64)
        set_numba_enabled(False)
        u2 = uniform_matrix(3, np.arange(20), 64)
        z2 = normal_matrix(3, np.arange(20), 64)
    finally:
        set_numba_enabled(state)
    assert np.array_equal(u1, u2)  # integer pipeline: bit identical
    assert np.max(np.abs(z1 - z2)) < 1e-12  # erfc providers may differ by ulps
