import numpy as np
import pytest

from grflab import IllConditionedError
from grflab._accel import HAVE_NUMBA, numba_enabled, set_numba_enabled
from grflab.linalg import eig_bounds, eigh_jacobi, solve_psd_pinv


def test_matches_lapack_oracle(rng_np):
    for n in (2, 5, 20, 40):
        a = rng_np.standard_normal((n, n))
        a = a + a.T
        w, v = eigh_jacobi(a)
        scale = max(1.0, np.abs(a).max())
        assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-11 * scale)
        assert np.allclose(v.T @ v, np.eye(n), atol=1e-12)
        assert np.allclose(v @ np.diag(w) @ v.T, a, atol=1e-11 * scale)


def test_eigenvalues_sorted(rng_np):
    a = rng_np.standard_normal((12, 12))
    a = a + a.T
    w, _ = eigh_jacobi(a)
    assert np.all(np.diff(w) >= 0)


def test_zero_and_empty():
    w, v = eigh_jacobi(np.zeros((3, 3)))
    assert np.array_equal(w, np.zeros(3))
    w, v = eigh_jacobi(np.zeros((0, 0)))
    assert w.size == 0


def test_diagonal_passthrough():
    w, _ = eigh_jacobi(np.diag([3.0, -1.0, 2.0]))
    assert np.array_equal(w, np.array([-1.0, 2.0, 3.0]))


def test_eig_bounds(rng_np):
    a = rng_np.standard_normal((8, 8))
    a = a @ a.T
    lo, hi = eig_bounds(a)
    w = np.linalg.eigvalsh(a)
    assert abs(lo - w[0]) < 1e-10 * w[-1] and abs(hi - w[-1]) < 1e-10 * w[-1]


def test_solve_psd_matches_direct(rng_np):
    b = rng_np.standard_normal((6, 6))
    a = b @ b.T + 0.5 * np.eye(6)
    rhs = rng_np.standard_normal(6)
    x = solve_psd_pinv(a, rhs)
    assert np.allclose(a @ x, rhs, atol=1e-10)


def test_solve_refuses_ill_conditioned():
    a = np.diag([1.0, 1e-14])
    with pytest.raises(IllConditionedError):
        solve_psd_pinv(a, np.ones(2))
    with pytest.raises(IllConditionedError):
        solve_psd_pinv(np.zeros((2, 2)), np.ones(2))


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_paths_agree(rng_np):
    a = rng_np.standard_normal((15, 15))
    a = a + a.T
    state = numba_enabled()
    try:
        set_numba_enabled(True)
        w1, v1 = eigh_jacobi(a)
        set_numba_enabled(False)
        w2, v2 = eigh_jacobi(a)
    finally:
        set_numba_enabled(state)
    assert np.array_equal(w1, w2)
    assert np.array_equal(v1, v2)
