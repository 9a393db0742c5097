import numpy as np
import pytest

from grflab import normal_cdf


def bisect_normal_quantile(u: float) -> float:
    """Independent quantile oracle: bisection on the normal CDF."""
    lo, hi = -12.0, 12.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.fixture
def rng_np():
    return np.random.default_rng(20240813)
