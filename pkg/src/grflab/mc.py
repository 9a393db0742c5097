"""Monte Carlo estimation of path-event probabilities and sup-norm means.

Events are deterministic predicates of a sample path restricted to a box
grid.  Estimation derives one random stream per sample index, so estimates
are reproducible bit-for-bit from ``(seed, n_samples, event)`` and work can
be chunked or parallelized over indices without changing the result.
Indicator counts are integer sums (exact, order independent); real-valued
statistics are reduced with exact compensated summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ._accel import njit, numba_enabled
from .basis import Box
from .field import (KLField, apply_design, batch_seminorms, box_design,
                    sample_batch_coeffs)
from .kernel import KernelSeminormSpec, kernel_distance, kernel_of, kernel_seminorm
from .rng import normal_cdf, normal_quantile  # noqa: F401  (re-exported API)

_CHUNK_ENTRIES = 4_000_000


# ---------------------------------------------------------------------------
# events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupNormBelow:
    """Sup of all partials of order <= ``order`` on the grid stays below ``threshold``."""

    box: Box
    order: int
    threshold: float


@dataclass(frozen=True)
class ZeroCountEquals:
    """The path (m = k = 1) has exactly ``count`` zeros along the grid.

    Zeros are counted as strict sign changes between adjacent grid values;
    a value that is exactly zero counts as one zero and resets the scan, so
    a crossing through it is not double counted.  Exact grid zeros form a
    measure-zero event for nondegenerate fields.
    """

    box: Box
    count: int


@dataclass(frozen=True)
class PositiveOnBox:
    """Every component at every grid point is strictly positive."""

    box: Box


@dataclass(frozen=True)
class DegenerateZero:
    """Some grid point (m = k = 1) has |f| < value_eps and |f'| < deriv_eps.

    Empirical diagnostic for near-degenerate zeros; the complement of the
    regularity that a nondegeneracy certificate guarantees almost surely.
    """

    box: Box
    value_eps: float
    deriv_eps: float


EventSpec = Union[SupNormBelow, ZeroCountEquals, PositiveOnBox, DegenerateZero]


def _check_event(event: EventSpec, field: KLField) -> None:
    if event.box.m != field.m:
        raise ValueError("event box dimension does not match the field")
    if isinstance(event, (ZeroCountEquals, DegenerateZero)):
        if field.m != 1 or field.k != 1:
            raise ValueError("zero-count events need m = 1, k = 1")


@njit(cache=True)
def _zero_count_nb(vals, out):
    rows, cols = vals.shape
    for s in range(rows):
        count = 0
        last = 0
        for g in range(cols):
            v = vals[s, g]
            if v == 0.0:
                count += 1
                last = 0
            elif v > 0.0:
                if last < 0:
                    count += 1
                last = 1
            else:
                if last > 0:
                    count += 1
                last = -1
        out[s] = count


def _zero_count_rows(vals: np.ndarray) -> np.ndarray:
    if numba_enabled():
        out = np.empty(vals.shape[0], dtype=np.int64)
        _zero_count_nb(vals, out)
        return out
    sign = np.sign(vals)
    out = np.empty(vals.shape[0], dtype=np.int64)
    has_zero = (sign == 0.0).any(axis=1)
    clean = ~has_zero
    if clean.any():
        s = sign[clean]
        out[clean] = np.sum(s[:, :-1] * s[:, 1:] < 0.0, axis=1)
    for idx in np.nonzero(has_zero)[0]:
        count = 0
        last = 0
        for v in vals[idx]:
            if v == 0.0:
                count += 1
                last = 0
            elif v > 0.0:
                if last < 0:
                    count += 1
                last = 1
            else:
                if last > 0:
                    count += 1
                last = -1
        out[idx] = count
    return out


def _indicator_batch(event: EventSpec, field: KLField, coeffs: np.ndarray) -> np.ndarray:
    if isinstance(event, SupNormBelow):
        sups = batch_seminorms(field, coeffs, event.box, event.order)
        return sups < event.threshold
    if isinstance(event, ZeroCountEquals):
        vals = apply_design(coeffs, box_design(field, event.box, (0,)))
        return _zero_count_rows(vals) == event.count
    if isinstance(event, PositiveOnBox):
        vals = apply_design(coeffs, box_design(field, event.box, (0,) * field.m))
        if vals.shape[1] == 0:
            return np.zeros(coeffs.shape[0], dtype=bool)
        return np.min(vals, axis=1) > 0.0
    if isinstance(event, DegenerateZero):
        v0 = apply_design(coeffs, box_design(field, event.box, (0,)))
        v1 = apply_design(coeffs, box_design(field, event.box, (1,)))
        hit = (np.abs(v0) < event.value_eps) & (np.abs(v1) < event.deriv_eps)
        return hit.any(axis=1)
    raise TypeError(f"unknown event {event!r}")


# ---------------------------------------------------------------------------
# estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCEstimate:
    """Estimate with normal-approximation 95% confidence interval."""

    p_hat: float
    stderr: float
    n_samples: int
    seed: int
    ci95: tuple


def _indicator_estimate(count: int, n: int, seed: int) -> MCEstimate:
    p = count / n
    se = math.sqrt(p * (1.0 - p) / n)
    lo = max(0.0, p - 1.96 * se)
    hi = min(1.0, p + 1.96 * se)
    return MCEstimate(p, se, n, seed, (lo, hi))


def _mean_estimate(values: np.ndarray, seed: int) -> MCEstimate:
    n = values.shape[0]
    mean = math.fsum(values) / n
    if n > 1:
        var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    return MCEstimate(mean, se, n, seed, (mean - 1.96 * se, mean + 1.96 * se))


def _chunk_size(field: KLField, b: Box) -> int:
    per_sample = max(1, b.n_grid_points * field.k + field.size)
    return max(1, _CHUNK_ENTRIES // per_sample)


def estimate_probability(field: KLField, event: EventSpec, n_samples: int = 20000,
                         seed: int = 0) -> MCEstimate:
    """Probability of ``event`` under the field's law, by direct simulation.

    Sample ``i`` always uses stream ``(seed, i)``, so the estimate does not
    depend on chunking and repeated runs are bit-identical.
    """
    if n_samples < 100:
        raise ValueError("need n_samples >= 100")
    _check_event(event, field)
    chunk = _chunk_size(field, event.box)
    count = 0
    for start in range(0, n_samples, chunk):
        idx = np.arange(start, min(start + chunk, n_samples))
        coeffs = sample_batch_coeffs(field, seed, idx)
        count += int(np.count_nonzero(_indicator_batch(event, field, coeffs)))
    return _indicator_estimate(count, n_samples, seed)


def empirical_sup_mean(field: KLField, b: Box, r: int, n_samples: int = 20000,
                       seed: int = 0) -> MCEstimate:
    """Monte Carlo mean of the order-r grid sup-norm of sample paths."""
    if n_samples < 2:
        raise ValueError("need n_samples >= 2")
    chunk = _chunk_size(field, b)
    parts = []
    for start in range(0, n_samples, chunk):
        idx = np.arange(start, min(start + chunk, n_samples))
        coeffs = sample_batch_coeffs(field, seed, idx)
        parts.append(batch_seminorms(field, coeffs, b, r))
    return _mean_estimate(np.concatenate(parts), seed)


@dataclass(frozen=True)
class GaussianRatio:
    """Ratio E||X||_(r-1) / sqrt(||K||_(r,r)) behind the Gaussian sup bound.

    The bound says the ratio is controlled by a constant depending only on
    the box, the order and the output dimension; ``zero_denominator`` flags
    fields whose kernel seminorm vanishes (ratio reported as 0).
    """

    ratio: float
    numerator: MCEstimate
    denominator: float
    zero_denominator: bool


def gaussian_ratio(field: KLField, b: Box, r: int, n_samples: int = 20000,
                   seed: int = 0) -> GaussianRatio:
    if r < 1:
        raise ValueError("need r >= 1")
    num = empirical_sup_mean(field, b, r - 1, n_samples, seed)
    denom_sq = kernel_seminorm(kernel_of(field), KernelSeminormSpec(b, r))
    if denom_sq <= 0.0:
        return GaussianRatio(0.0, num, 0.0, True)
    denom = math.sqrt(denom_sq)
    return GaussianRatio(num.p_hat / denom, num, denom, False)


@dataclass(frozen=True)
class LimitStudyRow:
    label: str
    kernel_distance: float
    estimate: MCEstimate
    is_limit: bool


def limit_study(fields: Sequence[KLField], limit_field: KLField, event: EventSpec,
                b: Box, r: int, n_samples: int = 20000, seed: int = 0,
                distance_order: int | None = None) -> list[LimitStudyRow]:
    """Kernel distance to the limit versus event probability, per field.

    Distances are evaluated at derivative order ``r + 2`` (the order whose
    convergence guarantees convergence of order-r event probabilities),
    overridable via ``distance_order`` to exhibit weaker-order convergence.
    All rows share the same seed (common random numbers), plus one row for
    the limit field itself.

    The event threshold is the caller's responsibility: it must be chosen
    so the limit law puts no mass on the event boundary (for sup-norm
    events any positive threshold works for continuous laws).
    """
    order = r + 2 if distance_order is None else distance_order
    spec = KernelSeminormSpec(b, order)
    k_limit = kernel_of(limit_field)
    rows = []
    for i, f in enumerate(fields):
        dist = kernel_distance(kernel_of(f), k_limit, spec)
        rows.append(LimitStudyRow(f"field_{i}", dist,
                                  estimate_probability(f, event, n_samples, seed), False))
    rows.append(LimitStudyRow("limit", 0.0,
                              estimate_probability(limit_field, event, n_samples, seed), True))
    return rows
