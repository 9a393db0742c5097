"""Jets of sample paths, jet covariance matrices, and nondegeneracy scans.

The jet of order ``r`` at a point collects all partial derivatives up to
order ``r`` of every output component.  For a Gaussian field the jet at a
fixed point is a Gaussian vector whose covariance matrix has entries
``d_(alpha,beta) K(p, p)``; that matrix having maximal rank is the
checkable certificate that the jet has full support, which is the standing
hypothesis for almost-sure transversality of the field's jet to any fixed
submanifold of jet space.  Rank is decided by the spectral ratio
min/max eigenvalue against a relative threshold, so the verdict is
invariant under rescaling the field.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .basis import Box, grid_points
from .field import SamplePath, eval_sample
from .kernel import CovarianceKernel, eval_kernel_deriv
from .linalg import eigh_jacobi
from .multiindex import multi_indices


def jet_dimension(m: int, k: int, r: int) -> int:
    """Dimension k * C(m+r, r) of the order-r jet space."""
    if m < 1 or k < 1 or r < 0:
        raise ValueError("need m >= 1, k >= 1, r >= 0")
    return k * comb(m + r, r)


@dataclass(frozen=True)
class Jet:
    """Jet values ordered output-component-major, then graded-lex in alpha."""

    point: tuple
    order: int
    values: np.ndarray


@dataclass(frozen=True)
class JetCovariance:
    point: tuple
    order: int
    matrix: np.ndarray


def jet_eval(path: SamplePath, p, r: int) -> Jet:
    """All partials of the path up to order ``r`` at ``p``, exactly."""
    field = path.field
    pt = np.atleast_1d(np.asarray(p, dtype=np.float64))
    alphas = multi_indices(field.m, r)
    values = np.empty(field.k * len(alphas))
    for a_idx, alpha in enumerate(alphas):
        v = eval_sample(path, pt, alpha)
        for j in range(field.k):
            values[j * len(alphas) + a_idx] = v[j]
    return Jet(tuple(pt), r, values)


def jet_covariance(K: CovarianceKernel, p, r: int) -> JetCovariance:
    """Covariance matrix of the order-r jet at ``p``: d_(alpha,beta) K(p,p)."""
    pt = np.atleast_1d(np.asarray(p, dtype=np.float64))
    alphas = multi_indices(K.m, r)
    n_a = len(alphas)
    dim = K.k * n_a
    mat = np.empty((dim, dim))
    for ai, a in enumerate(alphas):
        for bi, b in enumerate(alphas):
            if bi < ai:
                continue
            block = eval_kernel_deriv(K, pt, pt, a, b)
            for j in range(K.k):
                for l in range(K.k):
                    mat[j * n_a + ai, l * n_a + bi] = block[j, l]
                    mat[l * n_a + bi, j * n_a + ai] = block[j, l]
    return JetCovariance(tuple(pt), r, 0.5 * (mat + mat.T))


@dataclass(frozen=True)
class NondegeneracyCertificate:
    point: tuple
    order: int
    nondegenerate: bool
    min_singular_ratio: float
    jet_dim: int
    rank_estimate: int

    def to_json_dict(self) -> dict:
        return {
            "point": list(self.point),
            "ratio": self.min_singular_ratio,
            "pass": self.nondegenerate,
            "jet_dim": self.jet_dim,
            "rank_estimate": self.rank_estimate,
        }


def nondegeneracy_certificate(K: CovarianceKernel, p, r: int,
                              rel_tol: float = 1e-9) -> NondegeneracyCertificate:
    """Spectral-ratio test that the jet covariance at ``p`` has maximal rank.

    A pass at every point certifies that the field's order-r jet is almost
    surely transverse to any fixed submanifold of jet space.
    """
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    cov = jet_covariance(K, p, r)
    w, _ = eigh_jacobi(cov.matrix)
    wmax = float(w[-1])
    if wmax <= 0.0:
        ratio = 0.0
        rank = 0
    else:
        ratio = float(w[0]) / wmax
        rank = int(np.sum(w > rel_tol * wmax))
    return NondegeneracyCertificate(cov.point, r, ratio > rel_tol, ratio,
                                    cov.matrix.shape[0], rank)


@dataclass(frozen=True)
class NondegeneracyScan:
    all_pass: bool
    worst_point: tuple
    worst_ratio: float
    n_points: int
    n_failures: int


def scan_nondegeneracy(K: CovarianceKernel, b: Box, r: int,
                       rel_tol: float = 1e-9) -> NondegeneracyScan:
    """Certificate at every grid point; reports the worst spectral ratio.

    The reduction is deterministic: the minimum ratio wins, ties broken by
    the first grid index in row-major order.
    """
    pts = grid_points(b)
    worst_ratio = np.inf
    worst_point: tuple = ()
    failures = 0
    all_pass = True
    for row in pts:
        cert = nondegeneracy_certificate(K, row, r, rel_tol)
        if not cert.nondegenerate:
            failures += 1
            all_pass = False
        if cert.min_singular_ratio < worst_ratio:
            worst_ratio = cert.min_singular_ratio
            worst_point = cert.point
    return NondegeneracyScan(all_pass, worst_point, float(worst_ratio),
                             pts.shape[0], failures)
