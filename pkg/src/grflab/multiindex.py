"""Multi-indices for mixed partial derivatives.

A multi-index is a tuple of non-negative integers, one entry per domain
axis.  Enumeration and comparisons use the graded lexicographic order:
indices are sorted by total order |alpha| first, lexicographically within
each total order.
"""

from __future__ import annotations

from math import comb
from typing import Iterator, Sequence

MultiIndex = tuple  # tuple of non-negative ints, length = domain dimension


def order(alpha: Sequence[int]) -> int:
    """Total order |alpha|."""
    return int(sum(alpha))


def validate(alpha: Sequence[int], m: int) -> MultiIndex:
    """Coerce to a tuple and check length and non-negativity."""
    a = tuple(int(x) for x in alpha)
    if len(a) != m:
        raise ValueError(f"multi-index {a} has length {len(a)}, expected {m}")
    if any(x < 0 for x in a):
        raise ValueError(f"multi-index entries must be non-negative, got {a}")
    return a


def graded_lex_key(alpha: Sequence[int]) -> tuple:
    """Sort key realizing the graded-lex total order."""
    a = tuple(alpha)
    return (order(a), a)


def _compositions(total: int, parts: int) -> Iterator[MultiIndex]:
    # all tuples of `parts` non-negative ints summing to `total`, lex ascending
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def multi_indices(m: int, r: int) -> list[MultiIndex]:
    """All multi-indices of length ``m`` with |alpha| <= r, graded-lex sorted."""
    if m < 1:
        raise ValueError("dimension m must be >= 1")
    if r < 0:
        raise ValueError("order r must be >= 0")
    out: list[MultiIndex] = []
    for d in range(r + 1):
        out.extend(sorted(_compositions(d, m)))
    return out


def count_multi_indices(m: int, r: int) -> int:
    """Cardinality of {alpha : |alpha| <= r}, equal to C(m+r, r)."""
    return comb(m + r, r)
