from math import comb

import pytest
from hypothesis import given, strategies as st

from grflab.multiindex import (count_multi_indices, graded_lex_key,
                               multi_indices, order, validate)


def test_enumeration_cardinality():
    for m in (1, 2, 3):
        for r in (0, 1, 2, 4):
            assert len(multi_indices(m, r)) == comb(m + r, r)
            assert count_multi_indices(m, r) == comb(m + r, r)


def test_graded_lex_is_sorted_and_strict():
    idx = multi_indices(3, 4)
    keys = [graded_lex_key(a) for a in idx]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)


def test_zero_index_first():
    assert multi_indices(2, 3)[0] == (0, 0)
    assert multi_indices(1, 2) == [(0,), (1,), (2,)]


def test_order_and_validate():
    assert order((2, 0, 1)) == 3
    assert validate([1, 2], 2) == (1, 2)
    with pytest.raises(ValueError):
        validate((1,), 2)
    with pytest.raises(ValueError):
        validate((-1, 0), 2)


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=2, max_size=8))
def test_graded_lex_total_order(alphas):
    # strict total order: sorting is stable and antisymmetric on distinct keys
    keys = sorted(set(map(graded_lex_key, alphas)))
    for a, b in zip(keys, keys[1:]):
        assert a < b


def test_lower_order_before_higher():
    for a in multi_indices(2, 3):
        for b in multi_indices(2, 3):
            if order(a) < order(b):
                assert graded_lex_key(a) < graded_lex_key(b)
