import itertools

import numpy as np
from hypothesis import given, strategies as st

from pdgldpc import gf2


def dense_rank(M):
    M = M.copy() % 2
    r = 0
    for c in range(M.shape[1]):
        piv = [i for i in range(r, M.shape[0]) if M[i, c]]
        if not piv:
            continue
        M[[r, piv[0]]] = M[[piv[0], r]]
        for i in range(M.shape[0]):
            if i != r and M[i, c]:
                M[i] ^= M[r]
        r += 1
    return r


mats = st.integers(1, 8).flatmap(lambda m: st.integers(1, 10).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=m, max_size=m)))


@given(mats)
def test_rank_matches_dense_elimination(rows):
    M = np.array(rows, dtype=np.int64)
    assert gf2.rank(gf2.rows_to_bitsets(M)) == dense_rank(M)


@given(mats)
def test_rref_pivots_are_unit_columns(rows):
    M = np.array(rows, dtype=np.uint8)
    red, piv = gf2.rref(gf2.rows_to_bitsets(M), M.shape[1])
    assert len(piv) == len(red) == dense_rank(M.astype(np.int64))
    for k, p in enumerate(piv):
        col = [(r >> p) & 1 for r in red]
        assert col == [int(i == k) for i in range(len(red))]


def test_in_rowspan_exhaustive_small():
    rows = [0b011, 0b110]
    span = {0, 0b011, 0b110, 0b101}
    for v in range(8):
        assert gf2.in_rowspan(v, rows) == (v in span)


def test_select_columns_and_popcount():
    rows = gf2.rows_to_bitsets(np.array([[1, 0, 1, 1], [0, 1, 1, 0]]))
    sub = gf2.select_columns(rows, [2, 3])
    assert sub == [0b11, 0b01]
    assert gf2.popcount(0b1011) == 3
