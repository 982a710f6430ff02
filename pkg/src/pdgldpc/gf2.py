"""GF(2) linear algebra on int bitsets (bit ``c`` of a row is column ``c``)."""

from __future__ import annotations

from typing import Iterable, List, Sequence, Tuple

import numpy as np


def rows_to_bitsets(mat: np.ndarray) -> List[int]:
    """Pack each row of a 0/1 matrix into a Python int."""
    mat = np.asarray(mat)
    out = []
    for row in mat:
        v = 0
        for c in np.flatnonzero(row):
            v |= 1 << int(c)
        out.append(v)
    return out


def select_columns(rows: Sequence[int], cols: Sequence[int]) -> List[int]:
    """Restrict bitset rows to ``cols``; column ``cols[k]`` becomes bit ``k``."""
    out = []
    for r in rows:
        v = 0
        for k, c in enumerate(cols):
            if (r >> c) & 1:
                v |= 1 << k
        out.append(v)
    return out


def rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of a list of bitset rows."""
    basis: List[int] = []  # kept with distinct leading bits
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
            basis.sort(reverse=True)
    return len(basis)


def in_rowspan(vec: int, rows: Iterable[int]) -> bool:
    basis: List[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
            basis.sort(reverse=True)
    for b in basis:
        vec = min(vec, vec ^ b)
    return vec == 0


def rref(rows: Sequence[int], n_cols: int) -> Tuple[List[int], List[int]]:
    """Reduced row echelon form with column pivoting from column 0 upward.

    Returns ``(reduced_rows, pivot_cols)``; only the nonzero rows are kept and
    ``reduced_rows[k]`` has its pivot at ``pivot_cols[k]``.
    """
    work = [r for r in rows]
    pivots: List[int] = []
    top = 0
    for col in range(n_cols):
        bit = 1 << col
        p = next((k for k in range(top, len(work)) if work[k] & bit), None)
        if p is None:
            continue
        work[top], work[p] = work[p], work[top]
        for k in range(len(work)):
            if k != top and work[k] & bit:
                work[k] ^= work[top]
        pivots.append(col)
        top += 1
        if top == len(work):
            break
    return work[:top], pivots


def popcount(x: int) -> int:
    return bin(x).count("1")


__all__ = ["rows_to_bitsets", "select_columns", "rank", "in_rowspan", "rref", "popcount"]
