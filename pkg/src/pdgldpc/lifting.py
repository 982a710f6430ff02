"""Copy-and-permute lifting of base matrices into sparse parity-check matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .protograph import BaseMatrix


class LiftingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LiftedPcm:
    """Binary sparse PCM with provenance of every row and column.

    ``col_origin[c]`` is the protograph column a lifted column copies;
    ``row_origin[r]`` the protograph row of an SPC row (-1 for GC rows) and
    ``row_block[r]`` the GC block id of a GC row (-1 otherwise).
    ``edge_list``/``edge_perms`` record the protograph edge copies
    ``(i, j)`` and, per copy, the permutation mapping column copy ``k`` of
    ``v_j`` to row copy ``perm[k]`` of ``c_i``; they are empty for matrices
    loaded without lifting history.
    """

    H: sp.csr_matrix
    col_origin: np.ndarray
    row_origin: np.ndarray
    row_block: np.ndarray
    N: int
    edge_list: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    edge_perms: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))

    def __post_init__(self):
        H = sp.csr_matrix(self.H, dtype=np.uint8)
        H.sort_indices()
        object.__setattr__(self, "H", H)
        for name in ("col_origin", "row_origin", "row_block", "edge_list", "edge_perms"):
            a = np.asarray(getattr(self, name), dtype=np.int64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.col_origin.shape != (H.shape[1],) or self.row_origin.shape != (H.shape[0],):
            raise LiftingError("origin maps do not match the matrix shape")
        if self.row_block.shape != (H.shape[0],):
            raise LiftingError("row block map does not match the matrix shape")
        if H.nnz and H.data.max() > 1:
            raise LiftingError("duplicate ones: permutations of parallel edges overlap")

    @property
    def rows(self) -> int:
        return self.H.shape[0]

    @property
    def cols(self) -> int:
        return self.H.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LiftedPcm):
            return NotImplemented
        return (self.H.shape == other.H.shape and (self.H != other.H).nnz == 0
                and np.array_equal(self.col_origin, other.col_origin)
                and np.array_equal(self.row_origin, other.row_origin)
                and np.array_equal(self.row_block, other.row_block) and self.N == other.N)

    def dense(self) -> np.ndarray:
        return self.H.toarray()

    def col_degrees(self) -> np.ndarray:
        return np.asarray(self.H.sum(axis=0)).ravel()

    def row_degrees(self) -> np.ndarray:
        return np.asarray(self.H.sum(axis=1)).ravel()


def _disjoint_perms(rng: np.random.Generator, m: int, N: int, max_draws: int = 10000) -> np.ndarray:
    perms = np.empty((m, N), dtype=np.int64)
    for p in range(m):
        for _ in range(max_draws):
            cand = rng.permutation(N)
            if not np.any(perms[:p] == cand[None, :]):
                perms[p] = cand
                break
        else:
            raise LiftingError(f"could not draw {m} disjoint permutations of size {N}")
    return perms


def lift(B: BaseMatrix, N: int, mu: int = 1, rng_seed: int = 0) -> LiftedPcm:
    """Lift ``B`` by ``N``: every edge copy becomes an ``N x N`` permutation.

    Parallel edges get pairwise disjoint permutations (redrawn until they are).
    ``N`` must be a positive multiple of ``mu`` so that GC blocks of length
    ``mu`` can later tile each lifted column group.
    """
    N = int(N)
    mu = int(mu)
    if mu < 1 or N < mu or N % mu:
        raise LiftingError(f"lifting factor {N} is not a positive multiple of the component length {mu}")
    rng = np.random.default_rng(rng_seed)
    n_c, n_v = B.shape
    edges = []
    perms = []
    rr, cc = [], []
    for i in range(n_c):
        for j in range(n_v):
            m = int(B.entries[i, j])
            if not m:
                continue
            P = _disjoint_perms(rng, m, N)
            for p in range(m):
                edges.append((i, j))
                perms.append(P[p])
                rr.append(i * N + P[p])
                cc.append(j * N + np.arange(N))
    rows = np.concatenate(rr) if rr else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cc) if cc else np.zeros(0, dtype=np.int64)
    H = sp.csr_matrix((np.ones(rows.size, dtype=np.uint8), (rows, cols)), shape=(n_c * N, n_v * N))
    return LiftedPcm(
        H=H,
        col_origin=np.repeat(np.arange(n_v), N),
        row_origin=np.repeat(np.arange(n_c), N),
        row_block=np.full(n_c * N, -1),
        N=N,
        edge_list=np.array(edges, dtype=np.int64).reshape(-1, 2),
        edge_perms=np.array(perms, dtype=np.int64).reshape(len(perms), N),
    )


def four_cycle_count(H) -> int:
    """Number of length-4 cycles in the Tanner graph of ``H``."""
    H = sp.csr_matrix(H, dtype=np.int64)
    G = (H @ H.T).tocoo()
    mask = G.row < G.col
    o = G.data[mask]
    return int(np.sum(o * (o - 1) // 2))
