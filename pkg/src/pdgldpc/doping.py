"""Partially doped GLDPC construction, conventional check-node doping and the
typical-minimum-distance graph condition."""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .component import ComponentCode
from .lifting import LiftedPcm, LiftingError
from .protograph import BaseMatrix, DegreeCountVector, InfeasibleDesignError

PARTIAL = "partial"
CONVENTIONAL = "conventional"


@dataclass(frozen=True)
class DopingSpec:
    """Protograph columns to dope (in order) and the component code."""

    doped_cols: Tuple[int, ...]
    code: ComponentCode

    def __post_init__(self):
        cols = tuple(int(j) for j in self.doped_cols)
        if len(set(cols)) != len(cols):
            raise ValueError("doped columns must be distinct")
        if any(j < 0 for j in cols):
            raise ValueError("negative column index")
        object.__setattr__(self, "doped_cols", cols)

    @classmethod
    def leftmost(cls, y: int, code: ComponentCode) -> "DopingSpec":
        return cls(tuple(range(y * code.mu)), code)

    @property
    def x(self) -> int:
        return len(self.doped_cols)

    @property
    def y(self) -> Optional[int]:
        """Number of bulks when ``x`` is a multiple of ``mu``."""
        return self.x // self.code.mu if self.x % self.code.mu == 0 else None

    def check(self, base: BaseMatrix, require_degree2: bool = False) -> None:
        for j in self.doped_cols:
            if j >= base.n_v:
                raise ValueError(f"doped column {j} outside base matrix with {base.n_v} columns")
            if require_degree2 and base.col_degrees[j] != 2:
                raise ValueError(f"doped column {j} has degree {base.col_degrees[j]}, expected 2")


@dataclass(frozen=True, eq=False)
class PdGldpcCode:
    """Lifted GLDPC code: the PCM with GC rows stacked above the SPC rows.

    ``gc_blocks[b]`` lists the ``mu`` lifted columns constrained by GC block
    ``b`` in component-code position order; the block's rows are
    ``code.pcm`` placed on those columns.
    """

    pcm: LiftedPcm
    base: BaseMatrix
    code: Optional[ComponentCode]
    N: int
    gc_blocks: np.ndarray
    kind: str = PARTIAL
    doped_cols: Tuple[int, ...] = ()
    gc_checks: Tuple[int, ...] = ()

    def __post_init__(self):
        blocks = np.asarray(self.gc_blocks, dtype=np.int64)
        mu = self.code.mu if self.code is not None else 0
        blocks = blocks.reshape(-1, mu) if blocks.size else np.zeros((0, mu), dtype=np.int64)
        blocks.setflags(write=False)
        object.__setattr__(self, "gc_blocks", blocks)
        object.__setattr__(self, "doped_cols", tuple(int(j) for j in self.doped_cols))
        object.__setattr__(self, "gc_checks", tuple(int(i) for i in self.gc_checks))

    @property
    def beta(self) -> int:
        return self.N // self.code.mu if self.code is not None else 0

    @property
    def spec(self) -> Optional[DopingSpec]:
        if self.code is None or self.kind != PARTIAL:
            return None
        return DopingSpec(self.doped_cols, self.code)

    @property
    def n(self) -> int:
        return self.pcm.cols

    @property
    def spc_rows(self) -> np.ndarray:
        return np.flatnonzero(self.pcm.row_block < 0)

    def spc_matrix(self) -> sp.csr_matrix:
        return self.pcm.H[self.spc_rows]

    @property
    def design_rate(self) -> float:
        return 1.0 - self.pcm.rows / self.pcm.cols

    def __eq__(self, other):
        if not isinstance(other, PdGldpcCode):
            return NotImplemented
        return (self.pcm == other.pcm and self.base == other.base and self.code == other.code
                and self.N == other.N and np.array_equal(self.gc_blocks, other.gc_blocks)
                and self.kind == other.kind and self.doped_cols == other.doped_cols
                and self.gc_checks == other.gc_checks)


def plain_code(base: BaseMatrix, lifted: LiftedPcm) -> PdGldpcCode:
    """Wrap an undoped lifted protograph as a code object."""
    return PdGldpcCode(pcm=lifted, base=base, code=None, N=lifted.N, gc_blocks=np.zeros((0, 0)))


def _block_rows(code: ComponentCode, blocks: np.ndarray, first_row: int):
    m = code.m
    pr, pc = np.nonzero(code.pcm)
    n_b = blocks.shape[0]
    rows = (first_row + np.arange(n_b)[:, None] * m + pr[None, :]).ravel()
    cols = blocks[:, pc].ravel()
    return rows, cols


def dope_partial(base: BaseMatrix, lifted: LiftedPcm, spec: DopingSpec) -> PdGldpcCode:
    """Append GC rows over the lifted copies of each doped protograph column.

    The ``N`` copies of a doped column are cut into ``beta = N / mu``
    consecutive runs of ``mu``; each run gets one copy of the component pcm.
    """
    code = spec.code
    N = lifted.N
    if N % code.mu:
        raise LiftingError(f"lifting factor {N} is not a multiple of {code.mu}")
    if lifted.cols != base.n_v * N or np.any(lifted.row_block >= 0):
        raise ValueError("lifted matrix does not belong to this base matrix")
    spec.check(base)
    beta = N // code.mu
    m = code.m
    if not spec.doped_cols:
        return plain_code(base, lifted)
    extra = m * beta * spec.x
    if lifted.rows + extra >= lifted.cols:
        raise InfeasibleDesignError("doping leaves no positive code dimension")
    blocks = np.array([j * N + b * code.mu + np.arange(code.mu) for j in spec.doped_cols for b in range(beta)],
                      dtype=np.int64)
    gr, gcols = _block_rows(code, blocks, 0)
    Hs = lifted.H.tocoo()
    rows = np.concatenate([gr, Hs.row + extra])
    cols = np.concatenate([gcols, Hs.col])
    H = sp.csr_matrix((np.ones(rows.size, dtype=np.uint8), (rows, cols)), shape=(extra + lifted.rows, lifted.cols))
    pcm = LiftedPcm(
        H=H,
        col_origin=lifted.col_origin,
        row_origin=np.concatenate([np.full(extra, -1), lifted.row_origin]),
        row_block=np.concatenate([np.repeat(np.arange(blocks.shape[0]), m), lifted.row_block]),
        N=N,
        edge_list=lifted.edge_list,
        edge_perms=lifted.edge_perms,
    )
    return PdGldpcCode(pcm=pcm, base=base, code=code, N=N, gc_blocks=blocks, kind=PARTIAL,
                       doped_cols=spec.doped_cols)


def dope_conventional(base: BaseMatrix, check_idx: Union[int, Sequence[int]], code: ComponentCode,
                      lifted: LiftedPcm) -> PdGldpcCode:
    """Replace protograph check(s) by GC nodes of ``code``.

    Every lifted copy of a replaced check becomes ``mu - kappa`` rows of the
    component pcm over its ``mu`` neighbours; component position ``p`` is the
    ``p``-th protograph edge of the check (edges ordered by column, then by
    parallel copy).
    """
    checks = [int(check_idx)] if np.isscalar(check_idx) else [int(i) for i in check_idx]
    N = lifted.N
    if lifted.edge_perms.shape[0] == 0:
        raise ValueError("conventional doping needs the lifting permutations")
    for i in checks:
        if base.row_degrees[i] != code.mu:
            raise ValueError(f"check {i} has degree {base.row_degrees[i]} but the component length is {code.mu}")
    blocks = []
    for i in checks:
        sel = np.flatnonzero(lifted.edge_list[:, 0] == i)  # already column-ordered
        cols_per_copy = np.empty((N, code.mu), dtype=np.int64)
        for p, e in enumerate(sel):
            j = lifted.edge_list[e, 1]
            inv = np.empty(N, dtype=np.int64)
            inv[lifted.edge_perms[e]] = np.arange(N)
            cols_per_copy[:, p] = j * N + inv
        blocks.append(cols_per_copy)
    blocks = np.concatenate(blocks) if blocks else np.zeros((0, code.mu), dtype=np.int64)
    m = code.m
    extra = m * blocks.shape[0]
    keep = ~np.isin(lifted.row_origin, checks)
    H_keep = lifted.H[np.flatnonzero(keep)].tocoo()
    gr, gcols = _block_rows(code, blocks, 0)
    rows = np.concatenate([gr, H_keep.row + extra])
    cols = np.concatenate([gcols, H_keep.col])
    n_rows = extra + int(keep.sum())
    if n_rows >= lifted.cols:
        raise InfeasibleDesignError("doping leaves no positive code dimension")
    H = sp.csr_matrix((np.ones(rows.size, dtype=np.uint8), (rows, cols)), shape=(n_rows, lifted.cols))
    pcm = LiftedPcm(
        H=H,
        col_origin=lifted.col_origin,
        row_origin=np.concatenate([np.full(extra, -1), lifted.row_origin[keep]]),
        row_block=np.concatenate([np.repeat(np.arange(blocks.shape[0]), m), np.full(int(keep.sum()), -1)]),
        N=N,
        edge_list=lifted.edge_list,
        edge_perms=lifted.edge_perms,
    )
    return PdGldpcCode(pcm=pcm, base=base, code=code, N=N, gc_blocks=blocks, kind=CONVENTIONAL,
                       gc_checks=tuple(checks))


# --- typical minimum distance ------------------------------------------------

def _doped_set(spec) -> set:
    if spec is None:
        return set()
    if isinstance(spec, DopingSpec):
        return set(spec.doped_cols)
    return set(int(j) for j in spec)


def typical_dmin_check(base: BaseMatrix, spec: Union[DopingSpec, Iterable[int], None] = None
                       ) -> Tuple[bool, Optional[List[int]]]:
    """Check that the undoped degree-2 variable nodes form no cycle.

    Each undoped degree-2 column is an edge between its two checks (a double
    edge to one check is a loop). Returns ``(True, None)`` for a forest, else
    ``(False, cycle)`` with the variable nodes along one offending cycle.
    """
    doped = _doped_set(spec)
    parent = list(range(base.n_c))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    forest = defaultdict(list)  # check -> [(neighbour check, variable)]
    deg = base.col_degrees
    for j in range(base.n_v):
        if deg[j] != 2 or j in doped:
            continue
        ends = np.repeat(np.arange(base.n_c), base.entries[:, j])
        a, b = int(ends[0]), int(ends[1])
        if a == b:
            return False, [j]
        ra, rb = find(a), find(b)
        if ra == rb:
            return False, _forest_path(forest, a, b) + [j]
        parent[ra] = rb
        forest[a].append((b, j))
        forest[b].append((a, j))
    return True, None


def _forest_path(forest, src: int, dst: int) -> List[int]:
    prev = {src: None}
    q = deque([src])
    while q:
        u = q.popleft()
        if u == dst:
            break
        for w, v in forest[u]:
            if w not in prev:
                prev[w] = (u, v)
                q.append(w)
    path = []
    u = dst
    while prev[u] is not None:
        u, v = prev[u]
        path.append(v)
    return path[::-1]


def necessary_doping_bound(n_v: int, n_c: int, mu: int, kappa: Optional[int] = None) -> int:
    """Smallest ``y`` such that at most ``n_c - 1`` degree-2 nodes stay undoped
    when ``y * mu`` of the ``n_v`` degree-2 nodes are doped.

    With ``kappa`` given, ``n_c`` is the check count before the rate
    adjustment and the base keeps ``n_c - (mu - kappa) y`` rows, giving
    ``y >= (n_v - n_c + 1) / kappa``. Otherwise ``n_c`` is fixed and
    ``y >= (n_v - n_c + 1) / mu``.
    """
    if min(n_v, n_c, mu) <= 0:
        raise ValueError("arguments must be positive")
    num = n_v - n_c + 1
    den = mu if kappa is None else kappa
    return max(0, -(-num // den))


def degree_transform(D_p: DegreeCountVector, code: ComponentCode, y: int) -> DegreeCountVector:
    """Variable-degree histogram after doping ``y * mu`` degree-2 nodes: each
    doped node takes degree ``2 + w`` for the pcm column weight ``w`` at its
    block position."""
    counts = dict(D_p.as_dict())
    need = y * code.mu
    if counts.get(2, 0) < need:
        raise InfeasibleDesignError(f"need {need} degree-2 nodes, have {counts.get(2, 0)}")
    counts[2] = counts.get(2, 0) - need
    for w, n_w in code.weight_profile().items():
        counts[2 + w] = counts.get(2 + w, 0) + n_w * y
    return DegreeCountVector.from_dict(counts)


def inverse_degree_transform(D_c: DegreeCountVector, code: ComponentCode, y: int) -> DegreeCountVector:
    """Pre-doping histogram whose :func:`degree_transform` is ``D_c``."""
    counts = dict(D_c.as_dict())
    counts[2] = counts.get(2, 0) + y * code.mu
    for w, n_w in code.weight_profile().items():
        counts[2 + w] = counts.get(2 + w, 0) - n_w * y
        if counts[2 + w] < 0:
            raise InfeasibleDesignError(f"not enough degree-{2 + w} nodes for {y} bulks")
    return DegreeCountVector.from_dict(counts)
