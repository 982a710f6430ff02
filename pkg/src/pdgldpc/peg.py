"""Progressive edge-growth construction of protograph base matrices."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .protograph import BaseMatrix, DegreeCountVector, InfeasibleDesignError, InvalidProtographError


@dataclass(frozen=True)
class PegConfig:
    """``target_degrees`` gives the column-degree histogram; columns are laid
    out left to right in ascending degree. ``order`` optionally fixes the
    sequence in which columns receive their edges (default: left to right)."""

    n_c: int
    n_v: int
    target_degrees: DegreeCountVector
    rng_seed: int = 0
    max_retries: int = 20
    order: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.n_c < 1 or self.n_v < 1:
            raise InfeasibleDesignError("dimensions must be positive")
        if self.target_degrees.n_v != self.n_v:
            raise InfeasibleDesignError(
                f"degree counts cover {self.target_degrees.n_v} columns, expected {self.n_v}")
        if any(d < 1 for d, c in zip(self.target_degrees.degrees, self.target_degrees.counts) if c):
            raise InfeasibleDesignError("column degrees must be at least 1")
        if self.target_degrees.n_edges < 2 * self.n_c:
            raise InfeasibleDesignError("too few edges to give every check degree >= 2")
        if self.order is not None:
            object.__setattr__(self, "order", tuple(int(j) for j in self.order))
            if sorted(self.order) != list(range(self.n_v)):
                raise ValueError("order must be a permutation of the columns")

    @classmethod
    def regular(cls, n_c: int, n_v: int, degree: int, **kw) -> "PegConfig":
        return cls(n_c, n_v, DegreeCountVector((degree,), (n_v,)), **kw)


def _peg_once(cfg: PegConfig, rng: np.random.Generator) -> np.ndarray:
    n_c, n_v = cfg.n_c, cfg.n_v
    col_deg = cfg.target_degrees.column_list()
    order = cfg.order if cfg.order is not None else range(n_v)
    B = np.zeros((n_c, n_v), dtype=np.int64)
    chk_adj: List[List[int]] = [[] for _ in range(n_c)]
    var_adj: List[List[int]] = [[] for _ in range(n_v)]
    cdeg = np.zeros(n_c, dtype=np.int64)

    def pick(cands: np.ndarray) -> int:
        d = cdeg[cands]
        best = cands[d == d.min()]
        return int(best[rng.integers(best.size)]) if best.size > 1 else int(best[0])

    for j in order:
        for k in range(col_deg[j]):
            if k == 0:
                c = pick(np.arange(n_c))
            else:
                # BFS over the current graph from v_j; track check depth sets
                seen = np.zeros(n_c, dtype=bool)
                seen_v = np.zeros(n_v, dtype=bool)
                seen_v[j] = True
                frontier = list(set(var_adj[j]))
                for c0 in frontier:
                    seen[c0] = True
                last_level = frontier
                while True:
                    nxt = []
                    for c0 in frontier:
                        for v in chk_adj[c0]:
                            if not seen_v[v]:
                                seen_v[v] = True
                                for c1 in var_adj[v]:
                                    if not seen[c1]:
                                        seen[c1] = True
                                        nxt.append(c1)
                    if not nxt:
                        break
                    last_level = nxt
                    frontier = nxt
                unreached = np.flatnonzero(~seen)
                if unreached.size:
                    cands = unreached
                else:
                    cands = np.array(sorted(set(last_level) - set(var_adj[j])), dtype=np.int64)
                    if cands.size == 0:
                        cands = np.setdiff1d(np.arange(n_c), var_adj[j])
                    if cands.size == 0:
                        # v_j already reaches every check: parallel edge forced
                        cands = np.arange(n_c)
                c = pick(cands)
            B[c, j] += 1
            cdeg[c] += 1
            chk_adj[c].append(j)
            var_adj[j].append(c)
    return B


def peg_build(cfg: PegConfig) -> BaseMatrix:
    """Build a base matrix with exactly the requested column degrees.

    Each new edge of a variable node goes to a check that is unreachable from
    it in the current graph or, if all are reachable, to one at maximum
    distance; ties are broken by minimum current check degree, then uniformly
    at random from the seeded generator. Attempts whose result fails base
    matrix validation are redrawn up to ``max_retries`` times.
    """
    ss = np.random.SeedSequence(cfg.rng_seed)
    last_err = None
    for attempt in range(cfg.max_retries + 1):
        rng = np.random.default_rng(ss.spawn(1)[0] if attempt else ss)
        B = _peg_once(cfg, rng)
        try:
            return BaseMatrix(B)
        except InvalidProtographError as err:
            last_err = err
    raise InfeasibleDesignError(f"PEG produced no valid base matrix in {cfg.max_retries + 1} attempts: {last_err}")
