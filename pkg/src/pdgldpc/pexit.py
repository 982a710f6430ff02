"""Protograph EXIT analysis over the BEC for LDPC, conventional GLDPC and
partially doped GLDPC codes, plus density-evolution thresholds of ensembles."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np

from .component import ComponentCode, gc_exit_function
from .protograph import BaseMatrix, EnsembleDistribution

MODES = ("ldpc", "pd", "conventional")


class NumericalFaultError(FloatingPointError):
    pass


@dataclass(frozen=True)
class CodeDescription:
    """Protograph plus the doping metadata PEXIT needs.

    ``doped`` lists partially doped variable nodes (PD mode); ``gc_rows`` lists
    checks replaced by the component code (conventional mode).
    """

    base: BaseMatrix
    component: Optional[ComponentCode] = None
    doped: Tuple[int, ...] = ()
    gc_rows: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "doped", tuple(sorted(int(j) for j in self.doped)))
        object.__setattr__(self, "gc_rows", tuple(sorted(int(i) for i in self.gc_rows)))
        if (self.doped or self.gc_rows) and self.component is None:
            raise ValueError("doping requires a component code")
        if len(set(self.doped)) != len(self.doped) or any(not 0 <= j < self.base.n_v for j in self.doped):
            raise ValueError("doped columns must be distinct valid column indices")
        for i in self.gc_rows:
            if not 0 <= i < self.base.n_c:
                raise ValueError(f"GC row {i} out of range")
            if self.base.row_degrees[i] != self.component.mu:
                raise ValueError(f"check {i} has degree {self.base.row_degrees[i]}, component length is "
                                 f"{self.component.mu}")

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.base.shape, dtype=np.int64).tobytes())
        h.update(self.base.entries.tobytes())
        h.update(repr((self.doped, self.gc_rows)).encode())
        if self.component is not None:
            h.update(self.component.pcm.tobytes())
        return h.hexdigest()[:16]


@dataclass
class PexitState:
    """Messages after one flooding iteration (all mutual-information values).

    ``I_EV``/``I_AV`` are ``n_c x n_v`` matrices holding the mean over parallel
    edge copies (zero on non-edges); ``I_AGC``/``I_EGC`` are indexed by doped
    variable node (PD) or GC row (conventional).
    """

    iteration: int
    I_ch: np.ndarray
    I_EV: np.ndarray
    I_AV: np.ndarray
    I_AGC: np.ndarray
    I_EGC: np.ndarray
    I_APP: np.ndarray
    edge_v2c: np.ndarray = field(repr=False, default=None)
    edge_c2v: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class ThresholdResult:
    epsilon_star: float
    iterations_at_threshold: int
    converged: bool
    bisection_width: float


@dataclass(frozen=True)
class PexitLimits:
    max_iters: int = 10000
    delta_conv: float = 1e-9
    stall_tol: float = 1e-13


def _group_exclusive(x: np.ndarray, starts: np.ndarray, gid: np.ndarray):
    """Per element: product of the other members of its group; also the full
    product per group. Exact zeros are handled without division."""
    zero = x == 0.0
    safe = np.where(zero, 1.0, x)
    pnz = np.multiply.reduceat(safe, starts)
    zc = np.add.reduceat(zero.astype(np.int64), starts)
    pe = pnz[gid]
    ze = zc[gid]
    with np.errstate(divide="ignore", invalid="ignore"):
        excl = np.where(zero, np.where(ze == 1, pe, 0.0), np.where(ze == 0, pe / safe, 0.0))
    full = np.where(zc > 0, 0.0, pnz)
    return excl, full


class _Graph:
    """Edge lists of a protograph with parallel edges expanded."""

    def __init__(self, desc: CodeDescription, mode: str):
        B = desc.base.entries
        ci, vj = np.nonzero(B)
        mult = B[ci, vj]
        self.chk = np.repeat(ci, mult)
        self.var = np.repeat(vj, mult)
        self.n_c, self.n_v = B.shape
        E = self.chk.size
        doped = np.array(desc.doped if mode == "pd" else (), dtype=np.int64)
        self.doped = doped
        gc_rows = np.array(desc.gc_rows if mode == "conventional" else (), dtype=np.int64)
        self.gc_rows = gc_rows

        # variable-side inputs: real edges then one virtual input per doped VN
        vin_var = np.concatenate([self.var, doped])
        self.v_order = np.argsort(vin_var, kind="stable")
        sorted_var = vin_var[self.v_order]
        self.v_starts = np.flatnonzero(np.r_[True, sorted_var[1:] != sorted_var[:-1]])
        self.v_gid = np.cumsum(np.r_[False, sorted_var[1:] != sorted_var[:-1]])
        self.n_vin = vin_var.size
        self.E = E
        # check-side grouping
        self.c_order = np.argsort(self.chk, kind="stable")
        sorted_chk = self.chk[self.c_order]
        self.c_starts = np.flatnonzero(np.r_[True, sorted_chk[1:] != sorted_chk[:-1]])
        self.c_gid = np.cumsum(np.r_[False, sorted_chk[1:] != sorted_chk[:-1]])
        self.c_deg = np.bincount(self.chk, minlength=self.n_c)
        self.gc_edge = np.isin(self.chk, gc_rows)

    def edge_matrix(self, values: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n_c, self.n_v))
        np.add.at(out, (self.chk, self.var), values)
        cnt = np.zeros((self.n_c, self.n_v))
        np.add.at(cnt, (self.chk, self.var), 1.0)
        return np.divide(out, cnt, out=np.zeros_like(out), where=cnt > 0)


def _exit_fn(desc: CodeDescription) -> Callable:
    if desc.component is None:
        return lambda x: np.zeros_like(x)
    return gc_exit_function(desc.component)


def pexit_iterate(desc: CodeDescription, epsilon: float, mode: str = "pd",
                  limits: PexitLimits = PexitLimits()) -> Iterator[PexitState]:
    """Yield the PEXIT state after each flooding iteration (messages start at 0)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    g = _Graph(desc, mode)
    f = _exit_fn(desc)
    eps = float(epsilon)
    c2v = np.zeros(g.E)  # mutual information check -> variable
    virt = np.zeros(g.doped.size)  # I_EGC of virtual nodes
    I_ch = np.full(g.n_v, 1.0 - eps)
    it = 0
    while True:
        it += 1
        # variable update: erasure inputs in the variable-sorted layout
        vin = np.concatenate([1.0 - c2v, 1.0 - virt])[g.v_order]
        excl, full = _group_exclusive(vin, g.v_starts, g.v_gid)
        out = np.empty(g.n_vin)
        out[g.v_order] = 1.0 - eps * excl
        v2c = out[: g.E]
        I_AGC = out[g.E:]
        # check update
        x = v2c[g.c_order]
        excl_c, _ = _group_exclusive(x, g.c_starts, g.c_gid)
        new_c2v = np.empty(g.E)
        new_c2v[g.c_order] = excl_c
        if g.gc_rows.size:
            mean_in = np.bincount(g.chk, weights=v2c, minlength=g.n_c) / np.maximum(g.c_deg, 1)
            new_c2v[g.gc_edge] = f(mean_in[g.chk[g.gc_edge]])
            gc_ai = mean_in[g.gc_rows]
            gc_ei = f(gc_ai)
        else:
            gc_ai = I_AGC
            gc_ei = np.asarray(f(I_AGC)) if g.doped.size else np.zeros(0)
        new_virt = gc_ei if g.doped.size else virt
        # a-posteriori with the fresh check messages
        vin2 = np.concatenate([1.0 - new_c2v, 1.0 - new_virt])[g.v_order]
        _, full2 = _group_exclusive(vin2, g.v_starts, g.v_gid)
        I_app = 1.0 - eps * full2
        if not (np.all(np.isfinite(new_c2v)) and np.all(np.isfinite(I_app))):
            raise NumericalFaultError(f"non-finite PEXIT message at iteration {it}")
        change = max(np.max(np.abs(new_c2v - c2v), initial=0.0),
                     np.max(np.abs(new_virt - virt), initial=0.0))
        c2v = new_c2v
        virt = np.asarray(new_virt, dtype=float)
        yield PexitState(iteration=it, I_ch=I_ch, I_EV=None, I_AV=None, I_AGC=np.asarray(gc_ai),
                         I_EGC=np.asarray(gc_ei), I_APP=I_app, edge_v2c=v2c, edge_c2v=c2v)
        if change <= limits.stall_tol or it >= limits.max_iters:
            return


def pexit_run(desc: CodeDescription, epsilon: float, mode: str = "pd",
              limits: PexitLimits = PexitLimits()) -> Tuple[bool, int, PexitState]:
    """Iterate until every a-posteriori value reaches ``1 - delta_conv``,
    the messages stop changing, or ``max_iters`` is hit."""
    last = None
    for st in pexit_iterate(desc, epsilon, mode, limits):
        last = st
        if np.min(st.I_APP) >= 1.0 - limits.delta_conv:
            return True, st.iteration, _fill_matrices(desc, mode, st)
    return False, last.iteration, _fill_matrices(desc, mode, last)


def _fill_matrices(desc, mode, st: PexitState) -> PexitState:
    g = _Graph(desc, mode)
    st.I_EV = g.edge_matrix(st.edge_v2c)
    st.I_AV = g.edge_matrix(st.edge_c2v)
    return st


def pexit_evaluate(desc: CodeDescription, epsilon: float, mode: str = "pd",
                   limits: PexitLimits = PexitLimits()) -> bool:
    ok, _, _ = pexit_run(desc, epsilon, mode, limits)
    return ok


def threshold(desc: CodeDescription, mode: str = "pd", tol: float = 1e-4,
              limits: PexitLimits = PexitLimits()) -> ThresholdResult:
    """Largest decodable erasure probability, by bisection on [0, 1]."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    ok, it_lo, _ = pexit_run(desc, 0.0, mode, limits)
    if not ok:
        return ThresholdResult(0.0, it_lo, False, 0.0)
    ok1, it1, _ = pexit_run(desc, 1.0, mode, limits)
    if ok1:
        return ThresholdResult(1.0, it1, True, 0.0)
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok, it, _ = pexit_run(desc, mid, mode, limits)
        if ok:
            lo, it_lo = mid, it
        else:
            hi = mid
    return ThresholdResult(lo, it_lo, True, hi - lo)


# --- ensemble density evolution ----------------------------------------------

def _poly(coeffs: Sequence[Tuple[int, float]]):
    def ev(x: float) -> float:
        return sum(c * x ** (d - 1) for d, c in coeffs)
    return ev


def de_converges(E: EnsembleDistribution, epsilon: float, max_iters: int = 100000,
                 target: float = 1e-12) -> bool:
    lam = _poly(E.lam)
    rho = _poly(E.rho)
    x = epsilon
    for _ in range(max_iters):
        nx = epsilon * lam(1.0 - rho(1.0 - x))
        if nx < target:
            return True
        if x - nx < 1e-15:
            return False
        x = nx
    return False


def de_threshold(E: EnsembleDistribution, tol: float = 1e-5) -> float:
    """BEC threshold of an unstructured ensemble: bisection over epsilon with
    the fixed-point recursion ``x <- eps * lambda(1 - rho(1 - x))``."""
    lo, hi = 0.0, 1.0
    if de_converges(E, 1.0):
        return 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if de_converges(E, mid):
            lo = mid
        else:
            hi = mid
    return lo


_GRID = np.linspace(1e-6, 1.0, 20000)


def de_threshold_grid(lam: np.ndarray, rho: np.ndarray, lam_deg: np.ndarray, rho_deg: np.ndarray,
                      grid: np.ndarray = _GRID) -> np.ndarray:
    """Vectorised threshold ``min_x x / lambda(1 - rho(1 - x))`` for a batch of
    ensembles (rows of ``lam``/``rho`` are coefficient vectors)."""
    lam = np.atleast_2d(lam)
    rho = np.atleast_2d(rho)
    y = 1.0 - grid
    r = rho @ (y[None, :] ** (rho_deg[:, None] - 1))
    u = 1.0 - r
    lv = np.einsum("pk,pkx->px", lam, u[:, None, :] ** (lam_deg[None, :, None] - 1))
    with np.errstate(divide="ignore"):
        ratio = np.where(lv > 0, grid[None, :] / lv, np.inf)
    return np.minimum(ratio.min(axis=1), 1.0)
