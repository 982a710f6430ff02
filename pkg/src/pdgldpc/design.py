"""Design pipelines: regular PD-GLDPC construction with a doping sweep, and
differential-evolution ensemble optimisation followed by protograph
realisation and a doping sweep."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import seeds
from .component import ComponentCode
from .doping import DopingSpec, inverse_degree_transform, necessary_doping_bound, typical_dmin_check
from .peg import PegConfig, peg_build
from .pexit import CodeDescription, ThresholdResult, de_threshold, de_threshold_grid, threshold
from .protograph import (BaseMatrix, DegreeCountVector, EnsembleDistribution, InfeasibleDesignError,
                         parse_rate, realize_counts)

log = logging.getLogger(__name__)


def doped_peg_order(degrees: Sequence[int], x: int) -> Tuple[int, ...]:
    """Column processing order for PEG: undoped degree-2 columns first, then
    the ``x`` doped (leftmost) columns, then the rest left to right.

    PEG keeps connecting a new degree-2 node to a check outside its current
    component while one exists, so processing the undoped ones first makes
    them cycle-free whenever there are fewer of them than checks.
    """
    degrees = list(degrees)
    n_v = len(degrees)
    undoped2 = [j for j in range(x, n_v) if degrees[j] == 2]
    rest = [j for j in range(x, n_v) if degrees[j] != 2]
    return tuple(undoped2 + list(range(x)) + rest)


def build_doped_base(n_c: int, counts: DegreeCountVector, x: int, seed: int, max_retries: int = 20
                     ) -> BaseMatrix:
    """PEG base matrix whose leftmost ``x`` (degree-2) columns are to be doped
    and whose undoped degree-2 columns form no cycle; redrawn on failure."""
    degrees = counts.column_list()
    if any(d != 2 for d in degrees[:x]):
        raise InfeasibleDesignError(f"only {counts.as_dict().get(2, 0)} degree-2 columns for {x} doped")
    order = doped_peg_order(degrees, x)
    for attempt in range(max_retries + 1):
        cfg = PegConfig(n_c, len(degrees), counts, rng_seed=seeds.derive_seed(seed, "peg", attempt), order=order)
        B = peg_build(cfg)
        ok, _ = typical_dmin_check(B, range(x))
        if ok:
            return B
    raise InfeasibleDesignError(f"no cycle-free undoped degree-2 subgraph after {max_retries + 1} draws")


# --- regular construction -------------------------------------------------------

@dataclass(frozen=True)
class RegularDesign:
    """Inputs of the regular construction. ``n_c(y) = n_v (1 - R) - (mu - kappa) y``."""

    code: ComponentCode
    n_v: int
    R: Fraction
    w_r: int = 2
    y_values: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "R", parse_rate(self.R))
        base_rows = self.n_v * (1 - self.R)
        if base_rows.denominator != 1:
            raise InfeasibleDesignError(f"n_v (1 - R) = {base_rows} is not an integer")

    @property
    def n_c0(self) -> int:
        return int(self.n_v * (1 - self.R))

    def n_c(self, y: int) -> int:
        return self.n_c0 - self.code.m * y

    def y_range(self) -> List[int]:
        if self.y_values is not None:
            ys = list(self.y_values)
        else:
            lo = necessary_doping_bound(self.n_v, self.n_c0, self.code.mu, self.code.kappa) if self.w_r == 2 else 0
            ys = list(range(lo, self.n_v // self.code.mu + 1))
        ys = [y for y in ys if self.n_c(y) >= 2 and 2 * self.n_c(y) <= self.w_r * self.n_v]
        if not ys:
            raise InfeasibleDesignError("no feasible doping count for this rate and component code")
        return ys


@dataclass
class RegularResult:
    y_best: int
    base: BaseMatrix
    threshold: ThresholdResult
    thresholds: Dict[int, float]
    bases: Dict[int, BaseMatrix] = field(repr=False, default_factory=dict)


def _regular_point(args):
    d, y, seed, tol, max_retries = args
    x = y * d.code.mu
    counts = DegreeCountVector((d.w_r,), (d.n_v,))
    B = build_doped_base(d.n_c(y), counts, x if d.w_r == 2 else 0, seeds.derive_seed(seed, "regular", y),
                         max_retries)
    if d.w_r != 2:
        raise InfeasibleDesignError("only degree-2 columns can be doped")
    res = threshold(CodeDescription(B, d.code, doped=range(x)), "pd", tol=tol)
    return y, B, res


def construct_regular(d: RegularDesign, seed: int = 0, tol: float = 1e-4, max_retries: int = 20,
                      workers: int = 1) -> RegularResult:
    """For each doping count ``y``: PEG-build a ``w_r``-regular base, dope its
    leftmost ``y mu`` columns, evaluate the PD threshold; keep the best ``y``."""
    ys = d.y_range()
    jobs = [(d, y, seed, tol, max_retries) for y in ys]
    out = {}
    failures = {}
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            futs = {y: ex.submit(_regular_point, j) for y, j in zip(ys, jobs)}
            for y, f in futs.items():
                try:
                    out[y] = f.result()
                except InfeasibleDesignError as err:
                    failures[y] = err
    else:
        for y, j in zip(ys, jobs):
            try:
                out[y] = _regular_point(j)
            except InfeasibleDesignError as err:
                failures[y] = err
    if not out:
        raise InfeasibleDesignError(f"no doping count passed the typical minimum distance check: {failures}")
    thr = {y: r[2].epsilon_star for y, r in out.items()}
    y_best = max(sorted(thr), key=lambda y: thr[y])
    return RegularResult(y_best=y_best, base=out[y_best][1], threshold=out[y_best][2], thresholds=thr,
                         bases={y: r[1] for y, r in out.items()})


# --- ensemble optimisation ---------------------------------------------------

@dataclass(frozen=True)
class DeConfig:
    code: ComponentCode
    n_v: int = 400
    R: Fraction = Fraction(1, 2)
    y_max: int = 5
    l: int = 20
    r: int = 9
    population: int = 50
    F: float = 0.5
    CR: float = 0.9
    generations: int = 300
    rng_seed: int = 0
    init_tries: int = 200

    def __post_init__(self):
        object.__setattr__(self, "R", parse_rate(self.R))
        if self.population < 4:
            raise ValueError("population must be at least 4")
        if not 0 < self.F <= 2:
            raise ValueError("mutation factor F must lie in (0, 2]")
        if not 0 <= self.CR <= 1:
            raise ValueError("crossover rate must lie in [0, 1]")
        if self.r < 3:
            raise ValueError("maximum check degree must be at least 3")

    @property
    def n_c(self) -> int:
        return int(round(self.n_v * (1 - self.R)))

    @property
    def lam_degrees(self) -> Tuple[int, ...]:
        return tuple(sorted({2, 3, 4, 5, 6, self.l}))

    @property
    def rho_degrees(self) -> Tuple[int, int]:
        return (self.r - 1, self.r)


class _Problem:
    """Decision vector: lambda coefficients of every degree but the largest;
    the largest absorbs the remainder and rho_{r-1} follows from the rate."""

    def __init__(self, cfg: DeConfig):
        self.cfg = cfg
        self.deg = np.array(cfg.lam_degrees, dtype=float)
        self.rdeg = np.array(cfg.rho_degrees, dtype=float)
        self.dim = len(cfg.lam_degrees) - 1
        R = float(cfg.R)
        self.one_minus_R = 1.0 - R
        y, n_v, m = cfg.y_max, cfg.n_v, cfg.code.m
        self.lam2_factor = 2.0 * (cfg.n_c - 1 - y * m) / n_v
        # lower bounds lambda_{2+w} >= (2+w) n_w y Sigma / n_v
        self.lower = np.zeros(len(cfg.lam_degrees))
        for w, n_w in cfg.code.weight_profile().items():
            d = 2 + w
            if d not in cfg.lam_degrees:
                raise InfeasibleDesignError(f"degree {d} needed by doping is missing from lambda support")
            self.lower[cfg.lam_degrees.index(d)] = d * n_w * y / n_v

    def repair(self, X: np.ndarray) -> np.ndarray:
        X = np.clip(X, 0.0, 1.0)
        s = X.sum(axis=1, keepdims=True)
        return np.where(s > 1.0, X / np.maximum(s, 1e-300), X)

    def expand(self, X: np.ndarray):
        lam = np.concatenate([X, 1.0 - X.sum(axis=1, keepdims=True)], axis=1)
        sigma = (lam / self.deg).sum(axis=1)
        int_rho = self.one_minus_R * sigma
        a, b = 1.0 / self.rdeg[0], 1.0 / self.rdeg[1]
        rho_lo = (int_rho - b) / (a - b)
        rho = np.stack([rho_lo, 1.0 - rho_lo], axis=1)
        return lam, rho, sigma

    def violation(self, lam, rho, sigma) -> np.ndarray:
        v = np.maximum(0.0, -lam).sum(axis=1)
        v += np.maximum(0.0, -rho[:, 0]) + np.maximum(0.0, rho[:, 0] - 1.0)
        i2 = list(self.cfg.lam_degrees).index(2)
        v += np.maximum(0.0, lam[:, i2] - self.lam2_factor * sigma)
        v += np.maximum(0.0, self.lower[None, :] * sigma[:, None] - lam).sum(axis=1)
        return v

    def fitness(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        lam, rho, sigma = self.expand(X)
        viol = self.violation(lam, rho, sigma)
        thr = de_threshold_grid(lam, np.clip(rho, 0.0, 1.0), self.deg, self.rdeg)
        return np.where(viol > 0, -1.0 - 100.0 * viol, thr), viol

    def ensemble(self, x: np.ndarray) -> EnsembleDistribution:
        lam, rho, _ = self.expand(x[None, :])
        lam = lam[0]
        return EnsembleDistribution({int(d): float(c) for d, c in zip(self.deg, lam)},
                                    {int(self.rdeg[0]): float(rho[0, 0]), int(self.rdeg[1]): float(1.0 - rho[0, 0])})


@dataclass
class DeResult:
    ensemble: EnsembleDistribution
    threshold: float
    best_history: List[float]
    generations: int


def optimize_ensemble(cfg: DeConfig) -> DeResult:
    """Maximise the ensemble BEC threshold by DE/rand/1/bin under the rate,
    degree-2 and doping-existence constraints. Infeasible candidates are
    clipped into the box and penalised by their residual violation."""
    prob = _Problem(cfg)
    rng = seeds.generator(cfg.rng_seed, "de")
    P = cfg.population
    # initial population: feasible draws from a Dirichlet first
    pool = []
    pool_f = []
    for _ in range(cfg.init_tries):
        cand = rng.dirichlet(np.ones(prob.dim + 1), size=50 * P)[:, : prob.dim]
        f, v = prob.fitness(cand)
        pool.append(cand)
        pool_f.append(f)
        if sum(int(np.sum(pf > 0)) for pf in pool_f) >= P:
            break
    pool = np.concatenate(pool)
    pool_f = np.concatenate(pool_f)
    if not np.any(pool_f > 0):
        raise InfeasibleDesignError("no feasible initial individual; constraints may be contradictory")
    keep = np.argsort(-pool_f, kind="stable")[:P]
    X = pool[keep]
    fit = pool_f[keep]
    history = [float(fit.max())]
    idx = np.arange(P)
    for _ in range(cfg.generations):
        r = np.empty((P, 3), dtype=np.int64)
        for i in range(P):
            r[i] = rng.choice(np.delete(idx, i), size=3, replace=False)
        mutant = X[r[:, 0]] + cfg.F * (X[r[:, 1]] - X[r[:, 2]])
        cross = rng.random((P, prob.dim)) < cfg.CR
        cross[idx, rng.integers(prob.dim, size=P)] = True
        trial = prob.repair(np.where(cross, mutant, X))
        tf, _ = prob.fitness(trial)
        better = tf >= fit
        X[better] = trial[better]
        fit[better] = tf[better]
        history.append(float(fit.max()))
    best = int(np.argmax(fit))
    lam, rho, sigma = prob.expand(X[best][None, :])
    if prob.violation(lam, rho, sigma)[0] > 0:
        raise InfeasibleDesignError("best individual violates the constraints")
    E = prob.ensemble(X[best])
    return DeResult(ensemble=E, threshold=de_threshold(E), best_history=history, generations=cfg.generations)


def ensemble_constraints_ok(E: EnsembleDistribution, cfg: DeConfig, tol: float = 1e-9) -> bool:
    """Constraints (rate, degree-2 bound, doping existence) on a finished ensemble."""
    prob = _Problem(cfg)
    lam = np.array([[E.lam_dict.get(int(d), 0.0) for d in prob.deg]])
    sigma = np.array([E.int_lambda])
    rho = np.array([[E.rho_dict.get(int(d), 0.0) for d in prob.rdeg]])
    if abs(E.rate - float(cfg.R)) > tol:
        return False
    return bool(prob.violation(lam, rho, sigma)[0] <= tol)


# --- realisation and doping sweep ------------------------------------------

@dataclass
class IrregularResult:
    y_opt: int
    G_c: BaseMatrix
    G_p: BaseMatrix
    counts: DegreeCountVector
    gc_threshold: ThresholdResult
    thresholds: Dict[int, float]
    skipped: Dict[int, str] = field(default_factory=dict)
    bases: Dict[int, BaseMatrix] = field(repr=False, default_factory=dict)


def _sweep_point(args):
    counts, code, n_c, y, seed, tol, max_retries = args
    D_p = inverse_degree_transform(counts, code, y)
    x = y * code.mu
    undoped2 = D_p.as_dict().get(2, 0) - x
    n_cp = n_c - code.m * y
    if undoped2 > n_cp - 1:
        raise InfeasibleDesignError(f"{undoped2} undoped degree-2 nodes exceed {n_cp - 1}")
    B = build_doped_base(n_cp, D_p, x, seeds.derive_seed(seed, "gp", y), max_retries)
    return y, B, threshold(CodeDescription(B, code, doped=range(x)), "pd", tol=tol)


def realize_and_sweep(E: EnsembleDistribution, cfg: DeConfig, seed: Optional[int] = None, tol: float = 1e-4,
                      max_retries: int = 20, workers: int = 1, counts: Optional[DegreeCountVector] = None
                      ) -> IrregularResult:
    """Realise node counts from ``E``, PEG-build ``G_c`` and, for every
    feasible ``y <= y_max``, the pre-doping protograph ``G_p``; return the
    ``y`` with the best PD threshold."""
    seed = cfg.rng_seed if seed is None else seed
    code = cfg.code
    counts = counts if counts is not None else realize_counts(E, cfg.n_v)
    n_c = cfg.n_c
    G_c = peg_build(PegConfig(n_c, cfg.n_v, counts, rng_seed=seeds.derive_seed(seed, "gc")))
    gc_thr = threshold(CodeDescription(G_c), "ldpc", tol=tol)
    jobs = []
    skipped = {}
    for y in range(1, cfg.y_max + 1):
        try:
            inverse_degree_transform(counts, code, y)
        except InfeasibleDesignError as err:
            skipped[y] = str(err)
            continue
        jobs.append((counts, code, n_c, y, seed, tol, max_retries))
    results = {}
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            for y, B, res in ex.map(_sweep_point, jobs):
                results[y] = (B, res)
    else:
        for j in jobs:
            try:
                y, B, res = _sweep_point(j)
                results[y] = (B, res)
            except InfeasibleDesignError as err:
                skipped[j[3]] = str(err)
    if not results:
        raise InfeasibleDesignError(f"no feasible doping count: {skipped}")
    thr = {y: r[1].epsilon_star for y, r in results.items()}
    y_opt = max(sorted(thr), key=lambda y: thr[y])
    G_p = results[y_opt][0]
    ok, cyc = typical_dmin_check(G_p, range(y_opt * code.mu))
    if not ok:
        raise InfeasibleDesignError(f"selected protograph has a degree-2 cycle {cyc}")
    return IrregularResult(y_opt=y_opt, G_c=G_c, G_p=G_p, counts=counts, gc_threshold=gc_thr, thresholds=thr,
                           skipped=skipped, bases={y: r[0] for y, r in results.items()})
