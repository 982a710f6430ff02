"""Acceptance criteria 1-8, each at its stated tolerance.

Every test prints one ``CRITERION k: PASS|FAIL`` line (visible with
``pytest -v`` as well as ``-s``) before asserting.
"""

import itertools
import json
import time
from fractions import Fraction

import numpy as np
import pytest

from pdgldpc.cli import main
from pdgldpc.component import exit_oracle, gc_exit_function, hamming
from pdgldpc.design import DeConfig, RegularDesign, construct_regular, ensemble_constraints_ok, optimize_ensemble
from pdgldpc.design import realize_and_sweep
from pdgldpc.doping import DopingSpec, degree_transform, dope_partial, plain_code, typical_dmin_check
from pdgldpc.lifting import lift
from pdgldpc.peg import PegConfig, peg_build
from pdgldpc.pexit import CodeDescription, de_threshold, threshold
from pdgldpc.protograph import DegreeCountVector, EnsembleDistribution, column_degrees
from pdgldpc.seeds import derive_seed
from pdgldpc.sim import SimConfig, decode_block, default_workers, erasure_rank_oracle, run_bler

from conftest import random_base
from helpers import random_code, reference_peel
from test_doping import dfs_has_cycle

SEEDS = range(5)


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail
    return emit


def test_criterion_1_gc_exit(report):
    t0 = time.time()
    x = np.linspace(0.0, 1.0, 101)
    errs = {}
    for m in (3, 4):
        c = hamming(m)
        errs[c.name] = float(np.max(np.abs(gc_exit_function(c)(x) - exit_oracle(c, x))))
    dt = time.time() - t0
    ok = all(e <= 1e-9 for e in errs.values()) and dt < 60
    report(1, ok, f"max |closed form - enumeration| = {errs}, {dt:.1f}s")


def _median_threshold(make_base, mode="ldpc", **kw):
    vals = [threshold(CodeDescription(make_base(s), **kw), mode).epsilon_star for s in SEEDS]
    return float(np.median(vals))


def _regular_pd_medians(R, ys):
    code = hamming(4)
    per_y = {y: [] for y in ys}
    for s in SEEDS:
        r = construct_regular(RegularDesign(code, 400, R, y_values=tuple(ys)), seed=s)
        for y, v in r.thresholds.items():
            per_y[y].append(v)
    return {y: float(np.median(v)) for y, v in per_y.items() if v}


def test_criterion_2_thresholds(report):
    D = lambda counts: DegreeCountVector((2, 3, 4, 5, 6), counts)
    peg = lambda n_c, D_: (lambda s: peg_build(PegConfig(n_c, 400, D_, rng_seed=derive_seed(s, "peg"))))
    got = {
        "(3,6) 200x400": (_median_threshold(peg(200, DegreeCountVector((3,), (400,)))), 0.429),
        "irregular 1/2": (_median_threshold(peg(200, D((115, 76, 114, 76, 19)))), 0.4234),
        "(3,4) 300x400": (_median_threshold(peg(300, DegreeCountVector((3,), (400,)))), 0.647),
        "irregular 1/4": (_median_threshold(peg(300, D((250, 40, 60, 40, 10)))), 0.6883),
    }
    half = _regular_pd_medians(Fraction(1, 2), range(19, 23))
    quarter = _regular_pd_medians(Fraction(1, 4), range(10, 14))
    got["PD 1/2 y=19"] = (half.get(19, 0.0), 0.444)
    got["PD 1/4 y=10"] = (quarter.get(10, 0.0), 0.6935)
    ok = all(abs(v - t) <= 0.005 for v, t in got.values())
    arg_half = max(half, key=half.get)
    arg_quarter = max(quarter, key=quarter.get)
    ok = ok and arg_half == 19 and arg_quarter == 10
    detail = ", ".join(f"{k}: {v:.4f} (target {t})" for k, (v, t) in got.items())
    report(2, ok, f"{detail}; argmax y 1/2 = {arg_half}, 1/4 = {arg_quarter}; "
                  f"medians 1/2 {dict((y, round(v, 4)) for y, v in half.items())}, "
                  f"1/4 {dict((y, round(v, 4)) for y, v in quarter.items())}")


TABLE_I = [
    (5, {2: .2049, 3: .2489, 4: .1150, 5: .074, 6: .0210, 20: .3363}, {8: .9735, 9: .0265},
     0.4815, 0.4620, 5, 0.4699),
    (10, {2: .1894, 3: .2255, 4: .1431, 5: .1191, 6: .0357, 20: .2872}, {8: .9908, 9: .0012},
     0.4696, 0.4523, 9, 0.4638),
    (15, {2: .1632, 3: .1758, 4: .2143, 5: .1827, 6: .0543, 20: .2098}, {8: .9940, 9: .0060},
     0.4476, 0.4352, 14, 0.4534),
]


def test_criterion_3_table(report):
    code = hamming(4)
    ok = True
    parts = []
    for y_max, lam, rho, de_t, gc_t, y_opt, pd_t in TABLE_I:
        E = EnsembleDistribution.normalized(lam, rho)
        de = de_threshold(E)
        r = realize_and_sweep(E, DeConfig(code, y_max=y_max), seed=0)
        pd = r.thresholds[r.y_opt]
        ident = degree_transform(column_degrees(r.G_p), code, r.y_opt).as_dict(drop_zero=True) == \
            r.counts.as_dict(drop_zero=True)
        row_ok = (abs(de - de_t) <= 0.002 and abs(r.gc_threshold.epsilon_star - gc_t) <= 0.006
                  and r.y_opt == y_opt and abs(pd - pd_t) <= 0.006 and ident)
        ok &= row_ok
        parts.append(f"y_max={y_max}: DE {de:.4f}/{de_t}, G_c {r.gc_threshold.epsilon_star:.4f}/{gc_t}, "
                     f"y_opt {r.y_opt}/{y_opt}, PD {pd:.4f}/{pd_t}, transform {'exact' if ident else 'BROKEN'}")
    report(3, ok, "; ".join(parts))


def test_criterion_4_de_optimizer(report):
    t0 = time.time()
    cfg = DeConfig(hamming(4), y_max=5, l=20, r=9, R=Fraction(1, 2))
    res = optimize_ensemble(cfg)
    dt = time.time() - t0
    feasible = ensemble_constraints_ok(res.ensemble, cfg, tol=1e-12)
    ok = res.threshold >= 0.475 and feasible and dt <= 900
    report(4, ok, f"threshold {res.threshold:.4f} (>= 0.475), constraints {'met' if feasible else 'VIOLATED'}, "
                  f"{cfg.generations} generations, {dt:.0f}s")


def test_criterion_5_decoder_consistency(report):
    rng = np.random.default_rng(2024)
    bad_ml, bad_peel, wins, n_max = 0, 0, 0, 0
    for _ in range(1000):
        code = random_code(rng, max_nv=int(rng.integers(6, 40)))
        n_max = max(n_max, code.n)
        E = rng.random(code.n) < rng.uniform(0.1, 0.7)
        ok, _, _ = decode_block(code, E)
        wins += ok
        if ok and not erasure_rank_oracle(code, E):
            bad_ml += 1
    for _ in range(1000):
        code = random_code(rng, doped=False, max_nv=int(rng.integers(6, 40)))
        E = rng.random(code.n) < rng.uniform(0.1, 0.7)
        _, R, _ = decode_block(code, E)
        bad_peel += not np.array_equal(R, reference_peel(code.pcm.H, E))
    ok = bad_ml == 0 and bad_peel == 0 and n_max <= 2000
    report(5, ok, f"1000 doped codes (n <= {n_max}, {wins} successes): {bad_ml} oracle violations; "
                  f"1000 plain codes: {bad_peel} peeling mismatches")


def test_criterion_6_typical_dmin(report):
    rng = np.random.default_rng(6)
    checked, disagree = 0, 0
    for _ in range(200):
        n_v = int(rng.integers(2, 13))
        n_c = int(rng.integers(2, n_v // 2 + 3))
        B = random_base(rng, n_c, n_v, p2=0.7)
        for k in range(n_v + 1):
            for sub in itertools.combinations(range(n_v), k):
                doped = set(sub)
                checked += 1
                disagree += typical_dmin_check(B, doped)[0] != (not dfs_has_cycle(B, doped))
    report(6, disagree == 0, f"{checked} (protograph, doping subset) pairs, {disagree} disagreements")


def test_criterion_7_finite_length_ordering(report):
    t0 = time.time()
    h = hamming(4)
    N = 15
    r = construct_regular(RegularDesign(h, 400, Fraction(1, 2), y_values=(19,)), seed=0)
    Bp = r.base
    pd = dope_partial(Bp, lift(Bp, N, h.mu, rng_seed=derive_seed(0, "lift", "pd")), DopingSpec.leftmost(19, h))
    Dc = degree_transform(column_degrees(Bp), h, 19)
    Bi = peg_build(PegConfig(200, 400, Dc, rng_seed=derive_seed(0, "peg", "irr")))
    irr = plain_code(Bi, lift(Bi, N, 1, rng_seed=derive_seed(0, "lift", "irr")))
    Br = peg_build(PegConfig.regular(200, 400, 3, rng_seed=derive_seed(0, "peg", "reg")))
    reg = plain_code(Br, lift(Br, N, 1, rng_seed=derive_seed(0, "lift", "reg")))
    eps_star = r.threshold.epsilon_star
    wins = 0
    rows = []
    for k, off in enumerate((0.03, 0.02, 0.01)):
        eps = eps_star - off
        res = {name: run_bler(c, SimConfig(eps, max_blocks=10 ** 4, target_errors=10 ** 9,
                                           rng_seed=derive_seed(0, "sim", k), workers=default_workers()))
               for name, c in (("pd", pd), ("irr", irr), ("reg", reg))}
        hi_pd = res["pd"].interval[1]
        win = all(hi_pd < res[o].interval[0] for o in ("irr", "reg"))
        wins += win
        rows.append(f"eps={eps:.4f}: " + ", ".join(f"{n} {v.bler:.4f}[{v.interval[0]:.4f},{v.interval[1]:.4f}]"
                                                    for n, v in res.items()))
        assert all(v.blocks_run >= 10 ** 4 for v in res.values())
    report(7, wins >= 2, f"n={pd.n}, eps*={eps_star:.4f}, PD separated at {wins}/3 points "
                         f"({time.time() - t0:.0f}s); " + "; ".join(rows))


def test_criterion_8_replay_determinism(report, tmp_path):
    stem = tmp_path / "pd"
    assert main(["construct", "--mode", "regular", "--rate", "1/2", "--nv", "400", "--component", "4", "--N", "15",
                 "--y", "19", "--seed", "11", "--out", str(stem)]) == 0
    csv = tmp_path / "bler.csv"
    assert main(["simulate", "--code", str(stem) + ".alist", "--eps", "0.42,0.44", "--max-blocks", "1500",
                 "--target-errors", "40", "--seed", "11", "--out", str(csv)]) == 0
    checks = []
    for man, out in ((str(stem) + ".manifest.json", "pd.alist"), (str(csv) + ".manifest.json", "bler.csv")):
        for rep in ("a", "b"):
            d = tmp_path / f"replay_{out}_{rep}"
            rc = main(["replay", man, "--outdir", str(d)])
            same = (d / out).read_bytes() == (tmp_path / out).read_bytes()
            checks.append(rc == 0 and same)
    report(8, all(checks), f"{sum(checks)}/{len(checks)} replays byte-identical (alist and CSV)")
