import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdgldpc.component import hamming
from pdgldpc.doping import DopingSpec, dope_partial
from pdgldpc.lifting import lift
from pdgldpc.protograph import base_from_rows
from pdgldpc.sim import (Decoder, SimConfig, SimResult, decode_block, erasure_rank_oracle, read_csv,
                         results_csv, run_bler)

from helpers import random_code, reference_peel


@pytest.fixture(scope="module")
def small_pd():
    return random_code(np.random.default_rng(7))


def test_zero_erasures(small_pd):
    ok, res, it = decode_block(small_pd, np.zeros(small_pd.n, dtype=bool))
    assert ok and it == 0 and not res.any()


def test_all_erased_fails(small_pd):
    ok, res, _ = decode_block(small_pd, np.ones(small_pd.n, dtype=bool))
    assert not ok and res.all()


def test_single_gc_block_resolves_two_erasures(h74):
    # GC block alone: every pair of erasures inside a (7,4) block is recovered
    B = base_from_rows([[1, 1, 1], [1, 1, 1]])
    code = dope_partial(B, lift(B, 7, 7, 0), DopingSpec((0,), h74))
    H_spc = code.spc_matrix().toarray()
    for a in range(7):
        for b in range(a + 1, 7):
            E = np.zeros(code.n, dtype=bool)
            E[[a, b]] = True
            # columns 0..6 each touch two SPC rows; make both pairs share no lone check
            ok, _, _ = decode_block(code, E)
            assert ok


def test_index_list_input(small_pd):
    ok, res, _ = decode_block(small_pd, [0, 1])
    assert res.shape == (small_pd.n,)


@given(st.integers(0, 10 ** 6), st.floats(0.05, 0.7))
def test_residual_subset_and_oracle(seed, eps):
    rng = np.random.default_rng(seed)
    code = random_code(rng)
    E = rng.random(code.n) < eps
    ok, R, _ = decode_block(code, E)
    assert not (R & ~E).any()
    if ok:
        assert erasure_rank_oracle(code, E)


@given(st.integers(0, 10 ** 6), st.floats(0.05, 0.6))
def test_monotone_in_erasures(seed, eps):
    rng = np.random.default_rng(seed)
    code = random_code(rng)
    E = rng.random(code.n) < eps
    F = E | (rng.random(code.n) < 0.1)
    okE, RE, _ = decode_block(code, E)
    okF, RF, _ = decode_block(code, F)
    assert not (okF and not okE)
    assert not (RE & ~RF).any()


@given(st.integers(0, 10 ** 6), st.floats(0.05, 0.7))
def test_plain_code_matches_reference_peeling(seed, eps):
    rng = np.random.default_rng(seed)
    code = random_code(rng, doped=False)
    E = rng.random(code.n) < eps
    _, R, _ = decode_block(code, E)
    assert np.array_equal(R, reference_peel(code.pcm.H, E))


def test_batch_equals_single(small_pd):
    rng = np.random.default_rng(1)
    E = rng.random((20, small_pd.n)) < 0.4
    R, _ = Decoder(small_pd).decode(E)
    for f in range(20):
        assert np.array_equal(R[f], decode_block(small_pd, E[f])[1])


def test_iterative_suboptimality_exists():
    # some plain-code erasure pattern stalls peeling yet is ML-decodable
    rng = np.random.default_rng(3)
    found = False
    for _ in range(200):
        code = random_code(rng, doped=False)
        E = rng.random(code.n) < 0.45
        ok, _, _ = decode_block(code, E)
        if not ok and erasure_rank_oracle(code, E):
            found = True
            break
    assert found


def test_oracle_empty_and_cap(small_pd):
    assert erasure_rank_oracle(small_pd, np.zeros(small_pd.n, dtype=bool))


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(1.5)
    with pytest.raises(ValueError):
        SimConfig(0.1, target_errors=0)


def test_run_bler_zero_epsilon(small_pd):
    r = run_bler(small_pd, SimConfig(0.0, max_blocks=100))
    assert r.bler == 0.0 and r.blocks_run == 100


def test_run_bler_stops_at_target(small_pd):
    r = run_bler(small_pd, SimConfig(0.9, max_blocks=10000, target_errors=37, chunk=16))
    assert r.block_errors == 37 and r.blocks_run == 37


def test_run_bler_respects_max_blocks(small_pd):
    r = run_bler(small_pd, SimConfig(0.3, max_blocks=1000, target_errors=10 ** 6, chunk=64))
    assert r.blocks_run == 1000


def test_run_bler_independent_of_workers(small_pd):
    cfg = dict(epsilon=0.45, max_blocks=600, target_errors=50, chunk=32, rng_seed=9)
    a = run_bler(small_pd, SimConfig(**cfg, workers=1))
    b = run_bler(small_pd, SimConfig(**cfg, workers=2))
    assert (a.blocks_run, a.block_errors, a.mean_iters) == (b.blocks_run, b.block_errors, b.mean_iters)
    assert a.residual_erasure_histogram == b.residual_erasure_histogram


def test_interval_contains_bler():
    r = SimResult(0.4, 1000, 7, 3.0)
    lo, hi = r.interval
    assert lo <= r.bler <= hi


def test_csv_roundtrip():
    rs = [SimResult(0.4, 1000, 7, 3.25), SimResult(0.41, 500, 0, 2.0)]
    rows = read_csv(results_csv(rs))
    assert [r["blocks"] for r in rows] == [1000, 500] and rows[0]["bler"] == 0.007
    assert list(rows[0]) == ["epsilon", "blocks", "errors", "bler", "ci_low", "ci_high", "mean_iters"]
