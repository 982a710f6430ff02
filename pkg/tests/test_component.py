import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdgldpc import gf2
from pdgldpc.component import (ComponentCode, InconsistentErasureError, enumerated_e_tilde, exit_closed_form,
                               exit_oracle, gaussian_binomial, gc_exit_function, hamming, hamming_e_tilde,
                               ml_erase_decode, resolution_table, spc)


def test_hamming_parameters():
    for m in range(2, 6):
        c = hamming(m)
        assert (c.mu, c.kappa, c.d_min) == (2 ** m - 1, 2 ** m - 1 - m, 3)
        assert c.is_hamming
        assert np.array_equal(c.pcm[:, -m:], np.eye(m, dtype=np.uint8))


def test_hamming_brute_force_distance(h74):
    assert ComponentCode.from_pcm(h74.pcm).d_min == 3


def test_bad_hamming_parameter():
    with pytest.raises(ValueError):
        hamming(1)


def test_rank_deficient_pcm_rejected():
    with pytest.raises(ValueError):
        ComponentCode(mu=3, kappa=1, pcm=np.array([[1, 1, 0], [1, 1, 0]]))


def test_weight_profile_1511(h1511):
    assert h1511.weight_profile() == {1: 4, 2: 6, 3: 4, 4: 1}


def test_gaussian_binomial_small():
    assert gaussian_binomial(3, 1) == 7
    assert gaussian_binomial(4, 2) == 35
    assert gaussian_binomial(2, 3) == 0


@pytest.mark.parametrize("m", [2, 3, 4])
def test_e_tilde_closed_form_matches_enumeration(m):
    assert hamming_e_tilde(m) == enumerated_e_tilde(hamming(m))


def test_e_tilde_boundary_values():
    # all columns of a (7,4) pcm have rank 3; no column is zero
    e = hamming_e_tilde(3)
    assert e[0] == 0 and e[1] == 7 and e[7] == 3


@pytest.mark.parametrize("m", [2, 3])
def test_closed_form_matches_oracle_on_grid(m):
    c = hamming(m)
    x = np.linspace(0, 1, 101)
    assert np.max(np.abs(exit_closed_form(c, x) - exit_oracle(c, x))) < 1e-12


def test_exit_endpoints(h74):
    assert exit_closed_form(h74, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert exit_closed_form(h74, 1.0) == pytest.approx(1.0)


def test_exit_rejects_out_of_range(h74):
    with pytest.raises(ValueError):
        exit_closed_form(h74, 1.5)


@given(st.floats(0, 1), st.floats(0, 1))
def test_exit_monotone(a, b):
    c = hamming(3)
    lo, hi = min(a, b), max(a, b)
    assert exit_closed_form(c, lo) <= exit_closed_form(c, hi) + 1e-12


def test_spc_exit_is_product():
    # an SPC of length mu returns x^(mu-1)
    c = spc(4)
    x = np.linspace(0, 1, 11)
    assert np.allclose(exit_oracle(c, x), x ** 3)


def test_gc_exit_function_uses_closed_form_for_hamming(h74):
    f = gc_exit_function(h74)
    assert f(0.5) == pytest.approx(float(exit_oracle(h74, 0.5)), abs=1e-12)


def brute_force_resolvable(code, erased):
    """Positions fixed by every codeword that is zero off the erased set."""
    erased = sorted(erased)
    sols = []
    for bits in itertools.product((0, 1), repeat=len(erased)):
        x = np.zeros(code.mu, dtype=np.int64)
        x[erased] = bits
        if not np.any(code.pcm.astype(np.int64) @ x % 2):
            sols.append(x)
    return {e for e in erased if all(s[e] == 0 for s in sols)}


def test_ml_decode_matches_brute_force_exhaustive(h74):
    for k in range(8):
        for E in itertools.combinations(range(7), k):
            resolved, unresolved = ml_erase_decode(h74, E)
            assert set(resolved) == brute_force_resolvable(h74, E)
            assert all(v == 0 for v in resolved.values())
            assert unresolved == set(E) - set(resolved)


def test_ml_decode_two_erasures_always_resolved(h74):
    for E in itertools.combinations(range(7), 2):
        resolved, unresolved = ml_erase_decode(h74, E)
        assert not unresolved


@given(st.integers(0, 2 ** 7 - 1), st.integers(0, 2 ** 4 - 1))
def test_ml_decode_recovers_codeword_values(mask, msg):
    c = hamming(3)
    # systematic: message in the first kappa positions, parity from the identity block
    P = c.pcm[:, :4].astype(np.int64)
    u = np.array([(msg >> i) & 1 for i in range(4)])
    x = np.concatenate([u, P @ u % 2])
    E = [i for i in range(7) if (mask >> i) & 1]
    resolved, _ = ml_erase_decode(c, E, x)
    for i, v in resolved.items():
        assert v == x[i]


def test_ml_decode_inconsistent(h74):
    known = np.zeros(7, dtype=int)
    known[0] = 1
    with pytest.raises(InconsistentErasureError):
        ml_erase_decode(h74, [], known)


def test_ml_decode_position_range(h74):
    with pytest.raises(ValueError):
        ml_erase_decode(h74, [7])


def test_resolution_table_agrees_with_ml_decode(h74):
    tab = resolution_table(h74)
    for mask in range(1 << 7):
        E = [i for i in range(7) if (mask >> i) & 1]
        resolved, _ = ml_erase_decode(h74, E)
        assert tab[mask] == sum(1 << i for i in resolved)


def test_resolution_table_is_monotone(h74):
    tab = resolution_table(h74)
    for mask in range(1 << 7):
        for i in range(7):
            if (mask >> i) & 1:
                sub = mask & ~(1 << i)
                # fewer erasures: everything resolvable before stays resolvable
                assert (tab[mask] & sub) & ~tab[sub] == 0
