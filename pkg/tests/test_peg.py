import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdgldpc.doping import typical_dmin_check
from pdgldpc.peg import PegConfig, peg_build
from pdgldpc.protograph import DegreeCountVector, InfeasibleDesignError, column_degrees


def test_regular_degrees_exact():
    B = peg_build(PegConfig.regular(200, 400, 3, rng_seed=1))
    assert column_degrees(B).as_dict() == {3: 400}
    # min-degree tie rule keeps the checks balanced
    assert B.row_degrees.max() - B.row_degrees.min() <= 2


@given(st.integers(0, 2 ** 32 - 1))
def test_seed_determinism(seed):
    cfg = PegConfig(6, 12, DegreeCountVector((2, 3), (6, 6)), rng_seed=seed)
    assert peg_build(cfg) == peg_build(cfg)


@given(st.integers(3, 8), st.integers(0, 1000))
def test_irregular_degrees_match(n_c, seed):
    D = DegreeCountVector((2, 3, 4), (n_c, n_c, 2))
    B = peg_build(PegConfig(n_c, D.n_v, D, rng_seed=seed))
    assert D.matches(B)
    assert (B.row_degrees >= 2).all()


def test_degree_two_first_order_is_a_forest():
    # n_c - 1 degree-2 columns processed first always form a tree
    n_c = 20
    D = DegreeCountVector((2, 3), (n_c - 1, 30))
    for seed in range(5):
        B = peg_build(PegConfig(n_c, D.n_v, D, rng_seed=seed))
        assert typical_dmin_check(B)[0]


def test_degree_above_check_count_gives_parallel_edges():
    D = DegreeCountVector((2, 5), (4, 2))
    B = peg_build(PegConfig(3, 6, D, rng_seed=0))
    assert D.matches(B) and B.entries.max() >= 2


def test_too_few_edges_rejected():
    with pytest.raises(InfeasibleDesignError):
        PegConfig(10, 4, DegreeCountVector((2,), (4,)))


def test_order_must_be_permutation():
    with pytest.raises(ValueError):
        PegConfig(2, 3, DegreeCountVector((2,), (3,)), order=(0, 0, 1))
