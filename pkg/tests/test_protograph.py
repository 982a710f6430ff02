import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdgldpc.protograph import (BaseMatrix, DegreeCountVector, EnsembleDistribution, InfeasibleDesignError,
                                InvalidProtographError, base_from_rows, column_degrees, conventional_rate,
                                design_rate, load_base, realize_counts, save_base, validate_ensemble)


def test_column_degrees_small_example():
    B = base_from_rows([[1, 1, 1], [1, 0, 1]])
    assert column_degrees(B).as_dict() == {1: 1, 2: 2}


def test_column_degrees_regular():
    B = BaseMatrix(np.ones((3, 6), dtype=int))
    assert column_degrees(B).as_dict() == {3: 6}


@pytest.mark.parametrize("rows", [[[1, 0], [1, 0]], [[1, 1], [0, 1]], [[1, -1], [1, 1]]])
def test_invalid_base_rejected(rows):
    with pytest.raises(InvalidProtographError):
        base_from_rows(rows)


def test_base_is_read_only():
    B = base_from_rows([[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        B.entries[0, 0] = 3


def test_design_rate_examples():
    assert design_rate((124, 400), (15, 11, 19)) == Fraction(1, 2)
    assert design_rate((260, 400), (15, 11, 10)) == Fraction(1, 4)
    with pytest.raises(InfeasibleDesignError):
        design_rate((400, 400))


@given(st.integers(1, 50), st.integers(0, 10))
def test_design_rate_formula(n_c, y):
    n_v = 400
    if n_c + 4 * y >= n_v:
        return
    assert design_rate((n_c, n_v), (15, 11, y)) == 1 - Fraction(n_c + 4 * y, n_v)


def test_conventional_rate_fig1_style():
    B = base_from_rows([[1, 1, 1, 1, 1, 1, 1, 1], [1, 1, 1, 1, 1, 1, 1, 1]])
    assert conventional_rate(B, {0: (8, 4)}) == 1 - Fraction(5, 8)


def test_ensemble_validation():
    E = EnsembleDistribution({3: 1.0}, {6: 1.0})
    assert validate_ensemble(E, Fraction(1, 2))
    assert not validate_ensemble(E, Fraction(1, 3))
    with pytest.raises(ValueError):
        EnsembleDistribution({3: 0.7}, {6: 1.0})
    with pytest.raises(ValueError):
        EnsembleDistribution({3: 1.2, 4: -0.2}, {6: 1.0})


def test_ensemble_json_roundtrip():
    E = EnsembleDistribution({2: 0.25, 3: 0.75}, {6: 0.5, 7: 0.5})
    assert EnsembleDistribution.from_json(json.loads(json.dumps(E.to_json()))) == E


def test_realize_counts_table_row_one():
    E = EnsembleDistribution.normalized({2: .2049, 3: .2489, 4: .1150, 5: .074, 6: .0210, 20: .3363},
                                        {8: .9735, 9: .0265})
    assert realize_counts(E, 400).counts == (165, 134, 47, 23, 5, 26)


def test_realize_counts_quarter_rate():
    E = EnsembleDistribution.normalized({2: .2858, 3: .1218, 4: .0533, 5: .0369, 6: .0095, 30: .4927},
                                        {6: .9995, 7: .0005})
    assert realize_counts(E, 400).counts == (258, 74, 24, 13, 2, 29)


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6), st.integers(10, 500))
def test_realize_counts_sum(coeffs, n_v):
    degs = [2, 3, 4, 5, 6, 20][: len(coeffs)]
    E = EnsembleDistribution.normalized(dict(zip(degs, coeffs)), {6: 1.0})
    D = realize_counts(E, n_v)
    assert D.n_v == n_v and min(D.counts) >= 0


def test_degree_count_vector_invariants():
    with pytest.raises(ValueError):
        DegreeCountVector((3, 2), (1, 1))
    with pytest.raises(ValueError):
        DegreeCountVector((2,), (-1,))
    D = DegreeCountVector.from_dict({3: 2, 2: 1})
    assert D.degrees == (2, 3) and D.column_list() == [2, 3, 3]


def test_base_json_roundtrip(tmp_path):
    B = base_from_rows([[1, 2, 0], [1, 0, 3]])
    save_base(B, tmp_path / "b.json")
    assert load_base(tmp_path / "b.json") == B
    assert column_degrees(B).matches(B)
