#!/usr/bin/env python3
"""
エネルギー計算のテスト（既知の値・オラクル・不等式）
"""

import pytest
import sys
from fractions import Fraction
from pathlib import Path

from hypothesis import given, settings, strategies as st
import pandas as pd

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core.energy import (
    additive_energy, cauchy_schwarz_check, difference_energy, energy, energy_bruteforce,
    multiplicative_energy, quarter_power_check, rep_function,
)
from src.core.exceptions import FieldMismatchError, PreconditionError
from src.core.families import FamilySpec, generate_family
from src.core.field import BinaryLaw, GroundField
from src.core.finite_set import FiniteSet, affine_image


Q = GroundField.rationals()
F7 = GroundField.prime(7)


class TestKnownValues:
    """閉じた式・既知の例との一致"""

    @pytest.mark.parametrize("n, expected", [(3, 19), (8, 344), (16, 2736)])
    def test_arithmetic_progression(self, n, expected):
        A = generate_family(FamilySpec.ap(1, 1, n))
        assert additive_energy(A) == expected == (2 * n ** 3 + n) // 3

    def test_geometric_progression_multiplicative(self):
        A = generate_family(FamilySpec.gp(1, 2, 16))
        assert multiplicative_energy(A) == 2736

    def test_sidon_set(self):
        assert additive_energy(FiniteSet.of(Q, [1, 2, 5, 11])) == 28

    def test_subgroup_of_f7(self):
        assert multiplicative_energy(FiniteSet.of(F7, [1, 2, 4])) == 27, "位数3の部分群は |A|^3"
        assert multiplicative_energy(FiniteSet.of(Q, [1, 2, 4])) == 19

    def test_mixed_energy(self):
        A, B = FiniteSet.of(F7, [1, 2, 4]), FiniteSet.of(F7, [2, 3, 5])
        assert energy(A, B, BinaryLaw.MUL) == 15

    def test_difference_energy_matches(self):
        A = FiniteSet.of(Q, [1, 2, 3])
        assert difference_energy(A) == additive_energy(A) == 19


class TestRepresentationFunction:
    """表現関数のテスト"""

    def test_counts(self):
        A = FiniteSet.of(Q, [1, 2, 3])
        r = rep_function(A, A, BinaryLaw.ADD)
        assert r[4] == 3
        assert r[7] == 0
        assert r.total() == 9
        assert r.energy() == 19
        assert len(r.support()) == 5

    def test_csv_dump(self, tmp_path):
        A = FiniteSet.of(Q, [1, 2])
        path = tmp_path / "rep.csv"
        rep_function(A, A, BinaryLaw.MUL).to_csv(path)
        frame = pd.read_csv(path, dtype=str)
        assert list(frame.columns) == ["value", "count"]
        assert frame["value"].tolist() == ["1", "2", "4"]
        assert frame["count"].tolist() == ["1", "2", "1"]


class TestPreconditions:
    """前提条件違反"""

    def test_zero_in_multiplicative_energy(self):
        with pytest.raises(PreconditionError):
            multiplicative_energy(FiniteSet.of(Q, [0, 1]))

    def test_field_mismatch(self):
        with pytest.raises(FieldMismatchError):
            energy(FiniteSet.of(Q, [1]), FiniteSet.of(F7, [1]), BinaryLaw.ADD)

    def test_bruteforce_cap(self):
        A = FiniteSet.of(Q, [1, 2, 3])
        with pytest.raises(PreconditionError):
            energy_bruteforce(A, A, BinaryLaw.ADD, cap=10)

    def test_energy_needs_add_or_mul(self):
        A = FiniteSet.of(Q, [1, 2])
        with pytest.raises(PreconditionError):
            energy(A, A, BinaryLaw.SUB)


class TestInequalities:
    """Cauchy–Schwarz と 1/4 乗の劣加法性"""

    def test_cauchy_schwarz_example(self):
        report = cauchy_schwarz_check(FiniteSet.of(Q, [1, 2, 3]))
        assert report.additive_product == 95
        assert report.fourth_power == 81
        assert report.multiplicative_product == 90
        assert report.passed

    def test_quarter_power_on_progression_halves(self):
        A = generate_family(FamilySpec.ap(1, 1, 12))
        parts = list(A.alternating_halves())
        report = quarter_power_check(parts, BinaryLaw.ADD)
        assert report.passed
        assert report.union_energy == additive_energy(A)

    def test_quarter_power_rejects_overlap(self):
        A = FiniteSet.of(Q, [1, 2])
        with pytest.raises(PreconditionError):
            quarter_power_check([A, A], BinaryLaw.ADD)


small_sets = st.sets(st.integers(min_value=-15, max_value=15), min_size=1, max_size=8)
nonzero_sets = st.sets(st.integers(min_value=1, max_value=30), min_size=1, max_size=8)


class TestProperties:
    """hypothesis による性質テスト"""

    @settings(max_examples=60, deadline=None)
    @given(small_sets)
    def test_additive_matches_bruteforce(self, values):
        A = FiniteSet.of(Q, values)
        assert energy(A, A, BinaryLaw.ADD) == energy_bruteforce(A, A, BinaryLaw.ADD)

    @settings(max_examples=60, deadline=None)
    @given(nonzero_sets, st.sampled_from([7, 11, 101]))
    def test_multiplicative_matches_bruteforce_mod_p(self, values, p):
        A = FiniteSet.of(GroundField.prime(p), values).without_zero()
        if len(A):
            assert energy(A, A, BinaryLaw.MUL) == energy_bruteforce(A, A, BinaryLaw.MUL)

    @settings(max_examples=60, deadline=None)
    @given(small_sets)
    def test_trivial_bounds(self, values):
        A = FiniteSet.of(Q, values)
        n = len(A)
        assert n * n <= additive_energy(A) <= n ** 3

    @settings(max_examples=40, deadline=None)
    @given(small_sets, st.integers(min_value=1, max_value=5), st.integers(min_value=-5, max_value=5))
    def test_affine_invariance(self, values, scale, shift):
        A = FiniteSet.of(Q, values)
        assert additive_energy(affine_image(A, scale, shift)) == additive_energy(A)

    @settings(max_examples=40, deadline=None)
    @given(nonzero_sets)
    def test_cauchy_schwarz_always_holds(self, values):
        assert cauchy_schwarz_check(FiniteSet.of(Q, values)).passed


rational_sets = st.sets(st.fractions(min_value=-12, max_value=12, max_denominator=4), min_size=1, max_size=8)
nonzero_rational_sets = rational_sets.map(lambda values: {v for v in values if v != 0}).filter(bool)
scalars = st.fractions(min_value=-6, max_value=6, max_denominator=5).filter(lambda v: v != 0)
labelled_elements = st.lists(
    st.tuples(st.integers(min_value=1, max_value=40), st.integers(min_value=0, max_value=4)),
    min_size=1, max_size=14, unique_by=lambda pair: pair[0],
)


class TestInvariance:
    """対称性とアフィン写像に対する不変性"""

    @settings(max_examples=60, deadline=None)
    @given(rational_sets, rational_sets)
    def test_additive_symmetry(self, left, right):
        A, B = FiniteSet.of(Q, left), FiniteSet.of(Q, right)
        assert energy(A, B, BinaryLaw.ADD) == energy(B, A, BinaryLaw.ADD)

    @settings(max_examples=60, deadline=None)
    @given(nonzero_rational_sets, nonzero_rational_sets)
    def test_multiplicative_symmetry(self, left, right):
        A, B = FiniteSet.of(Q, left), FiniteSet.of(Q, right)
        assert energy(A, B, BinaryLaw.MUL) == energy(B, A, BinaryLaw.MUL)

    @settings(max_examples=60, deadline=None)
    @given(nonzero_rational_sets, scalars)
    def test_multiplicative_dilation(self, values, scale):
        A = FiniteSet.of(Q, values)
        assert multiplicative_energy(affine_image(A, scale, 0)) == multiplicative_energy(A)

    @settings(max_examples=60, deadline=None)
    @given(rational_sets, scalars, st.fractions(min_value=-10, max_value=10, max_denominator=6))
    def test_additive_affine_with_rational_scale(self, values, scale, shift):
        A = FiniteSet.of(Q, values)
        assert additive_energy(affine_image(A, scale, shift)) == additive_energy(A)

    def test_negative_fractional_dilation_example(self):
        A = FiniteSet.of(Q, [1, 2, 4])
        image = affine_image(A, Fraction(-3, 2), 0)
        assert image.formatted() == ["-6", "-3", "-3/2"]
        assert multiplicative_energy(image) == multiplicative_energy(A) == 19
        assert additive_energy(image) == additive_energy(A)


class TestQuarterPowerProperty:
    """1/4 乗の劣加法性（5 個以下の部分への分割、両演算）"""

    @settings(max_examples=500, deadline=None)
    @given(labelled_elements, st.booleans())
    def test_random_partitions(self, labelled, prime):
        field = GroundField.prime(101) if prime else Q
        parts = [
            FiniteSet.of(field, [value for value, label in labelled if label == j])
            for j in range(5)
        ]
        parts = [part for part in parts if len(part)]
        for law in (BinaryLaw.ADD, BinaryLaw.MUL):
            report = quarter_power_check(parts, law)
            assert report.passed, f"{law.value} で E^(1/4) の劣加法性が破れた"


if __name__ == "__main__":
    # pytest実行
    pytest.main([__file__, "-v"])
