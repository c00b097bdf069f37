#!/usr/bin/env python3
"""
基礎体・有限集合・生成族・集合ファイルのテスト
"""

import pytest
import sys
import unittest
from fractions import Fraction
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core.exceptions import FieldMismatchError, PreconditionError
from src.core.families import (
    FamilySpec, generate_family, parse_family_spec, spawn_seeds, with_seed,
)
from src.core.field import BinaryLaw, FieldElem, GroundField
from src.core.finite_set import (
    FiniteSet, affine_image, pointwise_combine, r_set, translate_intersection,
)
from src.utils.set_io import parse_set_text, read_set_file, serialize_set, write_set_file


Q = GroundField.rationals()
F7 = GroundField.prime(7)


class TestGroundField(unittest.TestCase):
    """GroundField / FieldElem のテスト"""

    def test_prime_field_requires_prime(self):
        with self.assertRaises(PreconditionError):
            GroundField.prime(9)
        with self.assertRaises(PreconditionError):
            GroundField.prime(2)

    def test_normalize_rational_into_prime_field(self):
        # 1/2 = 4 (mod 7)
        assert F7.normalize(Fraction(1, 2)) == 4, "1/2 は 𝔽7 で 4"
        assert F7.normalize("-1") == 6
        with self.assertRaises(PreconditionError):
            F7.normalize(Fraction(1, 7))

    def test_float_is_rejected(self):
        with self.assertRaises(TypeError):
            Q.normalize(0.5)

    def test_element_arithmetic(self):
        three = F7.element(3)
        assert (three * 5).value == 1
        assert (1 / three).value == 5
        assert str(Q.element("-2/4")) == "-1/2"

    def test_mixed_fields_raise(self):
        with self.assertRaises(FieldMismatchError):
            FieldElem(F7, 1) + FieldElem(GroundField.prime(11), 1)


class TestFiniteSet:
    """FiniteSet と集合演算のテスト"""

    def test_of_sorts_and_deduplicates(self):
        A = FiniteSet.of(Q, [3, "1/2", 3, Fraction(6, 2)])
        assert A.formatted() == ["1/2", "3"]
        assert len(A) == 2

    def test_values_must_be_increasing(self):
        with pytest.raises(PreconditionError):
            FiniteSet(Q, (2, 1))

    def test_membership_and_zero(self):
        A = FiniteSet.of(F7, [0, 3])
        assert 10 in A, "10 = 3 (mod 7)"
        assert A.contains_zero()
        with pytest.raises(PreconditionError):
            A.with_zero_excluded()
        assert not A.without_zero().contains_zero()

    def test_inverted_and_negated(self):
        A = FiniteSet.of(Q, [1, 2, 4])
        assert A.inverted().formatted() == ["1/4", "1/2", "1"]
        assert A.negated().formatted() == ["-4", "-2", "-1"]
        assert A.prefix(2).formatted() == ["1", "2"]

    def test_alternating_halves_partition(self):
        A = FiniteSet.of(Q, range(1, 8))
        even, odd = A.alternating_halves()
        assert even.isdisjoint(odd)
        assert even.union(odd) == A
        assert len(even) == 4 and len(odd) == 3

    def test_affine_image_in_prime_field(self):
        A = FiniteSet.of(F7, [1, 2, 4])
        assert affine_image(A, 1, 3).formatted() == ["0", "4", "5"]
        with pytest.raises(PreconditionError):
            affine_image(A, 0, 1)

    def test_r_set_example(self):
        A = FiniteSet.of(Q, [0, 1, 2])
        assert r_set(A).formatted() == ["-1", "0", "1/2", "1", "2"]

    def test_r_set_edge_cases(self):
        assert len(r_set(FiniteSet.of(Q, [5]))) == 0, "一元集合の R は空"
        with pytest.raises(PreconditionError):
            r_set(FiniteSet.empty(Q))

    def test_translate_intersection(self):
        A = FiniteSet.of(Q, [1, 2, 3, 4])
        assert translate_intersection(A, 1, BinaryLaw.ADD).formatted() == ["2", "3", "4"]
        B = FiniteSet.of(Q, [1, 2, 3, 6])
        assert translate_intersection(B, 6, BinaryLaw.MUL) == B
        with pytest.raises(PreconditionError):
            translate_intersection(B, 0, BinaryLaw.MUL)

    def test_pointwise_combine(self):
        A = FiniteSet.of(Q, [1, 2, 3])
        assert len(pointwise_combine(A, A, BinaryLaw.ADD)) == 5
        with pytest.raises(PreconditionError):
            pointwise_combine(A, FiniteSet.of(Q, [0]), BinaryLaw.DIV)

    def test_mixed_field_sets_raise(self):
        with pytest.raises(FieldMismatchError):
            FiniteSet.of(Q, [1]).union(FiniteSet.of(F7, [1]))


class TestFamilies:
    """生成族のテスト"""

    def test_progressions(self):
        assert generate_family(FamilySpec.ap(1, 1, 5)).formatted() == ["1", "2", "3", "4", "5"]
        assert generate_family(FamilySpec.gp(1, 2, 5)).formatted() == ["1", "2", "4", "8", "16"]

    def test_progression_collision_in_prime_field(self):
        with pytest.raises(PreconditionError):
            generate_family(FamilySpec.ap(1, 1, 8, p=7))

    def test_bw_union_defaults(self):
        A = generate_family(FamilySpec.bw_union(4))
        assert A.formatted() == ["1", "2", "3", "4", "5", "10", "20", "40"]
        assert A.excludes_zero

    def test_sidon_and_subgroup(self):
        assert generate_family(FamilySpec.sidon(5)).formatted() == ["1", "2", "4", "8", "13"]
        assert generate_family(FamilySpec.mult_subgroup(7, 3)).formatted() == ["1", "2", "4"]
        assert len(generate_family(FamilySpec.field_units(101))) == 100
        with pytest.raises(PreconditionError):
            generate_family(FamilySpec.mult_subgroup(7, 4))

    def test_bw_intertwined_size(self):
        A = generate_family(FamilySpec.bw_intertwined(3))
        assert len(A) == 27
        assert not A.contains_zero()

    def test_random_subset_is_deterministic(self):
        spec = parse_family_spec("random:size=17,seed=7,of=field_units:101")
        first, second = generate_family(spec), generate_family(spec)
        assert first == second
        assert len(first) == 17
        assert first.issubset(generate_family(FamilySpec.field_units(101)))
        other = generate_family(with_seed(spec, 8))
        assert other != first, "seed を変えると別の部分集合"

    def test_spec_strings(self):
        assert parse_family_spec("ap:1,1,10@101").p == 101
        assert parse_family_spec("bw_union:32").n == 32
        spec = parse_family_spec("gp:1,2,16")
        assert parse_family_spec(spec.describe()) == spec
        for bad in ("ap", "cube:3", "random:size=3,of=ap:1,1,5", "ap:1,x,3"):
            with pytest.raises(PreconditionError):
                parse_family_spec(bad)

    def test_spawn_seeds(self):
        assert spawn_seeds(0, 3) == spawn_seeds(0, 3)
        assert len(set(spawn_seeds(0, 3))) == 3


class TestSetFiles:
    """集合ファイルの読み書きのテスト"""

    def test_prime_field_header(self):
        A = FiniteSet.of(F7, [4, 1, 2])
        text = serialize_set(A)
        assert text == "# field=prime p=7\n1\n2\n4\n"
        assert parse_set_text(text) == A

    def test_char0_has_no_header(self):
        text = serialize_set(FiniteSet.of(Q, ["1/2", -3]))
        assert text == "-3\n1/2\n"

    def test_file_round_trip_is_byte_stable(self, tmp_path):
        path = tmp_path / "a.set"
        write_set_file(generate_family(FamilySpec.gp(1, "1/2", 4)), path)
        first = path.read_text(encoding="utf-8")
        write_set_file(read_set_file(path), path)
        assert path.read_text(encoding="utf-8") == first

    def test_duplicates_and_comments(self):
        A = parse_set_text("1\n\n# comment\n2/2\n3\n")
        assert A.formatted() == ["1", "3"]

    def test_bad_lines(self):
        with pytest.raises(PreconditionError):
            parse_set_text("1\nabc\n")
        with pytest.raises(PreconditionError):
            parse_set_text("# field=prime p=7\n1\n", field=Q)


if __name__ == "__main__":
    # pytest実行
    pytest.main([__file__, "-v"])
