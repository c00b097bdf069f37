#!/usr/bin/env python3
"""
分解（bw / balanced / product / translate / reciprocal / R[A]）のテスト
"""

import pytest
import sys
import unittest
from fractions import Fraction
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core.decompose import (
    balanced_decompose, bw_decompose, default_M, density_exponent, few_sums_decompose,
    product_energy_pipeline, r_set_decompose, step_size_factor, translate_decompose,
)
from src.core.energy import additive_energy, multiplicative_energy
from src.core.config import get_config
from src.core.exceptions import InvariantViolation, PreconditionError
from src.core.families import FamilySpec, generate_family
from src.core.field import GroundField
from src.core.finite_set import FiniteSet, affine_image, r_set
from src.interfaces.results import DecompositionVariant


Q = GroundField.rationals()

CORPUS = [
    FamilySpec.bw_union(8),
    FamilySpec.bw_union(16),
    FamilySpec.gp(1, 2, 12),
    FamilySpec.ap(1, 1, 20),
    FamilySpec.sidon(10),
    FamilySpec.bw_intertwined(3),
]


def _is_partition(A, B, C) -> bool:
    return B.isdisjoint(C) and B.union(C) == A


class TestStepCap:
    """bw の各段の大きさと反復回数の上限"""

    def test_steps_meet_certified_size(self):
        A = generate_family(FamilySpec.gp(1, 2, 16))
        trace = bw_decompose(A)
        factor = step_size_factor(16, trace.M)
        assert factor == 16 * 5 ** 2 * 2, "c·⌈log₂32⌉²·M"
        assert trace.steps, "E^×(gp16) = 2736 > 16^3/2"
        for step in trace.steps:
            assert len(step.D) * factor >= 16
        assert trace.metrics["step_cap"] == 800

    def test_tight_cap_is_enforced(self, monkeypatch):
        # c = 1/50 で c·L²·M = 1：上限 1 段、各段は A 全体を要する
        monkeypatch.setitem(get_config().config["decompose"], "step_size_constant", "1/50")
        A = generate_family(FamilySpec.gp(1, 2, 16))
        assert step_size_factor(16, Fraction(2)) == 1
        with pytest.raises(InvariantViolation):
            bw_decompose(A)

    def test_cap_holds_on_larger_union(self):
        A = generate_family(FamilySpec.bw_union(32))
        trace = bw_decompose(A)
        assert len(trace.steps) <= trace.metrics["step_cap"]
        assert all(len(step.D) * step_size_factor(len(A), trace.M) >= len(A) for step in trace.steps)


class TestBwDecompose(unittest.TestCase):
    """bw_decompose の契約"""

    def test_contract_on_corpus(self):
        for spec in CORPUS:
            A = generate_family(spec)
            trace = bw_decompose(A)
            n = len(A)
            assert _is_partition(A, trace.B, trace.C), f"{spec.describe()} が分割になっていない"
            assert multiplicative_energy(trace.C) <= Fraction(n ** 3) / trace.M
            assert len(trace.steps) <= min(n, trace.metrics["step_cap"])
            assert trace.metrics["energy_add_B"] == additive_energy(trace.B)

    def test_default_M(self):
        A = generate_family(FamilySpec.ap(1, 1, 16))
        assert density_exponent(A) == Fraction(1, 4)
        assert default_M(A) == 2
        assert bw_decompose(A).M == 2

    def test_trivial_M_stops_immediately(self):
        A = generate_family(FamilySpec.gp(1, 2, 8))
        trace = bw_decompose(A, M=1)
        assert trace.steps == []
        assert trace.C == A

    def test_steps_record_certificates(self):
        A = generate_family(FamilySpec.gp(1, 2, 16))
        trace = bw_decompose(A, M=8)
        assert trace.steps, "等比数列では少なくとも一回抽出する"
        for step in trace.steps:
            assert step.certificate is not None
            assert step.D.issubset(step.certificate.A1)

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            bw_decompose(FiniteSet.of(Q, [0, 1, 2]))
        with pytest.raises(PreconditionError):
            bw_decompose(FiniteSet.of(Q, [1, 2]), M=5)
        with pytest.raises(PreconditionError):
            bw_decompose(FiniteSet.empty(Q))

    def test_prime_field_warning(self):
        A = generate_family(FamilySpec.gp(1, 2, 10, p=101))
        trace = bw_decompose(A, M=100)
        assert any("p^2" in message for message in trace.warnings)


class TestBalanced:
    """均衡分解のサイズ保証"""

    @pytest.mark.parametrize("spec", CORPUS, ids=lambda s: s.describe())
    def test_sizes(self, spec):
        A = generate_family(spec)
        third = -(-len(A) // 3)
        for result in (balanced_decompose(A), few_sums_decompose(A)):
            assert min(len(result.B), len(result.C)) >= third
            assert result.B.isdisjoint(result.C)
            assert result.B.union(result.C).issubset(A)

    def test_outset_split_for_small_energy(self):
        A = FiniteSet.of(Q, [1, 2, 5, 11])
        result = balanced_decompose(A)
        assert result.branch == "outset-split"
        assert result.B.formatted() == ["1", "5"]
        assert result.C.formatted() == ["2", "11"]

    def test_energies_reported(self):
        A = generate_family(FamilySpec.bw_union(16))
        result = balanced_decompose(A)
        assert result.energies == {"add_B": additive_energy(result.B), "mul_C": multiplicative_energy(result.C)}
        assert "char0_ratio" in result.metrics
        swapped = few_sums_decompose(A)
        assert swapped.variant == DecompositionVariant.FEW_SUMS
        assert set(swapped.energies) == {"mul_B", "add_C"}
        assert "few_sums_ratio" in swapped.metrics

    def test_prime_field_size_limit(self):
        A = generate_family(FamilySpec.field_units(7))
        with pytest.raises(PreconditionError):
            balanced_decompose(A)

    def test_needs_two_elements(self):
        with pytest.raises(PreconditionError):
            balanced_decompose(FiniteSet.of(Q, [3]))


class TestProductPipeline:
    """二段階分解"""

    @pytest.mark.parametrize("spec", CORPUS[:4], ids=lambda s: s.describe())
    def test_parts(self, spec):
        A = generate_family(spec)
        result = product_energy_pipeline(A)
        assert result.B.isdisjoint(result.C)
        assert 9 * min(len(result.B), len(result.C)) >= len(A)
        assert result.branch in ("remainder-pair", "inner-pair")
        assert result.energies["add_B"] == additive_energy(result.B)
        assert result.energies["mul_C"] == multiplicative_energy(result.C)

    def test_too_small(self):
        with pytest.raises(PreconditionError):
            product_energy_pipeline(FiniteSet.of(Q, [1, 2, 3]))


class TestTranslateVariants:
    """平行移動・逆数版"""

    def test_mult_translate(self):
        A = generate_family(FamilySpec.ap(1, 1, 20))
        trace = translate_decompose(A, 1, DecompositionVariant.MULT_TRANSLATE)
        assert _is_partition(A, trace.B, trace.C)
        assert multiplicative_energy(affine_image(trace.C, 1, 1)) <= trace.threshold
        assert trace.monitored == "E^x(alpha+C)"

    def test_alpha_preconditions(self):
        A = generate_family(FamilySpec.ap(1, 1, 5))
        with pytest.raises(PreconditionError):
            translate_decompose(A, 0, DecompositionVariant.MULT_TRANSLATE)
        with pytest.raises(PreconditionError):
            translate_decompose(A, -3, DecompositionVariant.MULT_TRANSLATE)
        with pytest.raises(PreconditionError):
            translate_decompose(A, 1, DecompositionVariant.BW)

    def test_reciprocal(self):
        A = generate_family(FamilySpec.ap(1, 1, 20))
        trace = translate_decompose(A, None, DecompositionVariant.RECIPROCAL)
        assert _is_partition(A, trace.B, trace.C)
        assert additive_energy(trace.C.inverted()) <= trace.threshold

    def test_reciprocal_needs_rationals(self):
        A = generate_family(FamilySpec.ap(1, 1, 5, p=101))
        with pytest.raises(PreconditionError):
            translate_decompose(A, None, DecompositionVariant.RECIPROCAL)


class TestRSetDecompose:
    """R[A] の二つの部分集合"""

    @pytest.mark.parametrize("values", [[1, 2, 3], [0, 1, 2], [1, 2, 4, 8], [1, 3, 4, 9]])
    def test_sizes_and_membership(self, values):
        A = FiniteSet.of(Q, values)
        result = r_set_decompose(A)
        R = r_set(A)
        half = -(-len(R) // 2)
        assert result.R == R
        assert 1 in result.R_prime and 0 in result.R_dprime
        for part in (result.R_prime, result.R_dprime):
            assert part.issubset(R)
            assert len(part) >= half
        assert result.energies["mul_R_prime"] == multiplicative_energy(result.R_prime)

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            r_set_decompose(FiniteSet.of(Q, [1]))
        with pytest.raises(PreconditionError):
            r_set_decompose(FiniteSet.of(GroundField.prime(7), [1, 2]))


if __name__ == "__main__":
    # pytest実行
    pytest.main([__file__, "-v"])
