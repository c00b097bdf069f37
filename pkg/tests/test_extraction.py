#!/usr/bin/env python3
"""
構造的部分集合抽出（二進鳩の巣）のテスト
"""

import pytest
import sys
import unittest
from dataclasses import replace
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core.exceptions import PreconditionError
from src.core.extraction import (
    dyadic_level, extract_structured_subset, heaviest_dyadic_class, log2_ceiling_of_double,
    recheck_certificate, verify_extraction_bound,
)
from src.core.families import FamilySpec, generate_family
from src.core.field import GroundField
from src.core.finite_set import FiniteSet
from src.interfaces.results import Axis, BoundTarget, ExtractionLaw


Q = GroundField.rationals()


class TestDyadicHelpers(unittest.TestCase):
    """二進クラスの補助関数"""

    def test_dyadic_level(self):
        assert [dyadic_level(c) for c in (1, 2, 3, 4, 7, 8)] == [1, 2, 2, 4, 4, 8]

    def test_log2_ceiling(self):
        assert log2_ceiling_of_double(1) == 1
        assert log2_ceiling_of_double(5) == 4

    def test_ties_prefer_smaller_level(self):
        # level 1 のクラス {a, b, c, d}（重み 4）と level 2 のクラス {e}（重み 4）
        counts = {"a": 1, "b": 1, "c": 1, "d": 1, "e": 2}
        level, members, classes = heaviest_dyadic_class(counts, lambda t, size: t * t * size)
        assert level == 1
        assert members == ["a", "b", "c", "d"]
        assert classes == 2


class TestExtraction:
    """extract_structured_subset のテスト"""

    def test_geometric_progression(self):
        A = generate_family(FamilySpec.gp(1, 2, 5))
        cert = extract_structured_subset(A, ExtractionLaw.MUL_SLOPES)
        assert cert.P.formatted() == ["1/2", "1", "2"]
        assert cert.t == 4
        assert len(cert.S) == 13
        assert cert.A1 == A
        assert cert.q == 2
        assert cert.axis == Axis.ABSCISSAE
        assert not cert.q_capped

    def test_two_elements(self):
        A = FiniteSet.of(Q, [1, 2])
        cert = extract_structured_subset(A, ExtractionLaw.MUL_SLOPES)
        assert cert.P.formatted() == ["1"]
        assert cert.t == 2
        assert cert.A1 == A
        assert cert.energy == 6

    @pytest.mark.parametrize("law", list(ExtractionLaw))
    def test_certificate_rechecks(self, law):
        A = generate_family(FamilySpec.bw_union(8))
        cert = extract_structured_subset(A, law)
        ok, reason = recheck_certificate(cert, A)
        assert ok, f"再検証に失敗: {reason}"
        assert cert.A1.issubset(A)
        assert len(cert.P) * cert.t <= len(cert.S) < 2 * len(cert.P) * cert.t

    def test_popular_differences_are_symmetric(self):
        A = generate_family(FamilySpec.ap(1, 1, 10))
        cert = extract_structured_subset(A, ExtractionLaw.SUB_DIFFERENCES)
        assert cert.P.negated() == cert.P

    def test_tampered_certificate_fails_recheck(self):
        A = generate_family(FamilySpec.gp(1, 2, 5))
        cert = extract_structured_subset(A, ExtractionLaw.MUL_SLOPES)
        ok, _ = recheck_certificate(replace(cert, t=cert.t * 2), A)
        assert not ok

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            extract_structured_subset(FiniteSet.of(Q, [1]), ExtractionLaw.ADD_SUMS)
        with pytest.raises(PreconditionError):
            extract_structured_subset(FiniteSet.of(Q, [0, 1, 2]), ExtractionLaw.MUL_SLOPES)


class TestBoundTargets:
    """抽出結果に対する比率"""

    def test_slope_targets(self):
        A = generate_family(FamilySpec.bw_union(8))
        cert = extract_structured_subset(A, ExtractionLaw.MUL_SLOPES)
        for target in (BoundTarget.SUBSET_ADDITIVE, BoundTarget.ENERGY_PRODUCT):
            report = verify_extraction_bound(cert, A, target)
            assert report.target == target
            assert report.lhs > 0
            assert report.ratio is not None

    def test_sum_targets(self):
        A = generate_family(FamilySpec.gp(1, 2, 8))
        cert = extract_structured_subset(A, ExtractionLaw.ADD_SUMS)
        report = verify_extraction_bound(cert, A, BoundTarget.PRODUCT_GROWTH)
        assert report.lhs >= len(cert.A1)

    def test_target_law_mismatch(self):
        A = generate_family(FamilySpec.gp(1, 2, 5))
        cert = extract_structured_subset(A, ExtractionLaw.MUL_SLOPES)
        with pytest.raises(PreconditionError):
            verify_extraction_bound(cert, A, BoundTarget.SUBSET_MULTIPLICATIVE)


if __name__ == "__main__":
    # pytest実行
    pytest.main([__file__, "-v"])
