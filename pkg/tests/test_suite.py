#!/usr/bin/env python3
"""
verify-all の一括チェックと設定管理のテスト
"""

import pytest
import sys
import unittest
import unittest.mock
from fractions import Fraction
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core.config import Config
from src.core.families import FamilySpec, generate_family, seeded_generator
from src.suite import (
    SuiteCheck, bw_ladder, check_balanced_ratios, check_known_values, check_octuple_oracle, random_rational_set,
    random_residue_set, run_suite,
)


class TestSuite:
    """一括チェック"""

    def test_quick_suite_passes(self):
        checks = run_suite(seed=0, quick=True)
        failed = [check.name for check in checks if not check.passed]
        assert not failed, f"失敗したチェック: {failed}"
        assert len(checks) == 12
        assert all(isinstance(check, SuiteCheck) for check in checks)

    def test_quick_suite_is_deterministic(self):
        first = [(check.name, check.passed, check.detail) for check in run_suite(seed=3, quick=True)]
        second = [(check.name, check.passed, check.detail) for check in run_suite(seed=3, quick=True)]
        assert first == second

    def test_individual_checks(self):
        assert check_known_values().passed
        assert check_octuple_oracle(seed=1, trials=6).passed

    def test_full_bw_ladder_reaches_512(self):
        assert bw_ladder(quick=True) == [16, 32]
        assert bw_ladder(quick=False) == [16, 32, 64, 128, 256, 512]

    def test_balanced_ratios_recorded(self):
        check = check_balanced_ratios(quick=True)
        assert check.passed
        assert [row["n"] for row in check.detail["rows"]] == [len(generate_family(FamilySpec.bw_union(n))) for n in (16, 32)]
        for row in check.detail["rows"]:
            assert set(row) == {"n", "balanced_ratio", "product_ratio", "char0_ratio"}
            assert all(row[name] > 0 for name in ("balanced_ratio", "product_ratio", "char0_ratio"))

    def test_random_sets(self):
        rng = seeded_generator(0)
        A = random_residue_set(rng, 11, 20)
        assert len(A) == 10, "𝔽11* は 10 元"
        assert not A.contains_zero()
        B = random_rational_set(rng, 10)
        assert not B.contains_zero()
        assert len(B) <= 10


class TestConfig(unittest.TestCase):
    """Config のテスト"""

    def setUp(self):
        import tempfile
        self.tmpdir = tempfile.TemporaryDirectory()
        self.path = Path(self.tmpdir.name) / "config.yaml"

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_dot_keys_and_fractions(self):
        self.path.write_text('decompose:\n  char0_exponent: "1/4"\nfpgrowth:\n  growth_exponent: 0.61\n',
                             encoding="utf-8")
        config = Config(str(self.path))
        assert config.get_fraction("decompose.char0_exponent", "1/5") == Fraction(1, 4)
        assert config.get_fraction("fpgrowth.growth_exponent", "1/2") == Fraction(61, 100)
        assert config.get("missing.key", 7) == 7

    def test_environment_substitution(self):
        self.path.write_text("report:\n  schema: ${ENERGYLAB_TEST_SCHEMA}\n", encoding="utf-8")
        with unittest.mock.patch.dict("os.environ", {"ENERGYLAB_TEST_SCHEMA": "custom/v2"}):
            config = Config(str(self.path))
        assert config.get("report.schema") == "custom/v2"

    def test_missing_file_falls_back_to_defaults(self):
        config = Config(str(self.path))
        assert config.get("bsg.exhaustive_cap") == 100000
        assert config.get_sweep_primes() == [101, 499, 1009]

    def test_precision_floor(self):
        self.path.write_text("precision:\n  default_digits: 50\n", encoding="utf-8")
        config = Config(str(self.path))
        with unittest.mock.patch.dict("os.environ", {"ENERGYLAB_PRECISION": "8"}):
            assert config.get_precision_digits() == 15
        with unittest.mock.patch.dict("os.environ", {"ENERGYLAB_PRECISION": "80"}):
            assert config.get_precision_digits() == 80


if __name__ == "__main__":
    # pytest実行
    pytest.main([__file__, "-v"])
