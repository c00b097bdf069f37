"""設定ファイル管理モジュール"""

import os
import yaml
from fractions import Fraction
from pathlib import Path
from typing import Dict, Any, List, Optional
import logging

logger = logging.getLogger(__name__)


class Config:
    """設定ファイル管理クラス"""

    def __init__(self, config_path: Optional[str] = None):
        """
        設定ファイルを読み込み

        Args:
            config_path: 設定ファイルパス（省略時は ENERGYLAB_CONFIG かデフォルトパス）
        """
        if config_path is None:
            config_path = os.getenv("ENERGYLAB_CONFIG")
        if config_path is None:
            # プロジェクトルートから相対パスで設定ファイルを探す
            project_root = Path(__file__).parent.parent.parent
            config_path = project_root / "config" / "energylab_config.yaml"

        self.config_path = Path(config_path)
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """設定ファイルを読み込み"""
        try:
            if not self.config_path.exists():
                logger.warning(f"設定ファイルが見つかりません: {self.config_path}")
                return self._get_default_config()

            with open(self.config_path, 'r', encoding='utf-8') as f:
                config = yaml.safe_load(f) or {}

            # 環境変数の置換
            config = self._substitute_env_vars(config)

            logger.debug(f"設定ファイル読み込み完了: {self.config_path}")
            return config

        except Exception as e:
            logger.error(f"設定ファイル読み込みエラー: {e}")
            return self._get_default_config()

    def _substitute_env_vars(self, config: Any) -> Any:
        """環境変数を置換"""
        if isinstance(config, dict):
            return {k: self._substitute_env_vars(v) for k, v in config.items()}
        elif isinstance(config, list):
            return [self._substitute_env_vars(item) for item in config]
        elif isinstance(config, str) and config.startswith('${') and config.endswith('}'):
            env_var = config[2:-1]
            return os.getenv(env_var, config)
        else:
            return config

    def _get_default_config(self) -> Dict[str, Any]:
        """デフォルト設定を返す"""
        return {
            "precision": {
                "digits": os.getenv("ENERGYLAB_PRECISION", 50),
                "default_digits": 50,
                "report_significant_digits": 6,
                "relative_tolerance": "1e-20"
            },
            "energy": {"bruteforce_cap": 1_000_000},
            "decompose": {
                "extraction_constant": 8,
                "char0_exponent": "1/4",
                "prime_exponent": "1/5",
                "balanced_chunk_divisor": 100,
                "step_size_constant": 16
            },
            "bsg": {"exhaustive_cap": 100_000, "sampled_trials": 1000},
            "fpgrowth": {
                "sweep_primes": [101, 499, 1009],
                "moment_exponents": ["2/3", "3/2"],
                "growth_exponent": 0.61,
                "coverage_threshold": 0.5,
                "coverage_trials": 20
            },
            "incidence": {
                "crosscheck_cap": 100_000,
                "collinear_cap": 2000,
                "harness_constant": 3
            },
            "sweep": {"bw_ladder": [16, 32, 64, 128, 256, 512], "log_power": 3},
            "report": {"schema": "energylab.report/v1", "include_timing": False},
            "logging": {
                "level": "INFO",
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                "file": "energylab.log",
                "max_bytes": 10 * 1024 * 1024,
                "backup_count": 5
            }
        }

    def get(self, key: str, default: Any = None) -> Any:
        """
        設定値を取得（ドット記法対応）

        Args:
            key: 設定キー（例: "energy.bruteforce_cap"）
            default: デフォルト値

        Returns:
            設定値
        """
        keys = key.split('.')
        value = self.config

        try:
            for k in keys:
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def get_precision_digits(self) -> int:
        """
        高精度演算の桁数を取得

        ENERGYLAB_PRECISION が設定されていればそれを優先し、
        未置換のプレースホルダや不正値の場合は default_digits に戻す。
        """
        default_digits = int(self.get("precision.default_digits", 50))
        raw = os.getenv("ENERGYLAB_PRECISION", self.get("precision.digits", default_digits))
        try:
            digits = int(raw)
        except (TypeError, ValueError):
            return default_digits
        if digits < 15:
            logger.warning(f"精度 {digits} 桁は小さすぎるため 15 桁に引き上げます")
            return 15
        return digits

    def get_fraction(self, key: str, default: str) -> Fraction:
        """"1/4" のような設定値を Fraction として取得"""
        return Fraction(str(self.get(key, default)))

    def get_sweep_primes(self) -> List[int]:
        """スイープ用素数を取得"""
        return [int(p) for p in self.get("fpgrowth.sweep_primes", [101, 499, 1009])]

    def get_moment_exponents(self) -> List[Fraction]:
        """モーメント和の既定 s を取得"""
        return [Fraction(str(s)) for s in self.get("fpgrowth.moment_exponents", ["2/3", "3/2"])]

    def get_logging_settings(self) -> Dict[str, Any]:
        """ログ設定を取得"""
        defaults = self._get_default_config()["logging"]
        settings = dict(defaults)
        settings.update(self.get("logging", {}) or {})
        return settings

    def reload(self):
        """設定ファイルを再読み込み"""
        self.config = self._load_config()
        logger.info("設定ファイルを再読み込みしました")


# グローバル設定インスタンス
_config_instance = None


def get_config() -> Config:
    """グローバル設定インスタンスを取得"""
    global _config_instance
    if _config_instance is None:
        _config_instance = Config()
    return _config_instance


def reload_config(config_path: Optional[str] = None):
    """グローバル設定を再読み込み"""
    global _config_instance
    if _config_instance and config_path is None:
        _config_instance.reload()
    else:
        _config_instance = Config(config_path)


# 便利関数
def get_precision_digits() -> int:
    """高精度演算の桁数を取得"""
    return get_config().get_precision_digits()


def get_bruteforce_cap() -> int:
    """総当たりオラクルの上限を取得"""
    return int(get_config().get("energy.bruteforce_cap", 1_000_000))


def get_report_schema() -> str:
    """レポートのスキーマIDを取得"""
    return get_config().get("report.schema", "energylab.report/v1")
