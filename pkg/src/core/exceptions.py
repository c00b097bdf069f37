"""energylab 例外定義"""

from typing import Any, Optional


class EnergyLabError(Exception):
    """energylab の基底例外"""


class FieldMismatchError(EnergyLabError, ValueError):
    """異なる体の要素・集合を混在させた"""


class PreconditionError(EnergyLabError, ValueError):
    """操作の前提条件違反（ゼロ除算、サイズ不足、上限超過など）"""


class InvariantViolation(EnergyLabError):
    """
    厳密チェックの失敗

    オラクル不一致や証明書の再検証失敗など、実装バグを示す。
    """

    def __init__(self, message: str, counterexample: Optional[Any] = None):
        super().__init__(message)
        self.counterexample = counterexample
