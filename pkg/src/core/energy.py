"""表現関数とエネルギー（加法・乗法）"""

import logging
from collections import Counter
from dataclasses import dataclass
from functools import reduce
from typing import Dict, List, Optional

import pandas as pd

from .config import get_bruteforce_cap
from .exceptions import PreconditionError
from .field import BinaryLaw, GroundField, RawValue
from .finite_set import FiniteSet
from ..interfaces.results import CauchySchwarzReport, QuarterPowerReport
from ..utils.precision import high_precision, power, relative_tolerance

logger = logging.getLogger(__name__)

EnergyValue = int


@dataclass(frozen=True)
class RepFunction:
    """
    表現関数 x ↦ r_{A∘B}(x)

    table の値はすべて正、合計は |A|·|B|。
    """
    law: BinaryLaw
    field: GroundField
    table: Dict[RawValue, int]

    def total(self) -> int:
        return sum(self.table.values())

    def support(self) -> FiniteSet:
        return FiniteSet.of(self.field, self.table.keys())

    def energy(self) -> EnergyValue:
        return sum(c * c for c in self.table.values())

    def __getitem__(self, value) -> int:
        return self.table.get(self.field.normalize(value), 0)

    def to_frame(self) -> pd.DataFrame:
        """正準順序の二列表（value, count）"""
        keys = sorted(self.table)
        return pd.DataFrame({
            "value": [self.field.format_value(k) for k in keys],
            "count": [self.table[k] for k in keys],
        })

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)


def _check_law_inputs(A: FiniteSet, B: FiniteSet, law: BinaryLaw) -> BinaryLaw:
    A.field.require_same(B.field)
    law = BinaryLaw(law)
    if law == BinaryLaw.DIV and B.contains_zero():
        raise PreconditionError("zero divisor in the second set")
    return law


def _count_table(A: FiniteSet, B: FiniteSet, law: BinaryLaw) -> Counter:
    op = A.field.kernel(law)
    return Counter(op(a, b) for a in A.values for b in B.values)


def rep_function(A: FiniteSet, B: FiniteSet, law: BinaryLaw) -> RepFunction:
    """
    r_{A∘B} の厳密な多重度表

    Raises:
        FieldMismatchError: 体が異なる
        PreconditionError: div で 0 ∈ B
    """
    law = _check_law_inputs(A, B, law)
    table = _count_table(A, B, law)
    field = A.field
    # 標数0の Fraction(3) と 3 はすでに同じキーなので正規化は表示用のみ
    normalized = {field.normalize(k): v for k, v in table.items()}
    return RepFunction(law, field, normalized)


def energy(A: FiniteSet, B: FiniteSet, law: BinaryLaw) -> EnergyValue:
    """
    E(A, B) = Σ_x r_{A∘B}(x)^2（多重度表による計算）

    Raises:
        PreconditionError: mul で 0 ∈ A ∪ B、または add/mul 以外
    """
    law = BinaryLaw(law)
    A.field.require_same(B.field)
    if law not in (BinaryLaw.ADD, BinaryLaw.MUL):
        raise PreconditionError(f"energy is defined for add or mul, got {law.value}")
    if law == BinaryLaw.MUL and (A.contains_zero() or B.contains_zero()):
        raise PreconditionError("multiplicative energy needs 0 outside both sets")
    return sum(c * c for c in _count_table(A, B, law).values())


def additive_energy(A: FiniteSet) -> EnergyValue:
    """E⁺(A)"""
    return energy(A, A, BinaryLaw.ADD)


def multiplicative_energy(A: FiniteSet) -> EnergyValue:
    """E^×(A)"""
    return energy(A, A, BinaryLaw.MUL)


def difference_energy(A: FiniteSet) -> EnergyValue:
    """Σ_x r_{A−A}(x)^2（E⁺(A) と一致するはず）"""
    return sum(c * c for c in _count_table(A, A, BinaryLaw.SUB).values())


def energy_bruteforce(A: FiniteSet, B: FiniteSet, law: BinaryLaw, cap: Optional[int] = None) -> EnergyValue:
    """
    四つ組を直接数えるオラクル

    (a1, a2, b1) を全列挙し、a1∘b1 = a2∘b2 を満たす b2 ∈ B を解いて数える。
    多重度表は使わない。

    Raises:
        PreconditionError: |A|^2|B|^2 が上限を超える、または mul で 0 を含む
    """
    law = BinaryLaw(law)
    A.field.require_same(B.field)
    cap = get_bruteforce_cap() if cap is None else cap
    quadruples = len(A) ** 2 * len(B) ** 2
    if quadruples > cap:
        raise PreconditionError(f"brute force needs {quadruples} quadruples, cap is {cap}")
    if law == BinaryLaw.MUL and (A.contains_zero() or B.contains_zero()):
        raise PreconditionError("multiplicative energy needs 0 outside both sets")
    if law not in (BinaryLaw.ADD, BinaryLaw.MUL):
        raise PreconditionError(f"energy is defined for add or mul, got {law.value}")

    field = A.field
    members = B.members
    count = 0
    for a1 in A.values:
        for a2 in A.values:
            if law == BinaryLaw.ADD:
                shift = field.sub(a1, a2)
                count += sum(1 for b1 in B.values if field.add(b1, shift) in members)
            else:
                scale = field.div(a1, a2)
                count += sum(1 for b1 in B.values if field.mul(b1, scale) in members)
    return count


def cauchy_schwarz_check(A: FiniteSet) -> CauchySchwarzReport:
    """
    E⁺(A)|A+A| ≥ |A|^4 と E^×(A)|A·A| ≥ |A|^4 を厳密に確認

    Raises:
        PreconditionError: 0 ∈ A
    """
    if A.contains_zero():
        raise PreconditionError("multiplicative side needs 0 outside A")
    additive = rep_function(A, A, BinaryLaw.ADD)
    multiplicative = rep_function(A, A, BinaryLaw.MUL)
    report = CauchySchwarzReport(
        additive_energy=additive.energy(),
        sumset_size=len(additive.table),
        multiplicative_energy=multiplicative.energy(),
        productset_size=len(multiplicative.table),
        fourth_power=len(A) ** 4,
    )
    if not report.passed:
        logger.error(f"Cauchy-Schwarz inequality failed on {A!r}")
    return report


def quarter_power_check(parts: List[FiniteSet], law: BinaryLaw) -> QuarterPowerReport:
    """
    互いに素な部分集合について E(∪parts)^{1/4} ≤ Σ E(part)^{1/4}

    高精度（既定 50 桁）で評価し、相対許容誤差 1e-20 で比較する。

    Raises:
        PreconditionError: parts が交わる、空リスト
    """
    law = BinaryLaw(law)
    if not parts:
        raise PreconditionError("quarter_power_check needs at least one part")
    field = parts[0].field
    seen = set()
    for part in parts:
        field.require_same(part.field)
        if not seen.isdisjoint(part.members):
            raise PreconditionError("parts must be pairwise disjoint")
        seen |= part.members

    union = reduce(lambda x, y: x.union(y), parts)
    union_energy = energy(union, union, law)
    part_energies = tuple(energy(part, part, law) for part in parts)

    with high_precision():
        lhs = power(union_energy, "1/4")
        rhs = sum((power(e, "1/4") for e in part_energies), start=power(0, 1))
        passed = lhs <= rhs * (1 + relative_tolerance())

    if not passed:
        logger.error(f"quarter-power inequality failed: lhs={lhs}, rhs={rhs}")
    return QuarterPowerReport(law, union_energy, part_energies, lhs, rhs, bool(passed))
