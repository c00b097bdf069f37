"""証明書・レポートの共通データ型"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from mpmath import mpf

from ..core.field import BinaryLaw, RawValue
from ..core.finite_set import FiniteSet


class ExtractionLaw(Enum):
    """抽出で使う直線族"""
    MUL_SLOPES = "mul-slopes"            # 原点を通る直線 y = x·u（比）
    ADD_SUMS = "add-sums"                # u + v = x（和）
    SUB_DIFFERENCES = "sub-differences"  # v − u = x（差）


class Axis(Enum):
    """二段階選択でどちらの座標から A1 を取ったか"""
    ABSCISSAE = "abscissae"
    ORDINATES = "ordinates"


class BoundTarget(Enum):
    """抽出結果に対して比率を出す不等式"""
    SUBSET_ADDITIVE = "subset-additive"              # E⁺(A1) vs |A1|^{11/2}|A|^{3/2}E^×(A)^{-3/2}
    ENERGY_PRODUCT = "energy-product"                # E⁺(A1)E^×(A) vs |A1|^{9/2}|A|
    SUBSET_MULTIPLICATIVE = "subset-multiplicative"  # E^×(A1) vs q^{-4}|P|^3|A|^3
    PRODUCT_GROWTH = "product-growth"                # |A1·A1| vs E⁺(A)^3/(|A1|^4|A|^3)


class DecompositionVariant(Enum):
    """分解の種類"""
    BW = "bw"
    BALANCED = "balanced"
    PRODUCT = "product"
    FEW_SUMS = "few-sums"
    MULT_TRANSLATE = "mult-translate"
    RECIPROCAL = "reciprocal"
    RSET = "rset"


class DilateLaw(Enum):
    """拡大・平行移動エネルギーの種類"""
    ADD_DILATE = "add-dilate"        # E⁺(A, xA)
    MUL_TRANSLATE = "mul-translate"  # E^×(A, x + A)


class HadSigns(Enum):
    """(ab ∓ c)/(a ∓ d) の符号"""
    MINUS = "minus"
    PLUS = "plus"


# ──────────────────────────────────────────────
# energy
# ──────────────────────────────────────────────

@dataclass(frozen=True)
class CauchySchwarzReport:
    """E·|A∘A| ≥ |A|^4 の両側"""
    additive_energy: int
    sumset_size: int
    multiplicative_energy: int
    productset_size: int
    fourth_power: int

    @property
    def additive_product(self) -> int:
        return self.additive_energy * self.sumset_size

    @property
    def multiplicative_product(self) -> int:
        return self.multiplicative_energy * self.productset_size

    @property
    def passed(self) -> bool:
        return (self.additive_product >= self.fourth_power
                and self.multiplicative_product >= self.fourth_power)


@dataclass(frozen=True)
class QuarterPowerReport:
    """E(∪ parts)^{1/4} ≤ Σ E(part)^{1/4}"""
    law: BinaryLaw
    union_energy: int
    part_energies: Tuple[int, ...]
    lhs: mpf
    rhs: mpf
    passed: bool


# ──────────────────────────────────────────────
# decompose
# ──────────────────────────────────────────────

@dataclass(frozen=True)
class ExtractionCertificate:
    """
    構造的部分集合抽出の証明書

    P の各元 x は t ≤ r(x) < 2t を満たす（r は比・和・差の表現数）。
    S は直線族 P 上にある A×A の点すべて。
    A1 の各元は axis 方向に q 個以上の S の点を持つ。
    """
    law: ExtractionLaw
    A1: FiniteSet
    P: FiniteSet
    t: int
    S: Tuple[Tuple[RawValue, RawValue], ...]
    q: int
    axis: Axis
    d_star: Fraction
    energy: int
    source_size: int
    q_capped: bool = False
    class_count: int = 1
    nominal_bounds_hold: bool = True


@dataclass(frozen=True)
class BoundReport:
    """抽出結果の不等式比率（合否なし）"""
    target: BoundTarget
    lhs: int
    rhs: mpf
    ratio: Optional[mpf]
    lower_bound: bool = False


@dataclass(frozen=True)
class DecompositionStep:
    """反復の一段"""
    j: int
    size: int
    monitored_energy: int
    D: FiniteSet
    certificate: Optional[ExtractionCertificate]


@dataclass
class DecompositionTrace:
    """反復分解の記録（B ⊔ C = A）"""
    variant: DecompositionVariant
    monitored: str
    M: Fraction
    threshold: Fraction
    steps: List[DecompositionStep]
    B: FiniteSet
    C: FiniteSet
    metrics: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


@dataclass
class BalancedDecomposition:
    """|B|, |C| ≥ ⌈|A|/3⌉ の分解"""
    variant: DecompositionVariant
    B: FiniteSet
    C: FiniteSet
    branch: str
    balanced_ratio: mpf
    energies: Dict[str, int]
    steps: List[DecompositionStep] = field(default_factory=list)
    metrics: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


@dataclass
class ProductDecomposition:
    """E⁺(B)·E^×(C) を小さくする二段階分解"""
    B: FiniteSet
    C: FiniteSet
    branch: str
    product_ratio: mpf
    energies: Dict[str, int]
    stage_one: BalancedDecomposition
    stage_two: BalancedDecomposition
    warnings: List[str] = field(default_factory=list)


@dataclass
class RSetDecomposition:
    """R[A] の部分集合 R'（小さい E^×）と R''（小さい E⁺）"""
    R: FiniteSet
    R_prime: FiniteSet
    R_dprime: FiniteSet
    prime_branch: str
    dprime_branch: str
    energy_ratios: Dict[str, mpf]
    energies: Dict[str, int]
    traces: Dict[str, Optional[DecompositionTrace]] = field(default_factory=dict)


# ──────────────────────────────────────────────
# bsg
# ──────────────────────────────────────────────

@dataclass(frozen=True)
class BsgCertificate:
    """構成的 BSG の証明書"""
    law: BinaryLaw
    k: int
    A_star: FiniteSet
    P: FiniteSet
    s_witness: RawValue
    A_s: FiniteSet
    K: Fraction
    epsilon: Fraction
    energy: int
    edge_count: int
    source_size: int


@dataclass
class BsgVerification:
    """k 組の交差サイズ検証結果"""
    mode: str
    checked_tuples: int
    min_intersection: Optional[int]
    threshold: Fraction
    passed: bool
    counterexample: Optional[Tuple[RawValue, ...]] = None
    seed: Optional[int] = None


@dataclass
class SpEnergyReport:
    """BSG（乗法）から取った A1 の (E⁺(A1))^2 (E^×(A))^9 / |A|^32"""
    A1: FiniteSet
    certificate: BsgCertificate
    size_ratio: mpf
    lhs: int
    rhs: int
    ratio: mpf


# ──────────────────────────────────────────────
# fpgrowth
# ──────────────────────────────────────────────

@dataclass(frozen=True)
class RepresentationCounts:
    """N(x) = #{(a,b,c,d) : x = (ab ∓ c)/(a ∓ d)}"""
    p: int
    signs: HadSigns
    counts: Dict[int, int]
    excluded: int

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def support_size(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class SolutionCount:
    """ℰ = Σ_{x≠0} N(x)^2 と x = 0 の寄与"""
    E_cal: int
    zero_term: int


@dataclass(frozen=True)
class RangeReport:
    p: int
    Q: int
    coverage: Fraction


@dataclass
class DilateEnergies:
    """x ∈ 𝔽p* ごとの E⁺(A, xA) または E^×(A, x + A)"""
    law: DilateLaw
    p: int
    size: int
    per_x: Dict[int, int]
    total: int
    normalized_total: mpf
    floor_ok: bool


@dataclass
class MomentReport:
    s: Fraction
    law: DilateLaw
    lhs: mpf
    rhs: mpf
    ratio: Optional[mpf]
    in_range: bool


@dataclass
class RichDilateReport:
    K: Fraction
    law: DilateLaw
    X: FiniteSet
    bound: mpf
    ratio: mpf
    bkt_sum: Fraction
    bkt_ok: bool


@dataclass
class LadderReport:
    """二進の段 X_i と小さい x の個数"""
    law: DilateLaw
    M_cubed: Fraction
    levels: List[Tuple[int, int]]
    small: int
    partition_ok: bool


@dataclass
class PartialSumReport:
    law: DilateLaw
    total: int
    bound_inccount: mpf
    bound_remark: mpf
    ratios: Dict[str, Optional[mpf]]
    flags: Dict[str, bool]
    bkt_ok: bool


@dataclass
class GrowthReport:
    """𝔽p 上の (ab − c)/(a − d) パイプラインの全結果"""
    p: int
    signs: HadSigns
    A: FiniteSet
    B: FiniteSet
    C: FiniteSet
    N: Dict[int, int]
    Q: int
    Q_bc: int
    solution_count: SolutionCount
    energy_sums: Dict[str, int]
    level_sets: List[Tuple[int, int]]
    terms: Dict[str, mpf]
    ratios: Dict[str, Optional[mpf]]
    checks: Dict[str, bool]
    truncated: bool = False
    warnings: List[str] = field(default_factory=list)


# ──────────────────────────────────────────────
# incidence
# ──────────────────────────────────────────────

@dataclass(frozen=True)
class LineIncidenceReport:
    I: int
    m: int
    n: int
    st_bound: mpf
    ratio: mpf
    within_harness_constant: bool


@dataclass(frozen=True)
class PlaneIncidenceReport:
    I: int
    m: int
    n: int
    k: Optional[int]
    mr_bound: Optional[mpf]
    ratio: Optional[mpf]
    flags: Dict[str, bool]


@dataclass(frozen=True)
class CrosscheckReport:
    plane_incidences: int
    equation_solutions: int
    equal: bool
    division_form_solutions: Optional[int] = None
