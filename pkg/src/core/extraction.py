"""二進鳩の巣による構造的部分集合の抽出と、その証明書の検証"""

import logging
from collections import Counter, defaultdict
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, Tuple

from mpmath import log as mp_log

from .config import get_config
from .energy import additive_energy, multiplicative_energy
from .exceptions import InvariantViolation, PreconditionError
from .field import BinaryLaw, GroundField, RawValue
from .finite_set import FiniteSet, pointwise_combine
from ..interfaces.results import (
    Axis, BoundReport, BoundTarget, ExtractionCertificate, ExtractionLaw,
)
from ..utils.precision import high_precision, monomial, safe_ratio, to_mpf

logger = logging.getLogger(__name__)


def dyadic_level(count: int) -> int:
    """2^⌊log₂ count⌋（count ≥ 1）"""
    return 1 << (count.bit_length() - 1)


def log2_ceiling_of_double(n: int) -> int:
    """⌈log₂(2n)⌉"""
    return (2 * n - 1).bit_length()


def heaviest_dyadic_class(counts: Dict[Hashable, int],
                          weight: Callable[[int, int], int]) -> Tuple[int, List[Hashable], int]:
    """
    多重度を [t, 2t) の二進クラスに分け、weight(t, クラスの大きさ) が最大のクラスを返す

    同じ重みなら t の小さい方を採る。

    Returns:
        (t, クラスのキー（正準順）, クラス数)
    """
    classes: Dict[int, List[Hashable]] = defaultdict(list)
    for key, count in counts.items():
        classes[dyadic_level(count)].append(key)

    best_level, best_weight = None, -1
    for level in sorted(classes):
        w = weight(level, len(classes[level]))
        if w > best_weight:
            best_level, best_weight = level, w
    return best_level, sorted(classes[best_level]), len(classes)


def line_label(field: GroundField, law: ExtractionLaw) -> Callable[[RawValue, RawValue], RawValue]:
    """
    点 (u, v) が乗る直線のラベル：傾き v/u、和 u + v、差 v − u

    標数0では Fraction(2) と 2 が同じキーになるため正規化しない。
    """
    if law == ExtractionLaw.MUL_SLOPES:
        divide = field.kernel(BinaryLaw.DIV)
        return lambda u, v: divide(v, u)
    if law == ExtractionLaw.ADD_SUMS:
        return field.kernel(BinaryLaw.ADD)
    subtract = field.kernel(BinaryLaw.SUB)
    return lambda u, v: subtract(v, u)


def extract_structured_subset(A: FiniteSet, law: ExtractionLaw) -> ExtractionCertificate:
    """
    二進鳩の巣で A1 ⊆ A と証拠 (P, t, S, q, axis) を構成

    1. 直線ラベル x ごとの点数 r(x) を数え、重み t²|P| 最大の二進クラスを P とする
    2. S = P 上の A×A の点
    3. 横座標の多重度で重み q'|A'| 最大のクラスを取り、q' ≤ |A'| なら採用
    4. そうでなければ S ∩ π_x⁻¹(A') の縦座標で同じ選択を行う
    5. どちらも q > |A1| なら大きい方を取り q を |A1| に切り詰める

    Raises:
        PreconditionError: |A| < 2、mul-slopes で 0 ∈ A
        InvariantViolation: 重み勘定・対称性などの自己検査が失敗
    """
    law = ExtractionLaw(law)
    n = len(A)
    if n < 2:
        raise PreconditionError("extraction needs |A| >= 2")
    if law == ExtractionLaw.MUL_SLOPES and A.contains_zero():
        raise PreconditionError("slope extraction needs 0 outside A")

    field = A.field
    point_key = line_label(field, law)
    values = A.values

    line_counts = Counter(point_key(u, v) for u in values for v in values)
    line_counts = {field.normalize(k): c for k, c in line_counts.items()}
    source_energy = sum(c * c for c in line_counts.values())

    t, popular, class_count = heaviest_dyadic_class(line_counts, lambda level, size: level * level * size)
    P = FiniteSet.of(field, popular)
    popular_set = P.members

    S = tuple((u, v) for u in values for v in values if point_key(u, v) in popular_set)

    # 自己検査：重み勘定と |P|t ≤ |S| < 2|P|t
    if len(P) * t * t * 2 * 4 * log2_ceiling_of_double(n) < source_energy:
        raise InvariantViolation("weight accounting failed for the heaviest dyadic class")
    if not len(P) * t <= len(S) < 2 * len(P) * t:
        raise InvariantViolation(f"|S|={len(S)} outside [|P|t, 2|P|t) with |P|={len(P)}, t={t}")
    if law == ExtractionLaw.MUL_SLOPES and P.inverted() != P:
        raise InvariantViolation("popular slopes are not closed under inversion")
    if law == ExtractionLaw.SUB_DIFFERENCES and P.negated() != P:
        raise InvariantViolation("popular differences are not symmetric")

    abscissa_counts = Counter(u for u, _ in S)
    q1, first_stage, _ = heaviest_dyadic_class(abscissa_counts, lambda level, size: level * size)
    A_prime = FiniteSet.of(field, first_stage)

    q_capped = False
    if q1 <= len(A_prime):
        A1, q, axis = A_prime, q1, Axis.ABSCISSAE
    else:
        chosen = A_prime.members
        ordinate_counts = Counter(v for u, v in S if u in chosen)
        q2, second_stage, _ = heaviest_dyadic_class(ordinate_counts, lambda level, size: level * size)
        A_second = FiniteSet.of(field, second_stage)
        if q2 <= len(A_second):
            A1, q, axis = A_second, q2, Axis.ORDINATES
        else:
            # 両段とも q > |A1|：多重度の下限としての q を |A1| に下げる
            q_capped = True
            if len(A_second) > len(A_prime):
                A1, axis = A_second, Axis.ORDINATES
            else:
                A1, axis = A_prime, Axis.ABSCISSAE
            q = len(A1)
            logger.warning(f"extraction fell back to a capped level q={q} on {axis.value}")

    size1 = len(A1)
    d_star = Fraction(n * n * size1 ** 4, source_energy * source_energy)
    nominal = _nominal_bounds_hold(n, size1, len(P), source_energy)
    if not nominal:
        logger.warning(
            f"nominal extraction bounds with constant "
            f"{get_config().get('decompose.extraction_constant', 8)} fail: "
            f"|A|={n}, |A1|={size1}, |P|={len(P)}, E={source_energy}"
        )

    logger.debug(f"extracted |A1|={size1} from |A|={n} ({law.value}, t={t}, q={q}, axis={axis.value})")
    return ExtractionCertificate(
        law=law, A1=A1, P=P, t=t, S=S, q=q, axis=axis, d_star=d_star,
        energy=source_energy, source_size=n, q_capped=q_capped,
        class_count=class_count, nominal_bounds_hold=nominal,
    )


def _nominal_bounds_hold(n: int, size1: int, popular: int, source_energy: int) -> bool:
    """
    |A1|^2 ≥ E/(|A|·c·log₂²(2|A|)) と |P| ≤ c·log₂(2|A|)·|A1|^4/E を評価
    """
    c = int(get_config().get("decompose.extraction_constant", 8))
    with high_precision():
        log_factor = mp_log(2 * n, 2)
        first = to_mpf(size1 * size1) * n * c * log_factor ** 2 >= source_energy
        second = to_mpf(popular) * source_energy <= c * log_factor * size1 ** 4
    return bool(first and second)


def recheck_certificate(cert: ExtractionCertificate, A: FiniteSet) -> Tuple[bool, str]:
    """
    証明書の各フィールドをゼロから数え直す

    Returns:
        (成否, 説明)
    """
    if cert.source_size != len(A):
        return False, "source size differs"
    if not cert.A1.issubset(A):
        return False, "A1 is not a subset of A"
    field = A.field
    point_key = line_label(field, cert.law)
    recount = Counter(point_key(u, v) for u in A.values for v in A.values)

    for x in cert.P.values:
        count = recount.get(x, 0)
        if not cert.t <= count < 2 * cert.t:
            return False, f"line {field.format_value(x)} carries {count} points, outside [t, 2t)"

    expected_S = tuple((u, v) for u in A.values for v in A.values
                       if point_key(u, v) in cert.P.members)
    if expected_S != cert.S:
        return False, "S differs from the recount"
    if not len(cert.P) * cert.t <= len(cert.S) < 2 * len(cert.P) * cert.t:
        return False, "|S| outside [|P|t, 2|P|t)"
    if cert.q > len(cert.A1):
        return False, "q exceeds |A1|"

    if cert.axis == Axis.ABSCISSAE:
        multiplicity = Counter(u for u, _ in cert.S)
    else:
        # 縦座標段：一段目で選ばれた横座標に制限した S' で数える
        abscissae = Counter(u for u, _ in cert.S)
        q1, first_stage, _ = heaviest_dyadic_class(abscissae, lambda level, size: level * size)
        allowed = set(first_stage)
        multiplicity = Counter(v for u, v in cert.S if u in allowed)

    for a in cert.A1.values:
        m = multiplicity.get(a, 0)
        if m < cert.q or (not cert.q_capped and m >= 2 * cert.q):
            return False, f"{field.format_value(a)} has multiplicity {m} for q={cert.q}"

    if cert.d_star != Fraction(len(A) ** 2 * len(cert.A1) ** 4, cert.energy ** 2):
        return False, "d_star mismatch"
    return True, "ok"


_TARGET_LAWS = {
    BoundTarget.SUBSET_ADDITIVE: (ExtractionLaw.MUL_SLOPES,),
    BoundTarget.ENERGY_PRODUCT: (ExtractionLaw.MUL_SLOPES,),
    BoundTarget.SUBSET_MULTIPLICATIVE: (ExtractionLaw.ADD_SUMS, ExtractionLaw.SUB_DIFFERENCES),
    BoundTarget.PRODUCT_GROWTH: (ExtractionLaw.ADD_SUMS, ExtractionLaw.SUB_DIFFERENCES),
}


def verify_extraction_bound(cert: ExtractionCertificate, A: FiniteSet, target: BoundTarget) -> BoundReport:
    """
    抽出結果に対する不等式の両辺と比率（合否は出さない）

    Raises:
        PreconditionError: 証明書の law と target が合わない
    """
    target = BoundTarget(target)
    if cert.law not in _TARGET_LAWS[target]:
        raise PreconditionError(f"target {target.value} needs a {', '.join(l.value for l in _TARGET_LAWS[target])} certificate")
    if cert.source_size != len(A):
        raise PreconditionError("certificate was produced from a different set")

    n, size1 = len(A), len(cert.A1)
    with high_precision():
        if target == BoundTarget.SUBSET_ADDITIVE:
            lhs = additive_energy(cert.A1)
            rhs = monomial([(size1, "11/2"), (n, "3/2"), (cert.energy, "-3/2")])
        elif target == BoundTarget.ENERGY_PRODUCT:
            lhs = additive_energy(cert.A1) * cert.energy
            rhs = monomial([(size1, "9/2"), (n, 1)])
        elif target == BoundTarget.SUBSET_MULTIPLICATIVE:
            if cert.A1.contains_zero():
                raise PreconditionError("multiplicative energy of A1 needs 0 outside A1")
            lhs = multiplicative_energy(cert.A1)
            rhs = monomial([(cert.q, -4), (len(cert.P), 3), (n, 3)])
        else:
            lhs = len(pointwise_combine(cert.A1, cert.A1, BinaryLaw.MUL))
            rhs = monomial([(cert.energy, 3), (size1, -4), (n, -3)])
        ratio = safe_ratio(lhs, rhs)

    return BoundReport(target=target, lhs=lhs, rhs=rhs, ratio=ratio,
                       lower_bound=target == BoundTarget.PRODUCT_GROWTH)
