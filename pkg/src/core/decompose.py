"""反復抽出による分解（和・積エネルギーの Balog–Wooley 型分解とその変種）"""

import logging
from fractions import Fraction
from typing import Any, Callable, List, Optional, Tuple

from .config import get_config
from .energy import additive_energy, multiplicative_energy
from .exceptions import InvariantViolation, PreconditionError
from .extraction import extract_structured_subset, log2_ceiling_of_double
from .finite_set import FiniteSet, affine_image, r_set
from ..interfaces.results import (
    BalancedDecomposition, DecompositionStep, DecompositionTrace, DecompositionVariant,
    ExtractionLaw, ProductDecomposition, RSetDecomposition,
)
from ..utils.precision import ceil_root, high_precision, monomial, safe_ratio

logger = logging.getLogger(__name__)

StopRule = Callable[[FiniteSet, int, FiniteSet], Optional[str]]


def _warn(warnings: List[str], message: str):
    if message not in warnings:
        logger.warning(message)
        warnings.append(message)


def _require_nonzero(A: FiniteSet):
    if A.contains_zero():
        raise PreconditionError("decompositions need 0 outside A")


def density_exponent(A: FiniteSet) -> Fraction:
    """δ：標数0で 1/4、素体で 1/5（設定で変更可）"""
    config = get_config()
    if A.field.is_prime:
        return config.get_fraction("decompose.prime_exponent", "1/5")
    return config.get_fraction("decompose.char0_exponent", "1/4")


def default_M(A: FiniteSet) -> int:
    """M = ⌈|A|^δ⌉"""
    delta = density_exponent(A)
    return max(1, ceil_root(len(A), delta.numerator, delta.denominator))


def _resolve_M(A: FiniteSet, M: Optional[Any]) -> Fraction:
    M = Fraction(default_M(A) if M is None else Fraction(str(M)))
    if not 1 <= M <= len(A) ** 2:
        raise PreconditionError(f"M must lie in [1, |A|^2], got {M}")
    return M


def _chunks(D: FiniteSet, size: Optional[int]) -> List[FiniteSet]:
    if not size or len(D) <= size:
        return [D]
    return [FiniteSet(D.field, D.values[i:i + size], D.excludes_zero) for i in range(0, len(D), size)]


def run_extraction_loop(A: FiniteSet, law: ExtractionLaw, monitor: Callable[[FiniteSet], int],
                        stop: StopRule, chunk_size: Optional[int] = None,
                        on_step: Optional[Callable[[FiniteSet, int], None]] = None
                        ) -> Tuple[List[DecompositionStep], FiniteSet, FiniteSet, str]:
    """
    C1 = A から始めて停止規則を満たすまで抽出 D_j を取り除く

    Args:
        monitor: C_j に対して監視するエネルギー
        stop: (C_j, エネルギー, B_j) から停止理由を返す（続行なら None）
        chunk_size: D_j を正準順序でこの大きさに分割し、一片ごとに停止判定する

    Returns:
        (steps, B, C, 停止理由)

    Raises:
        InvariantViolation: 反復上限 |A| を超えた
    """
    B = FiniteSet.empty(A.field)
    C = A
    steps: List[DecompositionStep] = []
    current = monitor(C)

    while True:
        reason = stop(C, current, B)
        if reason is not None:
            return steps, B, C, reason
        if len(steps) >= len(A) or len(C) < 2:
            raise InvariantViolation(f"iteration did not stop within {len(A)} steps",
                                     counterexample={"remaining": C.formatted()})
        if on_step is not None:
            on_step(C, current)

        certificate = extract_structured_subset(C, law)
        pieces = _chunks(certificate.A1, chunk_size)
        for index, piece in enumerate(pieces):
            steps.append(DecompositionStep(j=len(steps) + 1, size=len(C), monitored_energy=current,
                                           D=piece, certificate=certificate))
            C = C.difference(piece)
            B = B.union(piece)
            current = monitor(C)
            if index < len(pieces) - 1 and stop(C, current, B) is not None:
                break


def _check_partition(A: FiniteSet, B: FiniteSet, C: FiniteSet):
    if not B.isdisjoint(C) or B.union(C) != A:
        raise InvariantViolation("decomposition is not a partition of A")


# ──────────────────────────────────────────────
# 基本の反復分解
# ──────────────────────────────────────────────

def step_size_factor(n: int, M: Fraction) -> Fraction:
    """
    c′ = c·⌈log₂(2|A|)⌉² に対する c′M（c は decompose.step_size_constant）

    E^×(C_j) > |A|^3/M の間、抽出された D_j は |D_j|·c′M ≥ |A| を満たす。
    """
    c = get_config().get_fraction("decompose.step_size_constant", "16")
    return c * log2_ceiling_of_double(n) ** 2 * M


def _check_step_sizes(steps: List[DecompositionStep], n: int, M: Fraction) -> int:
    """各段の |D_j| の下限と反復回数の上限 ⌈c′M⌉ を確認し、上限を返す"""
    factor = step_size_factor(n, M)
    for step in steps:
        if len(step.D) * factor < n:
            raise InvariantViolation(
                f"step {step.j} removed {len(step.D)} elements, below |A|/(c'M) = {Fraction(n) / factor}",
                counterexample={"D": step.D.formatted()},
            )
    step_cap = -(-factor.numerator // factor.denominator)
    if len(steps) > min(n, step_cap):
        raise InvariantViolation(f"{len(steps)} steps exceed the cap {min(n, step_cap)}")
    return step_cap


def bw_decompose(A: FiniteSet, M: Optional[Any] = None) -> DecompositionTrace:
    """
    E^×(C_j) ≤ |A|^3/M になるまで傾き抽出を繰り返し、A = B ⊔ C を作る

    Args:
        A: 0 を含まない集合
        M: 省略時は ⌈|A|^δ⌉（標数0で δ = 1/4、素体で 1/5）

    Raises:
        PreconditionError: 0 ∈ A、空集合、M が [1, |A|^2] の外
        InvariantViolation: 分割・停止条件・反復上限の破綻
    """
    _require_nonzero(A)
    n = len(A)
    if n == 0:
        raise PreconditionError("cannot decompose the empty set")
    M = _resolve_M(A, M)
    threshold = Fraction(n ** 3) / M
    warnings: List[str] = []
    field = A.field

    if field.is_prime and n ** 3 * M > field.p ** 2:
        _warn(warnings, f"|A|^3 > p^2/M for |A|={n}, p={field.p}, M={M}")

    def on_step(C: FiniteSet, current: int):
        if field.is_prime and n ** 6 > field.p ** 2 * current:
            _warn(warnings, f"|A|^6 > p^2 E^x(C_j) at |C_j|={len(C)}")

    steps, B, C, _ = run_extraction_loop(
        A, ExtractionLaw.MUL_SLOPES, multiplicative_energy,
        lambda C, current, B: "energy" if current <= threshold else None,
        on_step=on_step,
    )

    _check_partition(A, B, C)
    energy_C = multiplicative_energy(C)
    if energy_C > threshold:
        raise InvariantViolation(f"E^x(C)={energy_C} exceeds |A|^3/M={threshold}")
    step_cap = _check_step_sizes(steps, n, M)

    energy_B = additive_energy(B)
    delta = density_exponent(A)
    with high_precision():
        predicted = monomial([(M, "3/2" if field.is_prime else 1), (n, "5/2")])
        scale = monomial([(n, 3 - delta)])
        metrics = {
            "energy_add_B": energy_B,
            "energy_mul_C": energy_C,
            "predicted_bound": predicted,
            "predicted_ratio": safe_ratio(energy_B, predicted),
            "delta": delta,
            "max_energy_ratio": safe_ratio(max(energy_B, energy_C), scale),
            "step_count": len(steps),
            "step_cap": step_cap,
        }

    logger.info(f"bw_decompose: |A|={n}, M={M}, steps={len(steps)}, |B|={len(B)}, |C|={len(C)}")
    return DecompositionTrace(
        variant=DecompositionVariant.BW, monitored="E^x(C)", M=M, threshold=threshold,
        steps=steps, B=B, C=C, metrics=metrics, warnings=warnings,
    )


# ──────────────────────────────────────────────
# 均衡分解（|B|, |C| ≥ |A|/3）
# ──────────────────────────────────────────────

def _rebalance(B: FiniteSet, C: FiniteSet, third: int) -> Tuple[FiniteSet, FiniteSet, bool]:
    """正準順序で要素を移し、両側を ⌈|A|/3⌉ 以上にする"""
    moved = False
    if len(B) < third:
        shift = C.prefix(third - len(B))
        B, C, moved = B.union(shift), C.difference(shift), True
    if len(C) < third:
        shift = FiniteSet(B.field, B.values[len(B) - (third - len(C)):])
        B, C, moved = B.difference(shift), C.union(shift), True
    return B, C, moved


def balanced_decompose(A: FiniteSet, swapped: bool = False) -> BalancedDecomposition:
    """
    互いに素な B, C ⊆ A（各 ⌈|A|/3⌉ 以上）を作る

    通常は傾き抽出で E⁺(B) の小さい塊を集め、残り C の E^×(C) を監視する。
    swapped=True では和の抽出で E^×(B) の小さい塊を集め、E⁺(C) を監視する。
    停止は E(C_j) < |A|^{8/3} か |B_j| > |A|/3 の早い方。

    Raises:
        PreconditionError: 0 ∈ A、|A| < 2、素体で |A| > p^{3/5}
    """
    _require_nonzero(A)
    n = len(A)
    if n < 2:
        raise PreconditionError("balanced decomposition needs |A| >= 2")
    field = A.field
    if field.is_prime and n ** 5 > field.p ** 3:
        raise PreconditionError(f"|A|={n} exceeds p^(3/5) for p={field.p}")

    variant = DecompositionVariant.FEW_SUMS if swapped else DecompositionVariant.BALANCED
    monitor = additive_energy if swapped else multiplicative_energy
    law = ExtractionLaw.ADD_SUMS if swapped else ExtractionLaw.MUL_SLOPES
    third = -(-n // 3)
    warnings: List[str] = []
    steps: List[DecompositionStep] = []

    if monitor(A) ** 3 <= n ** 8:
        B, C = A.alternating_halves()
        branch = "outset-split"
    else:
        divisor = int(get_config().get("decompose.balanced_chunk_divisor", 100))
        chunk = max(1, n // divisor)

        def stop(C: FiniteSet, current: int, B: FiniteSet) -> Optional[str]:
            if current ** 3 < n ** 8:
                return "energy"
            if 3 * len(B) > n:
                return "size"
            return None

        steps, B, C, reason = run_extraction_loop(A, law, monitor, stop, chunk_size=chunk)
        branch = f"{reason}-stop"
        B, C, moved = _rebalance(B, C, third)
        if moved:
            branch += "-rebalanced"

    if not B.isdisjoint(C) or not B.union(C).issubset(A):
        raise InvariantViolation("balanced decomposition produced overlapping or foreign parts")
    if min(len(B), len(C)) < third:
        raise InvariantViolation(f"parts of size {len(B)}, {len(C)} below ceil(|A|/3)={third}")

    with high_precision():
        if swapped:
            energies = {"mul_B": multiplicative_energy(B), "add_C": additive_energy(C)}
            ratio = monomial([(energies["mul_B"], 1), (energies["add_C"], "3/2"), (n, -7)])
            metrics = {"few_sums_ratio": monomial([(energies["mul_B"], 1), (energies["add_C"], 3), (n, -11)])}
        else:
            energies = {"add_B": additive_energy(B), "mul_C": multiplicative_energy(C)}
            ratio = monomial([(energies["add_B"], 1), (energies["mul_C"], "3/2"), (n, -7)])
            metrics = {}
            if not field.is_prime:
                metrics["char0_ratio"] = monomial([(energies["add_B"], 1), (energies["mul_C"], 1), (n, "-11/2")])

    logger.info(f"{variant.value}: |A|={n}, branch={branch}, |B|={len(B)}, |C|={len(C)}")
    return BalancedDecomposition(variant=variant, B=B, C=C, branch=branch, balanced_ratio=ratio,
                                 energies=energies, steps=steps, metrics=metrics, warnings=warnings)


def few_sums_decompose(A: FiniteSet) -> BalancedDecomposition:
    """和の抽出による入れ替え版：E^×(B)·E⁺(C)^3/|A|^11 を報告"""
    return balanced_decompose(A, swapped=True)


def product_energy_pipeline(A: FiniteSet) -> ProductDecomposition:
    """
    二段階の均衡分解から E⁺(B)·E^×(C) の小さい互いに素な組を選ぶ

    1. A = X ⊔ Y（E⁺(X), E^×(Y) が小さい）
    2. X を入れ替え版で U（E^×小）, V（E⁺小）に分ける
    3. E^×(Y)E⁺(V) ≤ E⁺(X)E^×(U) なら (V, Y)、そうでなければ (V, U)

    Raises:
        PreconditionError: |A| < 4 など均衡分解の前提違反
    """
    n = len(A)
    if n < 4:
        raise PreconditionError("product pipeline needs |A| >= 4")
    stage_one = balanced_decompose(A)
    stage_two = balanced_decompose(stage_one.B, swapped=True)

    add_X, mul_Y = stage_one.energies["add_B"], stage_one.energies["mul_C"]
    mul_U, add_V = stage_two.energies["mul_B"], stage_two.energies["add_C"]

    if mul_Y * add_V <= add_X * mul_U:
        B, C, branch = stage_two.C, stage_one.C, "remainder-pair"
        energies = {"add_B": add_V, "mul_C": mul_Y}
    else:
        B, C, branch = stage_two.C, stage_two.B, "inner-pair"
        energies = {"add_B": add_V, "mul_C": mul_U}

    if not B.isdisjoint(C):
        raise InvariantViolation("product pipeline parts overlap")
    if 9 * min(len(B), len(C)) < n:
        raise InvariantViolation(f"parts of size {len(B)}, {len(C)} below |A|/9")

    with high_precision():
        ratio = monomial([(energies["add_B"], 1), (energies["mul_C"], 1), (n, "-28/5")])

    return ProductDecomposition(B=B, C=C, branch=branch, product_ratio=ratio, energies=energies,
                                stage_one=stage_one, stage_two=stage_two,
                                warnings=stage_one.warnings + stage_two.warnings)


# ──────────────────────────────────────────────
# 平行移動・逆数版
# ──────────────────────────────────────────────

def translate_decompose(A: FiniteSet, alpha: Optional[Any], variant: DecompositionVariant,
                        M: Optional[Any] = None) -> DecompositionTrace:
    """
    mult-translate：差の抽出で B を集め、E^×(α + C) を監視
    reciprocal：傾き抽出で B を集め、E⁺(1/C) を監視（標数0のみ、α は使わない）

    Raises:
        PreconditionError: α = 0、−α ∈ A、0 ∈ A、素体での reciprocal
    """
    variant = DecompositionVariant(variant)
    if variant not in (DecompositionVariant.MULT_TRANSLATE, DecompositionVariant.RECIPROCAL):
        raise PreconditionError(f"translate_decompose does not handle {variant.value}")
    _require_nonzero(A)
    n = len(A)
    if n == 0:
        raise PreconditionError("cannot decompose the empty set")
    field = A.field

    if variant == DecompositionVariant.MULT_TRANSLATE:
        if alpha is None or field.normalize(alpha) == 0:
            raise PreconditionError("alpha must be nonzero")
        alpha = field.normalize(alpha)
        if field.neg(alpha) in A.members:
            raise PreconditionError("alpha + A must avoid 0")

        def monitor(C: FiniteSet) -> int:
            return multiplicative_energy(affine_image(C, 1, alpha))

        law, monitored = ExtractionLaw.SUB_DIFFERENCES, "E^x(alpha+C)"
    else:
        if field.is_prime:
            raise PreconditionError("the reciprocal variant is only available over the rationals")

        def monitor(C: FiniteSet) -> int:
            return additive_energy(C.inverted())

        law, monitored = ExtractionLaw.MUL_SLOPES, "E+(1/C)"

    M = _resolve_M(A, M)
    threshold = Fraction(n ** 3) / M
    steps, B, C, _ = run_extraction_loop(
        A, law, monitor, lambda C, current, B: "energy" if current <= threshold else None)
    _check_partition(A, B, C)

    delta = density_exponent(A)
    with high_precision():
        scale = monomial([(n, 3 - delta)])
        if variant == DecompositionVariant.MULT_TRANSLATE:
            energies = {"energy_mul_B": multiplicative_energy(B), "energy_mul_translate_C": monitor(C)}
        else:
            energies = {"energy_add_B": additive_energy(B), "energy_add_reciprocal_C": monitor(C)}
        top = max(energies.values())
        metrics = dict(energies)
        metrics.update({
            "alpha": alpha if variant == DecompositionVariant.MULT_TRANSLATE else None,
            "delta": delta,
            "max_energy": top,
            "max_energy_ratio": safe_ratio(top, scale),
            "step_count": len(steps),
        })

    logger.info(f"{variant.value}: |A|={n}, steps={len(steps)}, |B|={len(B)}, |C|={len(C)}")
    return DecompositionTrace(variant=variant, monitored=monitored, M=M, threshold=threshold,
                              steps=steps, B=B, C=C, metrics=metrics)


# ──────────────────────────────────────────────
# R[A] の分解
# ──────────────────────────────────────────────

def r_set_decompose(A: FiniteSet) -> RSetDecomposition:
    """
    R = R[A] から E^×(R') の小さい R' と E⁺(R'') の小さい R'' を取り出す

    R' は R \\ {0, 1} の平行移動分解（α = −1）から、大きい方の B か 1 − C を取り 1 を加える。
    R'' は R* = R \\ {0} の逆数分解から、大きい方の B' か 1/C' を取り 0 を加える。
    どちらも |R|/2 以上になる。

    Raises:
        PreconditionError: |A| < 2、素体
        InvariantViolation: R ≠ 1 − R または (R*)⁻¹ ≠ R*
    """
    if A.field.is_prime:
        raise PreconditionError("r_set_decompose works over the rationals")
    if len(A) < 2:
        raise PreconditionError("r_set_decompose needs |A| >= 2")

    R = r_set(A)
    if affine_image(R, -1, 1) != R:
        raise InvariantViolation("R[A] differs from 1 - R[A]", counterexample=R.formatted())
    R_star = R.without(0)
    if R_star.inverted() != R_star:
        raise InvariantViolation("R[A] without 0 is not closed under inversion", counterexample=R.formatted())

    half = -(-len(R) // 2)
    core = R.without(0, 1)
    translate_trace: Optional[DecompositionTrace] = None
    if len(core) > 0:
        translate_trace = translate_decompose(core, -1, DecompositionVariant.MULT_TRANSLATE)
        B, C = translate_trace.B, translate_trace.C
    else:
        B = C = FiniteSet.empty(R.field)
    one = FiniteSet.of(R.field, [1])
    if len(B) >= len(C):
        R_prime, prime_branch = B.union(one), "B"
    else:
        R_prime, prime_branch = affine_image(C, -1, 1).union(one), "one-minus-C"

    reciprocal_trace = translate_decompose(R_star, None, DecompositionVariant.RECIPROCAL)
    B2, C2 = reciprocal_trace.B, reciprocal_trace.C
    zero = FiniteSet.of(R.field, [0])
    if len(B2) >= len(C2):
        R_dprime, dprime_branch = B2.union(zero), "B"
    else:
        R_dprime, dprime_branch = C2.inverted().union(zero), "inverse-C"

    for name, part in (("R'", R_prime), ("R''", R_dprime)):
        if not part.issubset(R) or len(part) < half:
            raise InvariantViolation(f"{name} has size {len(part)} or leaves R (need >= {half})")

    energies = {
        "mul_R_prime": multiplicative_energy(R_prime),
        "add_R_dprime": additive_energy(R_dprime),
    }
    with high_precision():
        ratios = {
            "mul_R_prime": monomial([(energies["mul_R_prime"], 1), (len(R_prime), "-11/4")]),
            "add_R_dprime": monomial([(energies["add_R_dprime"], 1), (len(R_dprime), "-11/4")]),
        }

    return RSetDecomposition(R=R, R_prime=R_prime, R_dprime=R_dprime, prime_branch=prime_branch,
                             dprime_branch=dprime_branch, energy_ratios=ratios, energies=energies,
                             traces={"translate": translate_trace, "reciprocal": reciprocal_trace})
