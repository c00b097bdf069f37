"""𝔽p 上の (ab − c)/(a − d) の値域・解の個数と、拡大／平行移動エネルギーの和"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .decompose import balanced_decompose
from .energy import additive_energy, multiplicative_energy
from .exceptions import InvariantViolation, PreconditionError
from .finite_set import FiniteSet
from ..interfaces.results import (
    DilateEnergies, DilateLaw, GrowthReport, HadSigns, LadderReport, MomentReport,
    PartialSumReport, RangeReport, RepresentationCounts, RichDilateReport, SolutionCount,
)
from ..utils.precision import floor_root, high_precision, monomial, power, safe_ratio, to_mpf

logger = logging.getLogger(__name__)

# 剰余の積が int64 に収まる上限
MAX_KERNEL_PRIME = 1 << 31


def _prime_of(*sets: FiniteSet) -> int:
    field = sets[0].field
    for other in sets[1:]:
        field.require_same(other.field)
    if not field.is_prime:
        raise PreconditionError("this computation runs over a prime field")
    if field.p >= MAX_KERNEL_PRIME:
        raise PreconditionError(f"p={field.p} is too large for the residue kernels")
    return field.p


def _residues(A: FiniteSet) -> np.ndarray:
    return np.array(A.values, dtype=np.int64)


# ──────────────────────────────────────────────
# (ab ∓ c)/(a ∓ d) の表現数
# ──────────────────────────────────────────────

def had_representation_counts(B: FiniteSet, C: FiniteSet,
                              signs: HadSigns = HadSigns.MINUS) -> RepresentationCounts:
    """
    N(x) = #{(a, b, c, d) ∈ B×B×C×C : x = (ab ∓ c)/(a ∓ d)}

    分母が 0 になる四つ組（minus では a = d、plus では a + d = 0）は除外し、個数を excluded に記録する。

    Raises:
        PreconditionError: 標数0、体が異なる
    """
    p = _prime_of(B, C)
    signs = HadSigns(signs)
    sign = -1 if signs == HadSigns.MINUS else 1
    b_values, c_values = _residues(B), _residues(C)

    tally = np.zeros(p, dtype=np.int64)
    excluded = 0
    for a in B.values:
        numerators = ((a * b_values)[:, None] + sign * c_values[None, :]) % p
        denominators = (a + sign * c_values) % p
        usable = denominators[denominators != 0]
        excluded += int((denominators == 0).sum()) * len(B) * len(C)
        if usable.size == 0:
            continue
        inverses = np.array([pow(int(d), -1, p) for d in usable], dtype=np.int64)
        values = (numerators.ravel()[:, None] * inverses[None, :]) % p
        tally += np.bincount(values.ravel(), minlength=p)

    counts = {int(x): int(tally[x]) for x in np.flatnonzero(tally)}
    if excluded:
        logger.info(f"{excluded} quadruples with a vanishing denominator were skipped")
    return RepresentationCounts(p=p, signs=signs, counts=counts, excluded=excluded)


def had_solution_count(B: FiniteSet, C: FiniteSet, signs: HadSigns = HadSigns.MINUS,
                       counts: Optional[RepresentationCounts] = None) -> SolutionCount:
    """ℰ = Σ_{x≠0} N(x)^2、x = 0 の寄与 N(0)^2 は別に返す"""
    counts = counts or had_representation_counts(B, C, signs)
    E_cal = sum(n * n for x, n in counts.counts.items() if x != 0)
    zero = counts.counts.get(0, 0)
    return SolutionCount(E_cal=E_cal, zero_term=zero * zero)


def octuple_count(B: FiniteSet, C: FiniteSet, signs: HadSigns = HadSigns.MINUS) -> SolutionCount:
    """
    八つ組を直接数えるオラクル

    各四つ組を (分子, 分母) の組のまま保持し、交差乗算の一致で等しい値の組を数える。
    N の表は使わない。小さい B, C 専用。
    """
    p = _prime_of(B, C)
    sign = -1 if HadSigns(signs) == HadSigns.MINUS else 1
    pairs = [((a * b + sign * c) % p, (a + sign * d) % p)
             for a in B.values for b in B.values for c in C.values for d in C.values]
    pairs = np.array([pair for pair in pairs if pair[1] != 0], dtype=np.int64).reshape(-1, 2)
    numerators, denominators = pairs[:, 0], pairs[:, 1]
    same_value = (numerators[:, None] * denominators[None, :]
                  - numerators[None, :] * denominators[:, None]) % p == 0
    nonzero = numerators != 0
    E_cal = int((same_value & nonzero[:, None] & nonzero[None, :]).sum())
    zeros = int((~nonzero).sum())
    return SolutionCount(E_cal=E_cal, zero_term=zeros * zeros)


def range_set(A: FiniteSet, signs: HadSigns = HadSigns.MINUS) -> RangeReport:
    """Q = |{(ab ∓ c)/(a ∓ d) : a, b, c, d ∈ A}|"""
    if len(A) < 2:
        raise PreconditionError("range_set needs |A| >= 2")
    counts = had_representation_counts(A, A, signs)
    return RangeReport(p=counts.p, Q=counts.support_size, coverage=Fraction(counts.support_size, counts.p))


# ──────────────────────────────────────────────
# 拡大・平行移動エネルギー
# ──────────────────────────────────────────────

def dilate_energy(A: FiniteSet, x: int, law: DilateLaw) -> int:
    """E⁺(A, xA) または E^×(A, x + A)（0 を含む積もそのまま数える）"""
    p = _prime_of(A)
    values = _residues(A)
    if DilateLaw(law) == DilateLaw.ADD_DILATE:
        combined = values[:, None] + ((x * values) % p)[None, :]
    else:
        combined = values[:, None] * ((x + values) % p)[None, :]
    tally = np.bincount((combined % p).ravel(), minlength=p)
    return int(np.dot(tally, tally))


def _base_energy(A: FiniteSet, law: DilateLaw) -> int:
    return additive_energy(A) if DilateLaw(law) == DilateLaw.ADD_DILATE else multiplicative_energy(A)


def energy_over_dilates(A: FiniteSet, law: DilateLaw) -> DilateEnergies:
    """
    x ∈ 𝔽p* ごとの E⁺(A, xA)（add-dilate）または E^×(A, x + A)（mul-translate）

    すべての x で E·p ≥ |A|^4 を厳密に確認する。

    Raises:
        PreconditionError: 標数0、0 ∈ A
        InvariantViolation: 下限 |A|^4/p を下回る x がある
    """
    p = _prime_of(A)
    law = DilateLaw(law)
    if A.contains_zero() or len(A) == 0:
        raise PreconditionError("energy over dilates needs a nonempty A without 0")
    n = len(A)
    fourth = n ** 4
    per_x: Dict[int, int] = {}
    for x in range(1, p):
        value = dilate_energy(A, x, law)
        if value * p < fourth:
            raise InvariantViolation(f"E({law.value}, x={x})={value} below |A|^4/p", counterexample=x)
        per_x[x] = value

    total = sum(per_x.values())
    with high_precision():
        normalized = to_mpf(Fraction(total, fourth))
    logger.debug(f"{law.value} over p={p}: total={total}, |A|={n}")
    return DilateEnergies(law=law, p=p, size=n, per_x=per_x, total=total,
                          normalized_total=normalized, floor_ok=True)


def _excess_sum(dilates: DilateEnergies, xs) -> Fraction:
    """Σ_{x∈X}(E_x − |A|^4/p)"""
    floor = Fraction(dilates.size ** 4, dilates.p)
    return sum((dilates.per_x[x] - floor for x in xs), Fraction(0))


def _check_excess(dilates: DilateEnergies, xs) -> Tuple[Fraction, bool]:
    excess = _excess_sum(dilates, xs)
    bound = dilates.p * dilates.size ** 2
    if excess > bound:
        raise InvariantViolation(f"excess energy {excess} over p|A|^2={bound}")
    return excess, True


def _window_flag(n: int, p: int) -> bool:
    """p^{1/2} < |A| ≤ p^{2/3}"""
    return n * n > p and n ** 3 <= p * p


def moment_sum(A: FiniteSet, s, law: DilateLaw,
               dilates: Optional[DilateEnergies] = None) -> MomentReport:
    """
    Σ_{x≠0}(E_x − |A|^4/p)^{1+s} と p^{1−s/3} E(A)^{2s/3} |A|^{2+4s/3}

    Args:
        s: (0, 3) の有理数
        dilates: 計算済みの energy_over_dilates（省略時は計算する）

    Raises:
        PreconditionError: s が (0, 3) の外
    """
    s = Fraction(str(s))
    if not 0 < s < 3:
        raise PreconditionError(f"moment exponent must lie in (0, 3), got {s}")
    law = DilateLaw(law)
    dilates = dilates or energy_over_dilates(A, law)
    n, p = dilates.size, dilates.p
    in_range = _window_flag(n, p)
    if not in_range:
        logger.warning(f"|A|={n} outside (p^(1/2), p^(2/3)] for p={p}")

    floor = Fraction(n ** 4, p)
    with high_precision():
        lhs = sum((power(value - floor, 1 + s) for value in dilates.per_x.values()), to_mpf(0))
        rhs = monomial([(p, 1 - s / 3), (_base_energy(A, law), 2 * s / 3), (n, 2 + 4 * s / 3)])
        ratio = safe_ratio(lhs, rhs)
    return MomentReport(s=s, law=law, lhs=lhs, rhs=rhs, ratio=ratio, in_range=in_range)


def rich_dilate_count(A: FiniteSet, K, law: DilateLaw,
                      dilates: Optional[DilateEnergies] = None) -> RichDilateReport:
    """
    X = {x ∈ 𝔽p* : E_x > E(A)/K} と K^4|A|^6/E(A)^2 の比

    Raises:
        PreconditionError: K が [1, pE(A)/(2|A|^4)] の外
        InvariantViolation: Σ_{x∈X}(E_x − |A|^4/p) > p|A|^2
    """
    K = Fraction(str(K))
    law = DilateLaw(law)
    dilates = dilates or energy_over_dilates(A, law)
    n, p = dilates.size, dilates.p
    energy = _base_energy(A, law)
    upper = Fraction(p * energy, 2 * n ** 4)
    if not 1 <= K <= upper:
        raise PreconditionError(f"K must lie in [1, {upper}], got {K}")
    if n * n <= p:
        logger.warning(f"|A|={n} is not above p^(1/2) for p={p}")

    X = FiniteSet.of(A.field, (x for x, value in dilates.per_x.items() if value * K > energy))
    excess, ok = _check_excess(dilates, X.values)
    with high_precision():
        bound = monomial([(K, 4), (n, 6), (energy, -2)])
        ratio = safe_ratio(len(X), bound)
    return RichDilateReport(K=K, law=law, X=X, bound=bound, ratio=ratio, bkt_sum=excess, bkt_ok=ok)


def dilate_ladder(A: FiniteSet, law: DilateLaw, dilates: Optional[DilateEnergies] = None) -> LadderReport:
    """
    M^3 = pE(A)/(8|A|^4) として X_i = {x : 2^i E/M < E_x ≤ 2^{i+1} E/M} に分ける

    比較は E_x^3·p と 8^{i+1} E^2|A|^4 の整数比較で行う。
    E_x ≤ E/M の x は small に数える。
    """
    law = DilateLaw(law)
    dilates = dilates or energy_over_dilates(A, law)
    n, p = dilates.size, dilates.p
    energy = _base_energy(A, law)
    unit = 8 * energy * energy * n ** 4

    small = 0
    sizes: Dict[int, int] = {}
    for value in dilates.per_x.values():
        scaled = value ** 3 * p
        if scaled <= unit:
            small += 1
            continue
        level = 0
        while scaled > 8 ** (level + 1) * unit:
            level += 1
        sizes[level] = sizes.get(level, 0) + 1

    top = max(sizes) if sizes else -1
    levels: List[Tuple[int, int]] = [(i, sizes.get(i, 0)) for i in range(top + 1)]
    partition_ok = small + sum(sizes.values()) == p - 1
    if not partition_ok:
        raise InvariantViolation("dyadic levels do not partition the nonzero residues")
    return LadderReport(law=law, M_cubed=Fraction(p * energy, 8 * n ** 4), levels=levels,
                        small=small, partition_ok=partition_ok)


def partial_energy_sum(A: FiniteSet, X: FiniteSet, law: DilateLaw,
                       dilates: Optional[DilateEnergies] = None) -> PartialSumReport:
    """
    Σ_{x∈X} E_x と二つの上界 E(A)^{1/2}|A|^{3/2}|X|^{3/4}、|A|^{13/4}|X|^{1/2}

    flags に |X| ≤ |A|^2 と |A|^2|X| ≤ p^2 を記録する。

    Raises:
        PreconditionError: X が 𝔽p* に含まれない
    """
    law = DilateLaw(law)
    A.field.require_same(X.field)
    if X.contains_zero():
        raise PreconditionError("X must avoid 0")
    dilates = dilates or energy_over_dilates(A, law)
    n, p, m = dilates.size, dilates.p, len(X)
    total = sum(dilates.per_x[x] for x in X.values)
    energy = _base_energy(A, law)
    _, ok = _check_excess(dilates, X.values)

    with high_precision():
        bound_inccount = monomial([(energy, "1/2"), (n, "3/2"), (m, "3/4")])
        bound_remark = monomial([(n, "13/4"), (m, "1/2")])
        ratios = {
            "energy_bound": safe_ratio(total, bound_inccount),
            "size_bound": safe_ratio(total, bound_remark),
        }
    flags = {"size_ok": m <= n * n, "field_ok": n * n * m <= p * p}
    return PartialSumReport(law=law, total=total, bound_inccount=bound_inccount,
                            bound_remark=bound_remark, ratios=ratios, flags=flags, bkt_ok=ok)


# ──────────────────────────────────────────────
# パイプライン
# ──────────────────────────────────────────────

def had_pipeline(A: FiniteSet, signs: HadSigns = HadSigns.MINUS) -> GrowthReport:
    """
    均衡分解 A ⊇ B ⊔ C の上で (ab ∓ c)/(a ∓ d) の解の個数を数え、値域の下界の連鎖を確認する

    |A| > p^{3/5} なら正準順序の先頭 ⌊p^{3/5}⌋ 個に切り詰める。
    B は E^× の小さい側、C は E⁺ の小さい側。

    Raises:
        PreconditionError: 標数0、0 ∈ A、|A| < 2
        InvariantViolation: 質量保存・Cauchy–Schwarz・エネルギー分割の不等式が破れた
    """
    p = _prime_of(A)
    signs = HadSigns(signs)
    if A.contains_zero():
        raise PreconditionError("had_pipeline needs 0 outside A")
    warnings: List[str] = []
    cap = floor_root(p, 3, 5)
    truncated = len(A) > cap
    if truncated:
        message = f"truncated |A|={len(A)} to the first {cap} elements (p^(3/5) for p={p})"
        logger.warning(message)
        warnings.append(message)
        A = A.prefix(cap)
    n = len(A)
    if n < 2:
        raise PreconditionError("had_pipeline needs |A| >= 2")

    balanced = balanced_decompose(A)
    warnings.extend(balanced.warnings)
    B, C = balanced.C, balanced.B

    counts = had_representation_counts(B, C, signs)
    solutions = had_solution_count(B, C, signs, counts=counts)
    Q_bc = counts.support_size
    Q = range_set(A, signs).Q

    mul_translates = energy_over_dilates(B, DilateLaw.MUL_TRANSLATE)
    add_dilates = energy_over_dilates(C, DilateLaw.ADD_DILATE)
    split_sum = sum(mul_translates.per_x[x] * add_dilates.per_x[x] for x in range(1, p))
    ladder = dilate_ladder(C, DilateLaw.ADD_DILATE, dilates=add_dilates)

    quadruples = len(B) ** 2 * len(C) ** 2
    checks = {
        "mass": counts.total + counts.excluded == quadruples,
        "cauchy_schwarz": Q_bc * (solutions.E_cal + solutions.zero_term) >= counts.total ** 2,
        "energy_split": solutions.E_cal <= split_sum,
        "range_monotone": Q >= Q_bc,
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise InvariantViolation(f"growth pipeline checks failed: {', '.join(failed)}")

    energy_C, energy_B = additive_energy(C), multiplicative_energy(B)
    with high_precision():
        trivial = to_mpf(Fraction(n ** 8, p))
        structured = monomial([(p, "2/3"), (n, "10/3"), (energy_C, "4/15"), (energy_B, "2/5")])
        terms = {"trivial": trivial, "structured": structured, "sum": trivial + structured}
        ratios = {
            "coverage": to_mpf(Fraction(Q, p)),
            "solutions_normalized": to_mpf(Fraction(solutions.E_cal * p, n ** 8)),
            "solutions_against_terms": safe_ratio(solutions.E_cal, terms["sum"]),
            "balanced_ratio": balanced.balanced_ratio,
        }

    logger.info(f"growth pipeline p={p}: |A|={n}, |B|={len(B)}, |C|={len(C)}, Q={Q}, E_cal={solutions.E_cal}")
    return GrowthReport(
        p=p, signs=signs, A=A, B=B, C=C, N=counts.counts, Q=Q, Q_bc=Q_bc,
        solution_count=solutions,
        energy_sums={
            "mul_translate_B": mul_translates.total,
            "add_dilate_C": add_dilates.total,
            "split_sum": split_sum,
            "excluded": counts.excluded,
        },
        level_sets=ladder.levels, terms=terms, ratios=ratios, checks=checks,
        truncated=truncated, warnings=warnings,
    )
