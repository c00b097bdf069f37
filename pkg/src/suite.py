"""verify-all：厳密な不変量と経験的チェックの一括実行"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Tuple

from .core.bsg import bsg_extract, verify_bsg
from .core.config import get_config
from .core.decompose import balanced_decompose, bw_decompose, product_energy_pipeline
from .core.energy import (
    additive_energy, cauchy_schwarz_check, energy, energy_bruteforce, multiplicative_energy,
    quarter_power_check,
)
from .core.exceptions import EnergyLabError
from .core.families import FamilySpec, generate_family, seeded_generator, spawn_seeds
from .core.field import BinaryLaw, GroundField
from .core.finite_set import FiniteSet
from .core.fpgrowth import (
    energy_over_dilates, had_pipeline, had_solution_count, octuple_count, partial_energy_sum, range_set,
)
from .core.incidence import energy_plane_crosscheck
from .interfaces.results import DilateLaw
from .utils.precision import ceil_root

logger = logging.getLogger(__name__)


@dataclass
class SuiteCheck:
    """一つのチェックの結果"""
    name: str
    passed: bool
    detail: Dict[str, Any] = field(default_factory=dict)


# ──────────────────────────────────────────────
# ランダム集合
# ──────────────────────────────────────────────

def random_rational_set(rng, size: int, nonzero: bool = True) -> FiniteSet:
    """分母 1〜4、分子 −40〜40 の有理数から size 個以下"""
    field = GroundField.rationals()
    values = {Fraction(int(rng.integers(-40, 41)), int(rng.integers(1, 5))) for _ in range(size)}
    if nonzero:
        values.discard(Fraction(0))
    return FiniteSet.of(field, values)


def random_residue_set(rng, p: int, size: int, nonzero: bool = True) -> FiniteSet:
    """𝔽p（nonzero なら 𝔽p*）から重複なしに size 個"""
    low = 1 if nonzero else 0
    chosen = rng.choice(p - low, size=min(size, p - low), replace=False) + low
    return FiniteSet.of(GroundField.prime(p), chosen.tolist())


def _random_set(rng, max_size: int) -> FiniteSet:
    size = int(rng.integers(1, max_size + 1))
    if rng.integers(0, 2):
        return random_rational_set(rng, size)
    return random_residue_set(rng, 101, size)


# ──────────────────────────────────────────────
# チェック本体
# ──────────────────────────────────────────────

def check_energy_oracle(seed: int, trials: int) -> SuiteCheck:
    """多重度表によるエネルギーと総当たりオラクルの一致"""
    rng = seeded_generator(seed)
    mismatches = []
    for trial in range(trials):
        A = _random_set(rng, 30)
        for law in (BinaryLaw.ADD, BinaryLaw.MUL):
            if energy(A, A, law) != energy_bruteforce(A, A, law):
                mismatches.append({"trial": trial, "law": law.value, "A": A.formatted()})
    return SuiteCheck("energy_oracle", not mismatches, {"trials": trials, "mismatches": mismatches[:3]})


def check_known_values() -> SuiteCheck:
    rationals = GroundField.rationals()
    expected = {
        f"ap{n}": ((2 * n ** 3 + n) // 3, additive_energy(generate_family(FamilySpec.ap(1, 1, n))))
        for n in (3, 8, 16)
    }
    expected["sidon"] = (28, additive_energy(FiniteSet.of(rationals, [1, 2, 5, 11])))
    expected["mul_f7"] = (27, multiplicative_energy(FiniteSet.of(GroundField.prime(7), [1, 2, 4])))
    failures = {name: pair for name, pair in expected.items() if pair[0] != pair[1]}
    return SuiteCheck("known_values", not failures, {"failures": failures})


def check_cauchy_schwarz(seed: int, trials: int) -> SuiteCheck:
    rng = seeded_generator(seed)
    failures = 0
    for _ in range(trials):
        A = _random_set(rng, 25)
        if not cauchy_schwarz_check(A).passed:
            failures += 1
    return SuiteCheck("cauchy_schwarz", failures == 0, {"sets": trials, "failures": failures})


def check_quarter_power(seed: int, trials: int) -> SuiteCheck:
    rng = seeded_generator(seed)
    failures = 0
    for _ in range(trials):
        A = _random_set(rng, 20)
        if len(A) == 0:
            continue
        parts_count = int(rng.integers(1, 6))
        labels = rng.integers(0, parts_count, size=len(A))
        parts = [FiniteSet(A.field, tuple(v for v, label in zip(A.values, labels) if label == j))
                 for j in range(parts_count)]
        parts = [part for part in parts if len(part)]
        for law in (BinaryLaw.ADD, BinaryLaw.MUL):
            if not quarter_power_check(parts, law).passed:
                failures += 1
    return SuiteCheck("quarter_power", failures == 0, {"partitions": trials, "failures": failures})


def bsg_corpus(quick: bool) -> List[FiniteSet]:
    sizes = (8, 16) if quick else (8, 16, 32, 64)
    corpus = [generate_family(FamilySpec.ap(1, 1, n)) for n in sizes]
    corpus += [generate_family(FamilySpec.sidon(n)) for n in (4, 8)]
    corpus += [generate_family(FamilySpec.bw_union(n)) for n in ((4,) if quick else (4, 8, 16))]
    return corpus


def check_bsg(seed: int, quick: bool) -> SuiteCheck:
    """三つの明示定数（抽出側は bsg_extract 内で、交差は検証で）"""
    failures = []
    checked = 0
    for A in bsg_corpus(quick):
        for k in (2, 3):
            cert = bsg_extract(A, k, BinaryLaw.ADD)
            verification = verify_bsg(cert, A, mode="auto", seed=seed)
            checked += verification.checked_tuples
            if not verification.passed:
                failures.append({"A_size": len(A), "k": k, "tuple": verification.counterexample})
    return SuiteCheck("bsg_certificates", not failures, {"tuples": checked, "failures": failures})


def bw_ladder(quick: bool) -> List[int]:
    """bw_union(n) の n（quick なら 16, 32 のみ）"""
    if quick:
        return [16, 32]
    return [int(n) for n in get_config().get("sweep.bw_ladder", [16, 32, 64, 128, 256, 512])]


def check_bw_contract(quick: bool) -> SuiteCheck:
    """停止・分割・E^×(C) ≤ |A|^3/M と、梯子上の比の有界性"""
    ladder = bw_ladder(quick)
    power = int(get_config().get("sweep.log_power", 3))
    rows = []
    bounded = True
    for n in ladder:
        A = generate_family(FamilySpec.bw_union(n))
        trace = bw_decompose(A)
        ratio = trace.metrics["max_energy_ratio"]
        scale = math.log2(len(A)) ** power
        bounded = bounded and float(ratio) <= scale
        rows.append({"n": len(A), "steps": len(trace.steps), "ratio": float(ratio)})
    return SuiteCheck("bw_contract", bounded, {"rows": rows})


def check_balanced_sizes(seed: int, trials: int) -> SuiteCheck:
    rng = seeded_generator(seed)
    failures = 0
    for _ in range(trials):
        A = random_rational_set(rng, int(rng.integers(2, 25)))
        if len(A) < 2:
            continue
        result = balanced_decompose(A)
        third = -(-len(A) // 3)
        if min(len(result.B), len(result.C)) < third:
            failures += 1
    return SuiteCheck("balanced_sizes", failures == 0, {"sets": trials, "failures": failures})


def check_balanced_ratios(quick: bool) -> SuiteCheck:
    """均衡分解・積パイプラインの三つの比が梯子上で log^3|A| 以下"""
    power = int(get_config().get("sweep.log_power", 3))
    rows = []
    bounded = True
    for n in bw_ladder(quick):
        A = generate_family(FamilySpec.bw_union(n))
        balanced = balanced_decompose(A)
        product = product_energy_pipeline(A)
        ratios = {
            "balanced_ratio": balanced.balanced_ratio,
            "product_ratio": product.product_ratio,
            "char0_ratio": balanced.metrics["char0_ratio"],
        }
        scale = math.log2(len(A)) ** power
        row = {"n": len(A)}
        for name, ratio in ratios.items():
            row[name] = float(ratio)
            bounded = bounded and float(ratio) <= scale
        rows.append(row)
    return SuiteCheck("balanced_ratios", bounded, {"rows": rows})


def check_prime_identities(seed: int, quick: bool) -> SuiteCheck:
    """質量保存・下限 |A|^4/p・部分和 ≤ p|A|^2・Cauchy–Schwarz（違反は例外で検出）"""
    primes = [101] if quick else [101, 499]
    x_trials = 10 if quick else 100
    details = []
    for p, child in zip(primes, spawn_seeds(seed, len(primes))):
        rng = seeded_generator(child)
        size = ceil_root(p, 11, 20)
        A = random_residue_set(rng, p, size)
        report = had_pipeline(A)
        for law in DilateLaw:
            dilates = energy_over_dilates(A, law)
            for _ in range(x_trials):
                X = random_residue_set(rng, p, int(rng.integers(1, p)))
                partial_energy_sum(A, X, law, dilates=dilates)
        details.append({"p": p, "size": len(A), "checks": report.checks})
    passed = all(all(d["checks"].values()) for d in details)
    return SuiteCheck("prime_identities", passed, {"instances": details})


def check_octuple_oracle(seed: int, trials: int) -> SuiteCheck:
    rng = seeded_generator(seed)
    mismatches = []
    for trial in range(trials):
        p = (7, 11)[trial % 2]
        B = random_residue_set(rng, p, int(rng.integers(1, 6)), nonzero=False)
        C = random_residue_set(rng, p, int(rng.integers(1, 6)), nonzero=False)
        if had_solution_count(B, C) != octuple_count(B, C):
            mismatches.append({"p": p, "B": B.formatted(), "C": C.formatted()})
    return SuiteCheck("octuple_oracle", not mismatches, {"pairs": trials, "mismatches": mismatches[:3]})


def check_incidence_crosscheck(seed: int, trials: int) -> SuiteCheck:
    rng = seeded_generator(seed)
    for _ in range(trials):
        A1, P, A = (random_rational_set(rng, int(rng.integers(1, 5)), nonzero=False) for _ in range(3))
        if len(A1) and len(P) and len(A):
            energy_plane_crosscheck(A1, P, A)
    return SuiteCheck("incidence_crosscheck", True, {"instances": trials})


def check_range_coverage(seed: int, quick: bool) -> SuiteCheck:
    """|A| = ⌈p^0.61⌉ のランダム集合で Q/p ≥ 0.5 となる試行の割合（経験的代替）"""
    config = get_config()
    exponent = Fraction(str(config.get("fpgrowth.growth_exponent", 0.61)))
    threshold = Fraction(str(config.get("fpgrowth.coverage_threshold", 0.5)))
    trials = 5 if quick else int(config.get("fpgrowth.coverage_trials", 20))
    primes = [101] if quick else config.get_sweep_primes()
    summary = {}
    passed = True
    for p in primes:
        size = ceil_root(p, exponent.numerator, exponent.denominator)
        hits = 0
        for child in spawn_seeds(seed + p, trials):
            A = random_residue_set(seeded_generator(child), p, size)
            if range_set(A).coverage >= threshold:
                hits += 1
        summary[p] = {"size": size, "hits": hits, "trials": trials}
        passed = passed and 10 * hits >= 9 * trials
    return SuiteCheck("range_coverage", passed, {"primes": summary})


def run_suite(seed: int = 0, quick: bool = False) -> List[SuiteCheck]:
    """
    すべてのチェックを順に実行

    InvariantViolation などの例外はそのチェックの失敗として記録する。
    """
    trials = 20 if quick else 200
    checks: List[Tuple[str, Callable[[], SuiteCheck]]] = [
        ("energy_oracle", lambda: check_energy_oracle(seed, trials)),
        ("known_values", check_known_values),
        ("cauchy_schwarz", lambda: check_cauchy_schwarz(seed + 1, 50 if quick else 500)),
        ("quarter_power", lambda: check_quarter_power(seed + 2, 50 if quick else 500)),
        ("bsg_certificates", lambda: check_bsg(seed + 3, quick)),
        ("bw_contract", lambda: check_bw_contract(quick)),
        ("balanced_sizes", lambda: check_balanced_sizes(seed + 4, 10 if quick else 50)),
        ("balanced_ratios", lambda: check_balanced_ratios(quick)),
        ("prime_identities", lambda: check_prime_identities(seed + 5, quick)),
        ("octuple_oracle", lambda: check_octuple_oracle(seed + 6, 10 if quick else 50)),
        ("incidence_crosscheck", lambda: check_incidence_crosscheck(seed + 7, 20 if quick else 100)),
        ("range_coverage", lambda: check_range_coverage(seed + 8, quick)),
    ]
    results = []
    for name, check in checks:
        try:
            result = check()
        except EnergyLabError as e:
            result = SuiteCheck(name, False, {"error": str(e), "counterexample": getattr(e, "counterexample", None)})
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, f"{result.name}: {'ok' if result.passed else 'FAILED'}")
        results.append(result)
    return results
