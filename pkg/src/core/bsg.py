"""構成的 Balog–Szemerédi–Gowers 抽出と、その証明書の検証"""

import itertools
import logging
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Optional, Tuple

from .config import get_config
from .energy import additive_energy, multiplicative_energy, rep_function
from .exceptions import InvariantViolation, PreconditionError
from .families import seeded_generator
from .field import BinaryLaw, GroundField, RawValue
from .finite_set import FiniteSet
from ..interfaces.results import BsgCertificate, BsgVerification, SpEnergyReport
from ..utils.precision import high_precision, monomial, to_mpf

logger = logging.getLogger(__name__)


def _quotient_law(law: BinaryLaw) -> BinaryLaw:
    return BinaryLaw.SUB if law == BinaryLaw.ADD else BinaryLaw.DIV


def _translate(field: GroundField, law: BinaryLaw, a: RawValue, s: RawValue) -> RawValue:
    """a + s（add）または a·s（mul）"""
    return field.add(a, s) if law == BinaryLaw.ADD else field.mul(a, s)


def fibre(A: FiniteSet, s: RawValue, law: BinaryLaw) -> FiniteSet:
    """A_s = A ∩ (A − s)（add）または A ∩ (A/s)（mul）"""
    members = A.members
    return FiniteSet(A.field, tuple(a for a in A.values if _translate(A.field, law, a, s) in members))


def _edge_degrees(A_s: FiniteSet, P: FrozenSet[RawValue], law: BinaryLaw) -> Dict[RawValue, int]:
    """x ∼ y ⇔ x − y ∈ P（mul は x/y ∈ P）のグラフの次数（ループ込み）"""
    quotient = A_s.field.kernel(_quotient_law(law))
    return {x: sum(1 for y in A_s.values if quotient(x, y) in P) for x in A_s.values}


def bsg_extract(A: FiniteSet, k: int, law: BinaryLaw) -> BsgCertificate:
    """
    E(A) ≥ |A|^3/K から A_* と P を構成する

    P = {s : |A_s| ≥ ε|A|/(2K)}、ε = 1/(4k)。|A_s| ≥ |A|/(2K) の s を正準順序で走査し、
    辺数 > (1 − ε)|A_s|^2 となる最初の s を証拠とする。
    A_* は次数 ≥ (1 − 2ε)|A_s| の頂点。

    Args:
        A: |A| ≥ 2
        k: k ≥ 2
        law: add または mul（mul では 0 ∉ A）

    Raises:
        PreconditionError: 前提違反
        InvariantViolation: 証拠が見つからない、または定数付きの保証が破れた
    """
    law = BinaryLaw(law)
    if law not in (BinaryLaw.ADD, BinaryLaw.MUL):
        raise PreconditionError(f"bsg supports add or mul, got {law.value}")
    n = len(A)
    if n < 2:
        raise PreconditionError("bsg needs |A| >= 2")
    if k < 2:
        raise PreconditionError("bsg needs k >= 2")
    if law == BinaryLaw.MUL and A.contains_zero():
        raise PreconditionError("multiplicative bsg needs 0 outside A")

    field = A.field
    # |A_s| = r_{A−A}(s)（mul は r_{A/A}(s)）
    fibre_sizes = rep_function(A, A, _quotient_law(law)).table
    energy = sum(c * c for c in fibre_sizes.values())
    K = Fraction(n ** 3, energy)
    epsilon = Fraction(1, 4 * k)

    P = FiniteSet.of(field, (s for s, size in fibre_sizes.items() if size >= epsilon * n / (2 * K)))
    popular = P.members
    symmetric = P.negated() if law == BinaryLaw.ADD else P.inverted()
    if symmetric != P:
        raise InvariantViolation("popular set is not symmetric")

    candidates = sorted(s for s, size in fibre_sizes.items() if size >= Fraction(n) / (2 * K))
    for s in candidates:
        A_s = fibre(A, s, law)
        degrees = _edge_degrees(A_s, popular, law)
        edges = sum(degrees.values())
        if edges > (1 - epsilon) * len(A_s) ** 2:
            break
    else:
        raise InvariantViolation("no witness s satisfies the edge bound", counterexample=A.formatted())

    A_star = FiniteSet.of(field, (x for x, d in degrees.items() if d >= (1 - 2 * epsilon) * len(A_s)))

    if len(A_star) < Fraction(n) / (8 * k * K):
        raise InvariantViolation(f"|A_*|={len(A_star)} below |A|/(8kK)")
    if len(P) > 8 * k * K * n:
        raise InvariantViolation(f"|P|={len(P)} above 8kK|A|")
    if not A_star.issubset(A_s):
        raise InvariantViolation("A_* leaves A_s")

    logger.info(f"bsg({law.value}, k={k}): |A|={n}, K={K}, s={field.format_value(s)}, "
                f"|A_s|={len(A_s)}, |A_*|={len(A_star)}, |P|={len(P)}")
    return BsgCertificate(law=law, k=k, A_star=A_star, P=P, s_witness=s, A_s=A_s, K=K,
                          epsilon=epsilon, energy=energy, edge_count=edges, source_size=n)


def neighbourhoods(cert: BsgCertificate, A: FiniteSet) -> Dict[RawValue, FrozenSet[RawValue]]:
    """a ∈ A_* ごとの A ∩ (P + a)（mul は A ∩ (P·a)）"""
    members = A.members
    return {
        a: frozenset(v for v in (_translate(A.field, cert.law, a, x) for x in cert.P.values) if v in members)
        for a in cert.A_star.values
    }


def _parse_mode(mode: str) -> Tuple[str, Optional[int]]:
    if mode == "exhaustive":
        return "exhaustive", None
    if mode == "auto":
        return "auto", None
    if mode.startswith("sampled"):
        _, _, trials = mode.partition(":")
        return "sampled", int(trials) if trials else None
    raise PreconditionError(f"unknown verification mode: {mode}")


def verify_bsg(cert: BsgCertificate, A: FiniteSet, mode: str = "auto", seed: int = 0) -> BsgVerification:
    """
    A_* の k 組について |A ∩ (P + a1) ∩ … ∩ (P + ak)| ≥ |A|/(4K) を確認

    Args:
        mode: "exhaustive"、"sampled[:N]"、"auto"（|A_*|^k ≤ 上限なら全数）
        seed: 抽出モードの乱数シード

    Returns:
        BsgVerification（違反があれば counterexample に k 組）
    """
    if cert.source_size != len(A) or not cert.A_star.issubset(A):
        raise PreconditionError("certificate was produced from a different set")

    config = get_config()
    kind, trials = _parse_mode(mode)
    cap = int(config.get("bsg.exhaustive_cap", 100000))
    total = len(cert.A_star) ** cert.k
    if kind == "auto":
        kind = "exhaustive" if total <= cap else "sampled"
    trials = trials or int(config.get("bsg.sampled_trials", 1000))

    threshold = Fraction(len(A)) / (4 * cert.K)
    hoods = neighbourhoods(cert, A)
    stars = cert.A_star.values

    if kind == "exhaustive":
        tuples = itertools.product(stars, repeat=cert.k)
        used_seed = None
    else:
        rng = seeded_generator(seed)
        indices = rng.integers(0, len(stars), size=(trials, cert.k))
        tuples = (tuple(stars[i] for i in row) for row in indices)
        used_seed = seed

    checked = 0
    smallest: Optional[int] = None
    counterexample = None
    for combo in tuples:
        checked += 1
        common = frozenset.intersection(*(hoods[a] for a in combo))
        size = len(common)
        smallest = size if smallest is None else min(smallest, size)
        if size < threshold and counterexample is None:
            counterexample = combo

    passed = counterexample is None
    if not passed:
        logger.error(f"bsg verification failed on {counterexample}: {smallest} < {threshold}")
    return BsgVerification(mode=kind, checked_tuples=checked, min_intersection=smallest,
                           threshold=threshold, passed=passed, counterexample=counterexample,
                           seed=used_seed)


def sp_energy_pipeline(A: FiniteSet) -> SpEnergyReport:
    """
    乗法 BSG（k = 2）の A_* を A1 とし、(E⁺(A1))^2 (E^×(A))^9 / |A|^32 を報告

    Raises:
        PreconditionError: 素体、0 ∈ A
    """
    if A.field.is_prime:
        raise PreconditionError("sp_energy_pipeline works over the rationals")
    if A.contains_zero():
        raise PreconditionError("sp_energy_pipeline needs 0 outside A")
    cert = bsg_extract(A, 2, BinaryLaw.MUL)
    A1 = cert.A_star
    n = len(A)
    mul_energy = multiplicative_energy(A)
    lhs = additive_energy(A1) ** 2 * mul_energy ** 9
    rhs = n ** 32
    with high_precision():
        size_ratio = to_mpf(Fraction(len(A1) * n * n, mul_energy))
        ratio = monomial([(lhs, 1), (n, -32)])
    return SpEnergyReport(A1=A1, certificate=cert, size_ratio=size_ratio, lhs=lhs, rhs=rhs, ratio=ratio)


def certificate_summary(cert: BsgCertificate) -> Dict[str, Any]:
    """レポート用の要約"""
    field = cert.A_star.field
    return {
        "law": cert.law.value,
        "k": cert.k,
        "K": cert.K,
        "epsilon": cert.epsilon,
        "s_witness": field.format_value(cert.s_witness),
        "A_s_size": len(cert.A_s),
        "A_star": cert.A_star.formatted(),
        "P_size": len(cert.P),
        "edge_count": cert.edge_count,
        "energy": cert.energy,
    }
