"""高精度評価ユーティリティ（mpmath）"""

from contextlib import contextmanager
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Tuple, Union

import mpmath
from mpmath import mp, mpf

from ..core.config import get_config, get_precision_digits

Exact = Union[int, Fraction]


def working_digits() -> int:
    """設定（ENERGYLAB_PRECISION 優先）から作業桁数を取得"""
    return get_precision_digits()


@contextmanager
def high_precision(digits: Optional[int] = None) -> Iterator[int]:
    """mpmath の作業精度を一時的に引き上げる"""
    digits = digits or working_digits()
    with mp.workdps(digits):
        yield digits


def to_mpf(value: Exact) -> mpf:
    """厳密値を現在の精度で mpf に変換"""
    value = Fraction(value)
    return mpf(value.numerator) / value.denominator


def power(base: Exact, exponent: Exact) -> mpf:
    """base^exponent（base ≥ 0、exponent は有理数）"""
    exponent = Fraction(exponent)
    if exponent.denominator == 1:
        return to_mpf(Fraction(base) ** exponent.numerator)
    if Fraction(base) == 0:
        return mpf(0)
    return mpmath.power(to_mpf(base), to_mpf(exponent))


def monomial(factors: Iterable[Tuple[Exact, Exact]]) -> mpf:
    """
    Π base_i^exponent_i を評価

    整数冪の部分は厳密に掛け合わせ、分数冪の部分だけを高精度で評価する。
    """
    exact_part = Fraction(1)
    real_part = mpf(1)
    for base, exponent in factors:
        exponent = Fraction(exponent)
        if exponent.denominator == 1:
            exact_part *= Fraction(base) ** exponent.numerator
        else:
            real_part *= power(base, exponent)
    return to_mpf(exact_part) * real_part


def safe_ratio(lhs: Union[Exact, mpf], rhs: Union[Exact, mpf]) -> Optional[mpf]:
    """lhs/rhs、rhs = 0 のときは None"""
    lhs = lhs if isinstance(lhs, mpf) else to_mpf(lhs)
    rhs = rhs if isinstance(rhs, mpf) else to_mpf(rhs)
    if rhs == 0:
        return None
    return lhs / rhs


def significant(value: Optional[mpf], digits: Optional[int] = None) -> Optional[str]:
    """レポート用に有効桁数で丸めた文字列"""
    if value is None:
        return None
    digits = digits or int(get_config().get("precision.report_significant_digits", 6))
    return mpmath.nstr(value, digits)


def relative_tolerance() -> mpf:
    return mpf(str(get_config().get("precision.relative_tolerance", "1e-20")))


def rational_text(value: Exact) -> str:
    """"num/den" 形式（整数ならそのまま）"""
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def ceil_root(value: int, degree_numerator: int, degree_denominator: int) -> int:
    """
    ⌈value^(num/den)⌉ を整数演算で求める

    m^den ≥ value^num を満たす最小の m。
    """
    target = value ** degree_numerator
    m = max(1, int(round(float(value) ** (degree_numerator / degree_denominator))) - 2)
    while m > 1 and (m - 1) ** degree_denominator >= target:
        m -= 1
    while m ** degree_denominator < target:
        m += 1
    return m


def floor_root(value: int, degree_numerator: int, degree_denominator: int) -> int:
    """⌊value^(num/den)⌋：m^den ≤ value^num を満たす最大の m"""
    target = value ** degree_numerator
    m = max(0, int(float(value) ** (degree_numerator / degree_denominator)) - 2)
    while (m + 1) ** degree_denominator <= target:
        m += 1
    while m > 0 and m ** degree_denominator > target:
        m -= 1
    return m
