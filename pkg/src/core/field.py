"""基礎体（有理数体 / 素体）と体の元"""

import operator
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property, total_ordering
from typing import Any, Callable, List, Optional, Union

from sympy import isprime

from .exceptions import FieldMismatchError, PreconditionError

# 標数0では int または Fraction、素体では [0, p) の int
RawValue = Union[int, Fraction]

INVERSE_TABLE_LIMIT = 1 << 20


class FieldKind(Enum):
    """体の種類"""
    CHAR0 = "char0"
    PRIME = "prime"


class BinaryLaw(Enum):
    """二項演算"""
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"


def _canonical_rational(value: RawValue) -> RawValue:
    """分母1の Fraction は int に揃える（ハッシュと表示を安定させる）"""
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


@dataclass(frozen=True)
class GroundField:
    """
    基礎体

    CHAR0 は厳密な有理数、PRIME(p) は p を法とする剰余類。
    p の素数性は生成時に sympy で検査する。
    """
    kind: FieldKind
    p: Optional[int] = None

    def __post_init__(self):
        if self.kind == FieldKind.PRIME:
            if not isinstance(self.p, int) or isinstance(self.p, bool):
                raise PreconditionError(f"prime field needs an integer p, got {self.p!r}")
            if self.p < 3 or not isprime(self.p):
                raise PreconditionError(f"p must be a prime >= 3, got {self.p}")
        elif self.p is not None:
            raise PreconditionError("char0 field takes no modulus")

    @classmethod
    def rationals(cls) -> "GroundField":
        return cls(FieldKind.CHAR0)

    @classmethod
    def prime(cls, p: int) -> "GroundField":
        return cls(FieldKind.PRIME, p)

    @property
    def is_prime(self) -> bool:
        return self.kind == FieldKind.PRIME

    def describe(self) -> str:
        """ログ・レポート用の短い表記"""
        return f"prime p={self.p}" if self.is_prime else "char0"

    @cached_property
    def _inverse_table(self) -> List[int]:
        # 大きな p では表を作らず pow に任せる
        if self.p > INVERSE_TABLE_LIMIT:
            return []
        table = [0] * self.p
        for x in range(1, self.p):
            table[x] = pow(x, -1, self.p)
        return table

    def _residue_inverse(self, a: int) -> int:
        table = self._inverse_table
        return table[a] if table else pow(a, -1, self.p)

    def normalize(self, value: Any) -> RawValue:
        """
        外部入力を正規形の生の値に変換

        Args:
            value: int / Fraction / "p/q" 形式の文字列 / FieldElem

        Returns:
            CHAR0 なら既約有理数（整数なら int）、PRIME なら [0, p) の int
        """
        if isinstance(value, FieldElem):
            self.require_same(value.field)
            return value.value
        if isinstance(value, bool):
            raise TypeError("booleans are not field elements")
        if isinstance(value, float):
            raise TypeError("floating-point values are not accepted; use an exact rational")
        if isinstance(value, str):
            value = Fraction(value.strip())
        if not isinstance(value, (int, Fraction)):
            raise TypeError(f"cannot interpret {value!r} as a field element")

        if self.is_prime:
            if isinstance(value, Fraction):
                denominator = value.denominator % self.p
                if denominator == 0:
                    raise PreconditionError(f"{value} has a denominator divisible by p={self.p}")
                return value.numerator * self._residue_inverse(denominator) % self.p
            return value % self.p
        return _canonical_rational(Fraction(value))

    def require_same(self, other: "GroundField"):
        if other != self:
            raise FieldMismatchError(f"field mismatch: {self.describe()} vs {other.describe()}")

    # ──────────────────────────────────────────────
    # 生の値に対する演算
    # ──────────────────────────────────────────────

    def add(self, a: RawValue, b: RawValue) -> RawValue:
        if self.is_prime:
            return (a + b) % self.p
        return _canonical_rational(a + b)

    def sub(self, a: RawValue, b: RawValue) -> RawValue:
        if self.is_prime:
            return (a - b) % self.p
        return _canonical_rational(a - b)

    def mul(self, a: RawValue, b: RawValue) -> RawValue:
        if self.is_prime:
            return a * b % self.p
        return _canonical_rational(a * b)

    def inv(self, a: RawValue) -> RawValue:
        if a == 0:
            raise PreconditionError("division by zero")
        if self.is_prime:
            return self._residue_inverse(a)
        return _canonical_rational(1 / Fraction(a))

    def div(self, a: RawValue, b: RawValue) -> RawValue:
        return self.mul(a, self.inv(b))

    def neg(self, a: RawValue) -> RawValue:
        if self.is_prime:
            return -a % self.p
        return -a

    def kernel(self, law: BinaryLaw) -> Callable[[RawValue, RawValue], RawValue]:
        """
        カウント用の高速二項演算を返す

        CHAR0 の加減乗は正規化を省く（Fraction(3) と 3 は同じキーとして扱われる）。
        """
        if self.is_prime:
            p = self.p
            inverse = self._residue_inverse
            if law == BinaryLaw.ADD:
                return lambda a, b: (a + b) % p
            if law == BinaryLaw.SUB:
                return lambda a, b: (a - b) % p
            if law == BinaryLaw.MUL:
                return lambda a, b: a * b % p
            return lambda a, b: a * inverse(b) % p

        if law == BinaryLaw.ADD:
            return operator.add
        if law == BinaryLaw.SUB:
            return operator.sub
        if law == BinaryLaw.MUL:
            return operator.mul
        return lambda a, b: Fraction(a) / b

    def element(self, value: Any) -> "FieldElem":
        return FieldElem(self, self.normalize(value))

    def format_value(self, value: RawValue) -> str:
        """集合ファイル・JSON 用の表記（"3", "-1/2"）"""
        value = _canonical_rational(value) if not self.is_prime else value
        return str(value)


@total_ordering
@dataclass(frozen=True)
class FieldElem:
    """体の元（体タグ付き）"""
    field: GroundField
    value: RawValue = 0

    def __post_init__(self):
        object.__setattr__(self, "value", self.field.normalize(self.value))

    def _coerce(self, other: Any) -> RawValue:
        if isinstance(other, FieldElem):
            self.field.require_same(other.field)
            return other.value
        return self.field.normalize(other)

    def __add__(self, other):
        return FieldElem(self.field, self.field.add(self.value, self._coerce(other)))

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return FieldElem(self.field, self.field.sub(self.value, self._coerce(other)))

    def __rsub__(self, other):
        return FieldElem(self.field, self.field.sub(self._coerce(other), self.value))

    def __mul__(self, other):
        return FieldElem(self.field, self.field.mul(self.value, self._coerce(other)))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        return FieldElem(self.field, self.field.div(self.value, self._coerce(other)))

    def __rtruediv__(self, other):
        return FieldElem(self.field, self.field.div(self._coerce(other), self.value))

    def __neg__(self):
        return FieldElem(self.field, self.field.neg(self.value))

    def __lt__(self, other):
        if not isinstance(other, FieldElem):
            return NotImplemented
        self.field.require_same(other.field)
        return self.value < other.value

    def __str__(self) -> str:
        return self.field.format_value(self.value)
