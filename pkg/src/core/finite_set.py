"""正準順序付き有限集合と集合演算"""

import logging
from dataclasses import dataclass, field as dataclass_field
from functools import cached_property
from typing import Any, FrozenSet, Iterable, Iterator, Tuple

from .exceptions import PreconditionError
from .field import BinaryLaw, FieldElem, GroundField, RawValue

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FiniteSet:
    """
    有限集合

    values は正規化済みの生の値を正準順序（標数0は数値順、素体は剰余の順）で保持する。
    excludes_zero が True なら 0 を含まないことを保証する。
    """
    field: GroundField
    values: Tuple[RawValue, ...]
    excludes_zero: bool = dataclass_field(default=False, compare=False)

    def __post_init__(self):
        if any(self.values[i] >= self.values[i + 1] for i in range(len(self.values) - 1)):
            raise PreconditionError("values must be strictly increasing; build sets with FiniteSet.of")
        if self.excludes_zero and 0 in self.members:
            raise PreconditionError("set flagged excludes_zero contains 0")

    @classmethod
    def of(cls, field: GroundField, values: Iterable[Any], excludes_zero: bool = False) -> "FiniteSet":
        """任意の値の列から重複を除いて正準順序の集合を作る"""
        normalized = {field.normalize(v) for v in values}
        return cls(field, tuple(sorted(normalized)), excludes_zero)

    @classmethod
    def empty(cls, field: GroundField) -> "FiniteSet":
        return cls(field, ())

    @cached_property
    def members(self) -> FrozenSet[RawValue]:
        return frozenset(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[RawValue]:
        return iter(self.values)

    def __contains__(self, item: Any) -> bool:
        if isinstance(item, FieldElem):
            return item.field == self.field and item.value in self.members
        try:
            return self.field.normalize(item) in self.members
        except (TypeError, ValueError):
            return False

    def elements(self) -> Tuple[FieldElem, ...]:
        """FieldElem としての要素列"""
        return tuple(FieldElem(self.field, v) for v in self.values)

    def contains_zero(self) -> bool:
        return 0 in self.members

    def _require_same_field(self, other: "FiniteSet"):
        self.field.require_same(other.field)

    def _derive(self, values: Iterable[RawValue]) -> "FiniteSet":
        return FiniteSet(self.field, tuple(sorted(set(values))))

    def union(self, other: "FiniteSet") -> "FiniteSet":
        self._require_same_field(other)
        return self._derive(self.members | other.members)

    def intersection(self, other: "FiniteSet") -> "FiniteSet":
        self._require_same_field(other)
        return self._derive(self.members & other.members)

    def difference(self, other: "FiniteSet") -> "FiniteSet":
        self._require_same_field(other)
        return self._derive(self.members - other.members)

    def issubset(self, other: "FiniteSet") -> bool:
        self._require_same_field(other)
        return self.members <= other.members

    def isdisjoint(self, other: "FiniteSet") -> bool:
        self._require_same_field(other)
        return self.members.isdisjoint(other.members)

    def without(self, *values: Any) -> "FiniteSet":
        removed = {self.field.normalize(v) for v in values}
        return self._derive(v for v in self.values if v not in removed)

    def without_zero(self) -> "FiniteSet":
        return FiniteSet(self.field, tuple(v for v in self.values if v != 0), excludes_zero=True)

    def with_zero_excluded(self) -> "FiniteSet":
        """0 を含まないことを確認してフラグを立てる"""
        if self.contains_zero():
            raise PreconditionError("set contains 0")
        return FiniteSet(self.field, self.values, excludes_zero=True)

    def prefix(self, n: int) -> "FiniteSet":
        """正準順序の先頭 n 個"""
        return FiniteSet(self.field, self.values[:n], self.excludes_zero)

    def negated(self) -> "FiniteSet":
        return affine_image(self, -1, 0)

    def inverted(self) -> "FiniteSet":
        """{1/a}"""
        if self.contains_zero():
            raise PreconditionError("cannot invert a set containing 0")
        return FiniteSet(self.field, tuple(sorted(self.field.inv(v) for v in self.values)), True)

    def alternating_halves(self) -> Tuple["FiniteSet", "FiniteSet"]:
        """正準順序で交互に振り分けた二つの半分（偶数番目, 奇数番目）"""
        return (
            FiniteSet(self.field, self.values[0::2], self.excludes_zero),
            FiniteSet(self.field, self.values[1::2], self.excludes_zero),
        )

    def formatted(self) -> list:
        return [self.field.format_value(v) for v in self.values]

    def __repr__(self) -> str:
        shown = ", ".join(self.formatted()[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"FiniteSet({self.field.describe()}; {{{shown}{more}}}, n={len(self)})"


def pointwise_combine(A: FiniteSet, B: FiniteSet, law: BinaryLaw) -> FiniteSet:
    """
    {a ∘ b : a ∈ A, b ∈ B}

    Args:
        A, B: 同じ体の集合
        law: add / sub / mul / div

    Raises:
        FieldMismatchError: 体が異なる
        PreconditionError: div で 0 ∈ B
    """
    A.field.require_same(B.field)
    law = BinaryLaw(law)
    if law == BinaryLaw.DIV and B.contains_zero():
        raise PreconditionError("division by a set containing 0")
    op = A.field.kernel(law)
    field = A.field
    return FiniteSet.of(field, {op(a, b) for a in A.values for b in B.values})


def affine_image(A: FiniteSet, scale: Any, shift: Any) -> FiniteSet:
    """{scale·a + shift : a ∈ A}"""
    field = A.field
    scale = field.normalize(scale)
    shift = field.normalize(shift)
    if scale == 0:
        raise PreconditionError("affine_image requires a nonzero scale")
    return FiniteSet.of(field, (field.add(field.mul(scale, a), shift) for a in A.values))


def r_set(A: FiniteSet) -> FiniteSet:
    """
    R[A] = {(a1 − a)/(a2 − a) : a, a1, a2 ∈ A, a2 ≠ a}

    一元集合では量化域が空なので ∅ を返す。空集合は前提違反。
    """
    if len(A) == 0:
        raise PreconditionError("r_set of the empty set is undefined")
    if len(A) == 1:
        logger.warning("r_set of a singleton has no admissible triple; returning the empty set")
        return FiniteSet.empty(A.field)

    field = A.field
    ratios = set()
    for a in A.values:
        shifted = [field.sub(x, a) for x in A.values]
        denominators = [field.inv(d) for d in shifted if d != 0]
        for numerator in shifted:
            for inverse in denominators:
                ratios.add(field.mul(numerator, inverse))
    return FiniteSet.of(field, ratios)


def translate_intersection(A: FiniteSet, s: Any, law: BinaryLaw) -> FiniteSet:
    """
    A ∩ (A + s)（add）または A ∩ (s/A)（mul）

    Raises:
        PreconditionError: mul で s = 0 または 0 ∈ A
    """
    field = A.field
    s = field.normalize(s)
    law = BinaryLaw(law)
    if law == BinaryLaw.ADD:
        shifted = {field.add(a, s) for a in A.values}
    elif law == BinaryLaw.MUL:
        if s == 0 or A.contains_zero():
            raise PreconditionError("multiplicative translate needs s != 0 and 0 not in A")
        shifted = {field.div(s, a) for a in A.values}
    else:
        raise PreconditionError(f"translate_intersection supports add or mul, got {law.value}")
    return FiniteSet(field, tuple(v for v in A.values if v in shifted))
