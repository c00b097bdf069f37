"""点・直線・平面の型（厳密な体の値で保持）"""

from dataclasses import dataclass
from typing import Any, Iterable, Optional, Tuple

from ..core.exceptions import PreconditionError
from ..core.field import GroundField, RawValue

Point = Tuple[RawValue, ...]


@dataclass(frozen=True)
class Line:
    """
    y = slope·x + intercept、slope が None なら垂直線 x = intercept
    """
    slope: Optional[RawValue]
    intercept: RawValue

    @property
    def is_vertical(self) -> bool:
        return self.slope is None

    def functional(self, field: GroundField) -> Tuple[RawValue, RawValue, RawValue]:
        """w_x·x + w_y·y + c = 0 の係数"""
        if self.is_vertical:
            return 1, 0, field.neg(self.intercept)
        return field.neg(self.slope), 1, field.neg(self.intercept)

    @classmethod
    def from_functional(cls, field: GroundField, wx: RawValue, wy: RawValue, c: RawValue) -> "Line":
        if wy != 0:
            return cls(field.neg(field.div(wx, wy)), field.neg(field.div(c, wy)))
        if wx == 0:
            raise PreconditionError("degenerate line functional")
        return cls(None, field.neg(field.div(c, wx)))


@dataclass(frozen=True)
class Plane:
    """αx + βy + γz + δ = 0（最初の非零係数を 1 に正規化済み）"""
    alpha: RawValue
    beta: RawValue
    gamma: RawValue
    delta: RawValue

    @property
    def normal(self) -> Tuple[RawValue, RawValue, RawValue]:
        return self.alpha, self.beta, self.gamma

    @classmethod
    def normalized(cls, field: GroundField, alpha: Any, beta: Any, gamma: Any, delta: Any) -> "Plane":
        coefficients = [field.normalize(v) for v in (alpha, beta, gamma, delta)]
        lead = next((c for c in coefficients[:3] if c != 0), None)
        if lead is None:
            raise PreconditionError("plane needs a nonzero normal vector")
        return cls(*(field.div(c, lead) for c in coefficients))


@dataclass(frozen=True)
class PointSet:
    field: GroundField
    dim: int
    points: Tuple[Point, ...]

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise PreconditionError(f"point sets live in dimension 2 or 3, got {self.dim}")
        if any(len(point) != self.dim for point in self.points):
            raise PreconditionError(f"all points must have {self.dim} coordinates")
        if len(set(self.points)) != len(self.points):
            raise PreconditionError("duplicate points")

    @classmethod
    def of(cls, field: GroundField, dim: int, points: Iterable[Iterable[Any]]) -> "PointSet":
        """座標を正規化し、重複を除いて正準順序に並べる"""
        unique = {tuple(field.normalize(c) for c in point) for point in points}
        return cls(field, dim, tuple(sorted(unique)))

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class LineFamily:
    field: GroundField
    lines: Tuple[Line, ...]

    def __post_init__(self):
        if len(set(self.lines)) != len(self.lines):
            raise PreconditionError("duplicate lines")

    @classmethod
    def of(cls, field: GroundField, lines: Iterable[Tuple[Any, Any]]) -> "LineFamily":
        """(slope, intercept) の列から作る（slope が None なら垂直線）"""
        unique = {}
        for slope, intercept in lines:
            line = Line(None if slope is None else field.normalize(slope), field.normalize(intercept))
            unique[line] = None
        return cls(field, tuple(unique))

    def __len__(self) -> int:
        return len(self.lines)


@dataclass(frozen=True)
class PlaneFamily:
    field: GroundField
    planes: Tuple[Plane, ...]

    def __post_init__(self):
        if len(set(self.planes)) != len(self.planes):
            raise PreconditionError("duplicate planes")

    @classmethod
    def of(cls, field: GroundField, planes: Iterable[Tuple[Any, Any, Any, Any]]) -> "PlaneFamily":
        """(α, β, γ, δ) の列から作る（スカラー倍の重複は一つにまとめる）"""
        unique = {}
        for coefficients in planes:
            unique[Plane.normalized(field, *coefficients)] = None
        return cls(field, tuple(unique))

    def __len__(self) -> int:
        return len(self.planes)
