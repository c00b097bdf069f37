"""点と直線・平面の接続数の厳密な計数"""

import logging
from collections import Counter, defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Matrix

from .config import get_config
from .exceptions import InvariantViolation, PreconditionError
from .field import GroundField, RawValue
from .finite_set import FiniteSet
from ..interfaces.geometry import Line, LineFamily, Plane, PlaneFamily, PointSet
from ..interfaces.results import CrosscheckReport, LineIncidenceReport, PlaneIncidenceReport
from ..utils.precision import high_precision, monomial, power, safe_ratio, to_mpf

logger = logging.getLogger(__name__)


def count_line_incidences(points: PointSet, lines: LineFamily) -> LineIncidenceReport:
    """
    I = #{(q, ℓ) : q ∈ ℓ} と (mn)^{2/3} + m + n の比

    直線は傾きごとに切片の多重度表へまとめ、各点について傾きごとに一度だけ引く。

    Raises:
        PreconditionError: 平面の点集合でない
    """
    if points.dim != 2:
        raise PreconditionError("line incidences need points in the plane")
    points.field.require_same(lines.field)
    field = points.field

    by_slope: Dict[Optional[RawValue], Counter] = defaultdict(Counter)
    for line in lines.lines:
        by_slope[line.slope][line.intercept] += 1

    incidences = 0
    for x, y in points.points:
        for slope, intercepts in by_slope.items():
            key = x if slope is None else field.sub(y, field.mul(slope, x))
            incidences += intercepts.get(key, 0)

    m, n = len(lines), len(points)
    constant = int(get_config().get("incidence.harness_constant", 3))
    with high_precision():
        bound = monomial([(m * n, "2/3")]) + m + n
        ratio = safe_ratio(incidences, bound) if bound else to_mpf(0)
        within = incidences <= constant * bound
    if not field.is_prime and not within:
        logger.warning(f"I={incidences} exceeds {constant}((mn)^(2/3) + m + n) with m={m}, n={n}")
    return LineIncidenceReport(I=incidences, m=m, n=n, st_bound=bound, ratio=ratio,
                               within_harness_constant=bool(within))


def _direction(field: GroundField, origin: Sequence[RawValue], target: Sequence[RawValue]) -> Tuple[RawValue, ...]:
    """最初の非零座標を 1 にした方向ベクトル"""
    difference = [field.sub(b, a) for a, b in zip(origin, target)]
    lead = next(c for c in difference if c != 0)
    return tuple(field.div(c, lead) for c in difference)


def max_collinear(points: PointSet) -> int:
    """
    同一直線上にある点の最大個数

    各基点について他の点への正規化方向を数える。

    Raises:
        PreconditionError: 2 点未満
    """
    if len(points) < 2:
        raise PreconditionError("max_collinear needs at least two points")
    field = points.field
    best = 2
    for index, anchor in enumerate(points.points):
        directions = Counter(_direction(field, anchor, other) for other in points.points[index + 1:])
        if directions:
            best = max(best, max(directions.values()) + 1)
    return best


def count_plane_incidences(points: PointSet, planes: PlaneFamily,
                            with_collinear: bool = True) -> PlaneIncidenceReport:
    """
    I = #{(q, π) : q ∈ π} と m(√n + k) の比

    k は点の個数が collinear_cap 以下のときだけ計算する。
    flags には素体での n ≤ p^2 と n ≤ m を記録する。

    Raises:
        PreconditionError: 空間の点集合でない
    """
    if points.dim != 3:
        raise PreconditionError("plane incidences need points in 3-space")
    points.field.require_same(planes.field)
    field = points.field

    by_normal: Dict[Tuple[RawValue, RawValue, RawValue], Counter] = defaultdict(Counter)
    for plane in planes.planes:
        by_normal[plane.normal][plane.delta] += 1

    incidences = 0
    for x, y, z in points.points:
        for (a, b, c), offsets in by_normal.items():
            value = field.add(field.add(field.mul(a, x), field.mul(b, y)), field.mul(c, z))
            incidences += offsets.get(field.neg(value), 0)

    m, n = len(planes), len(points)
    cap = int(get_config().get("incidence.collinear_cap", 2000))
    k = max_collinear(points) if with_collinear and 2 <= n <= cap else None
    if with_collinear and n > cap:
        logger.warning(f"skipping the collinearity scan for n={n} above {cap}")

    flags = {
        "n_le_p_squared": (not field.is_prime) or n <= field.p ** 2,
        "n_le_m": n <= m,
    }
    if not flags["n_le_m"]:
        logger.info(f"plane incidence bound compared with n={n} > m={m}")

    bound = ratio = None
    if k is not None:
        with high_precision():
            bound = m * (power(n, "1/2") + k)
            ratio = safe_ratio(incidences, bound)
    return PlaneIncidenceReport(I=incidences, m=m, n=n, k=k, mr_bound=bound, ratio=ratio, flags=flags)


# ──────────────────────────────────────────────
# エネルギー方程式との照合
# ──────────────────────────────────────────────

def crosscheck_configuration(A1: FiniteSet, P: FiniteSet, A: FiniteSet) -> Tuple[PointSet, PlaneFamily]:
    """
    点 (α, a', p') ∈ A×A1×P と平面 p*X − Y − α'Z + a = 0（(a, p*, α') ∈ A1×P×A）

    接続は a + p*α = a' + α'p' に対応する。
    """
    field = A.field
    points = PointSet.of(field, 3, ((alpha, a, p) for alpha in A.values for a in A1.values for p in P.values))
    planes = PlaneFamily.of(field, ((p, -1, field.neg(alpha), a)
                                    for a in A1.values for p in P.values for alpha in A.values))
    return points, planes


def energy_equation_solutions(A1: FiniteSet, P: FiniteSet, A: FiniteSet, reciprocal: bool = False) -> int:
    """
    #{a + p·α = a' + p'·α'}（reciprocal なら α/p）を表現数の二乗和で数える
    """
    field = A.field
    scale = field.inv if reciprocal else (lambda p: p)
    counts = Counter(field.add(a, field.mul(scale(p), alpha))
                     for a in A1.values for p in P.values for alpha in A.values)
    return sum(c * c for c in counts.values())


def energy_plane_crosscheck(A1: FiniteSet, P: FiniteSet, A: FiniteSet) -> CrosscheckReport:
    """
    平面族の接続数とエネルギー方程式の解の個数が一致することを確認

    P = P⁻¹ なら α/p 形の解の個数も報告する。

    Raises:
        PreconditionError: |A1||P||A| が上限を超える、P = ∅ など
        InvariantViolation: 二つの数が一致しない
    """
    field = A.field
    field.require_same(A1.field)
    field.require_same(P.field)
    cap = int(get_config().get("incidence.crosscheck_cap", 100000))
    size = len(A1) * len(P) * len(A)
    if size > cap:
        raise PreconditionError(f"crosscheck needs |A1||P||A|={size} <= {cap}")
    if size == 0:
        raise PreconditionError("crosscheck needs nonempty A1, P and A")

    points, planes = crosscheck_configuration(A1, P, A)
    incidences = count_plane_incidences(points, planes, with_collinear=False).I
    solutions = energy_equation_solutions(A1, P, A)
    if incidences != solutions:
        raise InvariantViolation(f"plane incidences {incidences} differ from equation solutions {solutions}",
                                 counterexample={"A1": A1.formatted(), "P": P.formatted(), "A": A.formatted()})

    division = None
    if not P.contains_zero() and P.inverted() == P:
        division = energy_equation_solutions(A1, P, A, reciprocal=True)
    return CrosscheckReport(plane_incidences=incidences, equation_solutions=solutions, equal=True,
                            division_form_solutions=division)


# ──────────────────────────────────────────────
# アフィン変換
# ──────────────────────────────────────────────

def _field_matrix(field: GroundField, rows: Sequence[Sequence[RawValue]]) -> Tuple[Matrix, Matrix]:
    """(M, M⁻¹) を sympy で求める"""
    matrix = Matrix([[field.normalize(v) for v in row] for row in rows])
    if matrix.rows != matrix.cols:
        raise PreconditionError("affine map needs a square matrix")
    determinant = matrix.det()
    if field.is_prime:
        determinant = determinant % field.p
    if determinant == 0:
        raise PreconditionError("affine map must be invertible")
    inverse = matrix.inv_mod(field.p) if field.is_prime else matrix.inv()
    return matrix, inverse


def _entry(field: GroundField, value) -> RawValue:
    return field.normalize(str(value))


def _apply(field: GroundField, matrix: Matrix, vector: Sequence[RawValue]) -> List[RawValue]:
    size = len(vector)
    result = []
    for i in range(size):
        total = 0
        for j in range(size):
            total = field.add(total, field.mul(_entry(field, matrix[i, j]), vector[j]))
        result.append(total)
    return result


def _transform_points(points: PointSet, matrix: Matrix, shift: Sequence[RawValue]) -> PointSet:
    field = points.field
    moved = (
        [field.add(v, s) for v, s in zip(_apply(field, matrix, point), shift)]
        for point in points.points
    )
    return PointSet.of(field, points.dim, moved)


def _transform_functional(field: GroundField, inverse: Matrix, shift: Sequence[RawValue],
                          normal: Sequence[RawValue], offset: RawValue) -> Tuple[List[RawValue], RawValue]:
    """w·q + c = 0 を q' = Mq + s の座標に移す：w' = M⁻ᵀw、c' = c − w'·s"""
    new_normal = _apply(field, inverse.T, normal)
    new_offset = offset
    for w, s in zip(new_normal, shift):
        new_offset = field.sub(new_offset, field.mul(w, s))
    return new_normal, new_offset


def affine_transform_lines(points: PointSet, lines: LineFamily, matrix, shift) -> Tuple[PointSet, LineFamily]:
    """点と直線に同じ可逆アフィン変換 q ↦ Mq + s を施す"""
    field = points.field
    shift = [field.normalize(v) for v in shift]
    forward, inverse = _field_matrix(field, matrix)
    moved = []
    for line in lines.lines:
        wx, wy, c = line.functional(field)
        (nx, ny), nc = _transform_functional(field, inverse, shift, [wx, wy], c)
        moved.append(Line.from_functional(field, nx, ny, nc))
    return _transform_points(points, forward, shift), LineFamily(field, tuple(moved))


def affine_transform_planes(points: PointSet, planes: PlaneFamily, matrix, shift) -> Tuple[PointSet, PlaneFamily]:
    """点と平面に同じ可逆アフィン変換 q ↦ Mq + s を施す"""
    field = points.field
    shift = [field.normalize(v) for v in shift]
    forward, inverse = _field_matrix(field, matrix)
    moved = []
    for plane in planes.planes:
        normal, offset = _transform_functional(field, inverse, shift, list(plane.normal), plane.delta)
        moved.append(Plane.normalized(field, *normal, offset))
    return _transform_points(points, forward, shift), PlaneFamily(field, tuple(moved))
