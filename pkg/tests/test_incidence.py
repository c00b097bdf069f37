#!/usr/bin/env python3
"""
点と直線・平面の接続数のテスト
"""

import itertools
import pytest
import sys
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core.exceptions import PreconditionError
from src.core.field import GroundField
from src.core.finite_set import FiniteSet
from src.core.incidence import (
    affine_transform_lines, affine_transform_planes, count_line_incidences, count_plane_incidences,
    energy_equation_solutions, energy_plane_crosscheck, max_collinear,
)
from src.interfaces.geometry import LineFamily, PlaneFamily, PointSet
from src.utils.set_io import read_lines_csv, read_planes_csv, read_points_csv


Q = GroundField.rationals()
F3 = GroundField.prime(3)
F7 = GroundField.prime(7)


def _grid(field, values, dim):
    return PointSet.of(field, dim, itertools.product(values, repeat=dim))


def _unit_cube_planes(field):
    return PlaneFamily.of(field, [
        (1, 0, 0, 0), (1, 0, 0, -1),
        (0, 1, 0, 0), (0, 1, 0, -1),
        (0, 0, 1, 0), (0, 0, 1, -1),
    ])


class TestLineIncidences:
    """点と直線"""

    def test_full_plane_over_f3(self):
        points = _grid(F3, range(3), 2)
        lines = LineFamily.of(F3, itertools.product(range(3), range(3)))
        report = count_line_incidences(points, lines)
        assert report.I == 27, "非垂直な 9 本の直線がそれぞれ 3 点を通る"
        assert (report.m, report.n) == (9, 9)

    def test_horizontal_lines_over_rationals(self):
        points = _grid(Q, range(3), 2)
        lines = LineFamily.of(Q, [(0, 0), (0, 1), (0, 2)])
        report = count_line_incidences(points, lines)
        assert report.I == 9
        assert report.within_harness_constant

    def test_vertical_lines(self):
        points = _grid(Q, range(3), 2)
        lines = LineFamily.of(Q, [(None, 0), (None, 5), (1, 0)])
        assert count_line_incidences(points, lines).I == 3 + 0 + 3

    def test_needs_plane_points(self):
        with pytest.raises(PreconditionError):
            count_line_incidences(_grid(Q, range(2), 3), LineFamily.of(Q, [(0, 0)]))


class TestPlaneIncidences:
    """点と平面"""

    def test_unit_cube(self):
        points = _grid(Q, range(2), 3)
        report = count_plane_incidences(points, _unit_cube_planes(Q))
        assert report.I == 24
        assert report.k == 2
        assert report.mr_bound is not None
        assert report.flags == {"n_le_p_squared": True, "n_le_m": False}

    def test_collinearity_can_be_skipped(self):
        points = _grid(Q, range(2), 3)
        report = count_plane_incidences(points, _unit_cube_planes(Q), with_collinear=False)
        assert report.k is None
        assert report.ratio is None

    def test_max_collinear(self):
        assert max_collinear(_grid(Q, range(3), 3)) == 3
        assert max_collinear(PointSet.of(Q, 3, [(0, 0, 0), (1, 2, 3)])) == 2
        with pytest.raises(PreconditionError):
            max_collinear(PointSet.of(Q, 3, [(0, 0, 0)]))

    def test_scalar_multiples_merge(self):
        planes = PlaneFamily.of(Q, [(2, 0, 0, -2), (1, 0, 0, -1)])
        assert len(planes) == 1


class TestAffineInvariance:
    """可逆アフィン変換で接続数は変わらない"""

    def test_lines_over_f7(self):
        points = PointSet.of(F7, 2, [(0, 1), (2, 3), (4, 4), (5, 0), (6, 6)])
        lines = LineFamily.of(F7, [(1, 1), (2, 0), (None, 4), (0, 6), (3, 5)])
        before = count_line_incidences(points, lines).I
        moved_points, moved_lines = affine_transform_lines(points, lines, [[1, 2], [0, 1]], [3, 4])
        assert count_line_incidences(moved_points, moved_lines).I == before

    def test_lines_over_rationals(self):
        points = _grid(Q, range(4), 2)
        lines = LineFamily.of(Q, [(1, 0), ("1/2", 1), (None, 2), (0, 3)])
        before = count_line_incidences(points, lines).I
        moved_points, moved_lines = affine_transform_lines(points, lines, [[2, 1], [1, 1]], ["1/3", -2])
        assert count_line_incidences(moved_points, moved_lines).I == before

    def test_planes(self):
        points = _grid(Q, range(2), 3)
        planes = _unit_cube_planes(Q)
        moved_points, moved_planes = affine_transform_planes(
            points, planes, [[1, 1, 0], [0, 2, 1], [1, 0, 1]], [1, 0, -1])
        assert count_plane_incidences(moved_points, moved_planes).I == 24

    def test_singular_matrix(self):
        points = _grid(Q, range(2), 2)
        lines = LineFamily.of(Q, [(0, 0)])
        with pytest.raises(PreconditionError):
            affine_transform_lines(points, lines, [[1, 2], [2, 4]], [0, 0])


class TestEnergyCrosscheck:
    """a + pα = a' + p'α' と平面接続の一致"""

    @pytest.mark.parametrize("field, A_values, A1_values, P_values", [
        (Q, [1, 2, 4, 8], [1, 2], [-1, 1]),
        (Q, [1, 2, 3, 5, 8], [2, 3, 5], [0, 1, 2]),
        (GroundField.prime(11), [1, 3, 4, 5, 9], [1, 3], [1, 10]),
        (GroundField.prime(11), [2, 6, 7], [2, 6, 7], [1, 2, 6]),
    ])
    def test_counts_agree(self, field, A_values, A1_values, P_values):
        A = FiniteSet.of(field, A_values)
        A1 = FiniteSet.of(field, A1_values)
        P = FiniteSet.of(field, P_values)
        report = energy_plane_crosscheck(A1, P, A)
        assert report.equal
        assert report.plane_incidences == report.equation_solutions == energy_equation_solutions(A1, P, A)

    def test_division_form_when_P_is_closed_under_inverse(self):
        A = FiniteSet.of(Q, [1, 2, 4, 8])
        P = FiniteSet.of(Q, ["1/2", 1, 2])
        report = energy_plane_crosscheck(FiniteSet.of(Q, [1, 4]), P, A)
        assert report.division_form_solutions == report.equation_solutions

    def test_division_form_absent_otherwise(self):
        A = FiniteSet.of(Q, [1, 2, 3])
        report = energy_plane_crosscheck(A, FiniteSet.of(Q, [1, 2]), A)
        assert report.division_form_solutions is None

    def test_limits(self):
        A = FiniteSet.of(Q, range(1, 51))
        with pytest.raises(PreconditionError):
            energy_plane_crosscheck(A, A, A)
        with pytest.raises(PreconditionError):
            energy_plane_crosscheck(A, FiniteSet.empty(Q), A)


class TestGeometryFiles:
    """CSV の読み込み"""

    def test_points_and_lines(self, tmp_path):
        points_path = tmp_path / "points.csv"
        points_path.write_text("x,y\n0,0\n1,1\n1/2,3\n", encoding="utf-8")
        lines_path = tmp_path / "lines.csv"
        lines_path.write_text("slope,intercept\n1,0\nvertical,1\n", encoding="utf-8")
        points = read_points_csv(points_path, Q)
        lines = read_lines_csv(lines_path, Q)
        assert points.dim == 2 and len(points) == 3
        assert any(line.is_vertical for line in lines.lines)
        assert count_line_incidences(points, lines).I == 2 + 1

    def test_planes_and_missing_columns(self, tmp_path):
        points_path = tmp_path / "points.csv"
        points_path.write_text("x,y,z\n0,0,0\n1,0,0\n", encoding="utf-8")
        planes_path = tmp_path / "planes.csv"
        planes_path.write_text("a,b,c,d\n0,0,1,0\n", encoding="utf-8")
        points = read_points_csv(points_path, Q)
        assert points.dim == 3
        assert count_plane_incidences(points, read_planes_csv(planes_path, Q)).I == 2

        broken = tmp_path / "broken.csv"
        broken.write_text("a,b\n1,2\n", encoding="utf-8")
        with pytest.raises(PreconditionError):
            read_planes_csv(broken, Q)


if __name__ == "__main__":
    # pytest実行
    pytest.main([__file__, "-v"])
