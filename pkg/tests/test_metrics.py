import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hmcf.exceptions import InvalidParameterError
from hmcf.fields import Grid2D, make_circle_sdf
from hmcf.metrics import (
    contour_displacement,
    contour_distance,
    contour_points,
    convex_deficiency,
    dice,
    directed_mean_distance,
    modified_hausdorff,
)

masks = arrays(bool, (6, 7))
points = arrays(np.float64, st.tuples(st.integers(1, 12), st.just(2)), elements=st.floats(-50, 50))


class TestDice:
    def test_identical(self):
        m = np.eye(4, dtype=bool)
        assert dice(m, m) == 1.0

    def test_disjoint(self):
        a = np.zeros((4, 4), dtype=bool)
        b = a.copy()
        a[0] = True
        b[3] = True
        assert dice(a, b) == 0.0

    def test_counted(self):
        a = np.zeros((4, 4), dtype=bool)
        a[0] = True
        b = np.zeros((4, 4), dtype=bool)
        b[0, :2] = True
        assert dice(a, b) == pytest.approx(2 * 2 / 6)

    def test_both_empty(self):
        z = np.zeros((3, 3), dtype=bool)
        assert dice(z, z) == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(InvalidParameterError):
            dice(np.zeros((3, 3)), np.zeros((3, 4)))

    @given(masks, masks)
    def test_symmetric_and_bounded(self, a, b):
        d = dice(a, b)
        assert d == dice(b, a)
        assert 0.0 <= d <= 1.0


class TestHausdorff:
    def test_identical(self):
        p = np.array([[0.0, 1.0], [2.0, 3.0]])
        assert modified_hausdorff(p, p) == 0.0

    def test_single_pair(self):
        assert modified_hausdorff([[0, 0]], [[3, 4]]) == 5.0

    def test_asymmetric_sets(self):
        a = [[0, 0], [2, 0]]
        b = [[0, 1]]
        assert directed_mean_distance(a, b) == pytest.approx((1 + math.sqrt(5)) / 2)
        assert directed_mean_distance(b, a) == 1.0
        assert modified_hausdorff(a, b) == pytest.approx(1.618, abs=1e-3)

    def test_empty(self):
        with pytest.raises(InvalidParameterError):
            modified_hausdorff(np.empty((0, 2)), [[0, 0]])

    @settings(max_examples=50)
    @given(points, points)
    def test_symmetric(self, a, b):
        assert modified_hausdorff(a, b) == modified_hausdorff(b, a)

    @settings(max_examples=50)
    @given(points)
    def test_zero_iff_contained(self, a):
        assert modified_hausdorff(a, a[::-1]) == 0.0


class TestContours:
    grid = Grid2D(60, 60)

    def test_points_on_circle(self):
        phi = make_circle_sdf(self.grid, 30, 30, 15).phi
        pts = contour_points(phi, density=4)
        r = np.hypot(pts[:, 0] - 30, pts[:, 1] - 30)
        assert np.abs(r - 15).max() < 0.02
        assert len(pts) > len(contour_points(phi))

    def test_points_spacing(self):
        phi = make_circle_sdf(self.grid, 30, 30, 15).phi
        a = contour_points(phi)
        b = contour_points(phi, spacing=2.0)
        np.testing.assert_allclose(b, 2 * a)

    def test_no_contour(self):
        assert contour_points(np.ones((5, 5))).shape == (0, 2)

    def test_distance_between_circles(self):
        a = make_circle_sdf(self.grid, 30, 30, 15).phi
        b = make_circle_sdf(self.grid, 30, 30, 12).phi
        assert contour_distance(a, b) == pytest.approx(3.0, abs=0.02)
        assert contour_distance(a, a) < 1e-12

    def test_displacement(self):
        a = make_circle_sdf(self.grid, 30, 30, 15).phi
        b = make_circle_sdf(self.grid, 30, 30, 14.5).phi
        assert contour_displacement(a, b) == pytest.approx(0.5, abs=1e-9)

    def test_empty_contour_rejected(self):
        with pytest.raises(InvalidParameterError):
            contour_distance(np.ones((5, 5)), np.ones((5, 5)))


class TestConvexDeficiency:
    def test_rectangle(self):
        m = np.zeros((10, 10), dtype=bool)
        m[2:6, 3:8] = True
        assert convex_deficiency(m) == pytest.approx(0.0)

    def test_l_shape(self):
        m = np.zeros((10, 10), dtype=bool)
        m[0:4, 0:2] = True
        m[2:4, 0:4] = True
        # hull of the pixel squares adds a right triangle of legs 2 and 2
        assert convex_deficiency(m) == pytest.approx(2.0)

    def test_empty(self):
        assert convex_deficiency(np.zeros((4, 4), dtype=bool)) == 0.0
