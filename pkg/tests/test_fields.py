import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmcf.exceptions import ContourVanishedError, InvalidParameterError
from hmcf.fields import (
    Grid2D,
    LevelSetState,
    curvature,
    dirac_eps,
    gaussian_convolve,
    gaussian_kernel1d,
    heaviside_eps,
    make_circle_sdf,
    mask_to_sdf,
    reinitialize_sdf,
    zero_level_components,
)


def radial(grid, cx, cy):
    x, y = grid.coordinates()
    return np.hypot(x - cx, y - cy)


class TestCircleSDF:
    def test_center_and_rim(self):
        phi = make_circle_sdf(Grid2D(200, 200), 100, 100, 90).phi
        assert phi[100, 100] == 90.0
        assert phi[100, 190] == 0.0

    def test_outside_value(self):
        phi = make_circle_sdf(Grid2D(100, 100), 50, 50, 30).phi
        assert phi[90, 50] == -10.0

    def test_state_flags(self):
        s = make_circle_sdf(Grid2D(20, 30), 10, 10, 5)
        assert s.is_sdf and s.positive_inside
        assert s.phi.shape == (30, 20)
        assert s.grid == Grid2D(20, 30)

    @pytest.mark.parametrize("r", [0.0, -1.0])
    def test_bad_radius(self, r):
        with pytest.raises(InvalidParameterError):
            make_circle_sdf(Grid2D(10, 10), 5, 5, r)

    def test_center_off_grid(self):
        with pytest.raises(InvalidParameterError):
            make_circle_sdf(Grid2D(10, 10), 50, 5, 3)

    def test_grid_rejects_tiny(self):
        with pytest.raises(InvalidParameterError):
            Grid2D(2, 10)


class TestReinitialize:
    grid = Grid2D(64, 64)

    def off_center(self, a, b):
        keep = radial(self.grid, 31.5, 30.2) > 1.5
        return float(np.abs(a - b)[keep].max())

    def test_exact_sdf_is_fixed_point(self):
        phi = make_circle_sdf(self.grid, 31.5, 30.2, 20).phi
        assert self.off_center(reinitialize_sdf(phi), phi) <= 0.05

    def test_scaled_sdf_renormalized(self):
        phi = make_circle_sdf(self.grid, 31.5, 30.2, 20).phi
        assert self.off_center(reinitialize_sdf(2 * phi), phi) <= 0.05

    def test_all_positive_raises(self):
        with pytest.raises(ContourVanishedError):
            reinitialize_sdf(np.ones((10, 10)))

    def test_sign_preserved(self):
        rng = np.random.default_rng(3)
        phi = rng.normal(size=(16, 16))
        out = reinitialize_sdf(phi)
        assert np.array_equal(out > 0, phi > 0)

    def test_spacing_scales_distances(self):
        phi = make_circle_sdf(self.grid, 32, 32, 20).phi
        a = reinitialize_sdf(phi)
        b = reinitialize_sdf(phi, spacing=0.5)
        np.testing.assert_allclose(b, 0.5 * a, atol=1e-12)

    def test_mask_to_sdf_vertical_edge(self):
        mask = np.zeros((8, 10), dtype=bool)
        mask[:, :4] = True
        phi = mask_to_sdf(mask)
        np.testing.assert_allclose(phi[3], [3.5, 2.5, 1.5, 0.5, -0.5, -1.5, -2.5, -3.5, -4.5, -5.5])


class TestCurvature:
    def test_circle_levels(self):
        grid = Grid2D(101, 101)
        phi = make_circle_sdf(grid, 50, 50, 20).phi
        rho = radial(grid, 50, 50)
        band = (rho >= 8) & (rho <= 32)
        rel = np.abs(curvature(phi)[band] * rho[band] - 1)
        assert rel.max() <= 0.02

    def test_plane_is_flat(self):
        x, _ = Grid2D(20, 15).coordinates()
        assert np.abs(curvature(x - 7.3)).max() <= 1e-10

    def test_oblique_plane_is_flat(self):
        x, y = Grid2D(20, 15).coordinates()
        assert np.abs(curvature(0.6 * x - 0.8 * y + 1.0)).max() <= 1e-10

    def test_constant_is_zero(self):
        assert np.array_equal(curvature(np.full((9, 9), 3.0)), np.zeros((9, 9)))

    def test_sign_convention(self):
        phi = make_circle_sdf(Grid2D(41, 41), 20, 20, 10).phi
        assert curvature(phi)[20, 30] > 0
        assert curvature(-phi)[20, 30] < 0

    def test_spacing(self):
        grid = Grid2D(81, 81, spacing=0.5)
        phi = make_circle_sdf(grid, 20, 20, 10).phi
        # the zero set lies 20 cells from the center, i.e. 10 length units
        assert abs(curvature(phi, spacing=0.5)[40, 60] - 0.1) < 2e-3


class TestRegularizedStep:
    def test_heaviside_values(self):
        np.testing.assert_allclose(heaviside_eps([0.0, 1.0, -1.0]), [0.5, 0.75, 0.25], atol=1e-15)
        np.testing.assert_allclose(heaviside_eps([2.0], epsilon=2.0), [0.75])

    def test_dirac_values(self):
        assert dirac_eps(0.0) == pytest.approx(1 / np.pi)
        assert dirac_eps(3.0, epsilon=3.0) == pytest.approx(1 / (6 * np.pi))

    def test_dirac_integral(self):
        eps = 0.7
        p = np.linspace(-1000 * eps, 1000 * eps, 2_000_001)
        integral = np.trapezoid(dirac_eps(p, eps), p)
        assert abs(integral - 1) <= 1e-3

    def test_bad_epsilon(self):
        with pytest.raises(InvalidParameterError):
            heaviside_eps(0.0, epsilon=0.0)

    @given(st.floats(-1e6, 1e6), st.floats(0.01, 100))
    def test_heaviside_odd_symmetry(self, p, eps):
        assert heaviside_eps(p, eps) + heaviside_eps(-p, eps) == pytest.approx(1.0)


class TestGaussian:
    def test_constant(self):
        np.testing.assert_allclose(gaussian_convolve(np.full((12, 9), 0.3), 2.0), 0.3, atol=1e-15)

    def test_impulse(self):
        f = np.zeros((21, 21))
        f[10, 10] = 1.0
        k = gaussian_kernel1d(1.5)
        assert gaussian_convolve(f, 1.5)[10, 10] == pytest.approx(k[len(k) // 2] ** 2, rel=1e-12)

    def test_ramp_interior(self):
        x, _ = Grid2D(40, 40).coordinates()
        out = gaussian_convolve(x, 1.5)
        assert np.abs(out - x)[10:30, 10:30].max() <= 1e-10

    def test_kernel_normalized(self):
        assert gaussian_kernel1d(2.3).sum() == pytest.approx(1.0)


class TestComponents:
    grid = Grid2D(60, 60)

    def test_single_circle(self):
        c = zero_level_components(make_circle_sdf(self.grid, 30, 30, 10))
        assert (c.count, c.holes) == (1, 0)

    def test_two_circles(self):
        a = make_circle_sdf(self.grid, 15, 30, 8).phi
        b = make_circle_sdf(self.grid, 45, 30, 8).phi
        c = zero_level_components(np.maximum(a, b))
        assert (c.count, c.holes) == (2, 0)
        assert sum(m.sum() for m in c.masks) == int((np.maximum(a, b) > 0).sum())

    def test_annulus(self):
        d = radial(self.grid, 30, 30)
        c = zero_level_components(np.minimum(20 - d, d - 8))
        assert (c.count, c.holes) == (1, 1)

    def test_empty(self):
        c = zero_level_components(-np.ones((5, 5)))
        assert (c.count, c.holes) == (0, 0)


@settings(max_examples=25, deadline=None)
@given(st.floats(8, 20), st.floats(25, 35), st.floats(25, 35))
def test_reinit_idempotent(r, cx, cy):
    phi = make_circle_sdf(Grid2D(60, 60), cx, cy, r).phi
    once = reinitialize_sdf(1.7 * phi)
    twice = reinitialize_sdf(once)
    assert np.abs(twice - once).max() <= 0.05


def test_levelset_state_copy_is_independent():
    s = LevelSetState(np.zeros((4, 4)))
    c = s.copy()
    c.phi[0, 0] = 1
    assert s.phi[0, 0] == 0
