"""Tests for classification, guarded powers, quadrature, the discrete Laplacian and boundary traces."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lane_emden_lab.core import (
    POW_FLOOR,
    classify,
    integrate,
    laplacian_operator,
    neg_laplacian,
    normal_derivative,
    quadrature_weights,
    stable_pow,
)
from lane_emden_lab.errors import DomainError, InvalidExponentsError
from lane_emden_lab.models import Criticality, DomainSpec, ExponentPair, Field, PlanarGrid, RadialGrid

exponents = st.floats(min_value=1.0, max_value=64.0, allow_nan=False)


class TestClassify:
    """Position relative to the critical hyperbola."""

    @given(p=exponents, q=st.floats(min_value=1.01, max_value=64.0))
    def test_should_classify_every_planar_pair_subcritical(self, p, q):
        """In two dimensions the critical hyperbola is empty."""
        assert classify(ExponentPair(p, q)) is Criticality.SUBCRITICAL

    def test_should_find_critical_pair_in_three_dimensions(self):
        """(5, 5) is critical for n = 3: 1/6 + 1/6 = 1/3."""
        assert classify(ExponentPair(5.0, 5.0), n=3) is Criticality.CRITICAL
        assert classify(ExponentPair(2.0, 2.0), n=3) is Criticality.SUBCRITICAL
        assert classify(ExponentPair(9.0, 9.0), n=3) is Criticality.SUPERCRITICAL

    @given(p=exponents, q=st.floats(min_value=1.01, max_value=64.0), dp=st.floats(min_value=0.5, max_value=32.0))
    def test_should_be_monotone_in_the_exponents(self, p, q, dp):
        """Raising an exponent never moves a pair back toward subcritical."""
        order = [Criticality.SUBCRITICAL, Criticality.CRITICAL, Criticality.SUPERCRITICAL]
        low = classify(ExponentPair(p, q), n=3)
        high = classify(ExponentPair(p + dp, q), n=3)
        assert order.index(high) >= order.index(low)

    def test_should_reject_bad_dimension(self):
        """Dimension must be an integer >= 2."""
        with pytest.raises(ValueError):
            classify(ExponentPair(2.0, 2.0), n=1)

    @given(p=st.floats(min_value=0.0, max_value=0.999), q=st.floats(min_value=0.0, max_value=64.0))
    def test_should_reject_sublinear_first_exponent(self, p, q):
        """Any p < 1 is outside the admissible set."""
        with pytest.raises(InvalidExponentsError):
            ExponentPair(p, q)


class TestStablePow:
    """Guarded powers and their derivatives."""

    @given(x=st.floats(min_value=1e-3, max_value=10.0), e=st.floats(min_value=1.0, max_value=8.0))
    def test_should_match_plain_power(self, x, e):
        """Value and derivative agree with x**e and e·x**(e-1)."""
        value, deriv = stable_pow(x, e)
        assert value == pytest.approx(x**e, rel=1e-12)
        assert deriv == pytest.approx(e * x ** (e - 1.0), rel=1e-12)

    @given(x=st.floats(min_value=1e-3, max_value=10.0), a=exponents, b=exponents)
    def test_should_multiply_exponents_under_composition(self, x, a, b):
        """(x^a)^b = x^(ab) while nothing overflows."""
        inner, _ = stable_pow(x, a)
        outer, _ = stable_pow(inner, b)
        direct, _ = stable_pow(x, a * b)
        if direct < 1e300 and direct > 1e-290:
            assert outer == pytest.approx(direct, rel=1e-9)

    def test_should_map_tiny_bases_to_zero(self):
        """Bases at or below the floor give exact zeros."""
        value, deriv = stable_pow(np.array([0.0, POW_FLOOR, 1.0]), 3.0)
        assert value[0] == 0.0 and value[1] == 0.0 and value[2] == 1.0
        assert deriv[0] == 0.0 and deriv[2] == 3.0

    def test_should_cap_instead_of_overflowing(self):
        """Huge results stay finite."""
        value, deriv = stable_pow(1e10, 1000.0)
        assert math.isfinite(value) and math.isfinite(deriv)

    def test_should_reject_negative_bases(self):
        """Negative bases raise DomainError."""
        with pytest.raises(DomainError):
            stable_pow(np.array([1.0, -1e-3]), 2.0)

    def test_should_reject_sublinear_exponent(self):
        """Exponents below 1 are not used by the solvers."""
        with pytest.raises(ValueError):
            stable_pow(2.0, 0.5)


class TestQuadrature:
    """Trapezoid quadrature on both grids."""

    def test_should_integrate_constants_exactly_on_disk(self):
        """∫1 over the disk of radius 2 is 4π."""
        grid = RadialGrid(2.0, 64)
        assert integrate(np.ones(grid.shape), grid) == pytest.approx(4.0 * math.pi, rel=1e-13)

    def test_should_integrate_constants_exactly_on_rectangle(self):
        """∫1 over a 2 x 3 rectangle is 6."""
        grid = PlanarGrid(DomainSpec.rectangle(2.0, 3.0), 20, 30)
        assert integrate(np.ones(grid.shape), grid) == pytest.approx(6.0, rel=1e-13)
        assert quadrature_weights(grid)[0, 0] == pytest.approx(0.25 * grid.hx * grid.hy)

    def test_should_converge_on_smooth_integrands(self, disk_grid):
        """∫(1 - r²) over the unit disk is π/2."""
        f = Field(disk_grid, 1.0 - disk_grid.nodes**2)
        assert integrate(f) == pytest.approx(math.pi / 2.0, rel=1e-5)

    def test_should_require_grid_for_raw_arrays(self):
        """A bare array has no geometry."""
        with pytest.raises(ValueError):
            integrate(np.ones(3))


class TestLaplacian:
    """The discrete -Δ."""

    def test_should_be_exact_on_radial_quadratics(self):
        """-Δ(1 - r²) = 4 including the center row."""
        grid = RadialGrid(1.0, 64)
        u = 1.0 - grid.nodes**2
        assert np.allclose(neg_laplacian(u, grid), 4.0, atol=1e-9)
        assert np.allclose(laplacian_operator(grid) @ grid.interior(u), 4.0, atol=1e-9)

    def test_should_be_exact_on_planar_quadratics(self, square_grid):
        """-Δ((1/4 - x²)(1/4 - y²)) = 2(1/4 - y²) + 2(1/4 - x²)."""
        X, Y = np.meshgrid(square_grid.x, square_grid.y, indexing="ij")
        u = (0.25 - X**2) * (0.25 - Y**2)
        expected = square_grid.interior(2.0 * (0.25 - Y**2) + 2.0 * (0.25 - X**2))
        assert np.allclose(neg_laplacian(u, square_grid), expected, atol=1e-10)
        assert np.allclose(laplacian_operator(square_grid) @ square_grid.interior(u), expected, atol=1e-10)


class TestNormalDerivative:
    """Outward normal derivatives and boundary quadrature."""

    def test_should_recover_radial_flux(self):
        """u = 1 - r² has u_ν = -2R on the rim and ∮u_ν = -4π."""
        grid = RadialGrid(1.0, 64)
        trace = normal_derivative(Field(grid, 1.0 - grid.nodes**2))
        assert trace.values[0] == pytest.approx(-2.0, rel=1e-12)
        assert trace.integrate() == pytest.approx(-4.0 * math.pi, rel=1e-12)
        assert trace.side("rim")[0] == trace.values[0]

    def test_should_recover_rectangle_traces(self, square_grid):
        """On x = a/2 the product quadratic has u_ν = -a(1/4 - y²); corners vanish."""
        X, Y = np.meshgrid(square_grid.x, square_grid.y, indexing="ij")
        trace = normal_derivative(Field(square_grid, (0.25 - X**2) * (0.25 - Y**2)))
        right = trace.side("right")
        assert np.allclose(right, -(0.25 - square_grid.y**2), atol=1e-12)
        assert right[0] == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(trace.x_dot_nu, 0.5)
        # ∮u_ν = -∫(-Δu) = -(2·(1/6) + 2·(1/6)) for the unit square
        assert trace.integrate() == pytest.approx(-2.0 / 3.0, rel=5e-3)

    def test_should_sample_side_midpoints(self, square_grid):
        """The product quadratic has u_ν = -1/4 at every side midpoint of the unit square."""
        X, Y = np.meshgrid(square_grid.x, square_grid.y, indexing="ij")
        trace = normal_derivative(Field(square_grid, (0.25 - X**2) * (0.25 - Y**2)))
        assert np.allclose(trace.midpoints(), -0.25, atol=1e-12)

    def test_should_average_central_nodes_on_even_sides(self):
        """With an even node count the midpoint value averages the samples at y = ±h/2."""
        grid = PlanarGrid(DomainSpec.rectangle(1.0, 1.0), 30, 30)
        X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
        trace = normal_derivative(Field(grid, (0.25 - X**2) * (0.25 - Y**2)))
        assert trace.midpoints().shape == (4,)
        assert np.allclose(trace.midpoints(), -(0.25 - 0.25 * grid.hy**2), atol=1e-12)

    def test_should_give_single_midpoint_on_the_disk(self):
        """The rim is one sample."""
        grid = RadialGrid(1.0, 64)
        trace = normal_derivative(Field(grid, 1.0 - grid.nodes**2))
        assert trace.midpoints() == pytest.approx([-2.0])
