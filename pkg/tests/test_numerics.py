import numpy as np
import pytest

from marchenko_kit.errors import OscillationBoundError
from marchenko_kit.numerics import (
    MOMENTUM,
    Grid,
    derivative_samples,
    fourier_quadrature,
    integrate,
    make_uniform_grid,
    principal_value_integral,
    second_derivative_samples,
    simpson_rule,
    simpson_weights,
)


def momentum_grid(lo, hi, n):
    return make_uniform_grid(lo, hi, n, kind=MOMENTUM)


class TestGrid:
    def test_unit_interval(self):
        g = make_uniform_grid(0.0, 1.0, 11)
        assert g.spacing == pytest.approx(0.1)
        assert g.points[0] == 0.0 and g.points[-1] == 1.0

    def test_symmetric(self):
        g = make_uniform_grid(-5.0, 5.0, 101)
        assert g.n == 101
        assert g.spacing == pytest.approx(0.1)

    def test_degenerate_range_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            make_uniform_grid(1.0, 1.0, 16)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError, match="at least 8"):
            make_uniform_grid(0.0, 1.0, 7)

    def test_nonuniform_rejected(self):
        pts = np.array([0.0, 0.1, 0.2, 0.35, 0.4, 0.5, 0.6, 0.7])
        with pytest.raises(ValueError, match="uniform"):
            Grid(points=pts, spacing=0.1, kind="spatial")

    def test_index_of(self):
        g = make_uniform_grid(-1.0, 1.0, 21)
        assert g.index_of(0.0) == 10
        with pytest.raises(ValueError):
            g.index_of(0.05123)


class TestIntegrate:
    def test_constant(self):
        g = make_uniform_grid(0.0, 1.0, 11)
        assert integrate(np.ones(11), simpson_rule(g)) == pytest.approx(1.0)

    def test_linear_exact(self):
        g = make_uniform_grid(0.0, 2.0, 11)
        assert integrate(g.points, simpson_rule(g)) == pytest.approx(2.0, abs=1e-14)

    @pytest.mark.parametrize("n", [9, 10, 11, 16])
    def test_cubic_exact_both_parities(self, n):
        g = make_uniform_grid(-1.0, 2.0, n)
        f = g.points**3 - 2 * g.points**2 + 0.5
        exact = (2.0**4 - 1) / 4 - 2 * (2.0**3 + 1) / 3 + 0.5 * 3
        assert integrate(f, simpson_rule(g)) == pytest.approx(exact, abs=1e-12)

    def test_gaussian_matches_sqrt_pi(self):
        g = make_uniform_grid(-6.0, 6.0, 241)
        val = integrate(np.exp(-g.points**2), simpson_rule(g))
        # frozen from the 10x-resolution reference run; equals sqrt(pi)
        assert val == pytest.approx(1.7724539, abs=1e-6)
        fine = make_uniform_grid(-6.0, 6.0, 2401)
        ref = integrate(np.exp(-fine.points**2), simpson_rule(fine))
        assert val == pytest.approx(ref, abs=1e-6)

    def test_length_mismatch(self):
        g = make_uniform_grid(0.0, 1.0, 11)
        with pytest.raises(ValueError, match="does not match"):
            integrate(np.ones(10), simpson_rule(g))

    def test_weights_sum_to_extent(self):
        for n in (8, 9, 12, 33, 100):
            w = simpson_weights(n, 0.03)
            assert np.sum(w) == pytest.approx(0.03 * (n - 1), rel=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(7)
        g = make_uniform_grid(0.0, 3.0, 31)
        rule = simpson_rule(g)
        for _ in range(20):
            f = rng.normal(size=g.n)
            h = rng.normal(size=g.n)
            a, b = rng.normal(size=2)
            lhs = integrate(a * f + b * h, rule)
            rhs = a * integrate(f, rule) + b * integrate(h, rule)
            assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, abs(rhs)))


class TestPrincipalValue:
    def test_constant_symmetric_pole(self):
        g = momentum_grid(-3.0, 3.0, 61)
        val = principal_value_integral(np.ones(61), g, 0.0)
        assert abs(val) < 1e-10

    def test_linear_function(self):
        # PV int_0^2 q/(q-1) dq = 2
        g = momentum_grid(0.0, 2.0, 81)
        val = principal_value_integral(g.points, g, 1.0)
        assert val == pytest.approx(2.0, abs=1e-10)

    def test_gaussian_refinement_oracle(self):
        g = momentum_grid(-8.0, 8.0, 641)
        val = principal_value_integral(np.exp(-g.points**2), g, 0.5)
        fine = momentum_grid(-8.0, 8.0, 6401)
        ref = principal_value_integral(np.exp(-fine.points**2), fine, 0.5)
        assert val == pytest.approx(ref, abs=1e-5)

    def test_even_function_antisymmetry(self):
        rng = np.random.default_rng(11)
        g = momentum_grid(-4.0, 4.0, 129)
        for _ in range(10):
            coeff = rng.normal(size=3)
            f = coeff[0] * np.exp(-g.points**2) + coeff[1] * np.cos(g.points) \
                + coeff[2] / (1 + g.points**2)
            val = principal_value_integral(f, g, 0.0)
            assert abs(val) < 1e-10 * max(1.0, np.max(np.abs(f)))

    def test_pole_outside_range(self):
        g = momentum_grid(0.0, 2.0, 21)
        with pytest.raises(ValueError, match="outside"):
            principal_value_integral(np.ones(21), g, 3.0)

    def test_pole_on_endpoint(self):
        g = momentum_grid(0.0, 2.0, 21)
        with pytest.raises(ValueError, match="endpoint"):
            principal_value_integral(np.ones(21), g, 0.0)


class TestDerivatives:
    def test_quadratic_exact(self):
        g = make_uniform_grid(-2.0, 2.0, 41)
        d = derivative_samples(g.points**2, g)
        assert np.max(np.abs(d - 2 * g.points)) < 1e-11

    def test_constant(self):
        g = make_uniform_grid(0.0, 1.0, 21)
        assert np.max(np.abs(derivative_samples(np.full(21, 3.7), g))) < 1e-12

    def test_sine(self):
        g = make_uniform_grid(0.0, 6.0, 121)     # spacing 0.05
        d = derivative_samples(np.sin(g.points), g)
        assert np.max(np.abs(d[2:-2] - np.cos(g.points[2:-2]))) < 1e-6

    def test_too_few_points(self):
        g = make_uniform_grid(0.0, 1.0, 8)
        with pytest.raises(ValueError, match="at least 5"):
            derivative_samples(np.ones(4), make_uniform_grid(0, 1, 8))

    def test_second_derivative_sine(self):
        g = make_uniform_grid(0.0, 6.0, 241)
        d2 = second_derivative_samples(np.sin(g.points), g)
        assert np.max(np.abs(d2 + np.sin(g.points))) < 1e-5

    def test_integrate_derivative_round_trip(self):
        g = make_uniform_grid(0.0, 4.0, 81)
        f = np.exp(-0.5 * g.points) * np.sin(2 * g.points)
        d = derivative_samples(f, g)
        # int_x0^xj f' = f(xj) - f(x0) up to O(h^4)
        for j in (20, 41, 80):
            sub = Grid(points=g.points[: j + 1], spacing=g.spacing, kind=g.kind)
            val = integrate(d[: j + 1], simpson_rule(sub))
            assert val == pytest.approx(f[j] - f[0], abs=5e-6)


class TestFourierQuadrature:
    def test_zero(self):
        g = momentum_grid(-5.0, 5.0, 201)
        assert fourier_quadrature(np.zeros(201, dtype=complex), g, 0.3) == 0.0

    def test_gaussian_at_origin(self):
        g = momentum_grid(-8.0, 8.0, 801)
        val = fourier_quadrature(np.exp(-g.points**2) + 0j, g, 0.0)
        assert val == pytest.approx(0.2820948, abs=1e-7)     # 1/(2 sqrt(pi))

    def test_lorentzian_residue(self):
        g = momentum_grid(-400.0, 400.0, 16001)
        val = fourier_quadrature(1.0 / (g.points**2 + 1.0) + 0j, g, 1.0)
        assert val == pytest.approx(0.1839397, abs=1e-4)     # e^{-1}/2

    def test_real_for_hermitian_input(self):
        rng = np.random.default_rng(3)
        g = momentum_grid(-6.0, 6.0, 301)
        half = rng.normal(size=150) + 1j * rng.normal(size=150)
        f = np.concatenate([np.conj(half[::-1]), [rng.normal()], half])
        f *= np.exp(-g.points**2 / 8)
        for x in (0.0, 0.7, -2.2):
            fourier_quadrature(f, g, x)      # must not raise reality error

    def test_asymmetric_grid_rejected(self):
        g = momentum_grid(-1.0, 2.0, 31)
        with pytest.raises(ValueError, match="symmetric"):
            fourier_quadrature(np.ones(31, dtype=complex), g, 0.0)

    def test_hermitian_violation_rejected(self):
        g = momentum_grid(-2.0, 2.0, 41)
        f = np.exp(1j * g.points**2)         # f(-k) != conj f(k)
        f[3] += 1.0
        with pytest.raises(ValueError, match="Hermitian"):
            fourier_quadrature(f, g, 0.0)

    def test_oscillation_bound(self):
        g = momentum_grid(-5.0, 5.0, 51)     # dk = 0.2
        with pytest.raises(OscillationBoundError):
            fourier_quadrature(np.exp(-g.points**2) + 0j, g, 5.0)
