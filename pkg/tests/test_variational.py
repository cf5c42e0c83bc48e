import numpy as np
import pytest

from marchenko_kit.numerics import make_uniform_grid, simpson_weights
from marchenko_kit.forward import WaveField
from marchenko_kit.glm import (
    reconstruct_wavefunction_many,
    solve_transformation_kernel,
)
from marchenko_kit.scattering import ScatteringData, transmission_samples
from marchenko_kit.variational import (
    NearResonanceWarning,
    dK_dr,
    dK_drstar,
    dN_dr,
    dV_drstar,
    dpsi_dr,
    dpsi_drstar,
    finite_difference_harness,
)

from conftest import smooth_reflection_data, zero_reflection


@pytest.fixture(scope="module")
def free_kernel():
    data = ScatteringData(reflection=zero_reflection())
    grid = make_uniform_grid(-10.0, 10.0, 401)
    kernel, _ = solve_transformation_kernel(data, grid, y_pad=5.0)
    return kernel


@pytest.fixture(scope="module")
def free_field(free_kernel):
    return reconstruct_wavefunction_many(free_kernel, np.array([1.3, 0.7]))


class TestInputKernelDerivative:
    def test_zero_momentum(self):
        assert dN_dr(0.0, 0.3, -0.3) == pytest.approx(-1.0 / (2 * np.pi))

    def test_zero_sum(self):
        assert dN_dr(1.7, 2.0, -2.0) == pytest.approx(-1.0 / (2 * np.pi))

    def test_pi_phase(self):
        assert dN_dr(1.0, np.pi / 2, np.pi / 2) == pytest.approx(1.0 / (2 * np.pi))

    def test_negative_momentum_rejected(self):
        with pytest.raises(ValueError, match="positive momenta"):
            dN_dr(-0.5, 0.0, 0.0)


class TestKernelDerivative:
    def test_free_background_closed_form(self, free_kernel, free_field):
        k = 1.3
        for x, y in ((-2.0, 1.5), (0.0, 0.0), (1.0, 4.0)):
            got = dK_drstar(free_kernel, x, y, k, psi=free_field.values[:, 0])
            want = -np.exp(-1j * k * (x + y)) / (2 * np.pi)
            assert got == pytest.approx(want, abs=1e-9)

    def test_coincident_arguments(self, free_kernel, free_field):
        k = 0.7
        psi = free_field.values[:, 1]
        got = dK_drstar(free_kernel, 0.5, 0.5, k, psi=psi)
        i = free_kernel.grid.index_of(0.5)
        assert got == pytest.approx(-psi[i] ** 2 / (2 * np.pi), abs=1e-12)

    def test_conjugation(self, free_kernel, free_field):
        a = dK_dr(free_kernel, -1.0, 2.0, 1.3, psi=free_field.values[:, 0])
        b = dK_drstar(free_kernel, -1.0, 2.0, 1.3, psi=free_field.values[:, 0])
        assert a == np.conj(b)

    def test_finite_difference_on_soliton_background(self, soliton_data):
        grid = make_uniform_grid(-12.0, 12.0, 481)
        report = finite_difference_harness(
            soliton_data, bump_center=0.9, bump_width=0.3,
            bump_amplitude=1e-3 * (1.0 + 0.4j), target="K",
            spatial_grid=grid, sample_window=(-8.0, 8.0))
        assert report.relative_error <= 0.02


class TestPotentialDerivative:
    def test_free_background_closed_form(self, free_field):
        k = 1.3
        vals = dV_drstar(free_field, k)
        x = free_field.grid.points
        want = (-2j * k / np.pi) * np.exp(-2j * k * x)
        np.testing.assert_allclose(vals, want, atol=1e-4)

    def test_finite_difference_on_reflecting_background(self):
        data = smooth_reflection_data()
        grid = make_uniform_grid(-12.0, 12.0, 481)
        report = finite_difference_harness(
            data, bump_center=0.9, bump_width=0.25,
            bump_amplitude=1e-3 * (1.0 + 0.5j), target="V",
            spatial_grid=grid, sample_window=(-10.0, 10.0))
        assert report.relative_error <= 0.05

    def test_locality(self, free_field):
        # dV/dr* at x responds only to psi near x
        k = 1.3
        base = dV_drstar(free_field, k)
        tampered = free_field.values.copy()
        tampered[-40:, 0] += 0.3
        field2 = WaveField(grid=free_field.grid, momenta=free_field.momenta,
                           values=tampered, convention=free_field.convention)
        changed = dV_drstar(field2, k)
        i = free_field.grid.index_of(0.0)
        assert changed[i] == base[i]
        assert np.max(np.abs(changed[-40:] - base[-40:])) > 0


class TestWavefunctionDerivative:
    def test_free_background_closed_form(self, free_field):
        k, q = 1.3, 0.7
        x = -2.0
        got = dpsi_drstar(free_field, x, k, q)
        edge = free_field.grid.points[-1]
        s = k + q
        integral = (np.exp(-1j * s * x) - np.exp(-1j * s * edge)) / (1j * s) \
            + np.exp(-1j * s * edge) / (1j * s + 0.2)
        want = -integral * np.exp(-1j * q * x) / (2 * np.pi)
        assert got == pytest.approx(want, abs=1e-6)

    def test_empty_domain_leaves_only_tail(self, free_field):
        import warnings

        k, q = 1.3, 0.7
        edge = free_field.grid.points[-1]
        with warnings.catch_warnings():
            # at x = y_max every momentum sum is inside the resonance window
            warnings.simplefilter("ignore", NearResonanceWarning)
            got = dpsi_drstar(free_field, edge, k, q)
        tail_bound = 1.0 / abs(1j * (k + q) + 0.2) / (2 * np.pi)
        assert abs(got) <= tail_bound * (1 + 1e-12)

    def test_near_resonance_flagged(self, free_kernel):
        # k + q close to zero makes the tail integral delta-like
        field = reconstruct_wavefunction_many(free_kernel, np.array([1.3, -1.295]))
        with pytest.warns(NearResonanceWarning):
            dpsi_drstar(field, 9.0, 1.3, -1.295)

    def test_nonlocality(self, free_field):
        # a far-field change inside [x, inf) moves the value
        k, q = 1.3, 0.7
        base = dpsi_drstar(free_field, -5.0, k, q)
        tampered = free_field.values.copy()
        tampered[-40:, :] += 0.1
        field2 = WaveField(grid=free_field.grid, momenta=free_field.momenta,
                           values=tampered, convention=free_field.convention)
        assert dpsi_drstar(field2, -5.0, k, q) != base

    def test_finite_difference_off_resonance(self):
        data = smooth_reflection_data()
        grid = make_uniform_grid(-12.0, 12.0, 481)
        report = finite_difference_harness(
            data, bump_center=0.7, bump_width=0.12,
            bump_amplitude=1e-3 * (0.8 + 0.3j), target="psi",
            spatial_grid=grid, k_eval=1.6, sample_window=(-10.0, 10.0))
        assert report.relative_error <= 0.05


class TestHarness:
    def test_zero_amplitude_is_exact(self, soliton_data):
        grid = make_uniform_grid(-8.0, 8.0, 321)
        report = finite_difference_harness(
            soliton_data, bump_center=0.8, bump_width=0.3,
            bump_amplitude=0.0, target="V", spatial_grid=grid)
        assert report.relative_error == 0.0
        assert np.max(np.abs(report.fd)) == 0.0

    def test_first_order_convergence(self):
        data = smooth_reflection_data()
        grid = make_uniform_grid(-10.0, 10.0, 401)
        errs = []
        for amp in (1e-3, 5e-4):
            report = finite_difference_harness(
                data, bump_center=0.9, bump_width=0.25, bump_amplitude=amp,
                target="V", spatial_grid=grid, sample_window=(-8.0, 8.0))
            errs.append(report.relative_error)
        ratio = errs[1] / errs[0]
        assert 1 / 3 <= ratio <= 0.75

    def test_inadmissible_bump_rejected(self):
        from marchenko_kit.errors import DataValidationError

        data = smooth_reflection_data(strength=0.9)
        grid = make_uniform_grid(-8.0, 8.0, 321)
        with pytest.raises(DataValidationError, match="shrink"):
            finite_difference_harness(data, bump_center=0.3, bump_width=0.3,
                                      bump_amplitude=0.5, target="V",
                                      spatial_grid=grid)


class TestVariationChain:
    def test_resolvent_contraction_reproduces_closed_form(self, soliton_data):
        """Assembling dK/dN against dN/dr must match the closed-form dK/dr."""
        grid = make_uniform_grid(-2.0, 18.0, 401)
        kernel, mk = solve_transformation_kernel(soliton_data, grid, y_pad=0.0)
        g = kernel.grid
        x = g.points[0]
        k = 1.1
        m = g.n
        w = simpson_weights(m, g.spacing)
        fvals = mk.values[(np.arange(m)[:, None] + np.arange(m)[None, :])]
        n_w = -fvals * w[None, :]
        r_mat = np.linalg.solve(np.eye(m) - n_w, -fvals)
        phase = np.exp(1j * k * g.points)
        omega = phase + r_mat @ (w * phase)
        chi = phase[0] + np.dot(w, kernel.values[0] * phase)
        psi = reconstruct_wavefunction_many(kernel, np.array([k])).values[:, 0]
        for j in (40, 160, 300):
            y = g.points[j]
            assembled = -omega[j] * chi / (2 * np.pi)
            closed = dK_dr(kernel, x, y, k, psi=psi)
            assert assembled == pytest.approx(closed, abs=1e-6)


class TestIntegratedIdentity:
    def test_space_integrated_dvdr_matches_dispersion_side(self, reflecting_kernel):
        """Smeared integral of dV/dr* over the window equals 2 r / (pi |t|^2)."""
        data, kernel, _ = reflecting_kernel
        rep = kernel.report_grid
        width = 0.25
        k0 = 1.0
        kg = data.reflection.grid
        sel = np.abs(kg.points - k0) <= 4 * width
        ks = kg.points[sel]
        field = reconstruct_wavefunction_many(kernel, ks)
        w_x = simpson_weights(rep.n, rep.spacing)
        lhs_per_k = np.array([np.sum(w_x * dV_drstar(field, k)) for k in ks])
        r = data.reflection.values[sel]
        t = transmission_samples(data, ks).values
        rhs_per_k = 2.0 / np.pi * r / np.abs(t) ** 2
        u = np.exp(-((ks - k0) / width) ** 2 / 2.0)
        wk = simpson_weights(ks.size, kg.spacing) * u
        lhs = np.sum(wk * lhs_per_k)
        rhs = np.sum(wk * rhs_per_k)
        assert abs(lhs - rhs) <= 0.02 * abs(rhs)
