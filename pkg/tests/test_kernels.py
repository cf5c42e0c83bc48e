import subprocess
import sys

import numpy as np
import pytest

from marchenko_kit._kernels import BACKEND
from marchenko_kit._kernels import _fallback as fb

compiled = pytest.importorskip("marchenko_kit._kernels._core",
                               reason="compiled core not built")


def sample_problem(nx=400, nk=16, seed=0):
    rng = np.random.default_rng(seed)
    x = np.linspace(-10, 10, nx)
    v = -1.5 * np.exp(-(x**2) / 3.0)
    k = rng.uniform(0.3, 3.0, size=nk)
    return x, v, k


class TestBackendParity:
    def test_propagate_complex(self):
        x, v, k = sample_problem()
        h = x[1] - x[0]
        u0 = np.exp(-1j * k * x[0])
        u1 = np.exp(-1j * k * x[1])
        a = compiled.propagate_complex(v, h, k**2, u0, u1)
        b = fb.propagate_complex(v, h, k**2, u0, u1)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("from_left", [True, False])
    def test_propagate_real(self, from_left):
        x, v, _ = sample_problem()
        h = x[1] - x[0]
        kap = np.array([0.4, 0.9, 1.3])
        a = compiled.propagate_real(v, h, kap, from_left)
        b = fb.propagate_real(v, h, kap, from_left)
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_propagate_real_renormalized_shape(self):
        # kappa large enough to trigger renormalization: compare shapes only
        x = np.linspace(-40, 40, 3201)
        v = -2.0 / np.cosh(x) ** 2
        h = x[1] - x[0]
        kap = np.array([8.0])
        a = compiled.propagate_real(v, h, kap, True)[:, 0]
        b = fb.propagate_real(v, h, kap, True)[:, 0]
        assert np.max(np.abs(a)) <= 1e200
        ratio = a[2000] / b[2000]
        np.testing.assert_allclose(a[1500:2500], ratio * b[1500:2500], rtol=1e-9)

    def test_shoot_wronskian(self):
        x, v, _ = sample_problem(nx=801)
        h = x[1] - x[0]
        kap = np.linspace(0.05, 1.2, 37)
        a = compiled.shoot_wronskian(v, h, kap)
        b = fb.shoot_wronskian(v, h, kap)
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-13)
        assert np.all(np.sign(a) == np.sign(b))


class TestBackendSelection:
    def test_compiled_selected_by_default(self):
        assert BACKEND == "compiled"

    def test_env_var_forces_fallback(self):
        code = ("import marchenko_kit._kernels as k; "
                "print(k.BACKEND)")
        out = subprocess.run([sys.executable, "-c", code],
                             env={"MARCHENKO_KIT_PURE": "1", "PATH": "/usr/bin:/bin"},
                             capture_output=True, text=True)
        assert out.stdout.strip() == "python"


class TestFallbackCorrectness:
    def test_free_complex_propagation_is_plane_wave(self):
        # lattice plane wave with discrete dispersion propagates exactly
        nx, k = 200, 1.1
        x = np.linspace(0, 10, nx)
        h = x[1] - x[0]
        t = (k * h) ** 2
        theta = np.arccos((1 - 5 * t / 12) / (1 + t / 12))
        u0 = np.array([1.0 + 0j])
        u1 = np.array([np.exp(-1j * theta)])
        u = fb.propagate_complex(np.zeros(nx), h, np.array([k**2]), u0, u1)[:, 0]
        want = np.exp(-1j * theta * np.arange(nx))
        np.testing.assert_allclose(u, want, atol=1e-11)

    def test_free_real_propagation_grows_at_lattice_rate(self):
        nx = 120
        h = 0.05
        kap = np.array([0.7])
        u = fb.propagate_real(np.zeros(nx), h, kap, True)[:, 0]
        t = (0.7 * h) ** 2
        th = np.arccosh((1 + 5 * t / 12) / (1 - t / 12))
        np.testing.assert_allclose(u, np.exp(th * np.arange(nx)), rtol=1e-11)
