import numpy as np
import pytest

from marchenko_kit.numerics import make_uniform_grid
from marchenko_kit.scattering import (
    BoundState,
    ReflectionAmplitude,
    ScatteringData,
    half_line_momentum_grid,
)
from marchenko_kit.forward import SampledPotential
from marchenko_kit.glm import solve_transformation_kernel


def sech2_potential(lo=-30.0, hi=30.0, n=1201, depth=2.0):
    g = make_uniform_grid(lo, hi, n)
    return SampledPotential(grid=g, values=-depth / np.cosh(g.points) ** 2)


def gaussian_well(lo=-12.0, hi=12.0, n=481, depth=0.3):
    g = make_uniform_grid(lo, hi, n)
    return SampledPotential(grid=g, values=-depth * np.exp(-g.points**2 / 4.0))


def zero_reflection(k_max=6.0, n=600):
    kg = half_line_momentum_grid(k_max, n)
    return ReflectionAmplitude(grid=kg, values=np.zeros(n, dtype=complex))


@pytest.fixture(scope="session")
def soliton_data():
    return ScatteringData(reflection=zero_reflection(),
                          bound_states=(BoundState(1.0, np.sqrt(2.0)),))


@pytest.fixture(scope="session")
def soliton_kernel(soliton_data):
    grid = make_uniform_grid(-30.0, 30.0, 1201)
    kernel, marchenko = solve_transformation_kernel(soliton_data, grid)
    return kernel, marchenko


def smooth_reflection_data(k_max=6.0, n=960, strength=0.5, falloff=0.4):
    """Reflecting background with no bound states: r(k) = strength e^{-falloff k^2}."""
    kg = half_line_momentum_grid(k_max, n)
    vals = strength * np.exp(-falloff * kg.points**2) + 0j
    return ScatteringData(reflection=ReflectionAmplitude(grid=kg, values=vals))


@pytest.fixture(scope="session")
def reflecting_kernel():
    data = smooth_reflection_data()
    grid = make_uniform_grid(-15.0, 15.0, 601)
    kernel, marchenko = solve_transformation_kernel(data, grid, y_pad=10.0)
    return data, kernel, marchenko
