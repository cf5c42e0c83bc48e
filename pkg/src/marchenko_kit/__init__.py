"""Forward and inverse scattering toolkit for the 1D Schrodinger operator.

The package solves the direct scattering problem for decaying potentials,
reconstructs potentials and wavefunctions from scattering data through the
Gelfand-Levitan-Marchenko equation, evaluates the closed-form functional
derivatives of the reconstruction with respect to the reflection amplitude,
and verifies the standard consistency identities numerically.
"""

from ._kernels import BACKEND
from .errors import (
    DataValidationError,
    MarchenkoKitError,
    NearSingularError,
    NumericalError,
    OscillationBoundError,
)
from .numerics import Grid, QuadratureRule, make_uniform_grid
from .scattering import (
    BoundState,
    ReflectionAmplitude,
    ScatteringData,
    TransmissionAmplitude,
    half_line_momentum_grid,
    transmission_from_reflection,
    unitarity_defect,
    validate,
)
from .forward import (
    SampledPotential,
    ScatteringResult,
    WaveField,
    find_bound_states,
    greens_function,
    reflection_derivative_wrt_potential,
    solve_scattering,
    solve_scattering_batch,
)
from .glm import (
    MarchenkoKernel,
    TransformationKernel,
    build_marchenko_kernel,
    check_positive_definite,
    reconstruct_potential,
    reconstruct_wavefunction,
    reflectionless_kernel,
    resolvent_column,
    solve_glm_row,
    solve_transformation_kernel,
)
from .variational import (
    dK_dr,
    dK_drstar,
    dN_dr,
    dV_drstar,
    dpsi_dr,
    dpsi_drstar,
    finite_difference_harness,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundState",
    "DataValidationError",
    "Grid",
    "MarchenkoKernel",
    "MarchenkoKitError",
    "NearSingularError",
    "NumericalError",
    "OscillationBoundError",
    "QuadratureRule",
    "ReflectionAmplitude",
    "SampledPotential",
    "ScatteringData",
    "ScatteringResult",
    "TransformationKernel",
    "TransmissionAmplitude",
    "WaveField",
    "build_marchenko_kernel",
    "check_positive_definite",
    "dK_dr",
    "dK_drstar",
    "dN_dr",
    "dV_drstar",
    "dpsi_dr",
    "dpsi_drstar",
    "find_bound_states",
    "finite_difference_harness",
    "greens_function",
    "half_line_momentum_grid",
    "make_uniform_grid",
    "reconstruct_potential",
    "reconstruct_wavefunction",
    "reflection_derivative_wrt_potential",
    "reflectionless_kernel",
    "resolvent_column",
    "solve_glm_row",
    "solve_scattering",
    "solve_scattering_batch",
    "solve_transformation_kernel",
    "transmission_from_reflection",
    "unitarity_defect",
    "validate",
]
