"""Exception hierarchy shared by all modules.

Two families matter to callers: bad input data (grids, scattering data,
config) and numerical failure of an otherwise well-posed computation.
The command line maps the first family to exit code 2 and the second
to exit code 3.
"""


class MarchenkoKitError(Exception):
    """Base class for all package errors."""


class DataValidationError(MarchenkoKitError, ValueError):
    """Input data violates a documented admissibility condition."""


class NumericalError(MarchenkoKitError, RuntimeError):
    """A solver failed or left its validity regime."""


class NearSingularError(NumericalError):
    """Discretized Fredholm system is numerically singular.

    Signals inadmissible scattering data; carries the condition estimate.
    """

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class OscillationBoundError(NumericalError):
    """Grid too coarse to resolve an oscillatory integrand (|omega|*h > 1/2)."""
