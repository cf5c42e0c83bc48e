"""Grids, quadrature and differentiation stencils shared by every module.

All grids are uniform. Composite Simpson weights are used for every
integral; the kernels and fields integrated here are smooth and decaying,
and uniform spacing keeps the Fredholm (Nystrom) matrices Hankel-structured.
Principal-value integrals are computed by singularity subtraction, which
keeps the O(h^4) accuracy of the underlying rule independent of where the
pole sits.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OscillationBoundError

SPATIAL = "spatial"
MOMENTUM = "momentum"

# Oscillatory integrals use plain weighted sums; they are trusted only while
# the phase advances less than half a radian per grid step.
OSCILLATION_BOUND = 0.5


@dataclass(frozen=True)
class Grid:
    """Uniform, strictly increasing 1D grid of positions or momenta."""

    points: np.ndarray
    spacing: float
    kind: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.size < 8:
            raise ValueError(f"grid needs at least 8 points, got {pts.size}")
        if self.kind not in (SPATIAL, MOMENTUM):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        steps = np.diff(pts)
        if np.any(steps <= 0):
            raise ValueError("grid points must be strictly increasing")
        if np.max(np.abs(steps - self.spacing)) > 1e-12 * max(abs(pts[0]), abs(pts[-1]), 1.0):
            raise ValueError("grid is not uniform to 1e-12 relative")

    @property
    def n(self):
        return self.points.size

    @property
    def extent(self):
        return float(self.points[-1] - self.points[0])

    def index_of(self, value, tol=1e-9):
        """Index of the grid point equal to ``value`` (within ``tol`` * spacing)."""
        i = int(round((value - self.points[0]) / self.spacing))
        if i < 0 or i >= self.n or abs(self.points[i] - value) > tol * self.spacing:
            raise ValueError(f"{value} is not a point of this grid")
        return i


@dataclass(frozen=True)
class QuadratureRule:
    """Weights aligned to a grid; sum of weights equals the grid extent."""

    grid: Grid
    weights: np.ndarray
    order: int

    def __post_init__(self):
        if self.weights.size != self.grid.n:
            raise ValueError("weights length must match grid length")


def make_uniform_grid(lo, hi, n, kind=SPATIAL):
    """Build a uniform grid of ``n`` points spanning [lo, hi] inclusive.

    Raises on degenerate ranges (hi - lo < 1e-12) and on n < 8.
    """
    if n < 8:
        raise ValueError(f"grid needs at least 8 points, got {n}")
    if hi - lo < 1e-12:
        raise ValueError(f"degenerate grid range [{lo}, {hi}]")
    pts = np.linspace(lo, hi, n)
    return Grid(points=pts, spacing=(hi - lo) / (n - 1), kind=kind)


def simpson_weights(n, h, blend="symmetric"):
    """Raw composite Simpson weights for ``n`` uniform nodes of spacing ``h``.

    An even node count cannot be covered by 1-4-2-...-4-1 alone; three
    intervals take the 3/8 rule instead.  ``blend`` picks their placement:

    * ``"symmetric"`` averages the left- and right-placed variants, keeping
      w[j] == w[n-1-j].  Reality of Hermitian Fourier sums and the parity of
      principal-value integrals on symmetric grids rely on this.
    * ``"right"`` puts the 3/8 block at the far end only.  Kernel-row
      integrands decay toward the far end, so this keeps the even/odd row
      parity from imprinting an alternating O(h^4) error on quantities that
      are differentiated afterwards.

    Both variants stay exact for cubics.  n == 1 yields a zero weight
    (empty interval) and n == 2 falls back to the trapezoid.
    """
    if n < 1:
        raise ValueError("need at least one node")
    if n == 1:
        return np.zeros(1)
    if n == 2:
        return np.array([0.5, 0.5]) * h
    if n == 3:
        return np.array([1.0, 4.0, 1.0]) * (h / 3.0)
    if n % 2 == 1:
        w = np.zeros(n)
        w[0] = w[-1] = 1.0
        w[1:-1:2] = 4.0
        w[2:-2:2] = 2.0
        return w * (h / 3.0)
    if n == 4:
        return np.array([3.0, 9.0, 9.0, 3.0]) * (h / 8.0)
    right = np.zeros(n)
    right[: n - 3] += simpson_weights(n - 3, h)
    right[n - 4:] += np.array([3.0, 9.0, 9.0, 3.0]) * (h / 8.0)
    if blend == "right":
        return right
    return 0.5 * (right + right[::-1])


def simpson_rule(grid):
    """Composite Simpson rule on ``grid`` (exact for polynomials of degree 3)."""
    return QuadratureRule(grid=grid, weights=simpson_weights(grid.n, grid.spacing), order=3)


def integrate(samples, rule):
    """Weighted sum of ``samples`` under ``rule``."""
    samples = np.asarray(samples)
    if samples.shape[0] != rule.weights.size:
        raise ValueError(
            f"sample length {samples.shape[0]} does not match rule length {rule.weights.size}"
        )
    if samples.ndim == 1:
        return np.dot(rule.weights, samples)
    return np.tensordot(rule.weights, samples, axes=(0, 0))


def principal_value_integral(samples, grid, pole):
    """PV integral of samples(q)/(q - pole) over the grid range.

    Uses singularity subtraction:

        PV int f(q)/(q-pole) dq
            = int (f(q) - f(pole))/(q - pole) dq
              + f(pole) * log((qmax - pole)/(pole - qmin))

    The subtracted integrand is finite; its value at the pole node is the
    derivative f'(pole), estimated by a central difference.  ``pole`` must
    coincide with an interior grid point.
    """
    samples = np.asarray(samples)
    pts = grid.points
    tol = 1e-9 * grid.spacing
    if abs(pole - pts[0]) <= tol or abs(pole - pts[-1]) <= tol:
        raise ValueError("pole must not sit on a grid endpoint")
    if pole <= pts[0] or pole >= pts[-1]:
        raise ValueError(f"pole {pole} outside open grid range ({pts[0]}, {pts[-1]})")
    i = grid.index_of(pole)
    fp = samples[i]
    sub = np.empty_like(samples, dtype=complex if np.iscomplexobj(samples) else float)
    mask = np.ones(grid.n, dtype=bool)
    mask[i] = False
    sub[mask] = (samples[mask] - fp) / (pts[mask] - pole)
    sub[i] = (samples[i + 1] - samples[i - 1]) / (2.0 * grid.spacing)
    rule = simpson_rule(grid)
    value = integrate(sub, rule)
    value += fp * np.log((pts[-1] - pole) / (pole - pts[0]))
    return value


# One-sided O(h^4) stencils for the two nodes at each boundary.
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0

# Same for the second derivative (six-point one-sided, five-point central).
_EDGE0_2 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
_EDGE1_2 = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0


def derivative_samples(samples, grid):
    """Fourth-order first derivative of ``samples`` on ``grid``.

    Central five-point stencil in the interior; one-sided five-point
    stencils on the two node pairs at each boundary.  Accepts a trailing
    batch axis (columns differentiated independently).
    """
    f = np.asarray(samples)
    if f.shape[0] < 5:
        raise ValueError("need at least 5 points for fourth-order differentiation")
    if f.shape[0] != grid.n:
        raise ValueError("sample length does not match grid")
    h = grid.spacing
    d = np.empty_like(f, dtype=complex if np.iscomplexobj(f) else float)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = np.tensordot(_EDGE0, f[:5], axes=(0, 0)) / h
    d[1] = np.tensordot(_EDGE1, f[:5], axes=(0, 0)) / h
    d[-1] = -np.tensordot(_EDGE0, f[-1:-6:-1], axes=(0, 0)) / h
    d[-2] = -np.tensordot(_EDGE1, f[-1:-6:-1], axes=(0, 0)) / h
    return d


def second_derivative_samples(samples, grid):
    """Fourth-order second derivative, same stencil policy as first derivative."""
    f = np.asarray(samples)
    if f.shape[0] < 6:
        raise ValueError("need at least 6 points for fourth-order second differences")
    if f.shape[0] != grid.n:
        raise ValueError("sample length does not match grid")
    h2 = grid.spacing**2
    d = np.empty_like(f, dtype=complex if np.iscomplexobj(f) else float)
    d[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h2)
    d[0] = np.tensordot(_EDGE0_2, f[:6], axes=(0, 0)) / h2
    d[1] = np.tensordot(_EDGE1_2, f[:6], axes=(0, 0)) / h2
    d[-1] = np.tensordot(_EDGE0_2, f[-1:-7:-1], axes=(0, 0)) / h2
    d[-2] = np.tensordot(_EDGE1_2, f[-1:-7:-1], axes=(0, 0)) / h2
    return d


def _check_symmetric_momentum_grid(grid):
    pts = grid.points
    if grid.kind != MOMENTUM:
        raise ValueError("fourier quadrature expects a momentum grid")
    if np.max(np.abs(pts + pts[::-1])) > 1e-9 * max(abs(pts[-1]), 1.0):
        raise ValueError("momentum grid must be symmetric about zero")


def _check_hermitian(samples, grid):
    scale = np.max(np.abs(samples))
    if scale == 0.0:
        return
    residue = np.max(np.abs(samples - np.conj(samples[::-1])))
    if residue > 1e-8 * scale:
        raise ValueError(
            f"samples violate Hermitian symmetry f(-k) = conj f(k): residue {residue:.3e}"
        )


def fourier_quadrature(samples, grid, x):
    """(1/2pi) * int f(k) e^{ikx} dk for Hermitian-symmetric f on a symmetric grid.

    The result is mathematically real; the imaginary residue is asserted to be
    below 1e-8 of the sample scale and discarded.
    """
    return float(fourier_quadrature_many(samples, grid, np.atleast_1d(float(x)))[0])


def fourier_quadrature_many(samples, grid, xs):
    """Vectorized fourier_quadrature over an array of positions."""
    samples = np.asarray(samples, dtype=complex)
    _check_symmetric_momentum_grid(grid)
    _check_hermitian(samples, grid)
    xs = np.asarray(xs, dtype=float)
    xmax = float(np.max(np.abs(xs))) if xs.size else 0.0
    if xmax * grid.spacing > OSCILLATION_BOUND:
        raise OscillationBoundError(
            f"|x|*dk = {xmax * grid.spacing:.3f} exceeds {OSCILLATION_BOUND}; refine the momentum grid"
        )
    wf = simpson_weights(grid.n, grid.spacing) * samples
    out = np.empty(xs.size)
    scale = max(float(np.max(np.abs(samples))), 1e-300)
    # chunked to bound the (n_k x n_x) phase-matrix footprint
    for a in range(0, xs.size, 256):
        block = np.exp(1j * np.outer(grid.points, xs[a:a + 256]))
        vals = wf @ block / (2.0 * np.pi)
        bad = np.max(np.abs(vals.imag))
        if bad > 1e-8 * max(scale, 1e-30):
            raise ValueError(f"fourier quadrature lost reality: imaginary residue {bad:.3e}")
        out[a:a + 256] = vals.real
    return out
