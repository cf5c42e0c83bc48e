"""Marchenko kernel assembly and the inverse transform.

For fixed x the integral equation

    K(x,y) + F(x+y) + int_x^ymax K(x,z) F(z+y) dz = 0,        y >= x,

is a Fredholm equation of the second kind with symmetric kernel
N(y,z) = -F(y+z).  On a uniform grid the Nystrom matrix

    M[p,q] = delta_pq + w_q F(y_p + y_q)

is Hankel-structured: with spacing h shared by the spatial and s grids,
F(y_p + y_q) is a plain index lookup F_s[2i + p + q] for the row starting
at node i.  One dense solve per spatial node reconstructs the whole kernel,
the potential through V = -2 d/dx K(x,x), and the wavefunctions through
psi(x,k) = e^{-ikx} + int_x^ymax K(x,y) e^{-iky} dy.

Bound states make F(s) = sum_l c_l^2 e^{-kappa_l s} + (Fourier part) grow
exponentially toward negative s, which would poison the plain Nystrom matrix
with entries of size e^{2 kappa |x|}.  The production sweep therefore splits
the kernel: the bounded Fourier part is solved densely, and the separable
bound-state part is folded in exactly through the rank-N capacitance system

    C = diag(e^{2 kappa_l x}) + Etilde^T M^{-1} E,
    K(x,.) = z0 - (M^{-1} E) C^{-1} (c + Etilde^T z0),

in which every factor stays O(1) for all x.  The same rescaling stabilizes
the closed-form reflectionless path.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import DataValidationError, NearSingularError, OscillationBoundError
from .numerics import (
    SPATIAL,
    Grid,
    derivative_samples,
    fourier_quadrature_many,
    simpson_weights,
)
from .forward import SampledPotential, WaveField, PSI_RIGHT_DECAYING
from .scattering import extend_hermitian

logger = logging.getLogger(__name__)

DEFAULT_CONDITION_THRESHOLD = 1e12
# modes with 2 kappa x beyond this are dropped from the capacitance system;
# their contribution is below double precision anyway
_MODE_CUTOFF = 500.0


@dataclass(frozen=True)
class MarchenkoKernel:
    """F(s) samples on the sum grid s = x + y, plus the generating data."""

    s_grid: Grid
    values: np.ndarray
    reflection_part: np.ndarray
    source: object

    def slice_from(self, idx, count):
        return self.values[idx: idx + count]


@dataclass(frozen=True)
class TransformationKernel:
    """K(x,y) on the triangle y >= x over the extended spatial grid.

    ``grid`` runs to y_max = x_max + pad; the first ``report_n`` nodes form
    the caller's physical window.  Rows below the diagonal are zero.
    """

    grid: Grid
    values: np.ndarray
    y_max: float
    report_n: int

    @property
    def report_grid(self):
        g = self.grid
        return Grid(points=g.points[: self.report_n], spacing=g.spacing, kind=SPATIAL)

    def diagonal(self):
        return np.diag(self.values)

    def row_weights(self):
        """Quadrature weights of every row, as an upper-triangular matrix."""
        n = self.grid.n
        w = np.zeros((n, n))
        for i in range(n):
            w[i, i:] = simpson_weights(n - i, self.grid.spacing, blend="right")
        return w


@dataclass(frozen=True)
class GlmRow:
    x: float
    y_points: np.ndarray
    values: np.ndarray
    condition_estimate: float


@dataclass(frozen=True)
class ResolventColumn:
    x: float
    y_points: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class PositiveDefiniteReport:
    min_eigenvalue: float
    cholesky_ok: bool


def sum_grid_for(spatial_grid):
    """The s grid needed to cover F(y+z) for all node pairs of ``spatial_grid``."""
    h = spatial_grid.spacing
    n = spatial_grid.n
    pts = 2.0 * spatial_grid.points[0] + h * np.arange(2 * n - 1)
    return Grid(points=pts, spacing=h, kind=SPATIAL)


def build_marchenko_kernel(data, s_grid):
    """Assemble F(s) = sum_l c_l^2 e^{-kappa_l s} + (1/2pi) int r(k) e^{iks} dk.

    The Fourier part is evaluated on the Hermitian-extended momentum grid and
    is real by symmetry (asserted).  Raises if the momentum grid is too coarse
    for the largest |s| requested.
    """
    k_grid, r_full = extend_hermitian(data.reflection)
    if float(np.max(np.abs(r_full))) > 0.0:
        refl = fourier_quadrature_many(r_full, k_grid, s_grid.points)
    else:
        refl = np.zeros(s_grid.n)
    total = refl.copy()
    for b in data.bound_states:
        total = total + b.c**2 * np.exp(-b.kappa * s_grid.points)
    return MarchenkoKernel(s_grid=s_grid, values=total, reflection_part=refl, source=data)


def _aligned_indices(kernel, y_points, x):
    """Indices into the s grid for F(x + y_p) and the Hankel block F(y_p + y_q)."""
    s0 = kernel.s_grid.points[0]
    h = kernel.s_grid.spacing
    base = (x + y_points - s0) / h
    idx = np.rint(base).astype(int)
    if np.max(np.abs(base - idx)) > 1e-8:
        raise ValueError("y grid is not aligned with the Marchenko kernel sum grid")
    # the Hankel block reaches F(y_last + y_last) = values[2 idx[-1] - idx[0]]
    if idx[0] < 0 or 2 * idx[-1] - idx[0] >= kernel.s_grid.n:
        raise ValueError("Marchenko kernel does not cover the requested row")
    return idx


def _hankel_block(values, start, m):
    """values[start + p + q] as an (m, m) array."""
    idx = start + np.arange(m)
    return values[idx[:, None] + np.arange(m)[None, :]]


def solve_glm_row(kernel, x, y_grid, cond_threshold=DEFAULT_CONDITION_THRESHOLD):
    """Literal Nystrom solve of one GLM row with the full kernel F.

    ``y_grid`` must start at x and be aligned with the kernel's sum grid.
    The 1-norm condition estimate is attached to the result; values beyond
    ``cond_threshold`` abort with :class:`NearSingularError`, which for this
    equation signals inadmissible scattering data.
    """
    y = y_grid.points
    if abs(y[0] - x) > 1e-9 * y_grid.spacing:
        raise ValueError("y grid must start at the row position x")
    idx = _aligned_indices(kernel, y, x)
    m = y.size
    w = simpson_weights(m, y_grid.spacing, blend="right")
    hank = _hankel_block(kernel.values, idx[0], m)
    mat = np.eye(m) + hank * w[None, :]
    cond = float(np.linalg.cond(mat, 1))
    if cond > cond_threshold:
        raise NearSingularError(
            f"GLM system condition estimate {cond:.3e} exceeds {cond_threshold:.1e}; "
            "scattering data violates admissibility", condition_estimate=cond)
    rhs = -kernel.values[idx]
    values = np.linalg.solve(mat, rhs)
    return GlmRow(x=float(x), y_points=y, values=values, condition_estimate=cond)


def resolvent_column(kernel, x, y_grid, cond_threshold=DEFAULT_CONDITION_THRESHOLD):
    """Column R(y, x; 1) of the resolvent of N = -F(y+z), via the discrete delta.

    Applies N (1 - N)^{-1} to the unit-mass delta at the first node and checks
    the reconstruction identity against the directly solved GLM row to 1e-9.
    """
    row = solve_glm_row(kernel, x, y_grid, cond_threshold)
    y = y_grid.points
    m = y.size
    idx = _aligned_indices(kernel, y, x)
    w = simpson_weights(m, y_grid.spacing, blend="right")
    n_w = -_hankel_block(kernel.values, idx[0], m) * w[None, :]
    delta = np.zeros(m)
    delta[0] = 1.0 / w[0]
    resolved = n_w @ np.linalg.solve(np.eye(m) - n_w, delta)
    gap = float(np.max(np.abs(resolved - row.values)))
    if gap > 1e-9:
        raise NearSingularError(
            f"resolvent column deviates from the GLM row by {gap:.2e} (> 1e-9)",
            condition_estimate=row.condition_estimate)
    return ResolventColumn(x=float(x), y_points=y, values=resolved)


def _sweep_rows(fr, efull, kappas, cs, grid, rows, k_out, cond_seen, cond_threshold):
    """Solve the GLM rows in ``rows``; results written into ``k_out``."""
    n = grid.n
    h = grid.spacing
    n_bound = kappas.size
    reflecting = float(np.max(np.abs(fr))) > 0.0
    for i in rows:
        m = n - i
        w = simpson_weights(m, h, blend="right")
        rhs0 = -fr[2 * i: 2 * i + m]
        e_blk = efull[:m]
        if reflecting and m > 1:
            mat = np.eye(m) + _hankel_block(fr, 2 * i, m) * w[None, :]
            lu = lu_factor(mat)
            diag = np.abs(np.diag(lu[0]))
            cond_proxy = float(diag.max() / max(diag.min(), 1e-300))
            if cond_proxy > cond_threshold:
                raise NearSingularError(
                    f"GLM row at x = {grid.points[i]:.4f}: pivot ratio {cond_proxy:.3e} "
                    f"exceeds {cond_threshold:.1e}", condition_estimate=cond_proxy)
            cond_seen[i] = cond_proxy
            z0 = lu_solve(lu, rhs0)
            z_blk = lu_solve(lu, e_blk) if n_bound else None
        else:
            cond_seen[i] = 1.0
            z0 = rhs0.copy()
            z_blk = e_blk.copy() if n_bound else None
        if n_bound:
            x = grid.points[i]
            arg = 2.0 * kappas * x
            live = arg < _MODE_CUTOFF
            zeta = np.zeros(n_bound)
            if live.any():
                et = w[:, None] * e_blk
                cap = np.diag(np.exp(np.minimum(arg, _MODE_CUTOFF))) + et.T @ z_blk
                sub = cap[np.ix_(live, live)]
                rhs_small = (cs + et.T @ z0)[live]
                zeta[live] = np.linalg.solve(sub, rhs_small)
            k_out[i, i:] = z0 - z_blk @ zeta
        else:
            k_out[i, i:] = z0


def solve_transformation_kernel(data, spatial_grid, y_pad=None,
                                cond_threshold=DEFAULT_CONDITION_THRESHOLD,
                                threads=None):
    """Solve the GLM equation on every row of an extended spatial grid.

    The y domain is truncated at y_max = x_max + pad; the default pad is
    10 / kappa_min with bound states present, otherwise 10 length units.
    Per-row solves are independent and dispatched over ``threads`` workers
    (default: machine parallelism); assembly order is deterministic.

    Returns ``(TransformationKernel, MarchenkoKernel)``.
    """
    kappas = data.kappas
    cs = data.norming_constants
    if kappas.size and (np.any(kappas <= 0) or np.any(np.diff(kappas) >= 0)):
        raise DataValidationError("bound-state kappas must be positive and strictly decreasing")
    if y_pad is None:
        y_pad = 10.0 / float(np.min(kappas)) if kappas.size else 10.0
    h = spatial_grid.spacing
    extra = int(np.ceil(y_pad / h))
    pts = spatial_grid.points[0] + h * np.arange(spatial_grid.n + extra)
    ext = Grid(points=pts, spacing=h, kind=SPATIAL)
    kernel = build_marchenko_kernel(data, sum_grid_for(ext))

    n = ext.n
    efull = np.exp(-np.outer(np.arange(n) * h, kappas)) * cs[None, :] if kappas.size \
        else np.zeros((n, 0))
    k_out = np.zeros((n, n))
    cond_seen = np.zeros(n)
    if threads is None:
        threads = os.cpu_count() or 1
    rows = np.arange(n)
    if threads > 1 and n > 64:
        chunks = np.array_split(rows, threads * 4)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_sweep_rows, kernel.reflection_part, efull, kappas, cs,
                            ext, chunk, k_out, cond_seen, cond_threshold)
                for chunk in chunks if chunk.size
            ]
            for f in futures:
                f.result()
    else:
        _sweep_rows(kernel.reflection_part, efull, kappas, cs, ext, rows,
                    k_out, cond_seen, cond_threshold)
    logger.debug("GLM sweep: %d rows, worst pivot-ratio proxy %.3e", n, cond_seen.max())
    tk = TransformationKernel(grid=ext, values=k_out, y_max=float(pts[-1]),
                              report_n=spatial_grid.n)
    return tk, kernel


def reconstruct_potential(kernel):
    """V(x) = -2 d/dx K(x,x) on the report window of a solved kernel."""
    diag = kernel.diagonal()
    v = -2.0 * derivative_samples(diag, kernel.grid)
    return SampledPotential(grid=kernel.report_grid, values=v[: kernel.report_n])


def reconstruct_wavefunction(kernel, k):
    """psi(x,k) = e^{-ikx} + int_x^ymax K(x,y) e^{-iky} dy on the report window."""
    return reconstruct_wavefunction_many(kernel, np.array([float(k)])).values[:, 0]


def reconstruct_wavefunction_many(kernel, momenta, full_domain=False):
    """Wavefunctions on the report window, or on the whole kernel domain.

    ``full_domain`` keeps the values up to y_max; useful when a later
    quadrature must match the kernel's own truncation exactly.
    """
    momenta = np.asarray(momenta, dtype=float)
    h = kernel.grid.spacing
    kmax = float(np.max(np.abs(momenta))) if momenta.size else 0.0
    if kmax * h > 0.5:
        raise OscillationBoundError(
            f"|k| h = {kmax * h:.3f} exceeds 0.5; the kernel quadrature cannot "
            "resolve e^{-iky}")
    kw = kernel.values * kernel.row_weights()
    phases = np.exp(-1j * np.outer(kernel.grid.points, momenta))
    psi = phases + kw @ phases
    if full_domain:
        return WaveField(grid=kernel.grid, momenta=momenta, values=psi,
                         convention=PSI_RIGHT_DECAYING)
    return WaveField(grid=kernel.report_grid, momenta=momenta,
                     values=psi[: kernel.report_n], convention=PSI_RIGHT_DECAYING)


def reflectionless_kernel(bound_states, x, y):
    """Closed-form K(x,y) for r = 0: an N x N solve, no quadrature.

    The degenerate-kernel system A g = b with
    A_mn = delta_mn + c_m c_n e^{-(kappa_m + kappa_n) x} / (kappa_m + kappa_n)
    and b_m = c_m e^{-kappa_m x} gives K(x,y) = -sum_n g_n c_n e^{-kappa_n y}.
    For x < 0 it is solved in rescaled variables so no factor leaves O(1).
    """
    if not bound_states:
        raise ValueError("need at least one bound state")
    kap = np.array([b.kappa for b in bound_states])
    cs = np.array([b.c for b in bound_states])
    if np.any(kap <= 0) or np.any(np.diff(kap) >= 0):
        raise ValueError("kappas must be positive and strictly decreasing")
    if y < x:
        raise ValueError("kernel is defined on y >= x")
    gram = np.outer(cs, cs) / (kap[:, None] + kap[None, :])
    if x >= 0.0:
        a = np.eye(kap.size) + gram * np.exp(-(kap[:, None] + kap[None, :]) * x)
        g = np.linalg.solve(a, cs * np.exp(-kap * x))
        return float(-np.dot(g, cs * np.exp(-kap * y)))
    # scaled form: g = D^{-1} hvec with D = diag(e^{-kappa x}) keeps every
    # entry bounded when x is deep in the negative tail
    hvec = np.linalg.solve(gram + np.diag(np.exp(2.0 * kap * x)), cs)
    return float(-np.dot(hvec, cs * np.exp(-kap * (y - x))))


def reflectionless_diagonal(bound_states, grid):
    """K(x,x) of the closed-form path on a whole grid."""
    return np.array([reflectionless_kernel(bound_states, x, x) for x in grid.points])


def reflectionless_potential(bound_states, grid):
    """Closed-form reflectionless potential: V = -2 d/dx K(x,x)."""
    diag = reflectionless_diagonal(bound_states, grid)
    return SampledPotential(grid=grid, values=-2.0 * derivative_samples(diag, grid))


def check_positive_definite(kappas, v, nu):
    """Smallest eigenvalue of A = I + v_m v_n / (kappa_m + kappa_n)^nu."""
    kappas = np.asarray(kappas, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(kappas <= 0):
        raise ValueError("kappas must be positive")
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    a = np.eye(kappas.size) + np.outer(v, v) / (kappas[:, None] + kappas[None, :]) ** nu
    eigmin = float(np.linalg.eigvalsh(a)[0])
    try:
        np.linalg.cholesky(a)
        chol = True
    except np.linalg.LinAlgError:
        chol = False
    return PositiveDefiniteReport(min_eigenvalue=eigmin, cholesky_ok=chol)
