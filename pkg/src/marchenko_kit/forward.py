"""Forward scattering for H = -d^2/dx^2 + V(x) on a uniform spatial grid.

The solution with a source at x = +infinity is propagated with the Numerov
recurrence (fixed step, fourth order globally) starting from the decayed left
end as a unit-amplitude left-moving wave.  At the right end it is matched
against the *lattice* plane waves, i.e. the exact free solutions of the
discrete recurrence with phase step theta(k) = arccos[(1 - 5(kh)^2/12) /
(1 + (kh)^2/12)].  Because the recurrence conserves the discrete Wronskian
exactly, this matching keeps |r|^2 + |t|^2 = 1 at machine precision instead
of the O(h^4) defect a naive continuum matching would leave.

Boundary conventions:

    t phi(x,k) -> t e^{-ikx}                    x -> -infinity
    t phi(x,k) -> e^{-ikx} + r e^{ikx}          x -> +infinity
    psi(x,k)   -> e^{-ikx}                      x -> +infinity

and the basis change psi = (1/t*) phi - (r/t) phi* (unit determinant).
"""

import json
import logging
from dataclasses import dataclass

import numpy as np

from ._kernels import propagate_complex, propagate_real, shoot_wronskian
from .errors import DataValidationError, NumericalError
from .numerics import SPATIAL, Grid, simpson_weights
from .scattering import BoundState

logger = logging.getLogger(__name__)

PHI_LEFT_SOURCE = "phi_left_source"
PSI_RIGHT_DECAYING = "psi_right_decaying"

# admissibility: potential must have decayed to this fraction of its scale
# at the outer 10 percent of the grid before r, t extraction is meaningful
DECAY_FRACTION = 1e-6


@dataclass(frozen=True)
class SampledPotential:
    """Real potential samples on a spatial grid, with an edge-decay figure."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if self.grid.kind != SPATIAL:
            raise ValueError("potential lives on a spatial grid")
        if vals.size != self.grid.n:
            raise ValueError("sample count does not match grid")
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite potential samples")

    @property
    def decay_margin(self):
        """max |V| over the outer 10 percent of the grid (both ends)."""
        n10 = max(self.grid.n // 10, 1)
        return float(max(np.max(np.abs(self.values[:n10])),
                         np.max(np.abs(self.values[-n10:]))))

    @property
    def scale(self):
        return float(np.max(np.abs(self.values)))

    def require_decayed(self):
        if self.scale > 0.0 and self.decay_margin > DECAY_FRACTION * self.scale:
            raise DataValidationError(
                f"potential has not decayed at the grid edges: edge max {self.decay_margin:.3e} "
                f"vs {DECAY_FRACTION:.0e} * scale {self.scale:.3e}"
            )


@dataclass(frozen=True)
class WaveField:
    """Complex wavefunction samples over (spatial grid) x (momentum list)."""

    grid: Grid
    momenta: np.ndarray
    values: np.ndarray          # shape (n_x, n_k)
    convention: str

    def column(self, k, tol=1e-9):
        j = int(np.argmin(np.abs(self.momenta - k)))
        if abs(self.momenta[j] - k) > tol * max(1.0, abs(k)):
            raise ValueError(f"momentum {k} not present in the field")
        return self.values[:, j]


@dataclass(frozen=True)
class ScatteringSlice:
    """Single-momentum output of the forward solver."""

    k: float
    r: complex
    t: complex
    phi: np.ndarray
    psi: np.ndarray


@dataclass(frozen=True)
class ScatteringResult:
    momenta: np.ndarray
    r: np.ndarray
    t: np.ndarray
    phi: WaveField
    psi: WaveField


def _lattice_phase(k, h):
    """Signed phase step of the free lattice plane wave e^{-i theta j}."""
    t = (k * h) ** 2
    c = (1.0 - 5.0 * t / 12.0) / (1.0 + t / 12.0)
    if np.any(np.abs(c) > 1.0):
        raise NumericalError(f"momentum too large for spacing {h}: |k h| must stay below ~2.4")
    return np.sign(k) * np.arccos(c)


def solve_scattering_batch(potential, momenta):
    """Solve the scattering problem for every momentum in ``momenta``.

    Returns a :class:`ScatteringResult`; per-momentum solves are independent
    and assembled in input order.
    """
    momenta = np.asarray(momenta, dtype=float)
    if np.any(momenta == 0.0):
        raise DataValidationError("k = 0 is excluded from scattering solves")
    potential.require_decayed()
    g = potential.grid
    h = g.spacing
    x = g.points
    n = g.n - 1
    theta = _lattice_phase(momenta, h)
    jc = int(np.argmin(np.abs(x)))
    anchor = np.exp(-1j * momenta * x[jc])

    u0 = anchor * np.exp(-1j * theta * (0 - jc))
    u1 = anchor * np.exp(-1j * theta * (1 - jc))
    u = propagate_complex(potential.values, h, momenta**2, u0, u1)

    p_last = anchor * np.exp(-1j * theta * (n - jc))
    p_prev = anchor * np.exp(-1j * theta * (n - 1 - jc))
    q_last = np.conj(p_last)
    q_prev = np.conj(p_prev)
    det = p_prev * q_last - p_last * q_prev          # 2i sin(theta), nonzero
    a = (u[n - 1] * q_last - u[n] * q_prev) / det
    b = (u[n] * p_prev - u[n - 1] * p_last) / det
    if np.any(np.abs(a) < 1e-12):
        raise NumericalError("degenerate matching: |A| < 1e-12")
    r = b / a
    t = 1.0 / a
    psi = u / np.conj(t) - (r / t) * np.conj(u)
    phi_field = WaveField(grid=g, momenta=momenta, values=u, convention=PHI_LEFT_SOURCE)
    psi_field = WaveField(grid=g, momenta=momenta, values=psi, convention=PSI_RIGHT_DECAYING)
    return ScatteringResult(momenta=momenta, r=r, t=t, phi=phi_field, psi=psi_field)


def solve_scattering(potential, k):
    """Single-momentum scattering solve; see :func:`solve_scattering_batch`."""
    res = solve_scattering_batch(potential, np.array([float(k)]))
    return ScatteringSlice(k=float(k), r=complex(res.r[0]), t=complex(res.t[0]),
                           phi=res.phi.values[:, 0], psi=res.psi.values[:, 0])


def find_bound_states(potential, scan_resolution=1e-3, bisect_tol=1e-10):
    """Locate all discrete levels E = -kappa^2 and their norming constants.

    The two one-sided decaying solutions are propagated toward each other;
    their lattice Wronskian is constant in x and vanishes exactly at an
    eigenvalue.  A descending kappa scan at ``scan_resolution`` * kappa_scale
    brackets the sign changes, each bracket is bisected to ``bisect_tol``,
    and c is read off a log-linear fit of the right tail of the normalized
    eigenfunction over the outer 20 percent of the grid.

    Returns bound states sorted by decreasing kappa.
    """
    potential.require_decayed()
    g = potential.grid
    depth = float(np.max(-potential.values))
    if depth <= 0.0:
        return []
    kappa_scale = np.sqrt(depth) * 1.1
    dk = scan_resolution * kappa_scale
    kappas = np.arange(kappa_scale, dk * 0.5, -dk)
    w = shoot_wronskian(potential.values, g.spacing, kappas)
    sgn = np.sign(w)
    flips = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]

    roots = []
    for i in flips:
        hi, lo = kappas[i], kappas[i + 1]
        whi = w[i]
        while hi - lo > bisect_tol:
            midp = 0.5 * (hi + lo)
            wm = shoot_wronskian(potential.values, g.spacing, np.array([midp]))[0]
            if wm == 0.0:
                hi = lo = midp
                break
            if np.sign(wm) == np.sign(whi):
                hi, whi = midp, wm
            else:
                lo = midp
        roots.append(0.5 * (hi + lo))

    roots.sort(reverse=True)
    for ka, kb in zip(roots, roots[1:]):
        if ka - kb < dk:
            raise NumericalError(
                f"two eigenvalues within the scan resolution near kappa = {ka:.6f}; "
                "refine scan_resolution"
            )
    return [_normalize_and_fit(potential, kappa) for kappa in roots]


def _normalize_and_fit(potential, kappa):
    g = potential.grid
    ul = propagate_real(potential.values, g.spacing, np.array([kappa]), from_left=True)[:, 0]
    ur = propagate_real(potential.values, g.spacing, np.array([kappa]), from_left=False)[:, 0]
    m = int(np.argmin(potential.values))
    if ul[m] == 0.0 or ur[m] == 0.0:
        raise NumericalError(f"eigenfunction node at the matching point for kappa = {kappa}")
    psi = np.where(np.arange(g.n) <= m, ul / ul[m], ur / ur[m])
    w = simpson_weights(g.n, g.spacing)
    psi = psi / np.sqrt(np.sum(w * psi**2))
    if psi[m] < 0:
        psi = -psi

    i0 = int(0.8 * g.n)
    x_tail = g.points[i0:]
    y_tail = psi[i0:]
    ok = np.abs(y_tail) > 1e-250
    if np.count_nonzero(ok) < 5:
        raise NumericalError(f"tail underflow prevents norming-constant fit at kappa = {kappa}")
    slope, logc = np.polyfit(x_tail[ok], np.log(np.abs(y_tail[ok])), 1)
    resid = float(np.std(np.log(np.abs(y_tail[ok])) - (slope * x_tail[ok] + logc)))
    logger.debug("bound state kappa=%.9f: tail slope %.9f (expect %.9f), fit residual %.2e",
                 kappa, slope, -kappa, resid)
    return BoundState(kappa=float(kappa), c=float(np.exp(logc)))


def greens_function(potential, k, x, y, slice_=None):
    """Outgoing Green's function of H - k^2 at (x, y), both grid points.

    G = (1/w)[theta(x-y) psi*(x) phi(y) + theta(y-x) psi*(y) phi(x)]
    with w = 2k / (i t(k)); symmetric in (x, y) and continuous across x = y.
    """
    if slice_ is None:
        slice_ = solve_scattering(potential, k)
    g = potential.grid
    ix, iy = g.index_of(x), g.index_of(y)
    w = 2.0 * k / (1j * slice_.t)
    if ix >= iy:
        return complex(np.conj(slice_.psi[ix]) * slice_.phi[iy] / w)
    return complex(np.conj(slice_.psi[iy]) * slice_.phi[ix] / w)


def reflection_derivative_wrt_potential(potential, k, slice_=None):
    """First-order response of r(k) to a potential change: (t phi)^2 / (2ik).

    Returned per grid point; contract against a potential increment with a
    quadrature rule to predict the reflection shift.
    """
    if k == 0.0:
        raise DataValidationError("k = 0 is excluded (response kernel carries 1/k)")
    if slice_ is None:
        slice_ = solve_scattering(potential, k)
    return (slice_.t * slice_.phi) ** 2 / (2j * k)


def potential_from_json(text):
    """Load a potential from the {"x": [...], "v": [...]} document."""
    try:
        doc = json.loads(text)
        x = np.asarray(doc["x"], dtype=float)
        v = np.asarray(doc["v"], dtype=float)
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise DataValidationError(f"malformed potential document: {exc}") from exc
    if x.size != v.size:
        raise DataValidationError("x and v arrays must be aligned")
    if x.size < 8:
        raise DataValidationError("need at least 8 spatial samples")
    grid = Grid(points=x, spacing=float(x[1] - x[0]), kind=SPATIAL)
    return SampledPotential(grid=grid, values=v)


def potential_to_json(potential):
    return json.dumps({"x": potential.grid.points.tolist(),
                       "v": potential.values.tolist()}, indent=2)
