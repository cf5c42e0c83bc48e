"""Scattering data: storage, admissibility checks, and the dispersion map r -> t.

Conventions.  The reflection amplitude r(k) is stored on the momentum
half-line k >= 0 only; the negative half follows from r(-k) = conj r(k)
and is materialized on demand by :func:`extend_hermitian`.  Half-line grids
may either include k = 0 or start at half a spacing (solver pipelines avoid
k = 0 because several response kernels carry explicit 1/k factors).

Admissible data satisfy |r(k)| < 1 away from k = 0, r(k) = O(1/k) at large
momentum, strictly decreasing bound-state parameters kappa_1 > ... > kappa_N
> 0 with positive norming constants, and an integrability condition on the
Fourier transform of r/t that is only checked here as a truncated proxy.

The transmission amplitude is reconstructed from r alone:

    t(k) = sqrt(1 - |r(k)|^2) * prod_l (k + i kappa_l)/(k - i kappa_l)
           * exp( (1/2 pi i) PV int log(1 - |r(q)|^2) / (q - k) dq ).
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DataValidationError
from .numerics import (
    MOMENTUM,
    Grid,
    derivative_samples,
    fourier_quadrature_many,
    make_uniform_grid,
    principal_value_integral,
    simpson_weights,
)

# floor applied to 1 - |r|^2 before taking the logarithm; guards isolated
# samples rounding onto |r| = 1
_LOG_CLAMP = 1e-14


@dataclass(frozen=True)
class ReflectionAmplitude:
    """Complex reflection samples on a momentum half-line grid (k >= 0)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", vals)
        if self.grid.kind != MOMENTUM:
            raise ValueError("reflection amplitude lives on a momentum grid")
        if vals.size != self.grid.n:
            raise ValueError("sample count does not match grid")
        if self.grid.points[0] < -1e-12:
            raise ValueError("half-line grid must not contain negative momenta")
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite reflection samples")


@dataclass(frozen=True)
class BoundState:
    """One discrete level E = -kappa^2 with norming constant c.

    c is the coefficient of the normalized eigenfunction tail c e^{-kappa x}
    on the decaying side used by the inverse transform.
    """

    kappa: float
    c: float

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and np.isfinite(self.c)):
            raise ValueError("bound state parameters must be finite")


@dataclass(frozen=True)
class ScatteringData:
    """Complete inverse-scattering input: r(k) plus bound-state pairs."""

    reflection: ReflectionAmplitude
    bound_states: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "bound_states", tuple(self.bound_states))

    @property
    def kappas(self):
        return np.array([b.kappa for b in self.bound_states])

    @property
    def norming_constants(self):
        return np.array([b.c for b in self.bound_states])


@dataclass(frozen=True)
class TransmissionAmplitude:
    """t(k) samples on the full symmetric momentum grid."""

    grid: Grid
    values: np.ndarray


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def half_line_momentum_grid(k_max, n):
    """Half-line momentum grid avoiding k = 0: points (j + 1/2) k_max / n.

    Solver pipelines use this layout because several response kernels carry
    explicit 1/k factors; the Hermitian extension of such a grid is uniform
    and symmetric without a zero node.
    """
    dk = k_max / n
    return Grid(points=(np.arange(n) + 0.5) * dk, spacing=dk, kind=MOMENTUM)


def extend_hermitian(r):
    """Extend half-line reflection samples to the full symmetric momentum grid.

    Grids containing k = 0 share that point (its sample must be real);
    grids starting at half a spacing are mirrored without a shared point.
    Returns ``(full_grid, full_samples)``.
    """
    pts = r.grid.points
    h = r.grid.spacing
    vals = r.values
    if abs(pts[0]) <= 1e-9 * h:
        if abs(vals[0].imag) > 1e-12 * max(1.0, abs(vals[0])):
            raise DataValidationError(
                f"r(0) must equal its own conjugate; got imaginary part {vals[0].imag:.3e}"
            )
        full_pts = np.concatenate([-pts[:0:-1], pts])
        full_vals = np.concatenate([np.conj(vals[:0:-1]), vals])
    elif abs(pts[0] - 0.5 * h) <= 1e-9 * h:
        full_pts = np.concatenate([-pts[::-1], pts])
        full_vals = np.concatenate([np.conj(vals[::-1]), vals])
    else:
        raise DataValidationError(
            "half-line grid must start at k = 0 or at half a spacing; "
            f"first point is {pts[0]} with spacing {h}"
        )
    grid = Grid(points=full_pts, spacing=h, kind=MOMENTUM)
    return grid, full_vals


def unitarity_defect(r, t):
    """| |r|^2 + |t|^2 - 1 | for one (r, t) pair."""
    return float(np.abs(np.abs(r) ** 2 + np.abs(t) ** 2 - 1.0))


def _hard_failures(data):
    """Cheap admissibility conditions required before using the dispersion map."""
    problems = []
    r = data.reflection
    off_zero = r.grid.points > 1e-9 * r.grid.spacing
    if np.any(np.abs(r.values[off_zero]) >= 1.0):
        problems.append("|r(k)| >= 1 at some k != 0")
    if np.any(np.abs(r.values) > 1.0 + 1e-12):
        problems.append("|r(0)| > 1")
    kap = data.kappas
    if kap.size:
        if np.any(kap <= 0):
            problems.append("kappa values must be positive")
        if np.any(np.diff(kap) >= 0):
            problems.append("kappa values must be strictly decreasing")
        if np.any(data.norming_constants <= 0):
            problems.append("norming constants must be positive")
    return problems


def _log_one_minus_r2(full_vals):
    return np.log(np.maximum(1.0 - np.abs(full_vals) ** 2, _LOG_CLAMP))


def transmission_from_reflection(data, k):
    """Transmission amplitude at one momentum grid point, determined by r alone."""
    return complex(transmission_samples(data, np.atleast_1d(float(k))).values[0])


def transmission_samples(data, ks=None):
    """Vectorized dispersion map; defaults to the full symmetric grid.

    Each requested k must coincide with a point of the Hermitian-extended
    momentum grid (the PV quadrature subtracts the singularity at a node).
    """
    problems = _hard_failures(data)
    if problems:
        raise DataValidationError("; ".join(problems))
    full_grid, full_vals = extend_hermitian(data.reflection)
    if ks is None:
        ks = full_grid.points
    ks = np.asarray(ks, dtype=float)
    logterm = _log_one_minus_r2(full_vals)
    kap = data.kappas
    out = np.empty(ks.size, dtype=complex)
    for i, k in enumerate(ks):
        idx = full_grid.index_of(k)
        pv = principal_value_integral(logterm, full_grid, k)
        blaschke = np.prod((k + 1j * kap) / (k - 1j * kap)) if kap.size else 1.0
        out[i] = (
            np.sqrt(max(1.0 - np.abs(full_vals[idx]) ** 2, 0.0))
            * blaschke
            * np.exp(pv / (2j * np.pi))
        )
    grid = full_grid if ks.size == full_grid.n else None
    return TransmissionAmplitude(grid=grid, values=out)


def validate(data, b_proxy_extent=None):
    """Run every admissibility check and return a report; never raises.

    The B(x) integrability condition is evaluated as a finite proxy
    int (1+|x|) |B'(x)| dx over a truncated window; its size is limited by
    the oscillation bound of the momentum grid.
    """
    checks = []
    r = data.reflection
    pts = r.grid.points
    vals = r.values
    h = r.grid.spacing

    # Hermitian convention: only the k = 0 sample is constrained on a half-line.
    if abs(pts[0]) <= 1e-9 * h:
        margin = abs(vals[0].imag)
        checks.append(CheckResult("hermitian_convention", margin <= 1e-10, margin,
                                  "imaginary part of r(0)"))
    else:
        checks.append(CheckResult("hermitian_convention", True, 0.0,
                                  "no k = 0 sample on a half-offset grid"))

    off_zero = pts > 1e-9 * h
    worst = float(np.max(np.abs(vals[off_zero]))) if off_zero.any() else 0.0
    checks.append(CheckResult("reflection_bound", worst < 1.0, 1.0 - worst,
                              "1 - max |r(k)| over k != 0"))

    # decay proxy: |r| k over the outer 20 percent must not exceed its
    # mid-grid maximum
    n = pts.size
    tail = slice(int(0.8 * n), n)
    mid = slice(int(0.3 * n), int(0.8 * n))
    tail_sup = float(np.max(np.abs(vals[tail]) * pts[tail]))
    mid_sup = float(np.max(np.abs(vals[mid]) * pts[mid])) if pts[mid].size else tail_sup
    checks.append(CheckResult("tail_decay", tail_sup <= mid_sup + 1e-12,
                              mid_sup - tail_sup, "mid-grid sup minus tail sup of |r(k)| k"))

    kap = data.kappas
    if kap.size:
        ordered = bool(np.all(kap > 0) and np.all(np.diff(kap) < 0))
        margin = float(np.min(-np.diff(kap))) if kap.size > 1 else float(kap[0])
        checks.append(CheckResult("kappa_ordering", ordered, margin,
                                  "smallest gap of the decreasing kappa sequence"))
        cmin = float(np.min(data.norming_constants))
        checks.append(CheckResult("norming_positive", cmin > 0, cmin, "min norming constant"))
    else:
        checks.append(CheckResult("kappa_ordering", True, 0.0, "no bound states"))
        checks.append(CheckResult("norming_positive", True, 0.0, "no bound states"))

    checks.append(_b_integrability_proxy(data, b_proxy_extent))
    return ValidationReport(checks=tuple(checks))


def _b_integrability_proxy(data, extent):
    if _hard_failures(data):
        return CheckResult("b_integrability_proxy", False, np.nan,
                           "skipped: hard admissibility failures")
    full_grid, full_vals = extend_hermitian(data.reflection)
    if float(np.max(np.abs(full_vals))) == 0.0:
        return CheckResult("b_integrability_proxy", True, 0.0, "r = 0")
    # the PV pole must stay interior to the grid: work on the inner window
    inner = Grid(points=full_grid.points[1:-1], spacing=full_grid.spacing, kind=MOMENTUM)
    t = transmission_samples(data, inner.points).values
    if extent is None:
        extent = min(20.0, 0.4 / full_grid.spacing)
    xg = make_uniform_grid(-extent, extent, max(int(2 * extent / 0.1) + 1, 65))
    full_grid = inner
    ratio = full_vals[1:-1] / t
    b = fourier_quadrature_many(ratio, full_grid, xg.points) * (2.0 * np.pi)
    db = derivative_samples(b, xg)
    w = simpson_weights(xg.n, xg.spacing)
    proxy = float(np.sum(w * (1.0 + np.abs(xg.points)) * np.abs(db)))
    return CheckResult("b_integrability_proxy", bool(np.isfinite(proxy)), proxy,
                       f"int (1+|x|) |B'| dx over [-{extent:g}, {extent:g}]")


def data_to_json(data):
    """Serialize to the interchange schema (arrays aligned, k ascending)."""
    return json.dumps(
        {
            "k": data.reflection.grid.points.tolist(),
            "r_re": data.reflection.values.real.tolist(),
            "r_im": data.reflection.values.imag.tolist(),
            "bound_states": [{"kappa": b.kappa, "c": b.c} for b in data.bound_states],
        },
        indent=2,
    )


def data_from_json(text):
    try:
        doc = json.loads(text)
        k = np.asarray(doc["k"], dtype=float)
        rr = np.asarray(doc["r_re"], dtype=float)
        ri = np.asarray(doc["r_im"], dtype=float)
        states = tuple(BoundState(float(b["kappa"]), float(b["c"]))
                       for b in doc.get("bound_states", []))
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise DataValidationError(f"malformed scattering-data document: {exc}") from exc
    if not (k.size == rr.size == ri.size):
        raise DataValidationError("k, r_re, r_im arrays must be aligned")
    if k.size < 8:
        raise DataValidationError("need at least 8 momentum samples")
    grid = Grid(points=k, spacing=float(k[1] - k[0]), kind=MOMENTUM)
    refl = ReflectionAmplitude(grid=grid, values=rr + 1j * ri)
    return ScatteringData(reflection=refl, bound_states=states)
