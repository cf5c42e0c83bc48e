"""Command-line front end: deterministic pipelines and consistency reports.

Subcommands: forward, invert, tmap, deriv, check, soliton.  All outputs are
reproducible byte for byte: no wall clock, no unseeded randomness, and every
file carries the hash of the effective configuration.  Exit codes: 0 success,
2 input/validation failure, 3 numerical failure.
"""

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DataValidationError, NearSingularError, NumericalError
from .numerics import make_uniform_grid
from .scattering import (
    BoundState,
    ReflectionAmplitude,
    ScatteringData,
    data_from_json,
    data_to_json,
    half_line_momentum_grid,
    transmission_samples,
    unitarity_defect,
    validate,
)
from .forward import (
    SampledPotential,
    find_bound_states,
    potential_from_json,
    reflection_derivative_wrt_potential,
    solve_scattering_batch,
)
from .glm import (
    reconstruct_potential,
    reconstruct_wavefunction_many,
    reflectionless_potential,
    solve_transformation_kernel,
)
from .variational import dV_drstar, dpsi_drstar
from .consistency import SmearingFunction, gamma_smeared, trace_identity_defect


@dataclass
class SpatialConfig:
    min: float = -30.0
    max: float = 30.0
    n: int = 1201


@dataclass
class MomentumConfig:
    max: float = 12.0
    n: int = 1920


@dataclass
class GlmConfig:
    y_pad: float | None = None
    cond_threshold: float = 1e12


@dataclass
class ChecksConfig:
    L: float = 60.0
    smear_width: float = 0.1
    tolerances: dict = field(default_factory=lambda: {
        "trace": 1e-3,
        "unitarity": 1e-8,
        "inverse-kernel": 0.03,
        "orthogonality": 0.03,
        "roundtrip": 0.02,
    })


@dataclass
class IoConfig:
    input: str | None = None
    output_dir: str = "."
    format: str = "csv"


@dataclass
class RunConfig:
    spatial: SpatialConfig = field(default_factory=SpatialConfig)
    momentum: MomentumConfig = field(default_factory=MomentumConfig)
    glm: GlmConfig = field(default_factory=GlmConfig)
    checks: ChecksConfig = field(default_factory=ChecksConfig)
    io: IoConfig = field(default_factory=IoConfig)
    threads: int | None = None
    wavefunction_momenta: tuple = (0.5, 1.0, 2.0)

    @classmethod
    def load(cls, path):
        cfg = cls()
        if path:
            try:
                doc = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise DataValidationError(f"cannot read config {path}: {exc}") from exc
            for section, payload in doc.items():
                if not hasattr(cfg, section):
                    raise DataValidationError(f"unknown config section {section!r}")
                target = getattr(cfg, section)
                if isinstance(payload, dict) and hasattr(target, "__dataclass_fields__"):
                    for key, val in payload.items():
                        if not hasattr(target, key):
                            raise DataValidationError(f"unknown config key {section}.{key}")
                        setattr(target, key, val)
                else:
                    setattr(cfg, section, payload)
        return cfg

    def digest(self):
        # hash only the sections that shape the numbers: io paths and thread
        # counts must not break byte-identical reproduction
        doc = asdict(self)
        doc.pop("io", None)
        doc.pop("threads", None)
        blob = json.dumps(doc, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def spatial_grid(self):
        return make_uniform_grid(self.spatial.min, self.spatial.max, self.spatial.n)

    def momentum_grid(self):
        return half_line_momentum_grid(self.momentum.max, self.momentum.n)


def _fmt(v):
    return f"{v:.16e}"


def write_csv(path, header_columns, rows, config_hash):
    lines = [f"# config={config_hash}", "# columns: " + ",".join(header_columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, payload, config_hash):
    doc = {"config_hash": config_hash}
    doc.update(payload)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _resolve_threads(args_threads):
    if args_threads is not None:
        return args_threads
    env = os.environ.get("MARCHENKO_KIT_THREADS")
    if env:
        return max(int(env), 1)
    return None


def _load_data(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataValidationError(f"cannot read {path}: {exc}") from exc
    return data_from_json(text)


def _load_potential(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataValidationError(f"cannot read {path}: {exc}") from exc
    return potential_from_json(text)


def _require_admissible(data):
    report = validate(data)
    hard = [c for c in report.checks
            if not c.passed and c.name in ("reflection_bound", "kappa_ordering",
                                           "norming_positive", "hermitian_convention")]
    if hard:
        names = ", ".join(c.name for c in hard)
        raise DataValidationError(f"scattering data failed validation: {names}")


def cmd_forward(cfg, args):
    potential = _load_potential(args.potential)
    kgrid = cfg.momentum_grid()
    result = solve_scattering_batch(potential, kgrid.points)
    states = find_bound_states(potential)
    outdir = Path(cfg.io.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    h = cfg.digest()
    rows = np.column_stack([kgrid.points, result.r.real, result.r.imag,
                            result.t.real, result.t.imag])
    write_csv(outdir / "scattering.csv", ["k", "re_r", "im_r", "re_t", "im_t"], rows, h)
    write_json(outdir / "bound_states.json",
               {"bound_states": [{"kappa": b.kappa, "c": b.c} for b in states]}, h)
    return 0


def _invert(cfg, data, threads):
    _require_admissible(data)
    grid = cfg.spatial_grid()
    return solve_transformation_kernel(data, grid, cfg.glm.y_pad,
                                       cfg.glm.cond_threshold, threads=threads)


def cmd_invert(cfg, args):
    data = _load_data(args.data)
    kernel, _ = _invert(cfg, data, _resolve_threads(args.threads))
    potential = reconstruct_potential(kernel)
    outdir = Path(cfg.io.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    h = cfg.digest()
    write_csv(outdir / "potential.csv", ["x", "v"],
              np.column_stack([potential.grid.points, potential.values]), h)
    rows = []
    g = kernel.grid
    stride = max(g.n // 400, 1)
    for i in range(0, g.n, stride):
        for j in range(i, g.n, stride):
            rows.append((g.points[i], g.points[j], kernel.values[i, j]))
    write_csv(outdir / "kernel.csv", ["x", "y", "K"], rows, h)
    momenta = np.array(cfg.wavefunction_momenta, dtype=float)
    field = reconstruct_wavefunction_many(kernel, momenta)
    wf_rows = []
    for jk, k in enumerate(momenta):
        for i, x in enumerate(field.grid.points):
            wf_rows.append((x, k, field.values[i, jk].real, field.values[i, jk].imag))
    write_csv(outdir / "wavefunctions.csv", ["x", "k", "re_psi", "im_psi"], wf_rows, h)
    return 0


def cmd_tmap(cfg, args):
    data = _load_data(args.data)
    _require_admissible(data)
    # the PV pole must stay interior to the extended grid: drop the top point
    ks = data.reflection.grid.points[:-1]
    t = transmission_samples(data, ks).values
    outdir = Path(cfg.io.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_csv(outdir / "tmap.csv", ["k", "re_t", "im_t"],
              np.column_stack([ks, t.real, t.imag]), cfg.digest())
    return 0


def cmd_deriv(cfg, args):
    data = _load_data(args.data)
    threads = _resolve_threads(args.threads)
    outdir = Path(cfg.io.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    h = cfg.digest()
    kernel, _ = _invert(cfg, data, threads)
    rep = kernel.report_grid
    if args.which == "dv-dr":
        field = reconstruct_wavefunction_many(kernel, np.array([args.k]))
        vals = dV_drstar(field, args.k)
        name, cols = "dv_dr.csv", ["x", "k", "re", "im"]
        rows = [(x, args.k, v.real, v.imag) for x, v in zip(rep.points, vals)]
    elif args.which == "dpsi-dr":
        if args.q is None:
            raise DataValidationError("dpsi-dr needs --q")
        field = reconstruct_wavefunction_many(kernel, np.array([args.k, args.q]))
        vals = [dpsi_drstar(field, x, args.k, args.q) for x in rep.points]
        name, cols = "dpsi_dr.csv", ["x", "k", "q", "re", "im"]
        rows = [(x, args.k, args.q, v.real, v.imag) for x, v in zip(rep.points, vals)]
    elif args.which == "dr-dv":
        potential = reconstruct_potential(kernel)
        vals = reflection_derivative_wrt_potential(potential, args.k)
        name, cols = "dr_dv.csv", ["x", "k", "re", "im"]
        rows = [(x, args.k, v.real, v.imag) for x, v in zip(rep.points, vals)]
    else:
        raise DataValidationError(f"unknown derivative {args.which!r}")
    write_csv(outdir / name, cols, rows, h)
    return 0


def _builtin_soliton_data(kgrid):
    refl = ReflectionAmplitude(grid=kgrid, values=np.zeros(kgrid.n, dtype=complex))
    return ScatteringData(reflection=refl, bound_states=(BoundState(1.0, np.sqrt(2.0)),))


def _builtin_gaussian_well(grid):
    return SampledPotential(grid=grid, values=-0.3 * np.exp(-grid.points**2 / 4.0))


def _check_trace(cfg, data, threads):
    if data is None:
        kgrid = half_line_momentum_grid(8.0, 640)
        data = _builtin_soliton_data(kgrid)
        grid = make_uniform_grid(-30.0, 30.0, 1201)
        potential = reflectionless_potential(data.bound_states, grid)
    else:
        kernel, _ = _invert(cfg, data, threads)
        potential = reconstruct_potential(kernel)
    defect = trace_identity_defect(potential, data)
    return {"check_name": "trace", "parameters": {}, "lhs": defect, "rhs": 0.0,
            "residual": defect, "pass": bool(defect <= cfg.checks.tolerances["trace"])}


def _check_unitarity(cfg, data, threads):
    if data is None:
        grid = make_uniform_grid(-15.0, 15.0, 751)
        potential = _builtin_gaussian_well(grid)
    else:
        kernel, _ = _invert(cfg, data, threads)
        potential = reconstruct_potential(kernel)
    ks = half_line_momentum_grid(6.0, 240).points
    res = solve_scattering_batch(potential, ks)
    worst = max(unitarity_defect(r, t) for r, t in zip(res.r, res.t))
    return {"check_name": "unitarity", "parameters": {"n_k": len(ks)},
            "lhs": worst, "rhs": 0.0, "residual": worst,
            "pass": bool(worst <= cfg.checks.tolerances["unitarity"])}


def _check_inverse_kernel(cfg, data, threads):
    length = cfg.checks.L
    grid = make_uniform_grid(-length - 1.0, length + 1.0, int(2 * (length + 1) / 0.05) + 1)
    potential = SampledPotential(grid=grid, values=np.zeros(grid.n))
    k = 1.0
    smear = SmearingFunction(center=k, width=cfg.checks.smear_width)
    pair = gamma_smeared(potential, k, length, smear)
    resid = abs(pair.lhs - pair.rhs) / abs(pair.rhs)
    return {"check_name": "inverse-kernel",
            "parameters": {"L": length, "width": cfg.checks.smear_width, "k": k},
            "lhs": pair.lhs, "rhs": pair.rhs, "residual": resid,
            "pass": bool(resid <= cfg.checks.tolerances["inverse-kernel"])}


def _check_orthogonality(cfg, data, threads):
    from .consistency import orthogonality_smeared_coefficients

    length = cfg.checks.L
    grid = make_uniform_grid(-length - 1.0, length + 1.0, int(2 * (length + 1) / 0.05) + 1)
    potential = SampledPotential(grid=grid,
                                 values=-2.0 / np.cosh(grid.points) ** 2)
    k = 1.0
    res = solve_scattering_batch(potential, np.array([k]))
    c_sum, c_diff = orthogonality_smeared_coefficients(potential, k, length,
                                                       cfg.checks.smear_width)
    want_sum = 2.0 * np.pi / abs(res.t[0]) ** 2
    want_diff = -2.0 * np.pi * res.r[0] / abs(res.t[0]) ** 2
    resid = abs(c_sum - want_sum) / abs(want_sum)
    if abs(want_diff) > 1e-6:
        resid = max(resid, abs(c_diff - want_diff) / abs(want_diff))
    else:
        resid = max(resid, abs(c_diff) / abs(want_sum))
    return {"check_name": "orthogonality",
            "parameters": {"L": length, "width": cfg.checks.smear_width, "k": k},
            "lhs": float(np.real(c_sum)), "rhs": float(want_sum), "residual": float(resid),
            "pass": bool(resid <= cfg.checks.tolerances["orthogonality"])}


def _check_roundtrip(cfg, data, threads):
    grid = make_uniform_grid(-10.0, 10.0, 401)
    potential = _builtin_gaussian_well(grid)
    # the sum grid reaches 2(10 + 10/kappa); dk must keep |s| dk below 1/2
    kgrid = half_line_momentum_grid(6.0, 1200)
    res = solve_scattering_batch(potential, kgrid.points)
    states = find_bound_states(potential)
    refl = ReflectionAmplitude(grid=kgrid, values=res.r)
    data2 = ScatteringData(reflection=refl, bound_states=tuple(states))
    kernel, _ = solve_transformation_kernel(data2, grid, threads=threads)
    v2 = reconstruct_potential(kernel)
    resid = float(np.max(np.abs(v2.values - potential.values)) / np.max(np.abs(potential.values)))
    return {"check_name": "roundtrip", "parameters": {"L": 12.0, "n": grid.n},
            "lhs": resid, "rhs": 0.0, "residual": resid,
            "pass": bool(resid <= cfg.checks.tolerances["roundtrip"])}


_CHECKS = {
    "trace": _check_trace,
    "unitarity": _check_unitarity,
    "inverse-kernel": _check_inverse_kernel,
    "orthogonality": _check_orthogonality,
    "roundtrip": _check_roundtrip,
}


def cmd_check(cfg, args):
    data = _load_data(cfg.io.input) if cfg.io.input else None
    threads = _resolve_threads(args.threads)
    names = list(_CHECKS) if args.which == "all" else [args.which]
    outcomes = [_CHECKS[name](cfg, data, threads) for name in names]
    outdir = Path(cfg.io.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(outdir / "report.json", {"checks": outcomes}, cfg.digest())
    for oc in outcomes:
        status = "pass" if oc["pass"] else "FAIL"
        print(f"{oc['check_name']}: {status} (residual {oc['residual']:.3e})")
    if not all(oc["pass"] for oc in outcomes):
        print("some checks failed; see report.json", file=sys.stderr)
        return 3
    return 0


def cmd_soliton(cfg, args):
    kappas = [float(v) for v in args.kappa]
    cs = [float(v) for v in args.c]
    if len(kappas) != len(cs):
        raise DataValidationError("need as many --c values as --kappa values")
    states = tuple(BoundState(k, c) for k, c in zip(kappas, cs))
    if any(np.diff(kappas) >= 0):
        raise DataValidationError("kappas must be strictly decreasing")
    grid = cfg.spatial_grid()
    potential = reflectionless_potential(states, grid)
    kgrid = cfg.momentum_grid()
    refl = ReflectionAmplitude(grid=kgrid, values=np.zeros(kgrid.n, dtype=complex))
    data = ScatteringData(reflection=refl, bound_states=states)
    outdir = Path(cfg.io.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    h = cfg.digest()
    write_csv(outdir / "potential.csv", ["x", "v"],
              np.column_stack([grid.points, potential.values]), h)
    (outdir / "soliton_data.json").write_text(data_to_json(data) + "\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="marchenko-kit",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--output-dir", help="output directory override")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap worker threads (default: machine parallelism; "
                             "env MARCHENKO_KIT_THREADS as fallback)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forward", help="potential file -> scattering data")
    p.add_argument("potential")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("invert", help="scattering data -> potential, kernel, wavefunctions")
    p.add_argument("data")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("tmap", help="transmission amplitude from reflection data")
    p.add_argument("data")
    p.set_defaults(func=cmd_tmap)

    p = sub.add_parser("deriv", help="functional-derivative fields")
    p.add_argument("data")
    p.add_argument("--which", required=True, choices=["dv-dr", "dpsi-dr", "dr-dv"])
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--q", type=float, default=None)
    p.set_defaults(func=cmd_deriv)

    p = sub.add_parser("check", help="consistency checks, report.json + exit code")
    p.add_argument("--which", default="all",
                   choices=[*_CHECKS.keys(), "all"])
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("soliton", help="reflectionless potential from kappa/c lists")
    p.add_argument("--kappa", action="append", required=True)
    p.add_argument("--c", action="append", required=True)
    p.set_defaults(func=cmd_soliton)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        if args.output_dir:
            cfg.io.output_dir = args.output_dir
        if args.threads is not None:
            cfg.threads = args.threads
        return args.func(cfg, args)
    except (DataValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NearSingularError as exc:
        print(f"numerical failure: {exc} (condition estimate "
              f"{exc.condition_estimate:.3e})", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
