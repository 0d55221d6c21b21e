"""Command-line interface: ``frachyp {ml,classify,solve,kernel,reduce,verify}``.

System files are JSON.  Complex numbers are ``[re, im]`` pairs (plain reals
are accepted too) and matrices are row-major nested lists::

    {"alpha": 0.6,
     "symmetric": {"A": [[[0, 1], [1, 0]]], "B": [[0, 0], [0, 0]]},
     "grid": {"n": 1, "half_width": 8.0, "points": 64},
     "horizon": 1.0,
     "sampling": {"seed": 0}}

or ``"P0"``/``"Pnu"`` in place of ``"symmetric"``.  Exit status is 0 on
success, 1 for invalid input and 2 when a numerical certificate fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hyperbolicity import SamplePlan, Verdict, verify_fractional_hyperbolic
from .reduction import dw_initial_state, reduce_diffusion_wave
from .resolvent import DEFAULT_HORIZON, norm_bound_samples, verify_norm_bound
from .special_functions import MLParams, eval_E_alpha_deriv, eval_E_gen
from .spectral_solver import (
    DecayFitError,
    GridField,
    GridSpec,
    decay_fit,
    exterior_mass_ratio,
    green_kernel,
    solve_cauchy,
)
from .symbol_algebra import MatrixPencil, pencil_from_symmetric

log = logging.getLogger("frachyp")

EXIT_OK, EXIT_DOMAIN, EXIT_CERTIFICATE = 0, 1, 2
PRECISION = 12


class SpecFileError(ValueError):
    pass


class CertificateFailure(Exception):
    pass


# {{{ system files

@dataclass
class SystemSpec:
    alpha: float
    pencil: MatrixPencil
    symmetric: dict | None = None
    beta: float | None = None
    grid: GridSpec | None = None
    horizon: float = DEFAULT_HORIZON
    sampling: SamplePlan | None = None


def _complex(value, where: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    raise SpecFileError(f"{where}: expected a number or an [re, im] pair, got {value!r}")


def _matrix(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise SpecFileError(f"{where}: expected a non-empty list of rows")
    size = len(value)
    rows = []
    for i, row in enumerate(value):
        if len(row) != size:
            raise SpecFileError(f"{where}[{i}]: row has {len(row)} entries, expected {size}")
        rows.append([_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows)


def _number(doc, key, where, default=None, kind=float):
    if key not in doc:
        if default is None:
            raise SpecFileError(f"{where}: missing field {key!r}")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecFileError(f"{where}.{key}: expected a number, got {v!r}")
    if kind is int and int(v) != v:
        raise SpecFileError(f"{where}.{key}: expected an integer, got {v!r}")
    return kind(v)


def parse_system(doc: dict) -> SystemSpec:
    if not isinstance(doc, dict):
        raise SpecFileError("top level must be a JSON object")
    alpha = _number(doc, "alpha", "spec")
    has_direct = "P0" in doc or "Pnu" in doc
    has_sym = "symmetric" in doc
    if has_direct == has_sym:
        raise SpecFileError("spec: give exactly one of {P0, Pnu} or symmetric")
    symmetric = None
    try:
        if has_sym:
            sym = doc["symmetric"]
            if not isinstance(sym, dict) or "A" not in sym or "B" not in sym:
                raise SpecFileError("symmetric: needs fields A and B")
            if not isinstance(sym["A"], list) or not sym["A"]:
                raise SpecFileError("symmetric.A: expected a non-empty list of matrices")
            A = [_matrix(a, f"symmetric.A[{k}]") for k, a in enumerate(sym["A"])]
            B = _matrix(sym["B"], "symmetric.B")
            pencil = pencil_from_symmetric(A, B)
            symmetric = {"A": A, "B": B}
        else:
            if "P0" not in doc or "Pnu" not in doc:
                raise SpecFileError("spec: direct form needs both P0 and Pnu")
            if not isinstance(doc["Pnu"], list) or not doc["Pnu"]:
                raise SpecFileError("Pnu: expected a non-empty list of matrices")
            pencil = MatrixPencil(
                _matrix(doc["P0"], "P0"),
                tuple(_matrix(P, f"Pnu[{k}]") for k, P in enumerate(doc["Pnu"])),
            )
    except SpecFileError:
        raise
    except ValueError as exc:
        raise SpecFileError(f"spec: {exc}") from None

    grid = None
    if "grid" in doc:
        g = doc["grid"]
        if not isinstance(g, dict):
            raise SpecFileError("grid: expected an object")
        eps = g.get("mollifier_width")
        grid = GridSpec(
            n=_number(g, "n", "grid", pencil.n, int),
            half_width=_number(g, "half_width", "grid"),
            points=_number(g, "points", "grid", kind=int),
            mollifier_width=None if eps is None else _number(g, "mollifier_width", "grid"),
        )
    sampling = None
    if "sampling" in doc:
        sp = doc["sampling"]
        if not isinstance(sp, dict):
            raise SpecFileError("sampling: expected an object")
        unknown = set(sp) - {"seed", "directions", "sigma_max", "tau_max"}
        if unknown:
            raise SpecFileError(f"sampling: unknown fields {sorted(unknown)}")
        base = SamplePlan()
        sampling = SamplePlan(
            sigma_radii=tuple(np.logspace(0, math.log10(_number(sp, "sigma_max", "sampling", 1e3)), 13)),
            tau_radii=(0.0,) + tuple(np.logspace(0, math.log10(_number(sp, "tau_max", "sampling", 1e2)), 10)),
            directions=_number(sp, "directions", "sampling", base.directions, int),
            seed=_number(sp, "seed", "sampling", 0, int),
        )
    beta = _number(doc, "beta", "spec") if "beta" in doc else None
    horizon = _number(doc, "horizon", "spec", DEFAULT_HORIZON)
    return SystemSpec(alpha, pencil, symmetric, beta, grid, horizon, sampling)


def load_system(path) -> SystemSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecFileError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_system(doc)


def _encode_complex(z: complex) -> list:
    return [_round(z.real), _round(z.imag)]


def _encode_matrix(M) -> list:
    return [[_encode_complex(complex(v)) for v in row] for row in np.asarray(M)]


def system_document(alpha: float, A, B, beta: float | None = None, grid: GridSpec | None = None) -> dict:
    doc = {"alpha": _round(alpha)}
    if beta is not None:
        doc["beta"] = _round(beta)
    doc["symmetric"] = {"A": [_encode_matrix(a) for a in A], "B": _encode_matrix(B)}
    if grid is not None:
        doc["grid"] = {"n": grid.n, "half_width": grid.half_width, "points": grid.points}
        if grid.mollifier_width is not None:
            doc["grid"]["mollifier_width"] = grid.mollifier_width
    return doc

# }}}


# {{{ output

def _round(x):
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{PRECISION}e}")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode_complex(complex(obj))
    if isinstance(obj, Verdict):
        return obj.value
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _tag(command: str, alpha=None, t=None) -> str:
    parts = [command]
    if alpha is not None:
        parts.append(f"alpha{alpha:g}")
    if t is not None:
        parts.append(f"t{t:g}")
    return "_".join(parts)


def write_json(out: Path, name: str, doc) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.json"
    path.write_text(json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n")
    return path


def write_field_csv(out: Path, name: str, field: GridField, labels: list[str]) -> Path:
    """Columns: grid indices, coordinates, then ``re_<c>, im_<c>`` per component."""
    out.mkdir(parents=True, exist_ok=True)
    spec = field.spec
    idx = np.indices(spec.shape).reshape(spec.n, -1)
    coords = np.stack([c.ravel() for c in spec.coords()])
    comps = field.components.reshape(len(labels), -1)
    axes = "xy"[: spec.n]
    header = [f"i{a}" for a in axes] + list(axes)
    for lab in labels:
        header += [f"re_{lab}", f"im_{lab}"]
    cols = [idx, coords]
    for c in comps:
        cols.append(np.stack([c.real, c.imag]))
    data = np.concatenate(cols).T
    fmt = ["%d"] * spec.n + [f"%.{PRECISION}e"] * (data.shape[1] - spec.n)
    path = out / f"{name}.csv"
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt=fmt)
    return path


def _grid_meta(spec: GridSpec) -> dict:
    return {"n": spec.n, "half_width": spec.half_width, "points": spec.points,
            "mollifier_width": spec.epsilon}

# }}}


# {{{ commands

def _resolve_grid(args, system: SystemSpec) -> GridSpec:
    base = system.grid or GridSpec(system.pencil.n, 8.0, 128)
    return base.with_(
        points=args.grid_points or base.points,
        half_width=args.box or base.half_width,
        mollifier_width=args.mollifier if args.mollifier is not None else base.mollifier_width,
    )


def _alpha(args, system: SystemSpec) -> float:
    return args.alpha if args.alpha is not None else system.alpha


def cmd_ml(args) -> int:
    params = MLParams(args.alpha, args.gamma, args.rho)
    texts = list(args.z)
    if args.re is not None:
        texts.append(repr(complex(args.re, args.im)))
    if not texts:
        raise ValueError("no argument given; pass --re/--im or positional values")
    values = []
    for text in texts:
        try:
            z = complex(text.replace(" ", ""))
        except ValueError:
            raise ValueError(f"cannot parse {text!r} as a complex number") from None
        if args.deriv:
            if args.gamma != 1 or args.rho != 1:
                raise ValueError("--deriv applies to the one-parameter function only")
            v = complex(eval_E_alpha_deriv(args.alpha, args.deriv, z, rtol=args.tol))
        else:
            v = complex(eval_E_gen(params, z, rtol=args.tol))
        values.append((z, v))
        print(f"{z.real:.15g} {z.imag:.15g} {v.real:.15g} {v.imag:.15g}")
    if args.out:
        write_json(Path(args.out), _tag("ml", args.alpha), {
            "alpha": args.alpha, "gamma": args.gamma, "rho": args.rho, "derivative": args.deriv,
            "values": [{"z": z, "value": v} for z, v in values],
        })
    return EXIT_OK


def cmd_classify(args) -> int:
    system = load_system(args.spec)
    alpha = _alpha(args, system)
    plan = system.sampling or SamplePlan()
    if args.seed is not None:
        plan = SamplePlan(plan.sigma_radii, plan.tau_radii, plan.directions,
                          plan.ray_angles, plan.ray_radii, args.seed)
    t = args.t if args.t is not None else system.horizon
    report = verify_fractional_hyperbolic(system.pencil, alpha, plan, exponent_t=t)
    out = Path(args.out)
    name = _tag("classify", alpha)
    write_json(out, name, {
        "alpha": alpha, "verdict": report.verdict, "fitted_C": report.fitted_C,
        "fitted_a": report.fitted_a, "fitted_b": report.fitted_b,
        "exponent_q": report.exponent_q, "exponent_t": t, "seed": plan.seed,
        "diagnostics": report.diagnostics,
    })
    rows = [np.concatenate([s.sigma, s.tau, [lam]]) for s, lam in report.samples]
    n = system.pencil.n
    header = [f"sigma{k}" for k in range(n)] + [f"tau{k}" for k in range(n)] + ["Lambda"]
    np.savetxt(out / f"{name}_samples.csv", np.array(rows), delimiter=",",
               header=",".join(header), comments="", fmt=f"%.{PRECISION}e")
    print(report.verdict.value)
    if args.expect == "hyperbolic" and report.verdict is not Verdict.FRACTIONAL_HYPERBOLIC:
        raise CertificateFailure(f"expected fractional_hyperbolic, got {report.verdict.value}")
    if args.expect == "rejected" and report.verdict is not Verdict.REJECTED:
        raise CertificateFailure(f"expected rejected, got {report.verdict.value}")
    return EXIT_OK


def _initial_data(args, system: SystemSpec, spec: GridSpec) -> GridField:
    r2 = sum(c**2 for c in spec.coords())
    gauss = GridField(spec, np.exp(-r2)[None])
    if args.initial == "dw":
        if system.pencil.m != spec.n + 1:
            raise ValueError("--initial dw needs a reduced diffusion-wave system")
        return dw_initial_state(gauss)
    return GridField(spec, np.repeat(gauss.components, system.pencil.m, axis=0))


def cmd_solve(args) -> int:
    system = load_system(args.spec)
    alpha = _alpha(args, system)
    spec = _resolve_grid(args, system)
    U0 = _initial_data(args, system, spec)
    U = solve_cauchy(system.pencil, alpha, args.t, U0, horizon=system.horizon)
    out = Path(args.out)
    name = _tag("solve", alpha, args.t)
    write_field_csv(out, name, U, [str(k) for k in range(system.pencil.m)])
    mass = exterior_mass_ratio(U)
    write_json(out, name, {
        "alpha": alpha, "t": args.t, "grid": _grid_meta(spec), "initial": args.initial,
        "l2_norm": U.l2_norm(), "initial_l2_norm": U0.l2_norm(), "exterior_mass_ratio": mass,
    })
    if mass > 1e-8:
        log.warning("exterior mass ratio %.3g exceeds 1e-8; enlarge the box", mass)
    return EXIT_OK


def cmd_kernel(args) -> int:
    system = load_system(args.spec)
    alpha = _alpha(args, system)
    spec = _resolve_grid(args, system)
    G = green_kernel(system.pencil, alpha, args.t, spec, horizon=system.horizon)
    m = system.pencil.m
    out = Path(args.out)
    name = _tag("kernel", alpha, args.t)
    write_field_csv(out, name, G, [f"{i}{j}" for i in range(m) for j in range(m)])
    doc = {"alpha": alpha, "t": args.t, "grid": _grid_meta(spec)}
    status = EXIT_OK
    try:
        fit = decay_fit(G, alpha, args.t)
        doc["decay_fit"] = {"gamma1": fit.gamma1, "C": fit.C, "r_squared": fit.r_squared,
                            "cone_mass_ratio": fit.cone_mass_ratio, "z_max": fit.z_max,
                            "points": fit.points}
        if not fit.gamma1 > 0:
            status = EXIT_CERTIFICATE
    except DecayFitError as exc:
        doc["decay_fit"] = {"error": str(exc)}
        status = EXIT_CERTIFICATE
    write_json(out, name, doc)
    return status


def cmd_reduce(args) -> int:
    red = reduce_diffusion_wave(args.beta, args.n)
    doc = system_document(red.alpha, red.A, np.zeros((args.n + 1,) * 2), beta=red.beta)
    path = write_json(Path(args.out), _tag("reduce", red.alpha), doc)
    print(path)
    return EXIT_OK


def cmd_verify(args) -> int:
    system = load_system(args.spec)
    alpha = _alpha(args, system)
    p = system.pencil
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    times = [t for t in (0.1, 0.5, 1.0) if t <= system.horizon] or [system.horizon]
    design = norm_bound_samples(p, alpha, rng, times, rays=args.rays, per_ray=args.per_ray)
    samples = design.samples
    report = verify_norm_bound(p, alpha, design, cross_check=args.cross_check)
    doc = {"alpha": alpha, "samples": len(samples), "C": report.C, "holds": report.holds,
           "worst_heldout_ratio": report.worst_test_ratio}
    ok = report.holds
    if args.oracle:
        from .oracle import l1_evolve
        from .resolvent import matrix_ml
        from .symbol_algebra import eval_pencil

        # the L1 scheme resolves only moderately oscillatory modes
        moderate = [(t, s) for t, s in samples
                    if t**alpha * np.linalg.norm(eval_pencil(p, s), 2) <= 3.0]
        worst = 0.0
        for t, s in moderate[: args.oracle_samples]:
            P = eval_pencil(p, s)
            y0 = np.ones(p.m, dtype=complex)
            exact = matrix_ml(alpha, t, P) @ y0
            approx = l1_evolve(P, alpha, t, args.steps, y0)[-1]
            worst = max(worst, float(np.linalg.norm(approx - exact) / max(np.linalg.norm(exact), 1e-300)))
        doc["oracle"] = {"steps": args.steps, "max_relative_error": worst, "tolerance": args.tol,
                         "compared": min(len(moderate), args.oracle_samples)}
        ok = ok and worst <= args.tol
    write_json(Path(args.out), _tag("verify", alpha), doc)
    print("pass" if ok else "fail")
    if not ok:
        raise CertificateFailure("norm bound or oracle comparison failed")
    return EXIT_OK

# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frachyp", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ml", help="evaluate Mittag-Leffler functions")
    p.add_argument("z", nargs="*", help="arguments, e.g. -2.5 or 1+2j")
    p.add_argument("--re", type=float, help="real part of a single argument")
    p.add_argument("--im", type=float, default=0.0, help="imaginary part of a single argument")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--deriv", type=int, default=0, help="derivative order of E_alpha")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ml)

    def system_parser(name, help_, func, grid=False, t_required=False):
        p = sub.add_parser(name, help=help_)
        p.add_argument("spec", help="system file (JSON)")
        p.add_argument("--alpha", type=float, help="override the order in the system file")
        p.add_argument("--out", default=".")
        p.add_argument("--seed", type=int)
        p.add_argument("--t", type=float, required=t_required)
        if grid:
            p.add_argument("--grid-points", type=int)
            p.add_argument("--box", type=float, help="half-width L of the periodic box")
            p.add_argument("--mollifier", type=float)
        p.set_defaults(func=func)
        return p

    p = system_parser("classify", "decide fractional hyperbolicity", cmd_classify)
    p.add_argument("--expect", choices=["hyperbolic", "rejected"])
    p = system_parser("solve", "solve the Cauchy problem on a periodic grid", cmd_solve,
                      grid=True, t_required=True)
    p.add_argument("--initial", choices=["gaussian", "dw"], default="gaussian")
    system_parser("kernel", "sample the mollified fundamental solution", cmd_kernel,
                  grid=True, t_required=True)

    p = sub.add_parser("reduce", help="first-order system for the diffusion-wave equation")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_reduce)

    p = system_parser("verify", "check the resolvent norm bound", cmd_verify)
    p.add_argument("--rays", type=int, default=2, help="random frequency rays per time")
    p.add_argument("--per-ray", type=int, default=257, help="log-spaced radii per ray")
    p.add_argument("--cross-check", action="store_true",
                   help="evaluate both matrix-function routes at every sample")
    p.add_argument("--oracle", action="store_true", help="also compare with L1 time stepping")
    p.add_argument("--oracle-samples", type=int, default=5)
    p.add_argument("--steps", type=int, default=2048)
    p.add_argument("--tol", type=float, default=1e-2)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CertificateFailure as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE


def run(argv) -> int:
    return main(list(argv))


if __name__ == "__main__":
    sys.exit(main())
