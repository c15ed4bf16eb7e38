"""Batch command-line front end: graph configs in, JSON on stdout, CSV
artifacts plus a reproducibility manifest in the output directory.

Exit codes: 0 success; 1 domain/feasibility/model errors; 2 solver
non-convergence; 64 usage errors (argparse-level problems).
"""
from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, evolution, mesh, minimizers, spectrum, starwaves
from .errors import (
    AssumptionError,
    BallExitError,
    BlowUpError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    FeasibilityError,
    SchemaError,
)
from .graphs import parse_graph

SCHEMA_VERSION = 1
_DOMAIN_ERRORS = (
    SchemaError,
    AssumptionError,
    ConfigurationError,
    DomainError,
    FeasibilityError,
    BallExitError,
    BlowUpError,
)


class _Parser(argparse.ArgumentParser):
    """argparse with the documented 64 exit code for usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(64)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=float))


def _csv_cell(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_csv_cell(x) for x in row])


def _write_manifest(out: Path, command: str, params: dict, config_hash: str, seed) -> None:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "parameters": params,
        "graph_config_sha256": config_hash,
        "tool_version": __version__,
        "seed": seed,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _prepare(args, command: str, params: dict, graph_path=None):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if graph_path is not None:
        text = Path(graph_path).read_text()
        g = parse_graph(text)
        config_hash = hashlib.sha256(text.encode()).hexdigest()
    else:
        g = None
        config_hash = hashlib.sha256(
            json.dumps(params, sort_keys=True, default=float).encode()
        ).hexdigest()
    _write_manifest(out, command, params, config_hash, getattr(args, "seed", None))
    return out, g


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_spectrum(args) -> int:
    params = {"graph": args.graph, "h": args.h, "tol": args.tol}
    out, g = _prepare(args, "spectrum", params, args.graph)
    d = mesh.build(g, args.h)
    pair = spectrum.ground_state(d, tol=args.tol)
    report = spectrum.spectral_gap_report(pair)
    if args.dump_psi0:
        mesh.save_function_csv(pair.psi0, out / args.dump_psi0)
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "lambda0": pair.lambda0,
            "gap": pair.gap,
            "residual": pair.residual,
            "iterations": pair.iterations,
            "isolation_certified": report["isolation_certified"],
            "n_nodes": d.n_nodes,
        }
    )
    return 0


def _result_payload(res) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "energy": res.energy,
        "omega": res.omega,
        "lambda0": res.lambda0,
        "c": res.c,
        "r": res.r,
        "g_norm_sq": res.g_norm_sq,
        "iterations": res.iterations,
        "gradient_residual": res.gradient_residual,
        "diagnostics": res.diagnostics,
    }


def _cmd_minimize(args) -> int:
    params = {
        "graph": args.graph, "p": args.p, "c": args.c, "r": args.r, "h": args.h,
        "tol": args.tol, "tau": args.tau, "max_iter": args.max_iter, "init": args.init,
    }
    out, g = _prepare(args, "minimize", params, args.graph)
    d = mesh.build(g, args.h)
    init = mesh.load_function_csv(d, args.init) if args.init else None
    res = minimizers.minimize(
        d, args.p, args.c, args.r,
        tau=args.tau, tol=args.tol, max_iter=args.max_iter, init=init,
    )
    mesh.save_function_csv(res.phi, out / "minimizer.csv")
    _emit(_result_payload(res))
    return 0


def _cmd_closed_form(args) -> int:
    params = {
        "N": args.N, "gamma": args.gamma, "p": args.p, "omega": args.omega,
        "j": args.j, "h": args.h, "length": args.length,
    }
    out, _ = _prepare(args, "closed-form", params)
    from .graphs import StarGraphSpec, make_star

    wave = starwaves.ClosedFormWave(args.N, args.gamma, args.p, args.omega, args.j)
    d = mesh.build(make_star(StarGraphSpec(args.N, args.gamma, args.length)), args.h)
    u = starwaves.evaluate_wave(wave, d)
    mesh.save_function_csv(u, out / "profile.csv")
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "a_j": wave.a_j,
            "shift": wave.shift,
            "mass": mesh.mass(u),
            "energy": minimizers.energy(u, args.p).total,
            "omega": args.omega,
            "threshold": starwaves.ClosedFormWave.threshold(args.N, args.gamma, args.j),
        }
    )
    return 0


def _cmd_mass_curve(args) -> int:
    lo, hi, n = args.omega_range
    params = {"N": args.N, "gamma": args.gamma, "p": args.p, "omega_range": [lo, hi, n]}
    out, _ = _prepare(args, "mass-curve", params)
    omegas = np.geomspace(lo, hi, int(n))
    rows = [(w, starwaves.mass_curve(args.N, args.gamma, args.p, float(w))) for w in omegas]
    _write_csv(out / "mass_curve.csv", ["omega", "mass"], rows)
    window = starwaves.monotone_window(args.N, args.gamma, args.p)
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "n_points": int(n),
            "monotone_window": {"threshold": window[0], "omega_hi": window[1]},
        }
    )
    return 0


def _cmd_evolve(args) -> int:
    params = {
        "graph": args.graph, "p": args.p, "h": args.h, "dt": args.dt, "T": args.T,
        "init": args.init, "sample_every": args.sample_every,
    }
    out, g = _prepare(args, "evolve", params, args.graph)
    d = mesh.build(g, args.h)
    u0 = mesh.load_function_csv(d, args.init)
    _, trace = evolution.evolve(d, args.p, u0, args.dt, args.T, sample_every=args.sample_every)
    _write_csv(
        out / "trace.csv",
        ["t", "mass", "energy", "sup_norm"],
        zip(trace.times, trace.mass, trace.energy, trace.sup),
    )
    m = np.array(trace.mass)
    e = np.array(trace.energy)
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "t_final": trace.times[-1],
            "mass_drift_rel": float(np.max(np.abs(m - m[0])) / m[0]),
            "energy_drift_rel": float(np.max(np.abs(e - e[0])) / max(abs(e[0]), 1e-30)),
            "n_samples": len(trace.times),
        }
    )
    return 0


def _cmd_stability(args) -> int:
    params = {
        "graph": args.graph, "p": args.p, "h": args.h, "dt": args.dt, "T": args.T,
        "delta": args.delta, "ref": args.ref, "mode": args.mode,
    }
    out, g = _prepare(args, "stability", params, args.graph)
    d = mesh.build(g, args.h)
    phi_ref = mesh.load_function_csv(d, args.ref)
    bump = None
    if args.mode == "eigenfunction-bump":
        bump = spectrum.ground_state(d).psi0
    trace = evolution.stability_experiment(
        d, args.p, phi_ref, delta=args.delta, t_final=args.T, dt=args.dt,
        mode=args.mode, bump=bump, seed=args.seed,
    )
    _write_csv(
        out / "stability.csv",
        ["t", "orbit_distance", "mass_drift", "energy_drift"],
        zip(trace.times, trace.orbit_distance, trace.mass_drift, trace.energy_drift),
    )
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "sup_orbit_distance": float(np.max(trace.orbit_distance)),
            "ref_h1_norm": math.sqrt(mesh.h1_norm_sq(phi_ref)),
            "delta": args.delta,
            "t_final": trace.times[-1],
        }
    )
    return 0


def _cmd_validate(args) -> int:
    params = {"graph": args.graph, "p": args.p, "h": args.h}
    out, g = _prepare(args, "validate", params, args.graph)
    d = mesh.build(g, args.h)
    pair = spectrum.ground_state(d)
    lam0 = pair.lambda0
    checks = []

    def check(name, value, threshold, ok):
        checks.append(
            {"name": name, "value": float(value), "threshold": float(threshold), "pass": bool(ok)}
        )

    check("lambda0_positive", lam0, 0.0, lam0 > 0)
    check("psi0_strictly_positive", float(np.min(pair.psi0.values.real)), 0.0,
          float(np.min(pair.psi0.values.real)) > 0)
    m_err = abs(mesh.mass(pair.psi0) - 1.0)
    check("psi0_unit_mass", m_err, 1e-10, m_err <= 1e-10)
    ray_err = abs(mesh.quadratic_form(pair.psi0) + lam0)
    check("rayleigh_identity", ray_err, 10 * pair.tol, ray_err <= 10 * pair.tol)

    zero_pot = all(
        float(np.max(np.abs(e.potential.values_at(eg.x)))) == 0.0
        for e, eg in zip(g.edges, d.edge_grids)
    )
    if g.is_star() and zero_pot:
        n = len(g.edges)
        gamma = g.vertices[0].alpha
        lam_exact = gamma**2 / n**2
        tol_lam = 100.0 * d.h_max**2 * lam_exact
        check("lambda0_star_value", abs(lam0 - lam_exact), tol_lam,
              abs(lam0 - lam_exact) <= tol_lam)
        omega = 2.25 * lam_exact
        wave = starwaves.ClosedFormWave(n, gamma, args.p, omega, 0)

        def residual(dd):
            u = starwaves.evaluate_wave(wave, dd)
            v = u.values.real
            rr = dd.A @ v + omega * dd.m * v - dd.m * np.abs(v) ** (args.p - 1) * v
            return float(np.max(np.abs(rr)) / np.max(np.abs(v)))

        r1 = residual(d)
        r2 = residual(mesh.build(g, args.h / 2))
        check("stationarity_order_h2", r1 / r2, 3.0, r1 / r2 >= 3.0)
        curve_mass = starwaves.mass_curve(n, gamma, args.p, omega)
        mass_err = abs(mesh.mass(starwaves.evaluate_wave(wave, d)) - curve_mass)
        # trapezoid quadrature error scales like h^2; 1e-4 floor at fine h
        tol_mass = max(1e-4, 0.15 * d.h_max**2 * curve_mass)
        check("mass_curve_consistency", mass_err, tol_mass, mass_err <= tol_mass)
        if args.p == 5:
            h0_err = abs(starwaves.h_integral(0.0, 5.0) - math.pi / 2)
            check("h_integral_identity", h0_err, 1e-10, h0_err <= 1e-10)

    all_pass = all(c["pass"] for c in checks)
    width = max(len(c["name"]) for c in checks)
    for c in checks:
        sys.stderr.write(
            f"{c['name']:<{width}}  value={c['value']:< .3e}  "
            f"threshold={c['threshold']:< .3e}  {'PASS' if c['pass'] else 'FAIL'}\n"
        )
    _emit({"schema_version": SCHEMA_VERSION, "checks": checks, "all_pass": all_pass})
    return 0 if all_pass else 1


_SWEEP_CACHE: dict = {}


def _sweep_point(task):
    """Run one minimize for the sweep; per-process discretization cache."""
    graph_text, h, p, c, r, tau, tol, max_iter = task
    key = (graph_text, h)
    if key not in _SWEEP_CACHE:
        g = parse_graph(graph_text)
        d = mesh.build(g, h)
        _SWEEP_CACHE[key] = (d, spectrum.ground_state(d))
    d, ground = _SWEEP_CACHE[key]
    try:
        res = minimizers.minimize(
            d, p, c, r, tau=tau, tol=tol, max_iter=max_iter, ground=ground
        )
        structure_ok = all(
            res.diagnostics[k]
            for k in ("phase_constant_ok", "positivity_ok",
                      "energy_below_linear_ok", "ball_interior_ok")
        )
        return {
            "c": c, "omega": res.omega, "energy": res.energy,
            "g_norm_sq": res.g_norm_sq, "iterations": res.iterations,
            "structure_ok": str(structure_ok), "status": "ok",
        }
    except (FeasibilityError, BallExitError, DomainError) as exc:
        return {"c": c, "omega": float("nan"), "energy": float("nan"),
                "g_norm_sq": float("nan"), "iterations": 0,
                "structure_ok": "False", "status": type(exc).__name__}
    except ConvergenceError:
        return {"c": c, "omega": float("nan"), "energy": float("nan"),
                "g_norm_sq": float("nan"), "iterations": 0,
                "structure_ok": "False", "status": "ConvergenceError"}


def _cmd_sweep(args) -> int:
    lo, hi, n = args.c_grid
    if int(n) < 1:
        raise SchemaError("sweep grid must contain at least one point")
    params = {
        "graph": args.graph, "p": args.p, "c_grid": [lo, hi, n], "r": args.r,
        "h": args.h, "tau": args.tau, "tol": args.tol, "jobs": args.jobs,
    }
    out, g = _prepare(args, "sweep", params, args.graph)
    graph_text = Path(args.graph).read_text()
    cs = np.geomspace(lo, hi, int(n))
    tasks = [
        (graph_text, args.h, args.p, float(c), args.r, args.tau, args.tol, args.max_iter)
        for c in cs
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    _write_csv(
        out / "sweep.csv",
        ["c", "omega", "energy", "g_norm_sq", "iterations", "structure_ok", "status"],
        (
            [r["c"], r["omega"], r["energy"], r["g_norm_sq"], r["iterations"],
             r["structure_ok"], r["status"]]
            for r in results
        ),
    )
    lam0 = spectrum.ground_state(mesh.build(g, args.h)).lambda0
    n_ok = sum(1 for r in results if r["status"] == "ok")
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "lambda0": lam0,
            "n_points": len(results),
            "n_ok": n_ok,
            "n_failed": len(results) - n_ok,
        }
    )
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _range_triplet(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected lo:hi:n")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if not (lo > 0 and hi > lo and n >= 1):
        raise argparse.ArgumentTypeError("need 0 < lo < hi and n >= 1")
    return lo, hi, n


def build_parser() -> _Parser:
    parser = _Parser(prog="graphwave", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, graph=True):
        if graph:
            sp.add_argument("graph", help="graph config JSON file")
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--seed", type=int, default=0, help="RNG seed for perturbations")

    sp = sub.add_parser("spectrum", help="linear ground state and spectral gap")
    common(sp)
    sp.add_argument("--h", type=float, default=0.01)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--dump-psi0", default=None, metavar="FILE.csv")
    sp.set_defaults(func=_cmd_spectrum)

    sp = sub.add_parser("minimize", help="constrained energy minimizer on the mass sphere")
    common(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=0.01)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--tau", type=float, default=None)
    sp.add_argument("--max-iter", type=int, default=50000)
    sp.add_argument("--init", default=None, metavar="FILE.csv")
    sp.set_defaults(func=_cmd_minimize)

    sp = sub.add_parser("closed-form", help="exact star-graph standing wave profile")
    common(sp, graph=False)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--omega", type=float, required=True)
    sp.add_argument("--j", type=int, default=0)
    sp.add_argument("--h", type=float, default=0.01)
    sp.add_argument("--length", type=float, default=40.0)
    sp.set_defaults(func=_cmd_closed_form)

    sp = sub.add_parser("mass-curve", help="mass of the ground branch vs omega")
    common(sp, graph=False)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--omega-range", type=_range_triplet, required=True, metavar="lo:hi:n")
    sp.set_defaults(func=_cmd_mass_curve)

    sp = sub.add_parser("evolve", help="time-integrate the focusing flow")
    common(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--h", type=float, default=0.02)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--init", required=True, metavar="FILE.csv")
    sp.add_argument("--sample-every", type=int, default=10)
    sp.set_defaults(func=_cmd_evolve)

    sp = sub.add_parser("stability", help="orbital stability experiment")
    common(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--h", type=float, default=0.02)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--ref", required=True, metavar="FILE.csv")
    sp.add_argument("--mode", choices=["eigenfunction-bump", "multiplicative-noise"],
                    default="eigenfunction-bump")
    sp.set_defaults(func=_cmd_stability)

    sp = sub.add_parser("validate", help="run the oracle checks and print a pass/fail table")
    common(sp)
    sp.add_argument("--p", type=float, default=5.0)
    sp.add_argument("--h", type=float, default=0.01)
    sp.set_defaults(func=_cmd_validate)

    sp = sub.add_parser("sweep", help="minimize over a geometric mass grid")
    common(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--c-grid", type=_range_triplet, required=True, metavar="lo:hi:n")
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=0.01)
    sp.add_argument("--tau", type=float, default=None)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=50000)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=_cmd_sweep)

    return parser


def dispatch(argv) -> int:
    """Parse argv and run the subcommand, mapping errors to exit codes."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "dt", "unset") is None:
        args.dt = args.h / 2.0
    try:
        return args.func(args)
    except _DOMAIN_ERRORS as exc:
        _emit({"schema_version": SCHEMA_VERSION, "error": str(exc),
               "error_type": type(exc).__name__})
        return 1
    except ConvergenceError as exc:
        _emit({"schema_version": SCHEMA_VERSION, "error": str(exc),
               "error_type": "ConvergenceError",
               "residual": getattr(exc, "residual", None)})
        return 2


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
