"""
Command-line runner producing plot-ready CSV files.

Every run writes ``<output>`` plus ``<output stem>.manifest.json`` holding
the full configuration, package version and wall time.  Exit codes: 0 ok,
2 configuration error, 3 convergence failure; errors are reported as JSON
on stderr.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (ExcitationVector, photon_density, revival_time, spontaneous_emission_run)
from .model import BathKind, ConfigError, ModelConfig, build_discrete_bath
from .scattering import run_scattering
from .static_polaron import (ConvergenceError, groundstate_polarization,
                             solve_single_qubit_fixed_point, solve_variational)
from .two_emitter import Regime, pair_analytics

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 2, 3


def parse_range(text, flag="--alpha"):
    """``"0.1"`` or ``"start:stop:steps"`` (inclusive, ``steps >= 1`` points)."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
            if steps < 1:
                raise ConfigError("sweep needs at least one step")
            return [float(x) for x in np.linspace(start, stop, steps)]
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse {flag} {text!r}") from exc
    raise ConfigError(f"{flag} must be a value or start:stop:steps, got {text!r}")


def worker_count():
    env = os.environ.get("POLARON_THREADS")
    if env is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(env)
    except ValueError as exc:
        raise ConfigError(f"POLARON_THREADS must be an integer, got {env!r}") from exc
    if n < 1:
        raise ConfigError("POLARON_THREADS must be >= 1")
    return n


def ordered_map(fn, items):
    """Map over a thread pool, results in input order."""
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(fn, items))


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12e}"


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def write_manifest(csv_path, args, config, wall, extra=None):
    csv_path = Path(csv_path)
    digest = hashlib.sha256(csv_path.read_bytes()).hexdigest()
    manifest = {
        "command": args.command,
        "argv": list(getattr(args, "argv", [])),
        "config": config.to_dict() if config is not None else None,
        "options": {k: v for k, v in sorted(vars(args).items()) if k != "argv"},
        "seed": args.seed,
        "version": __version__,
        "wall_time_s": wall,
        "output": csv_path.name,
        "sha256": digest,
    }
    if extra:
        manifest.update(extra)
    out = csv_path.with_suffix(".manifest.json")
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return out


def config_from_args(args, alpha=None):
    if args.config:
        cfg = ModelConfig.from_json(args.config)
        return cfg if alpha is None else cfg.replace(alpha=alpha)
    gaps = tuple(args.gap) if args.gap else (1.0,)
    positions = None
    if len(gaps) == 2:
        d = args.distance_values[0] if args.distance_values else 0.5
        mid = 0.5 * args.L
        positions = (mid - 0.5 * d, mid + 0.5 * d)
    return ModelConfig(alpha=args.alpha_values[0] if alpha is None else alpha, qubit_gaps=gaps,
                       qubit_positions=positions, num_segments=args.N, line_length=args.L,
                       cutoff=args.omega_c if args.omega_c and args.kind == "continuum" else None,
                       kind=BathKind.CONTINUUM if args.kind == "continuum" else BathKind.DISCRETE)


# -- subcommands ------------------------------------------------------------------

def cmd_groundstate(args):
    alphas = args.alpha_values
    base = config_from_args(args, alphas[0])
    if base.kind is not BathKind.DISCRETE:
        raise ConfigError("groundstate sweeps use the discrete model")

    def point(a):
        cfg = base.replace(alpha=a)
        bath = build_discrete_bath(cfg)
        if cfg.num_qubits == 1:
            sol = solve_single_qubit_fixed_point(bath, cfg.qubit_gaps[0], tol=args.tol,
                                                 max_iter=args.max_iter)
        else:
            sol = solve_variational(bath, cfg.qubit_gaps, restarts=args.restarts, seed=args.seed)
        sz = groundstate_polarization(sol)
        return [a, sol.delta_r, float(sz[0]), sol.groundstate_energy, sol.residual, sol.degenerate]

    rows = ordered_map(point, alphas)
    header = ["alpha", "delta_r", "sigma_z", "energy", "residual", "degenerate"]
    return base, header, rows


def _emission(args):
    cfg = config_from_args(args)
    t_max = args.t_max if args.t_max is not None else revival_time(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        series = spontaneous_emission_run(cfg, t_max=t_max, dt=args.dt)
    return cfg, series


def cmd_emission(args):
    cfg, s = _emission(args)
    idx = s.bath.mode_index
    header = ["t", "survival"] + [f"mode_{int(n)}" for n in idx]
    stride = max(1, int(args.stride))
    rows = [[t, p, *d] for t, p, d in zip(s.times[::stride], s.survival[::stride],
                                          s.densities[::stride])]
    return cfg, header, rows, {"revival_warning": s.revival_warning}


def cmd_spectrum(args):
    cfg, s = _emission(args)
    amps = np.sqrt(s.final_density)
    spec = photon_density(ExcitationVector(0.0, np.zeros(1), amps), s.bath)
    order = np.argsort(spec.omega_signed, kind="stable")
    rows = [[spec.omega_signed[i], spec.density[i]] for i in order]
    return cfg, ["omega_signed", "density"], rows, {"t_final": float(s.times[-1])}


def cmd_scattering(args):
    cfg = config_from_args(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = run_scattering(cfg)
    rows = []
    for sign in (-1.0, 1.0):
        for i in (range(res.omega.size - 1, -1, -1) if sign < 0 else range(res.omega.size)):
            m = bool(res.masked[i])
            vals = [0.0] * 4 if m else [res.T[i], res.R[i], res.theta_t[i], res.theta_r[i]]
            rows.append([sign * res.omega[i], *vals, m])
    header = ["omega_signed", "T", "R", "theta_t", "theta_r", "masked"]
    return cfg, header, rows, {"spin_residual": res.spin_residual,
                               "spin_warning": bool(res.spin_warning), "delta_r": res.delta_r}


def cmd_two_emitter(args):
    dists = args.distance_values or [0.5]
    omega_c = args.omega_c if args.omega_c else 100.0
    lam0 = 2 * math.pi / (args.gap[0] if args.gap else 1.0)
    regime = Regime(args.regime)
    points = [(a, d) for a in args.alpha_values for d in dists]

    def point(ad):
        a, d = ad
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            p = pair_analytics(a, d * lam0, args.gap[0] if args.gap else 1.0, omega_c, regime)
        return [a, d, p.gamma_i, p.gamma_12, p.delta_i, p.g12.real, p.g12.imag, p.localized]

    rows = ordered_map(point, points)
    header = ["alpha", "d_over_lambda0", "gamma_i", "gamma_12", "delta_i", "g12_real",
              "g12_imag", "localized"]
    extra = {"omega_c": omega_c, "regime": regime.value}
    if regime is Regime.SHORT_DISTANCE and any(a * omega_c < 10 for a in args.alpha_values):
        extra["validity_warning"] = "alpha*omega_c/Delta < 10"
    return None, header, rows, extra


def cmd_oracle_check(args):
    from .oracle import FockBasis, build_hamiltonian, exact_groundstate, lab_sigma_z

    rng = np.random.default_rng(args.seed)
    checks = []
    for a in (0.05, 0.1, 0.2):
        cfg = ModelConfig(alpha=a, num_segments=7, line_length=1.0)
        bath = build_discrete_bath(cfg).subset([4, 5, 6])
        sol = solve_single_qubit_fixed_point(bath, 1.0)
        H = build_hamiltonian(FockBasis(3, 8), bath, [1.0])
        E0, v = exact_groundstate(H)
        dz = abs(lab_sigma_z(FockBasis(3, 8), v) - groundstate_polarization(sol)[0])
        checks.append({"name": f"sigma_z alpha={a}", "value": dz, "pass": bool(dz < 0.05)})
        gap = sol.groundstate_energy - E0
        checks.append({"name": f"variational bound alpha={a}", "value": gap,
                       "pass": bool(gap >= -1e-10)})
    a = float(rng.uniform(0.0, 0.3))
    cfg = ModelConfig(alpha=a, num_segments=7, line_length=1.0)
    bath = build_discrete_bath(cfg).subset([4, 5])
    sol = solve_single_qubit_fixed_point(bath, 0.0)
    E0, _ = exact_groundstate(build_hamiltonian(FockBasis(2, 30), bath, [0.0]))
    diff = abs(sol.groundstate_energy - E0)
    checks.append({"name": f"zero gap alpha={a:.6f}", "value": diff, "pass": bool(diff < 1e-10)})
    ok = all(c["pass"] for c in checks)
    return {"pass": ok, "checks": checks}


COMMANDS = {
    "groundstate": cmd_groundstate,
    "emission": cmd_emission,
    "spectrum": cmd_spectrum,
    "scattering": cmd_scattering,
    "two-emitter": cmd_two_emitter,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", default=None,
                        help="value or start:stop:steps (default 0.1, or the run file's value)")
    common.add_argument("--N", type=int, default=301, help="number of line segments")
    common.add_argument("--L", type=float, default=10.0, help="line length in units of lambda0")
    common.add_argument("--omega-c", dest="omega_c", type=float, default=None,
                        help="cutoff (continuum model and two-emitter analytics)")
    common.add_argument("--gap", type=float, action="append", default=None,
                        help="bare emitter gap; repeat for two emitters")
    common.add_argument("--distance", default=None,
                        help="emitter separation in units of lambda0 (value or start:stop:steps)")
    common.add_argument("--kind", choices=["discrete", "continuum"], default="discrete")
    common.add_argument("--config", default=None, help="run file (JSON) overriding model flags")
    common.add_argument("-o", "--output", default=None, help="CSV output path")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="polaron", description=__doc__.strip().splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    g = sub.add_parser("groundstate", parents=[common], help="polaron groundstate sweep")
    g.add_argument("--tol", type=float, default=1e-10)
    g.add_argument("--max-iter", dest="max_iter", type=int, default=10_000)
    g.add_argument("--restarts", type=int, default=0)
    for name, hlp in (("emission", "spontaneous-emission time series"),
                      ("spectrum", "photon spectrum after the decay")):
        e = sub.add_parser(name, parents=[common], help=hlp)
        e.add_argument("--t-max", dest="t_max", type=float, default=None)
        e.add_argument("--dt", type=float, default=0.1)
        e.add_argument("--stride", type=int, default=1, help="write every n-th time step")
    sub.add_parser("scattering", parents=[common], help="single-photon scattering coefficients")
    t = sub.add_parser("two-emitter", parents=[common], help="two-emitter Markovian analytics")
    t.add_argument("--regime", choices=[r.value for r in Regime], default="large")
    sub.add_parser("oracle-check", parents=[common], help=argparse.SUPPRESS)
    return p


def _error(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.argv = argv
    start = time.perf_counter()
    try:
        if args.alpha is None:
            args.alpha_values = ([ModelConfig.from_json(args.config).alpha] if args.config
                                 else [0.1])
        else:
            args.alpha_values = parse_range(args.alpha)
        args.distance_values = (parse_range(args.distance, "--distance")
                                if args.distance is not None else None)
        if args.command == "oracle-check":
            report = cmd_oracle_check(args)
            text = json.dumps(report, indent=2, sort_keys=True)
            if args.output:
                Path(args.output).write_text(text + "\n")
            print(text)
            return EXIT_OK if report["pass"] else 1
        if len(args.alpha_values) > 1 and args.command not in ("groundstate", "two-emitter"):
            raise ConfigError(f"{args.command} takes a single --alpha value")
        result = COMMANDS[args.command](args)
        cfg, header, rows = result[:3]
        extra = result[3] if len(result) > 3 else None
        out = Path(args.output or f"{args.command}.csv")
        write_csv(out, header, rows)
        wall = time.perf_counter() - start
        write_manifest(out, args, cfg, wall, extra)
        print(str(out))
        return EXIT_OK
    except ConfigError as exc:
        return _error("config", str(exc), EXIT_CONFIG)
    except ConvergenceError as exc:
        return _error("convergence", str(exc), EXIT_CONVERGENCE)
    except (ValueError, OSError) as exc:
        return _error("config", str(exc), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
