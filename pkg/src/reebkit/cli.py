"""Command-line front-end.

Every subcommand writes its machine-readable payload to stdout (or to
``--output``) and its diagnostics to stderr.  Exit codes: 0 success,
1 domain error or failed prediction, 2 malformed input, 3 I/O failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import harness
from .charts import BumpSpec, EllipsoidChart, SeifertTorusChart, StandardDiskChart, bump_chart
from .errors import ConfigError, PredictionFailed, ReebkitError
from .reeb import contact_volume, find_periodic_orbit
from .seifert import (euler_number, format_rational, k0_index, parse_pairs, rational_to_json,
                      sos_data)
from .spectra import ellipsoid_model, spectrum_table, spindle_model
from .surfaces import (DiskSurface, HamiltonianSystem, radial_quadratic, random_disk_hamiltonian,
                       verify_fixed_point_inequality)

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    """Input that parses as flags but is not meaningful."""


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _dump(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def thread_cap(environ=None) -> int:
    """Worker count from ``REEBKIT_THREADS`` (default 1)."""
    raw = (os.environ if environ is None else environ).get("REEBKIT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"REEBKIT_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"REEBKIT_THREADS must be a positive integer, got {raw!r}")
    return n


def _floats(text, n):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


# --- subcommands -----------------------------------------------------------

def cmd_seifert(args):
    try:
        inv = parse_pairs(args.pairs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.genus:
        inv = type(inv)(args.genus, inv.pairs)
    e = euler_number(inv)
    data = sos_data(inv, args.orbit)
    return _dump({"euler": rational_to_json(e), "k0": k0_index(inv), "sos": data.to_json()})


def cmd_spectrum(args):
    if args.ellipsoid:
        model = ellipsoid_model(*args.ellipsoid)
    else:
        model = spindle_model(*args.spindle)
    lines = ["k,tau_k,rho_k"]
    for k, tau, rho in spectrum_table(model, args.kmax):
        lines.append(f"{k},{format_rational(tau)},{format_rational(rho)}")
    return "\n".join(lines) + "\n"


def _chart(args):
    if getattr(args, "ellipsoid", None):
        return EllipsoidChart(*args.ellipsoid), None
    if getattr(args, "bump", None):
        eps, c_plus, rho, outer = args.bump
        spec = BumpSpec(eps, c_plus, rho, outer)
        return bump_chart(spec), spec
    if getattr(args, "seifert_torus", None):
        a1, ap = (int(v) for v in args.seifert_torus[:2])
        return SeifertTorusChart(a1, ap, args.seifert_torus[2]), None
    return StandardDiskChart(args.disk), None


def cmd_orbit(args):
    chart, _ = _chart(args)
    if args.angles:
        if not isinstance(chart, EllipsoidChart):
            raise UsageError("--angles applies to --ellipsoid only")
        seed = np.asarray(chart.point(*_floats(args.seed, 3))).reshape(-1)
    else:
        seed = _floats(args.seed, chart.dim)
    rec = find_periodic_orbit(chart, np.asarray(seed, dtype=float), args.period, tol=args.tol)
    return _dump(rec.to_json())


def cmd_volume(args):
    chart, _ = _chart(args)
    out = {"volume": contact_volume(chart, quad_tol=args.tol)}
    if args.ellipsoid:
        out["predicted"] = rational_to_json(ellipsoid_model(*args.ellipsoid).volume)
    return _dump(out)


def cmd_calabi(args):
    surface = DiskSurface(args.rho)
    if args.random is not None:
        H = random_disk_hamiltonian(np.random.default_rng(args.random), amplitude=args.amplitude,
                                    rho=args.rho)
    else:
        H = radial_quadratic(args.eps, args.rho)
    result = verify_fixed_point_inequality(HamiltonianSystem(surface, H), c=args.c, quad_tol=args.tol)
    args._failed = not result["pass"]
    return _dump(result)


def cmd_experiment(args):
    cfg = harness.load_config(args.config)
    report = harness.run_experiment(cfg, raise_on_fail=False, workers=args.threads)
    args._failed = not report.passed
    if args.format == "csv":
        return harness.report_to_csv(report)
    return harness.report_to_json(report)


# --- parser ----------------------------------------------------------------

def _add_chart_flags(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ellipsoid", nargs=2, type=int, metavar=("P", "Q"))
    g.add_argument("--bump", nargs=4, type=float, metavar=("EPS", "C_PLUS", "RHO", "OUTER"),
                   help="radially bumped standard disk model")
    g.add_argument("--disk", type=float, metavar="RHO", help="standard disk model")
    g.add_argument("--seifert-torus", nargs=3, type=float, metavar=("A1", "A_PRIME", "RHO"))


def build_parser():
    parser = argparse.ArgumentParser(prog="reebkit", description="Besse contact forms and systolic ratios.")
    parser.add_argument("--output", metavar="FILE", help="write the payload here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seifert", help="Euler number, k0 and section data")
    p.add_argument("--pairs", required=True, help="colon-separated pairs, e.g. 2,1:3,1")
    p.add_argument("--genus", type=int, default=0)
    p.add_argument("--orbit", type=int, default=0, help="index of the binding orbit")
    p.set_defaults(func=cmd_seifert)

    p = sub.add_parser("spectrum", help="tau_k and rho_k table as CSV")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ellipsoid", nargs=2, type=int, metavar=("P", "Q"))
    g.add_argument("--spindle", nargs=2, type=int, metavar=("M", "N"))
    p.add_argument("--kmax", type=int, required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("orbit", help="Newton shooting for a closed Reeb orbit")
    _add_chart_flags(p)
    p.add_argument("--seed", required=True, help="comma-separated starting point")
    p.add_argument("--angles", action="store_true", help="read an ellipsoid seed as psi,theta1,theta2")
    p.add_argument("--period", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("volume", help="contact volume by quadrature")
    _add_chart_flags(p)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("calabi", help="fixed-point inequality on the disk")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eps", type=float, default=0.1, help="radial quadratic amplitude")
    g.add_argument("--random", type=int, metavar="SEED", help="random normalised Hamiltonian")
    p.add_argument("--amplitude", type=float, default=0.02)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_calabi)

    p = sub.add_parser("experiment", help="run a configured experiment and emit its report")
    p.add_argument("--config", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args._failed = False
    try:
        args.threads = thread_cap()
        payload = args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PredictionFailed as exc:
        print(f"PredictionFailed: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"IoError: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ReebkitError, ValueError, IndexError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(payload)
        else:
            sys.stdout.write(payload)
    except OSError as exc:
        print(f"IoError: {exc}", file=sys.stderr)
        return EXIT_IO
    if args._failed:
        print("one or more checks failed", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
