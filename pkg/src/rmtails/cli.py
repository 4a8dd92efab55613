"""Command-line frontend: plot-ready CSV output plus JSON run manifests.

Exit codes: 0 success, 2 usage error, 3 model violation (multi-cut
potential), 4 precision failure.  Floats print at 17 significant digits so
identical runs produce byte-identical CSVs; every CSV is accompanied by a
manifest recording the full command line, parameters and output digests.
The RMT_PRECISION environment variable overrides the default precision.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from . import __version__
from .montecarlo import PRNG_NAME, SamplerConfig, lambda_max_stats, sample, states_to_csv
from .orthopoly import PrecisionError, TruncatedWeight, hankel_log_gap, log_gap_probability
from .potentials import (
    Polynomial,
    count_real_roots,
    derivative,
    gaussian_potential,
    multicritical_potential,
    saddle_points,
)
from .rate_functions import gaussian_action, gaussian_left_F, left_tail_general, multicritical_action
from .spectral_curve import OneCutError, density, instanton_action, right_tail_log_prob, solve_one_cut
from . import acceptance

_F17 = ".17g"


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), _F17)


def _grid_spec(text: str) -> np.ndarray:
    """Parse 'lo:hi:count[:log]' into a grid."""
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise argparse.ArgumentTypeError(
            f"bad grid spec {text!r}; expected lo:hi:count[:log]"
        )
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid spec {text!r}: {exc}") from None
    if count < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad grid spec {text!r}: need hi >= lo, count >= 1")
    if len(parts) == 4:
        if lo <= 0:
            raise argparse.ArgumentTypeError("log grid needs lo > 0")
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def _coeff_list(text: str) -> tuple:
    try:
        return tuple(Fraction(p.strip()) for p in text.split(",") if p.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad coefficient list {text!r}: {exc}") from None


def _add_potential_args(p: argparse.ArgumentParser):
    p.add_argument("--family", choices=["gaussian", "multicritical", "custom"],
                   default="gaussian", help="potential family")
    p.add_argument("--k", type=int, default=1, help="multicritical order (family=multicritical)")
    p.add_argument("--coeffs", type=_coeff_list, default=None,
                   help="custom potential coefficients c0,c1,... (exact rationals like 4/5)")


def _potential_from(args) -> Polynomial:
    if args.coeffs is not None:
        args.family = "custom"
    if args.family == "gaussian":
        return gaussian_potential()
    if args.family == "multicritical":
        if args.k < 0:
            raise SystemExit(_usage_error("multicritical order k must be >= 0"))
        return multicritical_potential(args.k)
    if args.coeffs is None:
        raise SystemExit(_usage_error("--family custom requires --coeffs"))
    V = Polynomial(args.coeffs)
    if V.degree < 2 or V.degree % 2 or V.leading <= 0:
        raise SystemExit(_usage_error(
            "custom potential needs even degree >= 2 and positive leading coefficient"))
    return V


def _usage_error(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _default_precision() -> int:
    return int(os.environ.get("RMT_PRECISION", "15"))


def _potential_desc(args) -> dict:
    return {
        "family": args.family,
        "k": args.k if args.family == "multicritical" else None,
        "coeffs": [str(c) for c in args.coeffs] if getattr(args, "coeffs", None) else None,
    }


def _write_manifest(csv_path: str, command: str, args, fields: dict):
    digest = hashlib.sha256(open(csv_path, "rb").read()).hexdigest()
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "potential": _potential_desc(args),
        "tool_version": __version__,
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": {os.path.basename(csv_path): f"sha256:{digest}"},
    }
    manifest.update(fields)
    path = csv_path + ".manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_potential(args) -> int:
    V = _potential_from(args)
    Vp = derivative(V)
    sp = saddle_points(V)
    n_real = count_real_roots(Vp)
    print(f"V(x) = {V}")
    print(f"degree {V.degree}, leading coefficient {V.leading}")
    print(f"coefficients: {[str(c) for c in V.coeffs]}")
    print(f"real critical points (Sturm, exact): {n_real}")
    for x, v in sp.real_minima:
        print(f"  minimum at x = {_fmt(x)}  V = {_fmt(v)}")
    for x, v in sp.real_maxima:
        print(f"  maximum at x = {_fmt(x)}  V = {_fmt(v)}")
    for r in sp.complex_saddles:
        print(f"  complex saddle pair at x = {r:.12g} (conjugate implied)")
    if args.json:
        payload = {
            "potential": _potential_desc(args),
            "coefficients": [str(c) for c in V.coeffs],
            "sturm_real_critical_points": n_real,
            "minima": [[x, v] for x, v in sp.real_minima],
            "maxima": [[x, v] for x, v in sp.real_maxima],
            "complex_saddles": [[r.real, r.imag] for r in sp.complex_saddles],
        }
        with open(args.json, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {args.json}")
    return 0


def _heff(sol, x: float) -> float:
    """V_eff(x) - V_eff(a): instanton action to the right, barrier to the left."""
    if x >= sol.a:
        return instanton_action(sol, x).A
    if x >= sol.b:
        return 0.0
    U = math.sqrt(sol.b - x)
    val, _ = quad(
        lambda u: 2.0 * u * u * float(sol.M(sol.b - u * u)) * math.sqrt(sol.a - sol.b + u * u),
        0.0, U, epsabs=1e-300, epsrel=1e-12, limit=300,
    )
    return float(val)


def cmd_spectral(args) -> int:
    V = _potential_from(args)
    sol = solve_one_cut(V, args.t)
    w = sol.a - sol.b
    grid = args.x_grid if args.x_grid is not None else np.linspace(
        sol.b - 0.25 * w, sol.a + 0.5 * w, 201)
    lines = ["b,a,t,precision",
             ",".join([_fmt(sol.b), _fmt(sol.a), _fmt(args.t), str(args.precision)]),
             "x,rho,y,heff"]
    for x in grid:
        x = float(x)
        if x >= sol.a:
            y = float(sol.M(x)) * math.sqrt((x - sol.b) * (x - sol.a))
        elif x >= sol.b:
            y = 0.0
        else:
            y = -float(sol.M(x)) * math.sqrt((x - sol.b) * (x - sol.a))
        lines.append(",".join([_fmt(x), _fmt(density(sol, x)), _fmt(y), _fmt(_heff(sol, x))]))
    with open(args.output, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_manifest(args.output, "spectral", args, {
        "t": args.t, "precision": args.precision,
        "x_grid": [float(grid[0]), float(grid[-1]), len(grid)],
    })
    print(f"wrote {args.output} (support [{_fmt(sol.b)}, {_fmt(sol.a)}])")
    return 0


def cmd_tails(args) -> int:
    V = _potential_from(args)
    sol = solve_one_cut(V, args.t)
    is_gaussian = V == gaussian_potential()
    is_k1 = V == multicritical_potential(1)
    rows = ["z,value,method,flag,action_quadrature,action_closed_form,log_prob"]
    for z in sorted(float(z) for z in args.z_grid):
        if args.side == "left":
            if z >= sol.a:
                rows.append(",".join([_fmt(z), _fmt(0.0), "closed_form" if is_gaussian
                                      else "planar_solver", "right_of_edge", "", "", ""]))
                continue
            if z <= sol.b:
                rows.append(",".join([_fmt(z), "", "", "below_lower_edge", "", "", ""]))
                continue
            if is_gaussian:
                rows.append(",".join([_fmt(z), _fmt(gaussian_left_F(z, args.t)),
                                      "closed_form", "ok", "", "", ""]))
            else:
                val = left_tail_general(V, args.t, z).value
                rows.append(",".join([_fmt(z), _fmt(val), "planar_solver", "ok", "", "", ""]))
        else:
            if z < sol.a:
                rows.append(",".join([_fmt(z), "", "", "left_of_edge", "", "", ""]))
                continue
            a_quad = instanton_action(sol, z).A
            a_closed = None
            method = "spectral_curve"
            if is_gaussian:
                a_closed = gaussian_action(args.t, z)
                method = "closed_form"
            elif is_k1:
                a_closed = multicritical_action(sol, z)
                method = "closed_form"
            logp = None
            flag = "ok"
            if args.N is not None:
                try:
                    logp = right_tail_log_prob(sol, z, args.N)
                except ValueError:
                    flag = "edge_crossover"
            value = a_closed if a_closed is not None else a_quad
            rows.append(",".join([_fmt(z), _fmt(value), method, flag,
                                  _fmt(a_quad), _fmt(a_closed), _fmt(logp)]))
    with open(args.output, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    _write_manifest(args.output, "tails", args, {
        "side": args.side, "t": args.t, "N": args.N, "precision": args.precision,
        "z_grid": [float(z) for z in args.z_grid],
    })
    print(f"wrote {args.output}")
    return 0


def cmd_gap(args) -> int:
    V = _potential_from(args)
    rows = ["z,logP,method,logP_hankel"]
    for z in sorted(float(z) for z in args.z_grid):
        w = TruncatedWeight(V=V, t=args.t, N=args.N, z=z, precision=args.precision)
        res = log_gap_probability(w)
        hank = hankel_log_gap(w).logP if args.N <= 6 else None
        rows.append(",".join([_fmt(z), _fmt(res.logP), res.method, _fmt(hank)]))
    with open(args.output, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    _write_manifest(args.output, "gap", args, {
        "t": args.t, "N": args.N, "precision": args.precision,
        "z_grid": [float(z) for z in args.z_grid],
    })
    print(f"wrote {args.output}")
    return 0


def cmd_sample(args) -> int:
    V = _potential_from(args)
    cfg = SamplerConfig(V=V, t=args.t, N=args.N, wall=args.wall, step=args.step,
                        sweeps=args.sweeps, burn_in=args.burn_in, thin=args.thin,
                        seed=args.seed)
    states = sample(cfg)
    states_to_csv(states, args.output)
    _write_manifest(args.output, "sample", args, {
        "t": args.t, "N": args.N, "wall": args.wall, "sweeps": args.sweeps,
        "burn_in": args.burn_in, "thin": args.thin, "seed": args.seed,
        "precision": args.precision, "prng": PRNG_NAME, "kept_states": len(states),
    })
    stats = lambda_max_stats(states) if len(states) >= 100 else None
    mean_txt = f", mean lambda_max {stats.mean:.6f}" if stats else ""
    print(f"wrote {args.output} ({len(states)} states{mean_txt})")
    return 0


def cmd_verify(args) -> int:
    names = [args.suite] if args.suite else None
    try:
        results = acceptance.run_all(names)
    except KeyError as exc:
        return _usage_error(str(exc.args[0]))
    failed = 0
    for suite_name, checks in results.items():
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            failed += 0 if c.passed else 1
            print(f"[{status}] {suite_name} :: {c.name} :: {c.detail}")
    print(f"{failed} failure(s)" if failed else "all checks passed")
    return 1 if failed else 0


# ----------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmtails",
        description="Gap probabilities and largest-eigenvalue tail rate functions "
                    "for Hermitian matrix ensembles with polynomial potentials.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potential", help="print exact potential data and saddle classification")
    _add_potential_args(p)
    p.add_argument("--json", default=None, metavar="PATH", help="also write JSON payload")
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("spectral", help="one-cut solution: density, spectral curve, V_eff")
    _add_potential_args(p)
    p.add_argument("--t", type=float, default=1.0, help="coupling t > 0")
    p.add_argument("--x-grid", type=_grid_spec, default=None, metavar="LO:HI:N[:log]")
    p.add_argument("--output", default="spectral.csv")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("tails", help="left/right large-deviation tail values on a z-grid")
    _add_potential_args(p)
    p.add_argument("--side", choices=["left", "right"], required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--z-grid", type=_grid_spec, required=True, metavar="LO:HI:N[:log]")
    p.add_argument("--N", type=int, default=None, help="emit log P with prefactor (right side)")
    p.add_argument("--output", default="tails.csv")
    p.set_defaults(func=cmd_tails)

    p = sub.add_parser("gap", help="finite-N log gap probabilities on a z-grid")
    _add_potential_args(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--z-grid", type=_grid_spec, required=True, metavar="LO:HI:N[:log]")
    p.add_argument("--output", default="gap.csv")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("sample", help="Metropolis Coulomb-gas sampler, CSV dump")
    _add_potential_args(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--sweeps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--wall", type=float, default=None)
    p.add_argument("--burn-in", type=int, default=500)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--output", default="samples.csv")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="run the acceptance suites")
    p.add_argument("--suite", default=None, help="single suite name (default: all)")
    p.set_defaults(func=cmd_verify)

    for sp in sub.choices.values():
        sp.add_argument("--precision", type=int, default=_default_precision(),
                        help="decimal digits for internal arithmetic")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OneCutError as exc:
        print(f"model violation: {exc}", file=sys.stderr)
        return 3
    except PrecisionError as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        return _usage_error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
