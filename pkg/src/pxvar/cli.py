"""Command line interface.

Subcommands: norm, rayleigh, check-potential, geometry, solve, selftest.
Stage failures exit with documented codes (2 spec parse, 3 audit fail,
4 inadmissible lambda, 5 no crossing endpoint, 6 no geometry, 7 solver did
not converge) and emit a machine-readable failure report.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import StageFailure
from .grids import read_grid_function, write_grid_function
from .modular import (
    luxemburg_norm,
    modular_lp,
    modular_report,
    sobolev_norm_modular,
    sobolev_norm_sum,
)
from .mountain_pass import certify_geometry
from .pipeline import (
    report_payload,
    run_audits,
    run_pipeline,
    write_failure,
    write_report,
    _stage_crossing,
    _stage_lambda_star,
)
from .problem import load_problem
from .selftest import run_property_suite

__all__ = ["main", "run"]


def _parse_grid_override(text):
    if text is None:
        return None
    return [int(v) for v in text.split(",")]


def _add_common(sub, function=False, out=False):
    sub.add_argument("--spec", required=True, help="problem JSON file")
    sub.add_argument("--seed", type=int, default=None, help="override the spec seed")
    sub.add_argument("--grid-override", default=None,
                     help="cells per axis, e.g. 128 or 32,32")
    sub.add_argument("--quiet", action="store_true")
    if function:
        sub.add_argument("--function", required=True, help="grid function CSV")
    if out:
        sub.add_argument("--out", default=None, help="output file/path")


def _load(args):
    return load_problem(
        args.spec,
        grid_override=_parse_grid_override(args.grid_override),
        seed_override=args.seed,
    )


def _emit(args, payload):
    text = json.dumps(payload, sort_keys=True, indent=1)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    if not args.quiet:
        print(text)


def _cmd_norm(args):
    problem = _load(args)
    u = read_grid_function(args.function, problem.grid)
    rep = modular_report(u, problem.exponent)
    _emit(args, {
        "modular": rep.modular_value,
        "luxemburg": rep.norm_value,
        "sum_norm": sobolev_norm_sum(u, problem.exponent),
        "modular_norm": sobolev_norm_modular(u, problem.exponent),
        "regime": rep.regime,
    })
    return 0


def _cmd_rayleigh(args):
    problem = _load(args)
    rng = np.random.default_rng(problem.seed)
    est, info = _stage_lambda_star(problem, rng)
    csv_path = args.out or "lambda_star_minimizer.csv"
    write_grid_function(csv_path, est.minimizer)
    _emit_args = dict(info)
    _emit_args["minimizer_csv"] = csv_path
    _emit(args, _emit_args)
    return 0


def _cmd_check_potential(args):
    problem = _load(args)
    audits = run_audits(problem)
    _emit(args, audits)
    return 0


def _cmd_geometry(args):
    problem = _load(args)
    rng = np.random.default_rng(problem.seed)
    run_audits(problem)
    est, _ = _stage_lambda_star(problem, rng)
    u_bar, _ = _stage_crossing(problem)
    mu = problem.claims.mu_claim if problem.claims else None
    cert = certify_geometry(
        problem.exponent, problem.lam, problem.potential, u_bar,
        rng=rng, lambda_star=est.value, mu=mu,
        sphere_samples=problem.solver.sphere_samples,
        rho_points=problem.solver.rho_points,
    )
    _emit(args, cert.to_dict())
    return 0


def _cmd_solve(args):
    problem = _load(args)
    out = args.out or "report.json"
    report, solve = run_pipeline(
        problem, out_report=out, path_csv=args.path_csv, profile_csv=args.plot_data
    )
    if not args.quiet:
        print(
            f"critical value {solve.critical_value:.8g}  "
            f"m {solve.m_residual:.3g}  inclusion {solve.inclusion_max:.3g}  "
            f"iterations {solve.iterations}  report {out}"
        )
    return 0


def _cmd_selftest(args):
    summary = run_property_suite(verbose=not args.quiet)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(json.dumps(summary, sort_keys=True, indent=1) + "\n")
    return 0 if summary["all_passed"] else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="pxvar",
        description="variable-exponent energies, potential audits and a "
                    "mountain-pass solver on 1D/2D grids",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("norm", help="modulars and norms of a grid function")
    _add_common(s, function=True, out=True)
    s.set_defaults(fn=_cmd_norm)

    s = subs.add_parser("rayleigh", help="estimate lambda_star and gate lambda")
    _add_common(s, out=True)
    s.set_defaults(fn=_cmd_rayleigh)

    s = subs.add_parser("check-potential", help="run the hypothesis audits")
    _add_common(s, out=True)
    s.set_defaults(fn=_cmd_check_potential)

    s = subs.add_parser("geometry", help="certify the mountain-pass geometry")
    _add_common(s, out=True)
    s.set_defaults(fn=_cmd_geometry)

    s = subs.add_parser("solve", help="run the full pipeline")
    _add_common(s, out=True)
    s.add_argument("--path-csv", default=None, help="write the final path profile")
    s.add_argument("--plot-data", default=None, help="energy profile CSV")
    s.set_defaults(fn=_cmd_solve)

    s = subs.add_parser("selftest", help="run the property suite")
    s.add_argument("--out", default=None)
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(fn=_cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except StageFailure as exc:
        text = write_failure(exc, getattr(args, "out", None))
        if not getattr(args, "quiet", False):
            print(text, file=sys.stderr)
        return exc.exit_code


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
