"""Pipeline orchestration: audits -> lambda_star -> crossing -> geometry -> solve.

Each stage failure raises a typed exception carrying its exit code
(2 spec, 3 audit, 4 inadmissible lambda, 5 no crossing endpoint,
6 no geometry, 7 solver did not converge) and a machine-readable payload.
Reports are deterministic for a fixed problem file and seed: one seeded
generator drives all sampling, reductions are sequential, and the only
run-dependent data (timestamp, tool version) lives in a separate "meta"
block of the report JSON.
"""

from __future__ import annotations

import datetime
import json
import os

import numpy as np

from .errors import AuditFailure, CrossingFailure, InadmissibleLambda
from .grids import write_grid_function
from .modular import sobolev_norm_modular
from .mountain_pass import certify_geometry, solve_mountain_pass
from .potentials import (
    audit_asymptotic_negativity,
    audit_crossing,
    audit_growth,
    audit_origin,
)
from .problem import build_u_bar_override, load_problem
from .rayleigh import admissible, estimate_lambda_star

__all__ = ["run_audits", "run_pipeline", "write_report", "write_failure"]

_TOOL = "pxvar 0.1.0"


def _default_r(p):
    # smallest growth exponent the ordering constraints allow
    return f"{p.p_max!r}"


def run_audits(problem):
    """Run the three pointwise hypothesis audits; gate only when claims exist."""
    p = problem.exponent
    spec = problem.potential
    claims = problem.claims
    enforced = claims is not None
    results = {"mode": "enforced" if enforced else "report"}
    r_expr = claims.r if enforced else _default_r(p)
    a_bound = claims.a if enforced else None
    c1 = claims.c1 if enforced else None
    mu_claim = claims.mu_claim if enforced else 1e-6
    try:
        results["growth"] = audit_growth(spec, p, r_expr, a_bound=a_bound, c1=c1).to_dict()
    except ValueError as exc:
        results["growth"] = {"passed": False, "error": str(exc)}
    results["asymptotic_negativity"] = audit_asymptotic_negativity(spec, p).to_dict()
    results["origin"] = audit_origin(spec, p, mu_claim).to_dict()
    if enforced:
        failing = [
            name
            for name in ("growth", "asymptotic_negativity", "origin")
            if not results[name]["passed"]
        ]
        if failing:
            raise AuditFailure(
                f"potential fails audit(s): {', '.join(failing)}",
                details={"failing": failing, "audits": results},
            )
    return results


def _stage_lambda_star(problem, rng):
    p = problem.exponent
    est = estimate_lambda_star(p, restarts=16, rng=rng)
    threshold = (p.p_min / p.p_max) * est.value
    ok = admissible(problem.lam, est, p)
    info = dict(est.to_dict(), threshold=threshold, lam=problem.lam, admissible=ok)
    if not ok:
        raise InadmissibleLambda(
            f"lambda = {problem.lam} is not below (p-/p+) * lambda_star "
            f"= {threshold:.6g}",
            details=info,
        )
    return est, info


def _stage_crossing(problem):
    override = build_u_bar_override(problem)
    if override is not None:
        return override, {"provided": True, "config": problem.u_bar_config}
    crossing = audit_crossing(problem.potential, problem.exponent, problem.lam)
    if not crossing.passed:
        raise CrossingFailure(
            "no crossing endpoint found: the scanned profile family never "
            "satisfies the crossing inequality",
            details=crossing.to_dict(),
        )
    return crossing.u_bar, dict(crossing.to_dict(), provided=False)


def run_pipeline(problem, out_report=None, path_csv=None, profile_csv=None):
    """Execute the full pipeline; returns the report dict and writes artifacts.

    `problem` is a ProblemSpec or anything load_problem accepts.  Raises
    StageFailure subclasses on the documented failure modes.
    """
    if not hasattr(problem, "exponent"):
        problem = load_problem(problem)
    rng = np.random.default_rng(problem.seed)
    p = problem.exponent

    audits = run_audits(problem)
    est, lam_info = _stage_lambda_star(problem, rng)
    u_bar, crossing_info = _stage_crossing(problem)
    mu = None
    if problem.claims is not None:
        mu = problem.claims.mu_claim
    elif audits["origin"]["estimated_limsup"] < 0:
        mu = -audits["origin"]["estimated_limsup"]
    geometry = certify_geometry(
        p, problem.lam, problem.potential, u_bar,
        rng=rng, lambda_star=est.value, mu=mu,
        sphere_samples=problem.solver.sphere_samples,
        rho_points=problem.solver.rho_points,
    )
    solve = solve_mountain_pass(p, problem.lam, problem.potential, geometry, problem.solver)

    report = {
        "problem": problem.echo(),
        "audits": audits,
        "lambda_star": lam_info,
        "crossing": crossing_info,
        "geometry": geometry.to_dict(),
        "solve": {
            "critical_value": solve.critical_value,
            "m_residual": solve.m_residual,
            "inclusion_max": solve.inclusion_max,
            "iterations": solve.iterations,
            "eta_margin_ok": solve.eta_margin_ok,
            "norms": solve.norms,
            "history": [[e, m] for e, m in solve.path_history],
            "ps_diagnostic": solve.ps_diagnostic,
        },
        "critical_point": solve.critical_point.flat.tolist(),
    }

    if out_report:
        write_report(report, out_report)
        out_dir = os.path.dirname(os.path.abspath(out_report))
        point_csv = os.path.join(out_dir, "critical_point.csv")
        write_grid_function(point_csv, solve.critical_point)
        energy_csv = profile_csv or os.path.join(out_dir, "energy_profile.csv")
        _write_energy_profile(energy_csv, solve.profile_snapshots)
        if path_csv:
            _write_path_csv(path_csv, problem, solve)
    return report, solve


def _write_energy_profile(path, snapshots):
    with open(path, "w") as fh:
        fh.write("iteration,tau,energy\n")
        for it, taus, energies in snapshots:
            for tau, e in zip(taus, energies):
                fh.write(f"{it},{tau:.17g},{e:.17g}\n")


def _write_path_csv(path, problem, solve):
    it, taus, energies = solve.profile_snapshots[-1]
    with open(path, "w") as fh:
        fh.write("tau,energy\n")
        for tau, e in zip(taus, energies):
            fh.write(f"{tau:.17g},{e:.17g}\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def report_payload(report):
    """Deterministic byte serialization of a report (no meta block)."""
    return json.dumps(report, sort_keys=True, indent=1, default=_jsonable)


def write_report(report, path):
    full = {
        "meta": {
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "tool": _TOOL,
        },
        "report": report,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(full, sort_keys=True, indent=1, default=_jsonable))
        fh.write("\n")


def write_failure(failure, path=None):
    payload = {
        "meta": {
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "tool": _TOOL,
        },
        "failure": failure.to_dict(),
    }
    text = json.dumps(payload, sort_keys=True, indent=1, default=_jsonable)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text
