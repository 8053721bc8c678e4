"""Mountain-pass machinery: the energy R, clamped subgradients, the minimal
subgradient residual m(u), sphere geometry certificates, and the
path-deformation minimax solver.

The energy of a candidate u is

    R(u) = int (1/p)|grad u|^p  -  lam int (1/p)|u|^p  -  int j(x, u),

with the gradient term over cell midpoints and the two zero-order terms
over lumped nodes.  The lumped choice makes the generalized gradient of the
potential term act nodewise through Clarke intervals, so the minimal-norm
element of the candidate subdifferential at u is obtained by clamping the
smooth part

    g = residual_A(u) - lam |u|^{p-2} u

into the interval field [lo, hi] of j at (x, u(x)): the per-node residual
is dist(g_i, [lo_i, hi_i]) no matter which separable monotone norm
aggregates it.  m(u) reports the conjugate-exponent Luxemburg norm of the
distance field (the discrete dual-space norm); a weighted Euclidean
aggregate is available for diagnostics.

The solver maintains a discrete path from 0 to the crossing endpoint u_bar,
repeatedly moving every interior path point a backtracked step along the
negative clamped residual, re-equalizing the path by chord length while
keeping the current maximizer pinned, and stopping when the maximizer's
residuals fall below tolerance.  Endpoints never move.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import potentials
from .errors import GeometryFailure, SolverFailure
from .grids import GridFunction
from .modular import luxemburg_from_samples, sobolev_norm_modular, sobolev_norm_sum
from .operators import energy_J, residual_A
from .potentials import clarke_bounds, psi

__all__ = [
    "SolverConfig",
    "GeometryCertificate",
    "SolveReport",
    "energy_R",
    "R_subgradient_selection",
    "m_residual",
    "inclusion_residual_report",
    "sphere_minimum",
    "certify_geometry",
    "solve_mountain_pass",
]


@dataclass
class SolverConfig:
    path_points: int = 41
    tol_m: float = 1e-6
    tol_inclusion: float = 1e-5
    max_iterations: int = 20000
    step_factor: float = 0.1     # initial trial displacement, as a fraction of rho
    backtrack_factor: float = 0.5
    max_backtracks: int = 30
    patience: int = 500
    aggregate: str = "luxemburg"  # or "euclidean"
    profile_every: int = 100
    sphere_samples: int = 48
    rho_points: int = 12

    @classmethod
    def from_dict(cls, obj):
        cfg = cls()
        for k, v in (obj or {}).items():
            if not hasattr(cfg, k):
                raise ValueError(f"unknown solver option {k!r}")
            setattr(cfg, k, type(getattr(cfg, k))(v))
        return cfg

    def to_dict(self):
        return {
            "path_points": self.path_points,
            "tol_m": self.tol_m,
            "tol_inclusion": self.tol_inclusion,
            "max_iterations": self.max_iterations,
            "step_factor": self.step_factor,
            "backtrack_factor": self.backtrack_factor,
            "max_backtracks": self.max_backtracks,
            "patience": self.patience,
            "aggregate": self.aggregate,
            "profile_every": self.profile_every,
            "sphere_samples": self.sphere_samples,
            "rho_points": self.rho_points,
        }


@dataclass
class GeometryCertificate:
    rho: float
    eta: float
    u_bar: GridFunction
    r_zero: float
    r_ubar: float
    sphere_samples: int
    beta1: float | None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "rho": self.rho,
            "eta": self.eta,
            "r_zero": self.r_zero,
            "r_ubar": self.r_ubar,
            "sphere_samples": self.sphere_samples,
            "beta1": self.beta1,
            "diagnostics": self.diagnostics,
        }


@dataclass
class SolveReport:
    critical_point: GridFunction
    critical_value: float
    m_residual: float
    inclusion_max: float
    iterations: int
    path_history: list
    geometry: GeometryCertificate
    lambda_star: object
    audits: dict
    norms: dict
    eta_margin_ok: bool
    profile_snapshots: list
    ps_diagnostic: list


def _phi_p(t, exps):
    """|t|^{p-2} t, continuously extended to 0 at t = 0 (also for p < 2)."""
    a = np.abs(t)
    out = np.zeros_like(a)
    nz = a > 0.0
    out[nz] = a[nz] ** (exps[nz] - 2.0) * t[nz]
    return out


def energy_R(u, p, lam, spec):
    """R(u) = J(u) - lam * int |u|^p / p - psi(u)."""
    w = p.grid.cell_volume
    pint = p.interior_values
    lam_term = lam * float(np.sum(w * np.abs(u.values) ** pint / pint))
    return energy_J(u, p) - lam_term - psi(u, spec)


def _smooth_part(u, p, lam):
    return residual_A(u, p).values - lam * _phi_p(u.values, p.interior_values)


def _interval_field(u, spec):
    x, y, pv = spec._node_env()
    lo, hi = clarke_bounds(spec, u.flat, x, pv, y)
    shape = u.grid.interior_shape
    return lo.reshape(shape), hi.reshape(shape)


def R_subgradient_selection(u, p, lam, spec):
    """Nodal field residual_A(u) - lam |u|^{p-2} u - v*, v* the midpoint selection."""
    g = _smooth_part(u, p, lam)
    lo, hi = _interval_field(u, spec)
    return GridFunction(u.grid, g - 0.5 * (lo + hi))


def _clamped_residual(u, p, lam, spec):
    """Signed minimal-norm subgradient field s and the distance field |s|."""
    g = _smooth_part(u, p, lam)
    lo, hi = _interval_field(u, spec)
    s = g - potentials.interval_clamp(g, lo, hi)
    return s, np.abs(s)


def m_residual(u, p, lam, spec, aggregate="luxemburg"):
    """Minimal subgradient norm min{ ||u*||_* : u* in the candidate set }."""
    _, dist = _clamped_residual(u, p, lam, spec)
    w = p.grid.cell_volume
    if aggregate == "euclidean":
        return float(np.sqrt(np.sum(w * dist ** 2)))
    if aggregate != "luxemburg":
        raise ValueError(f"unknown aggregate {aggregate!r}")
    pint = p.interior_values.ravel()
    conj = pint / (pint - 1.0)
    return luxemburg_from_samples(dist.ravel(), w, conj)


def inclusion_residual_report(u, p, lam, spec, tol=1e-5):
    """Per-node distance of the smooth part to the Clarke interval, plus max."""
    _, dist = _clamped_residual(u, p, lam, spec)
    return {
        "distances": GridFunction(u.grid, dist),
        "max": float(dist.max()),
        "within_tol": bool(dist.max() <= tol),
        "is_trivial": bool(np.abs(u.values).max() == 0.0),
    }


def _beta1(p, lam, lambda_star, mu):
    """Small-sphere lower-bound constant from the two admissibility cases."""
    if lam <= 0.0:
        base = 1.0 / p.p_max
    else:
        if lambda_star is None or lambda_star <= 0.0:
            return None
        base = 1.0 / p.p_max - lam / (lambda_star * p.p_min)
    if mu is None or mu <= 0.0:
        return float(base)
    return float(min(base, 0.5 * mu))


def sphere_minimum(p, lam, spec, rho, directions):
    """Minimum of R over sampled points of the sphere ||u|| = rho."""
    eta = np.inf
    for d in directions:
        nrm = sobolev_norm_modular(d, p)
        if nrm == 0.0:
            continue
        point = d.with_values((rho / nrm) * d.values)
        eta = min(eta, energy_R(point, p, lam, spec))
    return float(eta)


def _sphere_directions(grid, samples, u_bar, rng):
    dirs = [u_bar.copy()]
    def sine(*coords):
        out = np.ones_like(coords[0])
        for c, (a, b) in zip(coords, grid.extents):
            out = out * np.sin(np.pi * (c - a) / (b - a))
        return out
    dirs.append(GridFunction.from_callable(grid, sine))
    for _ in range(max(0, samples - len(dirs))):
        dirs.append(GridFunction(grid, rng.standard_normal(grid.interior_shape)))
    return dirs


def certify_geometry(
    p, lam, spec, u_bar, rng=None,
    lambda_star=None, mu=None, rho_grid=None,
    sphere_samples=48, rho_points=12,
):
    """Find rho with min R on the sphere ||u|| = rho above both endpoints.

    Requires R(u_bar) <= 0 (the crossing endpoint certified upstream).  On
    failure raises with the measured sphere minima and the case constant
    beta1 as diagnostics.
    """
    rng = np.random.default_rng(rng)
    r_zero = energy_R(GridFunction.zeros(p.grid), p, lam, spec)
    r_ubar = energy_R(u_bar, p, lam, spec)
    norm_ubar = sobolev_norm_modular(u_bar, p)
    beta1 = _beta1(p, lam, lambda_star, mu)
    if r_ubar > 0.0:
        raise GeometryFailure(
            "crossing endpoint has positive energy; no valid u_bar",
            details={"r_ubar": r_ubar, "beta1": beta1},
        )
    if rho_grid is None:
        top = 0.5 * min(1.0, norm_ubar)
        rho_grid = np.geomspace(0.04 * top, top, rho_points)
    directions = _sphere_directions(p.grid, sphere_samples, u_bar, rng)
    level = max(r_zero, r_ubar)
    etas = [sphere_minimum(p, lam, spec, rho, directions) for rho in rho_grid]
    best = None
    for rho, eta in zip(rho_grid, etas):
        if eta > level + 1e-12 and (best is None or eta > best[1]):
            best = (float(rho), float(eta))
    if best is None:
        raise GeometryFailure(
            "no sphere radius separates the endpoints (no mountain-pass geometry)",
            details={
                "beta1": beta1,
                "r_ubar": r_ubar,
                "sphere_minima": {f"{r:.6g}": e for r, e in zip(rho_grid, etas)},
            },
        )
    rho, eta = best
    return GeometryCertificate(
        rho=rho,
        eta=eta,
        u_bar=u_bar,
        r_zero=float(r_zero),
        r_ubar=float(r_ubar),
        sphere_samples=len(directions),
        beta1=beta1,
        diagnostics={"eta_by_rho": {f"{r:.6g}": float(e) for r, e in zip(rho_grid, etas)}},
    )


def _requalize(path, pin):
    """Re-space path points by chord length on each side of the pinned index."""
    out = path.copy()
    last = path.shape[0] - 1
    for a, b in ((0, pin), (pin, last)):
        count = b - a + 1
        if count < 3:
            continue
        seg = path[a : b + 1]
        chord = np.sqrt(np.sum(np.diff(seg, axis=0) ** 2, axis=1))
        arc = np.concatenate([[0.0], np.cumsum(chord)])
        total = arc[-1]
        if total <= 0.0:
            continue
        targets = np.linspace(0.0, total, count)
        k = 0
        for m in range(1, count - 1):
            tv = targets[m]
            while k + 1 < len(arc) - 1 and arc[k + 1] < tv:
                k += 1
            span = arc[k + 1] - arc[k]
            theta = 0.0 if span == 0.0 else (tv - arc[k]) / span
            out[a + m] = seg[k] + theta * (seg[k + 1] - seg[k])
    return out


def _path_taus(path):
    chord = np.sqrt(np.sum(np.diff(path, axis=0) ** 2, axis=1))
    arc = np.concatenate([[0.0], np.cumsum(chord)])
    return arc / arc[-1] if arc[-1] > 0 else np.linspace(0.0, 1.0, path.shape[0])


def solve_mountain_pass(p, lam, spec, geometry, config=None):
    """Path-deformation minimax search for a nontrivial critical point.

    Keeps a discrete path from 0 to u_bar; every iteration locates the path
    maximizer of R, records (max energy, m at maximizer), then moves each
    interior point along its negative clamped residual with backtracking so
    no point rises above the current path maximum, and re-equalizes by
    chord length around the pinned maximizer.  Succeeds when both the
    aggregate residual m and the pointwise inclusion distance at the
    maximizer fall below tolerance.
    """
    cfg = config or SolverConfig()
    grid = p.grid
    shape = grid.interior_shape
    ndof = grid.n_interior
    w = grid.cell_volume
    ubar = geometry.u_bar.flat
    P = cfg.path_points
    path = np.outer(np.linspace(0.0, 1.0, P), ubar)

    def R_of(vec):
        return energy_R(GridFunction(grid, vec.reshape(shape)), p, lam, spec)

    def residuals(vec):
        u = GridFunction(grid, vec.reshape(shape))
        s, dist = _clamped_residual(u, p, lam, spec)
        return s.ravel(), dist

    r_vals = np.array([R_of(q) for q in path])
    steps = np.full(P, cfg.step_factor * geometry.rho)
    history = []
    snapshots = []
    ps_diag = []
    best_max = np.inf
    best_max_iter = 0
    success = False
    it = 0

    for it in range(1, cfg.max_iterations + 1):
        if not np.all(np.isfinite(r_vals)):
            bad = int(np.argmax(~np.isfinite(r_vals)))
            raise SolverFailure(
                "energy blow-up along the path",
                details={"path_index": bad, "iteration": it},
            )
        imax = int(np.argmax(r_vals))
        s_max, dist_max = residuals(path[imax])
        if cfg.aggregate == "euclidean":
            m_val = float(np.sqrt(np.sum(w * dist_max ** 2)))
        else:
            pint = p.interior_values.ravel()
            m_val = luxemburg_from_samples(dist_max.ravel(), w, pint / (pint - 1.0))
        history.append((float(r_vals[imax]), float(m_val)))
        if it == 1 or it % cfg.profile_every == 0:
            snapshots.append((it, _path_taus(path).tolist(), r_vals.tolist()))
            ps_diag.append(
                {
                    "iteration": it,
                    "max_energy": float(r_vals[imax]),
                    "m": float(m_val),
                    "maximizer_norm": float(
                        sobolev_norm_modular(GridFunction(grid, path[imax].reshape(shape)), p)
                    ),
                }
            )
        if m_val < cfg.tol_m and float(dist_max.max()) < cfg.tol_inclusion:
            success = True
            break

        # descend every interior point
        for j in range(1, P - 1):
            s, _ = residuals(path[j]) if j != imax else (s_max, dist_max)
            ns = float(np.sqrt(np.sum(s ** 2)))
            if ns == 0.0:
                continue
            dhat = -s / ns
            slope = w * ns  # directional derivative magnitude along dhat
            ell = steps[j]
            accepted = False
            for _ in range(cfg.max_backtracks + 1):
                cand = path[j] + ell * dhat
                rc = R_of(cand)
                if rc <= r_vals[j] - 1e-4 * ell * slope:
                    path[j] = cand
                    r_vals[j] = rc
                    steps[j] = min(2.0 * ell, geometry.rho)
                    accepted = True
                    break
                ell *= cfg.backtrack_factor
            if not accepted:
                steps[j] = max(ell, 1e-14)

        # re-equalize around the (possibly new) maximizer; revert if the
        # interpolation pushed the path maximum up
        pin = int(np.argmax(r_vals))
        new_path = _requalize(path, pin)
        new_vals = r_vals.copy()
        changed = np.any(new_path != path, axis=1)
        for j in np.nonzero(changed)[0]:
            new_vals[j] = R_of(new_path[j])
        if new_vals.max() <= r_vals.max() + 1e-12:
            path, r_vals = new_path, new_vals

        cur_max = float(r_vals.max())
        if cur_max < best_max - 1e-14 * max(1.0, abs(cur_max)):
            best_max = cur_max
            best_max_iter = it
        elif it - best_max_iter > cfg.patience:
            raise SolverFailure(
                "path maximum stagnated above tolerance",
                details={
                    "iteration": it,
                    "max_energy": cur_max,
                    "m": float(m_val),
                },
            )

    if not success:
        raise SolverFailure(
            "iteration cap reached before the residual tolerance",
            details={"iterations": it, "m": history[-1][1] if history else None},
        )

    point = GridFunction(grid, path[imax].reshape(shape))
    crit = float(r_vals[imax])
    m_final = m_val
    incl = inclusion_residual_report(point, p, lam, spec, tol=cfg.tol_inclusion)
    norm_modular = sobolev_norm_modular(point, p)
    if crit <= 0.0 or norm_modular <= geometry.rho / 2.0:
        raise SolverFailure(
            "converged to the trivial regime (zero-like state or nonpositive level)",
            details={"critical_value": crit, "norm": norm_modular},
        )
    snapshots.append((it, _path_taus(path).tolist(), r_vals.tolist()))
    return SolveReport(
        critical_point=point,
        critical_value=crit,
        m_residual=float(m_final),
        inclusion_max=incl["max"],
        iterations=it,
        path_history=history,
        geometry=geometry,
        lambda_star=None,
        audits={},
        norms={
            "modular_norm": float(norm_modular),
            "sum_norm": float(sobolev_norm_sum(point, p)),
        },
        eta_margin_ok=bool(crit >= geometry.eta - 1e-8),
        profile_snapshots=snapshots,
        ps_diagnostic=ps_diag,
    )
