"""Rayleigh-quotient estimation of the first eigenvalue-like threshold.

The quotient of a nonzero grid function u is

    Q(u) = modular(|grad u|) / modular(u)

(the gradient modular over cells, the value modular over lumped nodes; the
same quadratures the solver's energy uses).  Its infimum over nonzero u
gates the admissible range of the zero-order coefficient lam through

    lam < (p_min / p_max) * inf Q.

The estimator runs multi-start normalized subgradient descent, restarting
from random positive bumps plus the sampled first Dirichlet eigenfunction
of the constant-exponent case, and finishes each restart with an amplitude
scan t -> Q(t u) over a log grid.  The scan matters for genuinely variable
exponents: Q is then not scale invariant and the infimum can degenerate to
zero through pure rescaling, which normalization alone cannot see.  The
returned value is an upper bound on the infimum ("best value found") and is
reported as such; the admissibility gate subtracts a safety margin so an
overshooting estimate errs on the conservative side only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridFunction, gradient_magnitude
from .modular import luxemburg_from_samples, modular_lp
from .operators import (
    modular_gradient_of_gradient_term,
    modular_gradient_of_value_term,
)

__all__ = ["LambdaStarEstimate", "rayleigh_quotient", "estimate_lambda_star", "admissible"]


@dataclass
class LambdaStarEstimate:
    value: float
    minimizer: GridFunction
    iterations: int
    converged: bool
    possibly_degenerate: bool

    def to_dict(self):
        return {
            "value": self.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "possibly_degenerate": self.possibly_degenerate,
        }


def rayleigh_quotient(u, p):
    den = modular_lp(u, p)
    if den == 0.0:
        raise ValueError("Rayleigh quotient needs u != 0")
    return modular_lp(gradient_magnitude(u), p) / den


def _first_eigen_warmstart(grid):
    """Sampled product of first Dirichlet sine modes (exact for p == 2)."""
    def fn(*coords):
        out = np.ones_like(coords[0])
        for c, (a, b) in zip(coords, grid.extents):
            out = out * np.sin(np.pi * (c - a) / (b - a))
        return out

    return GridFunction.from_callable(grid, fn)


def _random_positive_bump(grid, rng):
    centers = [rng.uniform(a + 0.15 * (b - a), b - 0.15 * (b - a)) for a, b in grid.extents]
    widths = [rng.uniform(0.05, 0.35) * (b - a) for a, b in grid.extents]

    def fn(*coords):
        out = np.ones_like(coords[0])
        for c, c0, wdt in zip(coords, centers, widths):
            out = out * np.exp(-(((c - c0) / wdt) ** 2))
        return out

    return GridFunction.from_callable(grid, fn)


def _modular_unit_scale(vals, weight, exps, s0=1.0):
    """Solve  sum w (|v|/s)^p = 1  for s by Newton in log s.

    The modular is convex and strictly decreasing in log s, so the iteration
    converges globally; falls back to the bisection norm if it does not.
    """
    a = np.abs(np.asarray(vals, dtype=float).ravel())
    sigma = np.log(s0) if s0 > 0 else 0.0
    for _ in range(80):
        s = np.exp(sigma)
        r = weight * (a / s) ** exps
        f = float(r.sum()) - 1.0
        if abs(f) <= 1e-13:
            return s
        df = -float((exps * r).sum())
        sigma -= f / df
    return luxemburg_from_samples(vals, weight, exps, rtol=1e-14)


def _normalize(u, p, s0=1.0):
    s = _modular_unit_scale(u.values, p.grid.cell_volume, p.interior_values.ravel(), s0)
    return u.with_values(u.values / s)


def _descend(u0, p, max_iter):
    """Normalized subgradient descent on Q; returns (u, Q, steps, converged)."""
    u = _normalize(u0, p, s0=max(np.abs(u0.values).max(), 1e-12))
    q = rayleigh_quotient(u, p)
    steps = 0
    converged = False
    alpha = 1.0
    for _ in range(max_iter):
        den = modular_lp(u, p)
        num = modular_lp(gradient_magnitude(u), p)
        grad = (
            modular_gradient_of_gradient_term(u, p)
            - (num / den) * modular_gradient_of_value_term(u, p)
        ) / den
        accepted = None
        for _ in range(60):
            trial_vals = u.values - alpha * grad
            if not trial_vals.any():
                alpha *= 0.5
                continue
            trial = _normalize(u.with_values(trial_vals), p)
            qt = rayleigh_quotient(trial, p)
            if qt < q:
                accepted = (trial, qt)
                alpha *= 2.0
                break
            alpha *= 0.5
        if accepted is None:
            converged = True
            break
        steps += 1
        rel = (q - accepted[1]) / max(q, 1e-300)
        u, q = accepted
        if rel < 1e-10:
            converged = True
            break
    return u, q, steps, converged


def _amplitude_scan(u, p, n=41):
    best_u, best_q = u, rayleigh_quotient(u, p)
    for t in np.geomspace(1e-3, 1e3, n):
        ut = u.with_values(t * u.values)
        qt = rayleigh_quotient(ut, p)
        if qt < best_q:
            best_u, best_q = ut, qt
    return best_u, best_q


def estimate_lambda_star(p, restarts=16, max_iter=5000, rng=None):
    """Multi-start estimate of the quotient infimum (upper bound, reported)."""
    grid = p.grid
    rng = np.random.default_rng(rng)
    starts = [_first_eigen_warmstart(grid)]
    starts += [_random_positive_bump(grid, rng) for _ in range(max(0, restarts - 1))]
    best = None
    for u0 in starts:
        u, q, steps, conv = _descend(u0, p, max_iter)
        u, q = _amplitude_scan(u, p)
        if best is None or q < best[1]:
            best = (u, q, steps, conv)
    u, q, steps, conv = best
    return LambdaStarEstimate(
        value=float(q),
        minimizer=u,
        iterations=int(steps),
        converged=bool(conv),
        possibly_degenerate=bool(q < 1e-3),
    )


def admissible(lam, estimate, p):
    """Gate lam < (p_min/p_max) * lambda_star with a safety margin.

    Any lam <= 0 is admissible: the threshold is nonnegative, so the strict
    inequality is vacuous there.
    """
    if lam <= 0.0:
        return True
    margin = 1e-6 * max(1.0, estimate.value)
    return bool(lam < (p.p_min / p.p_max) * estimate.value - margin)
