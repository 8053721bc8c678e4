"""Modulars, Luxemburg norms, Sobolev norms and the classical inequalities.

The Lebesgue modular of a grid function u is the lumped nodal sum

    phi(u) = sum_i w |u_i|^{p_i},        w = cell volume,

while the modular of a cell field (typically a gradient magnitude) is the
midpoint sum over cells.  Both feed the same bisection-based Luxemburg norm

    ||u|| = inf { lam > 0 : phi(u / lam) <= 1 },

which is absolutely homogeneous even for variable exponents, unlike the
modular itself.  The W^{1,p(x)} modular combines both sample sets,

    Phi(u) = phi(|grad u|) + phi(u),

and induces the Sobolev norm used for every solver threshold; the additive
norm ||u||_{p(x)} + ||grad u||_{p(x)} is also provided and always lies
within a factor of two of the induced one.

The bisection returns the upper end of its final bracket, so the modular at
the returned scale is guaranteed <= 1; this keeps the Hölder inequality
check valid at its tight slack despite root-finder error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridFunction, gradient, gradient_adjoint, gradient_magnitude

__all__ = [
    "ModularReport",
    "modular_lp",
    "luxemburg_norm",
    "modular_w1p",
    "sobolev_norm_sum",
    "sobolev_norm_modular",
    "holder_check",
    "poincare_constant_estimate",
    "modular_report",
    "luxemburg_from_samples",
    "modular_from_samples",
]

#: Relative tolerance and iteration cap of the Luxemburg bisection.
LUX_RTOL = 1e-10
LUX_MAX_ITER = 200


@dataclass(frozen=True)
class ModularReport:
    modular_value: float
    norm_value: float
    regime: str  # below_one | equal_one | above_one


def _check_grid(u, p):
    if u.grid != p.grid:
        raise ValueError("grid function and exponent field live on different grids")


def _samples(u, p):
    """(values, weight, exponents) for a grid function or a cell field."""
    if isinstance(u, GridFunction):
        _check_grid(u, p)
        return u.values.ravel(), p.grid.cell_volume, p.interior_values.ravel()
    arr = np.asarray(u, dtype=float)
    if arr.shape == p.grid.cell_shape:
        return arr.ravel(), p.grid.cell_volume, p.cell_values.ravel()
    raise ValueError(
        f"expected a GridFunction or a cell-shaped array {p.grid.cell_shape}, "
        f"got shape {arr.shape}"
    )


def modular_from_samples(vals, weight, exps):
    return float(np.sum(weight * np.abs(vals) ** exps))


def luxemburg_from_samples(vals, weight, exps, rtol=LUX_RTOL, max_iter=LUX_MAX_ITER):
    """Root of  modular(vals / lam) = 1  by bracketing plus bisection.

    The map lam -> modular(vals/lam) is strictly decreasing, so bisection is
    unconditionally safe.  Returns 0 for identically zero input.
    """
    a = np.abs(np.asarray(vals, dtype=float))
    if not a.any():
        return 0.0

    def mod(lam):
        with np.errstate(over="ignore"):
            return float(np.sum(weight * (a / lam) ** exps))

    lo, hi = 1e-12, 1e12
    grow = 0
    while mod(hi) > 1.0:
        hi *= 10.0
        grow += 1
        if grow > 60:
            raise ArithmeticError("Luxemburg bracket expansion failed (upper)")
    grow = 0
    while mod(lo) < 1.0:
        lo /= 10.0
        grow += 1
        if grow > 60:
            raise ArithmeticError("Luxemburg bracket expansion failed (lower)")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mod(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return float(hi)


def modular_lp(u, p):
    """Modular of a grid function (lumped nodes) or a cell field (midpoints)."""
    return modular_from_samples(*_samples(u, p))


def luxemburg_norm(u, p):
    return luxemburg_from_samples(*_samples(u, p))


def modular_w1p(u, p):
    """Phi(u): gradient modular over cells plus value modular over nodes."""
    _check_grid(u, p)
    return modular_lp(gradient_magnitude(u), p) + modular_lp(u, p)


def _w1p_samples(u, p):
    gv, gw, gp = _samples(gradient_magnitude(u), p)
    uv, uw, up_ = _samples(u, p)
    assert gw == uw
    return np.concatenate([gv, uv]), gw, np.concatenate([gp, up_])


def sobolev_norm_modular(u, p):
    """Luxemburg-type norm induced by Phi: the root of Phi(u / a) = 1."""
    _check_grid(u, p)
    return luxemburg_from_samples(*_w1p_samples(u, p))


def sobolev_norm_sum(u, p):
    """Additive Sobolev norm ||u||_{p(x)} + ||grad u||_{p(x)}."""
    _check_grid(u, p)
    return luxemburg_norm(u, p) + luxemburg_norm(gradient_magnitude(u), p)


def holder_check(u, v, p):
    """Both sides of the generalized Hölder inequality and the verdict.

    lhs = integral of |u v|; rhs = (1/p_min + 1/p'_min) ||u||_{p(x)} ||v||_{p'(x)}.
    """
    _check_grid(u, p)
    _check_grid(v, p)
    w = p.grid.cell_volume
    lhs = float(np.sum(w * np.abs(u.values * v.values)))
    pint = p.interior_values.ravel()
    conj_int = pint / (pint - 1.0)
    conj_min = p.p_max / (p.p_max - 1.0)
    const = 1.0 / p.p_min + 1.0 / conj_min
    norm_u = luxemburg_from_samples(u.values.ravel(), w, pint)
    norm_v = luxemburg_from_samples(v.values.ravel(), w, conj_int)
    rhs = const * norm_u * norm_v
    return {
        "lhs": lhs,
        "rhs": rhs,
        "constant": const,
        "satisfied": bool(lhs <= rhs + 1e-10),
    }


def modular_report(u, p):
    m = modular_lp(u, p)
    n = luxemburg_norm(u, p)
    if abs(m - 1.0) <= 1e-9:
        regime = "equal_one"
    elif m < 1.0:
        regime = "below_one"
    else:
        regime = "above_one"
    return ModularReport(modular_value=m, norm_value=n, regime=regime)


# -- Poincaré constant ------------------------------------------------------

def _lux_gradient_nodal(vals, weight, exps, lam):
    """d lam / d vals for the nodal Luxemburg norm (implicit differentiation)."""
    r = np.abs(vals) / lam
    num = weight * exps * r ** (exps - 1.0) * np.sign(vals) / lam
    den = float(np.sum(weight * exps * r ** exps / lam))
    return num / den


def _lux_gradient_cells(u, p, lam):
    """d/d(nodal values) of the Luxemburg norm of |grad u| (interior shaped)."""
    g = gradient(u)
    mag = gradient_magnitude(u)
    w = p.grid.cell_volume
    pc = p.cell_values
    r = np.zeros_like(mag)
    nz = mag > 0.0
    r[nz] = mag[nz] / lam
    coef = np.zeros_like(mag)
    coef[nz] = w * pc[nz] * r[nz] ** (pc[nz] - 1.0) / lam
    if u.grid.dim == 1:
        cell_coef = coef * np.sign(g)
    else:
        unit = np.zeros_like(g)
        unit[nz] = g[nz] / mag[nz][..., None]
        cell_coef = coef[..., None] * unit
    den = float(np.sum(w * pc[nz] * r[nz] ** pc[nz] / lam))
    return gradient_adjoint(u.grid, cell_coef) / den


def _sine_bump(grid):
    def fn(*coords):
        out = np.ones_like(coords[0])
        for c, (a, b) in zip(coords, grid.extents):
            out = out * np.sin(np.pi * (c - a) / (b - a))
        return out

    return GridFunction.from_callable(grid, fn)


def _random_bump(grid, rng):
    centers = [rng.uniform(a + 0.2 * (b - a), b - 0.2 * (b - a)) for a, b in grid.extents]
    widths = [rng.uniform(0.05, 0.3) * (b - a) for a, b in grid.extents]

    def fn(*coords):
        out = np.ones_like(coords[0])
        for c, c0, wdt in zip(coords, centers, widths):
            out = out * np.exp(-(((c - c0) / wdt) ** 2))
        return out

    return GridFunction.from_callable(grid, fn)


def poincare_constant_estimate(p, restarts=8, max_iter=200, rng=None):
    """Empirical lower bound on the constant in ||u|| <= c ||grad u||.

    Maximizes the ratio of Luxemburg norms over random starts with
    backtracking gradient ascent; the ratio is scale invariant because both
    norms are absolutely homogeneous.
    """
    grid = p.grid
    rng = np.random.default_rng(rng)
    w = grid.cell_volume
    pint = p.interior_values.ravel()

    def ratio(u):
        nu = luxemburg_from_samples(u.values.ravel(), w, pint)
        ng = luxemburg_from_samples(
            gradient_magnitude(u).ravel(), w, p.cell_values.ravel()
        )
        return nu / ng, nu, ng

    starts = [_sine_bump(grid)] + [_random_bump(grid, rng) for _ in range(restarts - 1)]
    best = 0.0
    for u in starts:
        u = u.with_values(u.values / np.abs(u.values).max())
        val, nu, ng = ratio(u)
        for _ in range(max_iter):
            gn = _lux_gradient_nodal(u.values.ravel(), w, pint, nu).reshape(
                grid.interior_shape
            )
            gc = _lux_gradient_cells(u, p, ng)
            ascent = gn / nu - gc / ng  # gradient of log ratio
            step = 1.0
            prev = val
            improved = False
            for _ in range(40):
                trial_vals = u.values + step * ascent
                if not trial_vals.any():
                    break
                trial = u.with_values(trial_vals / np.abs(trial_vals).max())
                tval, tnu, tng = ratio(trial)
                if tval > val * (1.0 + 1e-14):
                    u, val, nu, ng = trial, tval, tnu, tng
                    improved = True
                    break
                step *= 0.5
            if not improved or (val - prev) < 1e-10 * prev:
                break
        best = max(best, val)
    return float(best)
