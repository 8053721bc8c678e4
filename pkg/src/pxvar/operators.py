"""The weak p(x)-Laplacian, its energy, and operator consistency probes.

Everything is assembled from one cell-centered flux field

    F(u) = |grad u|^{p-2} grad u,

with the degenerate factor continuously extended to zero where the cell
gradient vanishes (the pairing integrand tends to 0 as grad u -> 0 for any
p > 1).  The duality pairing, its nodal assembly and the energy

    J(u) = integral (1/p) |grad u|^p

all share the same quadrature, so the discrete identity A = J' is exact up
to roundoff and <Au, u> equals the modular of |grad u| identically.

All functions are pure; reductions are plain numpy sums with a fixed order,
so results are deterministic and safe to evaluate concurrently.
"""

from __future__ import annotations

import numpy as np

from .grids import GridFunction, gradient, gradient_adjoint, gradient_magnitude
from .modular import modular_lp, sobolev_norm_modular

__all__ = [
    "apply_A_bilinear",
    "residual_A",
    "energy_J",
    "gradient_check_A_equals_Jprime",
    "monotonicity_probe",
    "s_plus_probe",
]


def _flux(u, p):
    """Cell field |grad u|^{p-2} grad u, zeroed on degenerate cells."""
    g = gradient(u)
    mag = gradient_magnitude(u)
    fac = np.zeros_like(mag)
    nz = mag > 0.0
    fac[nz] = mag[nz] ** (p.cell_values[nz] - 2.0)
    if u.grid.dim == 1:
        return fac * g
    return fac[..., None] * g


def apply_A_bilinear(u, v, p):
    """Duality pairing <Au, v> = integral |grad u|^{p-2} (grad u, grad v)."""
    if u.grid != v.grid or u.grid != p.grid:
        raise ValueError("u, v and p must share one grid")
    flux = _flux(u, p)
    gv = gradient(v)
    if u.grid.dim == 1:
        integrand = flux * gv
    else:
        integrand = flux[..., 0] * gv[..., 0] + flux[..., 1] * gv[..., 1]
    return float(p.grid.cell_volume * np.sum(integrand))


def residual_A(u, p):
    """Nodal assembly r of A: <Au, v> = sum_i r_i v_i w for every nodal v.

    For p == 2 this is the standard second-difference stencil.  The cell
    and nodal quadrature weights coincide on a uniform grid, so they cancel
    in the assembly.
    """
    if u.grid != p.grid:
        raise ValueError("u and p must share one grid")
    return GridFunction(u.grid, gradient_adjoint(u.grid, _flux(u, p)))


def energy_J(u, p):
    """J(u) = integral (1/p) |grad u|^p over cell midpoints."""
    if u.grid != p.grid:
        raise ValueError("u and p must share one grid")
    mag = gradient_magnitude(u)
    pc = p.cell_values
    return float(p.grid.cell_volume * np.sum(mag ** pc / pc))


def gradient_check_A_equals_Jprime(u, p, directions=20, step=1e-5, rng=None):
    """Worst relative error of central differences of J against <Au, d>."""
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(directions):
        d = GridFunction(u.grid, rng.standard_normal(u.grid.interior_shape))
        d = d.with_values(d.values / np.abs(d.values).max())
        pairing = apply_A_bilinear(u, d, p)
        plus = energy_J(u.with_values(u.values + step * d.values), p)
        minus = energy_J(u.with_values(u.values - step * d.values), p)
        fd = (plus - minus) / (2.0 * step)
        rel = abs(pairing - fd) / max(abs(pairing), abs(fd), 1e-12)
        worst = max(worst, rel)
    return worst


def monotonicity_probe(u, v, p):
    """<Au - Av, u - v>; nonnegative cell by cell for any p > 1."""
    diff = u.with_values(u.values - v.values)
    return apply_A_bilinear(u, diff, p) - apply_A_bilinear(v, diff, p)


def s_plus_probe(u, p, steps=6):
    """Finite-dimensional smoke test of the (S+) property.

    Perturbs u by a shrinking high-frequency mode and reports, per step, the
    pairing <Au_n, u_n - u> and the Sobolev distance ||u_n - u||; both must
    decay to zero together.
    """
    grid = u.grid
    idx = np.indices(grid.interior_shape).sum(axis=0)
    mode = np.where(idx % 2 == 0, 1.0, -1.0)
    pairings, distances = [], []
    for n in range(1, steps + 1):
        eps = 2.0 ** (-n)
        un = u.with_values(u.values + eps * mode)
        dn = un.with_values(un.values - u.values)
        pairings.append(apply_A_bilinear(un, dn, p))
        distances.append(sobolev_norm_modular(dn, p))
    return {"pairings": pairings, "distances": distances}


def modular_gradient_of_gradient_term(u, p):
    """d/du of the cell modular of |grad u| (interior-shaped array)."""
    g = gradient(u)
    mag = gradient_magnitude(u)
    w = p.grid.cell_volume
    pc = p.cell_values
    fac = np.zeros_like(mag)
    nz = mag > 0.0
    fac[nz] = w * pc[nz] * mag[nz] ** (pc[nz] - 2.0)
    coeff = fac * g if u.grid.dim == 1 else fac[..., None] * g
    return gradient_adjoint(u.grid, coeff)


def modular_gradient_of_value_term(u, p):
    """d/du of the nodal modular of u (interior-shaped array)."""
    w = p.grid.cell_volume
    pint = p.interior_values
    a = np.abs(u.values)
    out = np.zeros_like(a)
    nz = a > 0.0
    out[nz] = w * pint[nz] * a[nz] ** (pint[nz] - 1.0) * np.sign(u.values[nz])
    return out
