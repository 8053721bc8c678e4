"""Property suite: every module invariant exercised at desk scale.

Each check returns (passed, detail, witness).  The suite runs with a fixed
seed so verdicts are reproducible; the properties themselves hold for any
seed.  `pxvar selftest` prints one line per check and a JSON summary.
"""

from __future__ import annotations

import numpy as np

from . import potentials
from .exponents import build_exponent, conjugate_exponent
from .grids import Grid, GridFunction, gradient_magnitude
from .modular import (
    holder_check,
    luxemburg_norm,
    modular_lp,
    modular_w1p,
    sobolev_norm_modular,
)
from .mountain_pass import energy_R, m_residual
from .operators import (
    apply_A_bilinear,
    gradient_check_A_equals_Jprime,
    monotonicity_probe,
    s_plus_probe,
)
from .potentials import bump_potential, clarke_interval, psi, psi_subgradient_selection
from .rayleigh import estimate_lambda_star, rayleigh_quotient

__all__ = ["run_property_suite"]


def _setup(seed):
    grid = Grid((0.0, 1.0), 48)
    p = build_exponent("2 + x", grid, 5)
    rng = np.random.default_rng(seed)
    return grid, p, rng


def _random_u(grid, rng, scale=1.0):
    return GridFunction(grid, scale * rng.standard_normal(grid.interior_shape))


def check_modular_norm_lemma(seed):
    grid, p, rng = _setup(seed)
    for k in range(60):
        u = _random_u(grid, rng, scale=10.0 ** rng.uniform(-2, 2))
        m = modular_lp(u, p)
        n = luxemburg_norm(u, p)
        unit = modular_lp(u.with_values(u.values / n), p)
        if abs(unit - 1.0) > 1e-8:
            return False, "modular at unit scale off", {"k": k, "unit": unit}
        if n > 1 + 1e-8 and not (n ** p.p_min - 1e-8 <= m <= n ** p.p_max + 1e-8):
            return False, "power bounds (norm > 1) violated", {"k": k, "m": m, "n": n}
        if n < 1 - 1e-8 and not (n ** p.p_max - 1e-8 <= m <= n ** p.p_min + 1e-8):
            return False, "power bounds (norm < 1) violated", {"k": k, "m": m, "n": n}
        if (m < 1 - 1e-8 and n > 1 + 1e-8) or (m > 1 + 1e-8 and n < 1 - 1e-8):
            return False, "regime mismatch", {"k": k, "m": m, "n": n}
    return True, "60 random functions", None


def check_luxemburg_homogeneity(seed):
    grid, p, rng = _setup(seed)
    u = _random_u(grid, rng)
    n = luxemburg_norm(u, p)
    for t in (-3.7, -1.0, 0.25, 2.0, 117.0):
        nt = luxemburg_norm(u.with_values(t * u.values), p)
        if abs(nt - abs(t) * n) > 1e-8 * max(1.0, abs(t) * n):
            return False, "homogeneity violated", {"t": t, "nt": nt, "n": n}
    return True, "5 scalings", None


def check_sobolev_modular_norm(seed):
    grid, p, rng = _setup(seed)
    for k in range(40):
        u = _random_u(grid, rng, scale=10.0 ** rng.uniform(-2, 2))
        a = sobolev_norm_modular(u, p)
        unit = modular_w1p(u.with_values(u.values / a), p)
        if abs(unit - 1.0) > 1e-8:
            return False, "Phi at unit scale off", {"k": k, "unit": unit}
        phi = modular_w1p(u, p)
        if a > 1 + 1e-8 and not (a ** p.p_min - 1e-8 <= phi <= a ** p.p_max + 1e-8):
            return False, "Phi power bounds violated", {"k": k}
        if a < 1 - 1e-8 and not (a ** p.p_max - 1e-8 <= phi <= a ** p.p_min + 1e-8):
            return False, "Phi power bounds violated", {"k": k}
    return True, "40 random functions", None


def check_holder(seed):
    grid, p, rng = _setup(seed)
    for k in range(60):
        u = _random_u(grid, rng, scale=10.0 ** rng.uniform(-1, 1))
        v = _random_u(grid, rng, scale=10.0 ** rng.uniform(-1, 1))
        res = holder_check(u, v, p)
        if not res["satisfied"]:
            return False, "Hölder inequality violated", {"k": k, **res}
    return True, "60 random pairs", None


def check_operator_identity(seed):
    grid, p, rng = _setup(seed)
    for k in range(30):
        u = _random_u(grid, rng)
        lhs = apply_A_bilinear(u, u, p)
        rhs = modular_lp(gradient_magnitude(u), p)
        if abs(lhs - rhs) > 1e-12 * max(1.0, abs(rhs)):
            return False, "<Au,u> != modular(|grad u|)", {"k": k, "lhs": lhs, "rhs": rhs}
    return True, "30 random functions", None


def check_monotonicity(seed):
    grid, p, rng = _setup(seed)
    for k in range(100):
        u = _random_u(grid, rng)
        v = _random_u(grid, rng)
        val = monotonicity_probe(u, v, p)
        if val < -1e-12:
            return False, "monotonicity violated", {"k": k, "value": val}
    return True, "100 random pairs", None


def check_gradient_consistency(seed):
    grid, p, rng = _setup(seed)
    u = _random_u(grid, rng)
    err = gradient_check_A_equals_Jprime(u, p, rng=rng)
    return err <= 1e-5, f"worst relative error {err:.2e}", None


def check_s_plus(seed):
    grid, p, rng = _setup(seed)
    probe = s_plus_probe(_random_u(grid, rng), p)
    pair_ok = all(x > y for x, y in zip(probe["pairings"], probe["pairings"][1:]))
    dist_ok = all(x > y for x, y in zip(probe["distances"], probe["distances"][1:]))
    return pair_ok and dist_ok, "pairing and distance decay together", probe


def check_clarke_fd(seed):
    grid, p, _ = _setup(seed)
    spec = bump_potential(p, mu=1.0, sigma=5.0)
    for t in (-1.7, -0.4, 0.3, 1.5, 2.6):
        x = 0.5
        iv = clarke_interval(spec, x, t)
        if iv.lo != iv.hi:
            return False, "interval not a singleton at a smooth point", {"t": t}
        h = 1e-6
        fd = (potentials.j_value(spec, x, t + h) - potentials.j_value(spec, x, t - h)) / (2 * h)
        if abs(fd - iv.lo) > 1e-4:
            return False, "derivative mismatch", {"t": t, "fd": fd, "deriv": iv.lo}
    return True, "5 smooth points", None


def check_psi_selection_fd(seed):
    grid, p, rng = _setup(seed)
    spec = bump_potential(p, mu=1.0, sigma=5.0)
    u = _random_u(grid, rng, scale=0.4)
    d = _random_u(grid, rng)
    sel = psi_subgradient_selection(u, spec)
    pairing = float(np.sum(grid.cell_volume * sel.values * d.values))
    h = 1e-6
    fd = (
        psi(u.with_values(u.values + h * d.values), spec)
        - psi(u.with_values(u.values - h * d.values), spec)
    ) / (2 * h)
    ok = abs(fd - pairing) <= 1e-5 * max(1.0, abs(pairing))
    return ok, f"fd {fd:.6g} vs pairing {pairing:.6g}", None


def check_m_residual_clamp(seed):
    """The minimal-norm residual must ignore misfit absorbed by the interval."""
    grid = Grid((0.0, 1.0), 8)
    p = build_exponent("2", grid, 3)
    spec = bump_potential(p, mu=1.0, sigma=5.0)
    u = GridFunction(grid, np.array([0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0]))
    from .mountain_pass import _clamped_residual, _smooth_part, _interval_field

    g = _smooth_part(u, p, 0.0)
    lo, hi = _interval_field(u, spec)
    s, dist = _clamped_residual(u, p, 0.0, spec)
    expect = np.maximum(np.maximum(lo - g, g - hi), 0.0)
    if not np.allclose(dist, expect, atol=1e-14):
        bad = int(np.argmax(np.abs(dist - expect)))
        return False, "clamped distance wrong", {
            "node": bad, "g": float(g.ravel()[bad]),
            "lo": float(lo.ravel()[bad]), "hi": float(hi.ravel()[bad]),
            "got": float(dist.ravel()[bad]), "expected": float(expect.ravel()[bad]),
        }
    inside = (g >= lo) & (g <= hi)
    if not np.all(dist[inside] == 0.0):
        return False, "in-interval nodes must contribute nothing", None
    m = m_residual(u, p, 0.0, spec)
    if m < 0.0:
        return False, "negative m", None
    return True, "engineered kink block", None


def check_rayleigh(seed):
    grid, p, rng = _setup(seed)
    est = estimate_lambda_star(p, restarts=4, rng=rng)
    for k in range(25):
        u = _random_u(grid, rng, scale=10.0 ** rng.uniform(-2, 2))
        if rayleigh_quotient(u, p) < est.value - 1e-12:
            return False, "estimate not an upper bound on sampled quotients", {"k": k}
    return True, f"estimate {est.value:.6g}", None


def check_energy_zero(seed):
    grid, p, _ = _setup(seed)
    spec = bump_potential(p, mu=1.0, sigma=5.0)
    val = energy_R(GridFunction.zeros(grid), p, 0.7, spec)
    return val == 0.0, f"R(0) = {val}", None


CHECKS = [
    ("modular_norm_lemma", check_modular_norm_lemma),
    ("luxemburg_homogeneity", check_luxemburg_homogeneity),
    ("sobolev_modular_norm", check_sobolev_modular_norm),
    ("holder_inequality", check_holder),
    ("operator_identity", check_operator_identity),
    ("operator_monotonicity", check_monotonicity),
    ("gradient_consistency", check_gradient_consistency),
    ("s_plus_probe", check_s_plus),
    ("clarke_fd_consistency", check_clarke_fd),
    ("psi_selection_fd", check_psi_selection_fd),
    ("m_residual_clamping", check_m_residual_clamp),
    ("rayleigh_upper_bound", check_rayleigh),
    ("energy_zero_at_origin", check_energy_zero),
]


def run_property_suite(seed=20240801, verbose=True):
    results = {}
    all_passed = True
    for name, fn in CHECKS:
        passed, detail, witness = fn(seed)
        results[name] = {"passed": bool(passed), "detail": detail}
        if witness is not None and not passed:
            results[name]["witness"] = witness
        all_passed = all_passed and passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}  {name:28s} {detail}")
    summary = {"seed": seed, "all_passed": all_passed, "checks": results}
    if verbose:
        print(f"{'all checks passed' if all_passed else 'FAILURES PRESENT'}")
    return summary
