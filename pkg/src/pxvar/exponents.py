"""Variable exponent fields p(x) with cached bounds and derived exponents.

A field is the exponent sampled at every grid node (boundary included,
since p is defined on the closure of the domain).  Construction validates

    1 < p_min <= p_max < N      and      p_max <= N p_min / (N - p_min),

where N is the analysis dimension used by the critical-exponent formulas;
it is independent of the grid dimension and must exceed 2.  Bounds are
taken over grid nodes, so refining the grid can only widen [p_min, p_max].
Cell-center values are corner averages, which keeps every quadrature
exponent inside [p_min, p_max]; the two-sided power inequalities between
modulars and norms then hold exactly at the discrete level.

Fields are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import numpy as np

from .expressions import Expression
from .grids import node_field_to_cells

__all__ = ["ExponentField", "build_exponent", "conjugate_exponent", "critical_exponent"]


class ExponentField:
    """p(x) sampled on all grid nodes, with cached p_min/p_max and cell values."""

    def __init__(self, grid, values, n_dim, expr=None, validate=True):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.node_shape:
            values = np.broadcast_to(values, grid.node_shape).astype(float)
        self.grid = grid
        self.values = values.copy()
        self.values.setflags(write=False)
        self.n_dim = int(n_dim)
        self.expr = expr
        self.cell_values = node_field_to_cells(grid, self.values)
        if grid.dim == 1:
            self.interior_values = self.values[1:-1]
        else:
            self.interior_values = self.values[1:-1, 1:-1]
        self.p_min = float(self.values.min())
        self.p_max = float(self.values.max())
        if validate:
            self._validate()

    def _validate(self):
        if self.n_dim <= 2:
            raise ValueError("analysis dimension N must be an integer > 2")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("exponent field contains non-finite values")
        if self.p_min <= 1.0:
            raise ValueError(f"exponent must stay strictly above 1 (min {self.p_min})")
        if self.p_max >= self.n_dim:
            raise ValueError(
                f"exponent must stay strictly below N={self.n_dim} (max {self.p_max})"
            )
        if self.p_max > self.p_hat_star + 1e-12:
            raise ValueError(
                f"p_max={self.p_max} exceeds the Sobolev bound "
                f"N*p_min/(N-p_min)={self.p_hat_star}"
            )

    @property
    def p_hat_star(self):
        return self.n_dim * self.p_min / (self.n_dim - self.p_min)

    def evaluate(self, x, y=None):
        """Exponent at arbitrary coordinates (requires an expression)."""
        if self.expr is None:
            raise ValueError("this field was built from raw values, not an expression")
        env = {"x": np.asarray(x, dtype=float)}
        if self.grid.dim == 2:
            if y is None:
                raise ValueError("2D exponent needs both coordinates")
            env["y"] = np.asarray(y, dtype=float)
        return self.expr(**env)

    def __repr__(self):
        return (
            f"ExponentField(p_min={self.p_min:.6g}, p_max={self.p_max:.6g}, "
            f"N={self.n_dim})"
        )


def build_exponent(expr, grid, n_dim):
    """Build and validate an exponent field from a formula in x (and y in 2D)."""
    allowed = ("x",) if grid.dim == 1 else ("x", "y")
    e = expr if isinstance(expr, Expression) else Expression(expr, variables=allowed)
    mesh = grid.node_mesh()
    env = {"x": mesh[0]}
    if grid.dim == 2:
        env["y"] = mesh[1]
    values = np.broadcast_to(np.asarray(e(**env), dtype=float), grid.node_shape)
    return ExponentField(grid, values, n_dim, expr=e)


def conjugate_exponent(p):
    """Nodewise Hölder conjugate p/(p-1); satisfies 1/p + 1/p' = 1."""
    return p.values / (p.values - 1.0)


def critical_exponent(p):
    """Nodewise Sobolev critical exponent N p / (N - p)."""
    return p.n_dim * p.values / (p.n_dim - p.values)
