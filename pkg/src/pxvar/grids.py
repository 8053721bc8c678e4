"""Uniform grids, interior-node grid functions, cell gradients, CSV io.

Functions subject to the zero Dirichlet condition store interior nodal
values only, so the boundary condition is structural rather than penalized.
Two quadrature sample sets are used throughout the package:

  * cell midpoints (one point per cell), where discrete gradients live, and
  * the interior nodes themselves with lumped weights of one cell volume
    per node, for integrands evaluated pointwise in u.

Both sets use the same scalar weight on a uniform grid.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "gradient",
    "gradient_magnitude",
    "gradient_adjoint",
    "node_field_to_cells",
    "write_grid_function",
    "read_grid_function",
]


class Grid:
    """Uniform tensor grid over a 1D interval or a 2D rectangle."""

    def __init__(self, extents, cells):
        extents = np.atleast_2d(np.asarray(extents, dtype=float))
        if extents.shape[1] != 2 or extents.shape[0] not in (1, 2):
            raise ValueError("extents must be (a, b) or ((ax, bx), (ay, by))")
        cells = np.atleast_1d(np.asarray(cells, dtype=int))
        if cells.shape[0] != extents.shape[0]:
            raise ValueError("need one cell count per axis")
        if np.any(cells < 2):
            raise ValueError("need at least 2 cells per axis (no interior node otherwise)")
        if np.any(extents[:, 1] <= extents[:, 0]):
            raise ValueError("extents must have positive length")
        self.dim = int(extents.shape[0])
        self.extents = tuple((float(a), float(b)) for a, b in extents)
        self.cells = tuple(int(n) for n in cells)
        self.h = tuple((b - a) / n for (a, b), n in zip(self.extents, self.cells))

    @property
    def node_shape(self):
        return tuple(n + 1 for n in self.cells)

    @property
    def interior_shape(self):
        return tuple(n - 1 for n in self.cells)

    @property
    def cell_shape(self):
        return self.cells

    @property
    def n_interior(self):
        return int(np.prod(self.interior_shape))

    @property
    def cell_volume(self):
        """Quadrature weight, identical for midpoint cells and lumped nodes."""
        return float(np.prod(self.h))

    @property
    def measure(self):
        return float(np.prod([b - a for a, b in self.extents]))

    def node_axes(self):
        return [np.linspace(a, b, n + 1) for (a, b), n in zip(self.extents, self.cells)]

    def interior_axes(self):
        return [ax[1:-1] for ax in self.node_axes()]

    def cell_axes(self):
        return [0.5 * (ax[:-1] + ax[1:]) for ax in self.node_axes()]

    def _mesh(self, axes):
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def interior_mesh(self):
        """Coordinate arrays over interior nodes, shaped like interior values."""
        return self._mesh(self.interior_axes())

    def node_mesh(self):
        return self._mesh(self.node_axes())

    def cell_mesh(self):
        return self._mesh(self.cell_axes())

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and self.dim == other.dim
            and self.extents == other.extents
            and self.cells == other.cells
        )

    def __hash__(self):
        return hash((self.extents, self.cells))

    def to_dict(self):
        return {"extents": [list(e) for e in self.extents], "cells": list(self.cells)}

    @classmethod
    def from_dict(cls, obj):
        return cls(obj["extents"], obj["cells"])

    def __repr__(self):
        return f"Grid(extents={self.extents}, cells={self.cells})"


class GridFunction:
    """Real values on the interior nodes of a grid; zero on the boundary."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if values.size != grid.n_interior:
            raise ValueError(
                f"expected {grid.n_interior} interior values, got {values.size}"
            )
        self.grid = grid
        self.values = values.reshape(grid.interior_shape).copy()

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.interior_shape))

    @classmethod
    def from_callable(cls, grid, fn):
        return cls(grid, fn(*grid.interior_mesh()))

    @property
    def flat(self):
        return self.values.ravel()

    def padded(self):
        """Values on all nodes with the zero boundary filled in."""
        out = np.zeros(self.grid.node_shape)
        if self.grid.dim == 1:
            out[1:-1] = self.values
        else:
            out[1:-1, 1:-1] = self.values
        return out

    def with_values(self, values):
        return GridFunction(self.grid, values)

    def copy(self):
        return GridFunction(self.grid, self.values)

    def __repr__(self):
        return f"GridFunction(grid={self.grid!r}, max|u|={np.abs(self.values).max():.3g})"


def gradient(u):
    """Cell-centered gradient: difference quotients, axis-averaged in 2D.

    Returns shape (nx,) in 1D and (nx, ny, 2) in 2D.
    """
    up = u.padded()
    g = u.grid
    if g.dim == 1:
        return np.diff(up) / g.h[0]
    hx, hy = g.h
    ddx = np.diff(up, axis=0)
    ddy = np.diff(up, axis=1)
    gx = (ddx[:, :-1] + ddx[:, 1:]) / (2.0 * hx)
    gy = (ddy[:-1, :] + ddy[1:, :]) / (2.0 * hy)
    return np.stack([gx, gy], axis=-1)


def gradient_magnitude(u):
    g = gradient(u)
    if u.grid.dim == 1:
        return np.abs(g)
    return np.sqrt(g[..., 0] ** 2 + g[..., 1] ** 2)


def gradient_adjoint(grid, coeff):
    """Transpose of the gradient map: interior array of sum_c coeff_c . dg_c/du.

    `coeff` is shaped like the output of :func:`gradient` (per-cell scalar in
    1D, per-cell 2-vector in 2D).  Together with the shared quadrature weight
    this assembles derivative fields of cell-quadrature energies.
    """
    if grid.dim == 1:
        c = np.asarray(coeff) / grid.h[0]
        return c[:-1] - c[1:]
    hx, hy = grid.h
    cx = np.asarray(coeff[..., 0]) / (2.0 * hx)
    cy = np.asarray(coeff[..., 1]) / (2.0 * hy)
    out = np.zeros(grid.node_shape)
    out[1:, :-1] += cx
    out[:-1, :-1] -= cx
    out[1:, 1:] += cx
    out[:-1, 1:] -= cx
    out[:-1, 1:] += cy
    out[:-1, :-1] -= cy
    out[1:, 1:] += cy
    out[1:, :-1] -= cy
    return out[1:-1, 1:-1]


def node_field_to_cells(grid, node_values):
    """Average a full-node field to cell centers (corner mean)."""
    v = np.asarray(node_values, dtype=float)
    if v.shape != grid.node_shape:
        raise ValueError(f"expected node shape {grid.node_shape}, got {v.shape}")
    if grid.dim == 1:
        return 0.5 * (v[:-1] + v[1:])
    return 0.25 * (v[:-1, :-1] + v[1:, :-1] + v[:-1, 1:] + v[1:, 1:])


def write_grid_function(path, u):
    """CSV with one row per node (boundary included): coordinates then value."""
    grid = u.grid
    mesh = grid.node_mesh()
    vals = u.padded()
    cols = [m.ravel() for m in mesh] + [vals.ravel()]
    header = ("x,value" if grid.dim == 1 else "x,y,value")
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_grid_function(path, grid):
    """Read a CSV written by :func:`write_grid_function` onto `grid`."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[0] != int(np.prod(grid.node_shape)) or data.shape[1] != grid.dim + 1:
        raise ValueError("function file does not match the grid")
    mesh = grid.node_mesh()
    for k in range(grid.dim):
        if not np.allclose(data[:, k], mesh[k].ravel(), atol=1e-9, rtol=0.0):
            raise ValueError("node coordinates in file do not match the grid")
    vals = data[:, -1].reshape(grid.node_shape)
    boundary = vals.copy()
    if grid.dim == 1:
        boundary[1:-1] = 0.0
        interior = vals[1:-1]
    else:
        boundary[1:-1, 1:-1] = 0.0
        interior = vals[1:-1, 1:-1]
    if np.abs(boundary).max() > 1e-12:
        raise ValueError("boundary values must be zero (Dirichlet condition)")
    return GridFunction(grid, interior)
