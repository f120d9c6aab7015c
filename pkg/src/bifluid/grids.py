"""Uniform box grids with cell-averaged scalars and face-normal vectors.

Scalars live at cell centers; vector quantities store one normal component
per face per axis (staggered / MAC layout).  The discrete gradient and
divergence are exact adjoints when the vector field has zero boundary faces:

    sum_cells g * div(F) * dV  ==  - sum_faces grad(g) * F * dV

with the face sum weighted by the cell volume dV.  This pairing is what
makes mass conservation and the Poisson duality identity hold to roundoff.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

_MIN_CELLS = 4


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product grid on the box prod_i [0, L_i]."""

    dim: int
    lengths: tuple
    n_cells: tuple
    dx: tuple

    @property
    def total_cells(self) -> int:
        return int(np.prod(self.n_cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def axis_centers(self, axis: int) -> np.ndarray:
        n, d = self.n_cells[axis], self.dx[axis]
        return (np.arange(n) + 0.5) * d

    def cell_centers(self):
        """Meshgrid ('ij') of cell-center coordinates, one array per axis."""
        axes = [self.axis_centers(a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def face_shape(self, axis: int) -> tuple:
        shape = list(self.n_cells)
        shape[axis] += 1
        return tuple(shape)


def make_grid(dim: int, lengths, n_cells) -> Grid:
    if dim not in (1, 2):
        raise ConfigError(f"dim must be 1 or 2, got {dim}")
    lengths = tuple(float(L) for L in lengths)
    n_cells = tuple(int(n) for n in n_cells)
    if len(lengths) != dim or len(n_cells) != dim:
        raise ConfigError("lengths and n_cells must have one entry per axis")
    if any(L <= 0 for L in lengths):
        raise ConfigError("domain lengths must be positive")
    if any(n < _MIN_CELLS for n in n_cells):
        raise ConfigError(f"need at least {_MIN_CELLS} cells per axis")
    dx = tuple(L / n for L, n in zip(lengths, n_cells))
    return Grid(dim=dim, lengths=lengths, n_cells=n_cells, dx=dx)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One value per cell (cell average). Values are copied and read-only."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values)
        if arr.shape != tuple(self.grid.n_cells):
            raise DomainError(
                f"scalar field shape {arr.shape} does not match grid {self.grid.n_cells}"
            )
        object.__setattr__(self, "values", arr)

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.n_cells, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        return cls(grid, fn(*grid.cell_centers()))


@dataclass(frozen=True, eq=False)
class VectorField:
    """One normal component per face per axis; zero boundary faces model no-flux."""

    grid: Grid
    components: tuple

    def __post_init__(self):
        comps = []
        for axis, comp in enumerate(self.components):
            arr = _frozen(comp)
            if arr.shape != self.grid.face_shape(axis):
                raise DomainError(
                    f"axis-{axis} face array has shape {arr.shape}, "
                    f"expected {self.grid.face_shape(axis)}"
                )
            comps.append(arr)
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, tuple(np.zeros(grid.face_shape(a)) for a in range(grid.dim)))

    def boundary_max_abs(self) -> float:
        """Largest absolute normal component on the domain boundary."""
        worst = 0.0
        for axis, comp in enumerate(self.components):
            first = np.take(comp, 0, axis=axis)
            last = np.take(comp, -1, axis=axis)
            worst = max(worst, float(np.abs(first).max()), float(np.abs(last).max()))
        return worst

    def has_zero_boundary(self) -> bool:
        return self.boundary_max_abs() == 0.0


def _axis_slices(axis, ndim):
    lo = [slice(None)] * ndim
    hi = [slice(None)] * ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return tuple(lo), tuple(hi)


def gradient(f: ScalarField, neumann_zero: bool = True) -> VectorField:
    """Central difference across interior faces, (f_R - f_L)/dx.

    Boundary faces are 0 under the homogeneous Neumann closure; otherwise a
    one-sided second-order stencil is used.
    """
    g = f.grid
    comps = []
    for axis in range(g.dim):
        d = g.dx[axis]
        out = np.zeros(g.face_shape(axis))
        lo, hi = _axis_slices(axis, g.dim)
        interior = [slice(None)] * g.dim
        interior[axis] = slice(1, -1)
        out[tuple(interior)] = (f.values[hi] - f.values[lo]) / d
        if not neumann_zero:
            v = f.values
            first = [slice(None)] * g.dim
            last = [slice(None)] * g.dim
            first[axis] = slice(0, 1)
            last[axis] = slice(-1, None)
            c0 = np.take(v, 0, axis=axis)
            c1 = np.take(v, 1, axis=axis)
            c2 = np.take(v, 2, axis=axis)
            out[tuple(first)] = np.expand_dims((-2.0 * c0 + 3.0 * c1 - c2) / d, axis)
            e0 = np.take(v, -1, axis=axis)
            e1 = np.take(v, -2, axis=axis)
            e2 = np.take(v, -3, axis=axis)
            out[tuple(last)] = np.expand_dims((2.0 * e0 - 3.0 * e1 + e2) / d, axis)
        comps.append(out)
    return VectorField(g, tuple(comps))


def divergence(F: VectorField) -> ScalarField:
    """Per-cell sum over axes of face differences divided by dx."""
    g = F.grid
    out = np.zeros(g.n_cells)
    for axis in range(g.dim):
        comp = F.components[axis]
        lo, hi = _axis_slices(axis, g.dim)
        out += (comp[hi] - comp[lo]) / g.dx[axis]
    return ScalarField(g, out)


def integrate(f: ScalarField) -> float:
    """Midpoint rule: sum of cell values times the cell volume."""
    return float(f.values.sum()) * f.grid.cell_volume


def face_integral(F: VectorField, G: VectorField) -> float:
    """sum over all faces of F . G weighted by the cell volume.

    This is the pairing adjoint to (integrate, divergence): for fields with
    zero boundary faces, integrate(g * div F) == -face_integral(grad g, F).
    """
    dv = F.grid.cell_volume
    total = 0.0
    for a, b in zip(F.components, G.components):
        total += float((a * b).sum())
    return total * dv


def cell_average_normal(F: VectorField):
    """Average the two adjacent faces onto each cell, one array per axis."""
    g = F.grid
    out = []
    for axis in range(g.dim):
        comp = F.components[axis]
        lo, hi = _axis_slices(axis, g.dim)
        out.append(0.5 * (comp[lo] + comp[hi]))
    return tuple(out)


def faces_from_cells(grid: Grid, cells: np.ndarray, axis: int) -> np.ndarray:
    """Arithmetic cell-to-face average; boundary faces copy the adjacent cell."""
    out = np.zeros(grid.face_shape(axis))
    lo, hi = _axis_slices(axis, grid.dim)
    interior = [slice(None)] * grid.dim
    interior[axis] = slice(1, -1)
    out[tuple(interior)] = 0.5 * (cells[lo] + cells[hi])
    first = [slice(None)] * grid.dim
    last = [slice(None)] * grid.dim
    first[axis] = slice(0, 1)
    last[axis] = slice(-1, None)
    out[tuple(first)] = np.expand_dims(np.take(cells, 0, axis=axis), axis)
    out[tuple(last)] = np.expand_dims(np.take(cells, -1, axis=axis), axis)
    return out


def cell_difference(grid: Grid, faces: np.ndarray, axis: int) -> np.ndarray:
    """Face-to-cell difference (F_{j+1} - F_j)/dx along one axis."""
    lo, hi = _axis_slices(axis, grid.dim)
    return (faces[hi] - faces[lo]) / grid.dx[axis]


def write_scalar_field_csv(f: ScalarField, path) -> None:
    """One row per cell: (cell index per axis, value)."""
    g = f.grid
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"i{a}" for a in range(g.dim)] + ["value"])
        for idx in np.ndindex(*g.n_cells):
            writer.writerow(list(idx) + [f"{f.values[idx]:.17g}"])


def read_scalar_field_csv(grid: Grid, path) -> ScalarField:
    values = np.zeros(grid.n_cells)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            idx = tuple(int(x) for x in row[: grid.dim])
            values[idx] = float(row[grid.dim])
    return ScalarField(grid, values)
