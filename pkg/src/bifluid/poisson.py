"""Zero-flux Poisson solves -lap(phi) = f with a mean-zero pin.

The discrete operator is -div(grad(.)) with zero boundary faces: the 3-point
(1D) / 5-point (2D) Neumann Laplacian, symmetric positive-semidefinite with
constants as nullspace.  Two solution paths share that operator:

* ``direct``: cosine-transform eigen-decomposition (the cell-centered
  Neumann Laplacian is diagonalized by DCT-II modes), exact to roundoff.
* ``cg``: matrix-free conjugate gradient with a mean projection each
  iteration; kept as an independent cross-check of the direct path.

The gradient of the solution is what enters every equation and energy, so
the solution object exposes re-pinning that shifts phi without touching
grad_phi.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.fft import dctn, idctn

from .errors import CompatibilityError, DomainError, SolverError
from .grids import Grid, ScalarField, VectorField, divergence, face_integral, gradient, integrate

DEFAULT_TOL = 1e-10
_COMPAT_RTOL = 1e-10


def neg_laplacian(f: ScalarField) -> ScalarField:
    """-div(grad(f)) with the zero-flux boundary closure."""
    minus = gradient(f, neumann_zero=True)
    out = divergence(minus)
    return ScalarField(f.grid, -out.values)


@dataclass(frozen=True)
class PoissonSolution:
    """Mean-zero potential, its face gradient, and solver diagnostics."""

    phi: ScalarField
    grad_phi: VectorField
    residual_norm: float
    iterations: int

    def repinned(self, constant: float) -> "PoissonSolution":
        """Shift phi by a constant; grad_phi is reused unchanged."""
        shifted = ScalarField(self.phi.grid, self.phi.values + constant)
        return replace(self, phi=shifted)


def _check_compatibility(f: ScalarField) -> np.ndarray:
    total = integrate(f)
    l1 = integrate(ScalarField(f.grid, np.abs(f.values)))
    if abs(total) > _COMPAT_RTOL * l1:
        raise CompatibilityError(
            f"right-hand side is not mean-free: integral {total:.3e} "
            f"exceeds {_COMPAT_RTOL:.0e} * ||f||_1 = {_COMPAT_RTOL * l1:.3e}"
        )
    # Roundoff-level drift is projected away so the discrete system is
    # exactly solvable.
    return f.values - total / f.grid.volume


def _dct_eigenvalues(grid: Grid):
    lams = []
    for axis in range(grid.dim):
        n, d = grid.n_cells[axis], grid.dx[axis]
        k = np.arange(n)
        lams.append((2.0 - 2.0 * np.cos(np.pi * k / n)) / d**2)
    if grid.dim == 1:
        return lams[0]
    return lams[0][:, None] + lams[1][None, :]


def _solve_direct(grid: Grid, rhs: np.ndarray) -> np.ndarray:
    coeffs = dctn(rhs, type=2, norm="ortho")
    lam = _dct_eigenvalues(grid)
    flat0 = (0,) * grid.dim
    lam_safe = lam.copy()
    lam_safe[flat0] = 1.0
    coeffs = coeffs / lam_safe
    coeffs[flat0] = 0.0
    phi = idctn(coeffs, type=2, norm="ortho")
    return phi - phi.mean()


def _solve_cg(grid: Grid, rhs: np.ndarray, tol: float, max_iter: int):
    def apply(x):
        return neg_laplacian(ScalarField(grid, x)).values

    x = np.zeros_like(rhs)
    r = rhs.copy()
    r -= r.mean()
    p = r.copy()
    rs = float((r * r).sum())
    it = 0
    res_inf = float(np.abs(r).max())
    while res_inf > tol and it < max_iter:
        ap = apply(p)
        alpha = rs / float((p * ap).sum())
        x += alpha * p
        r -= alpha * ap
        r -= r.mean()
        rs_new = float((r * r).sum())
        p = r + (rs_new / rs) * p
        rs = rs_new
        it += 1
        res_inf = float(np.abs(r).max())
    if res_inf > tol:
        raise SolverError(
            f"conjugate gradient stalled at residual {res_inf:.3e} after {it} iterations",
            residual=res_inf,
            iterations=it,
        )
    return x - x.mean(), it


def solve_neumann(
    grid: Grid,
    f: ScalarField,
    tol: float = DEFAULT_TOL,
    method: str = "direct",
    max_iter: int = None,
) -> PoissonSolution:
    """Solve -lap(phi) = f with zero-flux boundary; phi pinned to zero mean.

    Raises CompatibilityError for data whose integral is not roundoff-small,
    and SolverError if the CG path fails to reach ``tol`` in the max norm.
    """
    if f.grid is not grid and f.grid != grid:
        raise DomainError("field grid does not match the requested grid")
    rhs = _check_compatibility(f)
    if method == "direct":
        phi_vals = _solve_direct(grid, rhs)
        iterations = 0
    elif method == "cg":
        if max_iter is None:
            max_iter = 10 * grid.total_cells
        phi_vals, iterations = _solve_cg(grid, rhs, tol, max_iter)
    else:
        raise DomainError(f"unknown poisson method {method!r}")
    phi = ScalarField(grid, phi_vals)
    residual = float(np.abs(neg_laplacian(phi).values - rhs).max())
    # Applying the operator amplifies roundoff by its largest eigenvalue, so
    # the verification floor scales with sum_axes 4/dx^2.
    lam_max = 4.0 * sum(1.0 / d**2 for d in grid.dx)
    floor = 64.0 * np.finfo(float).eps * (
        lam_max * float(np.abs(phi_vals).max()) + float(np.abs(rhs).max())
    )
    if residual > max(tol, floor):
        raise SolverError(
            f"poisson residual {residual:.3e} exceeds tolerance {tol:.1e}",
            residual=residual,
            iterations=iterations,
        )
    return PoissonSolution(
        phi=phi, grad_phi=gradient(phi, neumann_zero=True),
        residual_norm=residual, iterations=iterations,
    )


def duality_residual(grid: Grid, f: ScalarField, g: ScalarField, tol: float = DEFAULT_TOL) -> float:
    """| int grad(phi).grad(psi) - int f psi | for phi = solve(f), psi = solve(g).

    Discrete summation by parts makes this vanish to solver tolerance.
    """
    sol_f = solve_neumann(grid, f, tol=tol)
    sol_g = solve_neumann(grid, g, tol=tol)
    lhs = face_integral(sol_f.grad_phi, sol_g.grad_phi)
    rhs = integrate(ScalarField(grid, f.values * sol_g.phi.values))
    return abs(lhs - rhs)


def green_symmetry_defect(
    grid: Grid, i, j, tol: float = DEFAULT_TOL, method: str = "direct"
) -> float:
    """|N_h(i,j) - N_h(j,i)| for the discrete kernel columns.

    N_h(., j) is the mean-zero solution with a unit point mass at cell j
    balanced by a uniform background.  The discrete operator is symmetric,
    so the defect is solver-tolerance small.
    """
    i = tuple(np.atleast_1d(i).astype(int))
    j = tuple(np.atleast_1d(j).astype(int))
    if len(i) != grid.dim or len(j) != grid.dim:
        raise DomainError("cell indices must have one entry per axis")
    if i == j:
        raise DomainError("green_symmetry_defect requires distinct cells")

    def column(idx):
        vals = np.full(grid.n_cells, -1.0 / grid.volume)
        vals[idx] += 1.0 / grid.cell_volume
        return solve_neumann(grid, ScalarField(grid, vals), tol=tol, method=method).phi.values

    return abs(float(column(j)[i]) - float(column(i)[j]))
