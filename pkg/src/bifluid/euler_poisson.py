"""Finite-volume stepper for two charged isentropic fluids with stiff friction.

Scaled system, friction parameter eps:

    rho_t + div(rho u) = 0
    (rho u)_t + div(rho u x u) = -(1/eps) [ rho grad(h1'(rho) + phi) + rho u ]
    n_t   + div(n v)   = 0
    (n v)_t  + div(n v x v)  = -(1/eps) [ n grad(h2'(n) - phi) + n v ]
    -lap(phi) = rho - n

with no-flux walls (u.nu = v.nu = dphi/dnu = 0).  One step is an operator
split: (a) explicit transport with local Lax-Friedrichs dissipation, mass
flux carried by the face momenta so both masses telescope exactly; (b)
Poisson re-solve; (c) stiff sources integrated exactly over the step with
the force f = rho grad(h' +/- phi) frozen:

    m <- exp(-dt/eps) m + (1 - exp(-dt/eps)) (-f).

The momentum dissipation uses the full wave speed |u| + sqrt(p'(r)/eps); the
mass dissipation uses only the advective speed |u| so the small-eps limit of
the mass update stays the centered drift-diffusion flux (an eps-growing
density diffusion would swamp the relaxation error being measured).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import eos
from .errors import DomainError, PositivityError, StabilityError
from .grids import (
    Grid,
    ScalarField,
    VectorField,
    cell_average_normal,
    faces_from_cells,
    face_integral,
    gradient,
    integrate,
)
from .poisson import solve_neumann

DENSITY_FLOOR = 1e-12
_NEGATIVE_REL_TOL = 1e-8


@dataclass(frozen=True)
class BipolarHydroState:
    """One time level of the two-fluid system; momenta live on faces."""

    t: float
    rho: ScalarField
    mom_rho: VectorField
    n: ScalarField
    mom_n: VectorField
    phi: ScalarField
    eps: float
    grad_phi: VectorField
    floor_mass: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.rho.grid


def make_hydro_state(
    rho: ScalarField,
    mom_rho: VectorField,
    n: ScalarField,
    mom_n: VectorField,
    eps: float,
    t: float = 0.0,
    poisson_tol: float = 1e-10,
) -> BipolarHydroState:
    """Assemble a state, solving the Poisson coupling for rho - n."""
    if eps <= 0:
        raise DomainError("relaxation parameter eps must be positive")
    for mom in (mom_rho, mom_n):
        if not mom.has_zero_boundary():
            raise DomainError("momentum fields must have zero boundary faces")
    if float(rho.values.min()) < 0 or float(n.values.min()) < 0:
        raise DomainError("densities must be nonnegative")
    grid = rho.grid
    sol = solve_neumann(grid, ScalarField(grid, rho.values - n.values), tol=poisson_tol)
    return BipolarHydroState(
        t=t, rho=rho, mom_rho=mom_rho, n=n, mom_n=mom_n,
        phi=sol.phi, eps=eps, grad_phi=sol.grad_phi,
    )


def cell_velocity(mom: VectorField, density: ScalarField, floor: float = DENSITY_FLOOR):
    """Face-averaged momentum divided by max(density, floor), per axis."""
    dens = np.maximum(density.values, floor)
    return tuple(avg / dens for avg in cell_average_normal(mom))


def _cell_speed(mom, density, law, eps, floor):
    u = cell_velocity(mom, density, floor)
    speed = np.sqrt(sum(c * c for c in u))
    sound = np.sqrt(eos.pressure_prime(law, np.maximum(density.values, 0.0)) / eps)
    return speed + sound


def stable_dt(s: BipolarHydroState, law1: eos.GasLaw, law2: eos.GasLaw, cfl: float = 0.45) -> float:
    """cfl * dx / (max over cells and species of |u| + sqrt(p'(r)/eps)).

    A vacuum state has no wave speed; the advection-free cap cfl * min(dx)
    is returned instead.
    """
    if not 0 < cfl <= 1:
        raise DomainError("cfl must lie in (0, 1]")
    grid = s.grid
    worst = 0.0
    for mom, dens, law in ((s.mom_rho, s.rho, law1), (s.mom_n, s.n, law2)):
        spd = _cell_speed(mom, dens, law, s.eps, DENSITY_FLOOR)
        for axis in range(grid.dim):
            worst = max(worst, float(spd.max()) / grid.dx[axis])
    if worst < 1e-300:
        # vacuum everywhere: advection-free cap
        return cfl * min(grid.dx)
    return cfl / worst


def _axis_pair(arr, axis):
    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return arr[tuple(lo)], arr[tuple(hi)]


def _interior(shape_axis_len, axis, ndim):
    sl = [slice(None)] * ndim
    sl[axis] = slice(1, -1)
    return tuple(sl)


def _species_transport(grid, dens, mom, law, eps, dt, floor):
    """One conservative transport update for a single species.

    Returns (new density values, provisional face momenta, floored mass).
    """
    rho = dens.values
    dim = grid.dim

    # mass update: flux = m - 0.5 |u_face| (rho_R - rho_L) on interior faces
    new_rho = rho.copy()
    for axis in range(dim):
        m = mom.components[axis]
        rho_face = faces_from_cells(grid, rho, axis)
        u_face = m / np.maximum(rho_face, floor)
        flux = m.copy()
        lo, hi = _axis_pair(rho, axis)
        interior = _interior(None, axis, dim)
        flux[interior] -= 0.5 * np.abs(u_face[interior]) * (hi - lo)
        flo, fhi = _axis_pair(flux, axis)
        new_rho -= dt / grid.dx[axis] * (fhi - flo)

    neg_tol = _NEGATIVE_REL_TOL * max(float(np.abs(rho).max()), floor)
    if float(new_rho.min()) < -neg_tol:
        raise PositivityError(
            f"density fell to {new_rho.min():.3e} after transport (limit {-neg_tol:.1e})"
        )
    floored = float(np.maximum(floor - new_rho, 0.0).sum()) * grid.cell_volume
    new_rho = np.maximum(new_rho, floor if floored > 0 else 0.0)

    # momentum advection on the dual mesh, dissipation at the full wave speed
    spd = _cell_speed(mom, dens, law, eps, floor)
    u_cell = cell_velocity(mom, dens, floor)
    new_mom = []
    for axis in range(dim):
        m = mom.components[axis]
        mlo, mhi = _axis_pair(m, axis)
        m_cell = 0.5 * (mlo + mhi)
        own_flux = m_cell * u_cell[axis] - 0.5 * spd * (mhi - mlo)
        out = m.copy()
        plo, phi_ = _axis_pair(own_flux, axis)
        interior = _interior(None, axis, dim)
        out[interior] -= dt / grid.dx[axis] * (phi_ - plo)
        if dim == 2:
            other = 1 - axis
            out[interior] -= dt / grid.dx[other] * _transverse_divergence(
                grid, m, mom.components[other], rho, spd, axis, other, floor
            )
        new_mom.append(out)
    return new_rho, new_mom, floored


def _transverse_divergence(grid, m_a, m_b, rho, spd, axis, other, floor):
    """d/dx_b of the corner flux u_b * m_a for the axis-a momentum (2D)."""
    rho_face_b = faces_from_cells(grid, rho, other)
    u_b = m_b / np.maximum(rho_face_b, floor)

    if axis == 0:
        # m_a: (nx+1, ny); corners for interior x-faces: (nx-1, ny+1)
        nx, ny = grid.n_cells
        q = np.zeros((nx - 1, ny + 1))
        ub_corner = 0.5 * (u_b[:-1, 1:-1] + u_b[1:, 1:-1])
        ma_avg = 0.5 * (m_a[1:-1, :-1] + m_a[1:-1, 1:])
        spd_corner = 0.25 * (
            spd[:-1, :-1] + spd[1:, :-1] + spd[:-1, 1:] + spd[1:, 1:]
        )
        q[:, 1:-1] = ub_corner * ma_avg - 0.5 * spd_corner * (
            m_a[1:-1, 1:] - m_a[1:-1, :-1]
        )
        return q[:, 1:] - q[:, :-1]
    # axis == 1: m_a: (nx, ny+1); corners for interior y-faces: (nx+1, ny-1)
    nx, ny = grid.n_cells
    q = np.zeros((nx + 1, ny - 1))
    ub_corner = 0.5 * (u_b[1:-1, :-1] + u_b[1:-1, 1:])
    ma_avg = 0.5 * (m_a[:-1, 1:-1] + m_a[1:, 1:-1])
    spd_corner = 0.25 * (
        spd[:-1, :-1] + spd[:-1, 1:] + spd[1:, :-1] + spd[1:, 1:]
    )
    q[1:-1, :] = ub_corner * ma_avg - 0.5 * spd_corner * (
        m_a[1:, 1:-1] - m_a[:-1, 1:-1]
    )
    return q[1:, :] - q[:-1, :]


def transport_substep(s: BipolarHydroState, law1: eos.GasLaw, law2: eos.GasLaw, dt: float,
                      floor: float = DENSITY_FLOOR):
    """Explicit transport for both species.

    Returns (rho', mom_rho*, n', mom_n*, floored_mass) with momenta still
    awaiting the stiff source update.
    """
    grid = s.grid
    rho_new, mom_rho_new, fl1 = _species_transport(grid, s.rho, s.mom_rho, law1, s.eps, dt, floor)
    n_new, mom_n_new, fl2 = _species_transport(grid, s.n, s.mom_n, law2, s.eps, dt, floor)
    return (
        ScalarField(grid, rho_new),
        VectorField(grid, tuple(mom_rho_new)),
        ScalarField(grid, n_new),
        VectorField(grid, tuple(mom_n_new)),
        fl1 + fl2,
    )


def stiff_source_substep(
    density: ScalarField,
    mom: VectorField,
    grad_phi: VectorField,
    law: eos.GasLaw,
    eps: float,
    dt: float,
    charge_sign: float,
    floor: float = DENSITY_FLOOR,
) -> VectorField:
    """Exact relaxation of the momentum toward -rho grad(h'(rho) + sign*phi).

    Friction alone (uniform force) reduces to m <- exp(-dt/eps) m.  With the
    force frozen over the step the update is the exact solution of
    m_t = -(f + m)/eps, hence stiff-accurate for any dt/eps.
    """
    grid = density.grid
    hp = eos.h_prime(law, np.maximum(density.values, floor))
    grad_hp = gradient(ScalarField(grid, hp), neumann_zero=True)
    decay = math.exp(-dt / eps)
    comps = []
    for axis in range(grid.dim):
        rho_face = faces_from_cells(grid, density.values, axis)
        force = rho_face * (
            grad_hp.components[axis] + charge_sign * grad_phi.components[axis]
        )
        comps.append(decay * mom.components[axis] + (1.0 - decay) * (-force))
    return VectorField(grid, tuple(comps))


def ep_step(
    s: BipolarHydroState,
    law1: eos.GasLaw,
    law2: eos.GasLaw,
    dt: float,
    floor: float = DENSITY_FLOOR,
    poisson_tol: float = 1e-10,
) -> BipolarHydroState:
    """One operator-split step: transport, Poisson re-solve, stiff sources."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    dt_max = stable_dt(s, law1, law2, cfl=1.0)
    if dt > dt_max * (1.0 + 1e-9):
        raise StabilityError(f"dt = {dt:.3e} exceeds the stability bound {dt_max:.3e}")

    rho, mom_rho, n, mom_n, floored = transport_substep(s, law1, law2, dt, floor)

    grid = s.grid
    sol = solve_neumann(grid, ScalarField(grid, rho.values - n.values), tol=poisson_tol)

    mom_rho = stiff_source_substep(rho, mom_rho, sol.grad_phi, law1, s.eps, dt, +1.0, floor)
    mom_n = stiff_source_substep(n, mom_n, sol.grad_phi, law2, s.eps, dt, -1.0, floor)

    return BipolarHydroState(
        t=s.t + dt, rho=rho, mom_rho=mom_rho, n=n, mom_n=mom_n,
        phi=sol.phi, eps=s.eps, grad_phi=sol.grad_phi,
        floor_mass=s.floor_mass + floored,
    )


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic_rho: float
    kinetic_n: float
    internal_rho: float
    internal_n: float
    field: float
    total: float


def total_energy(s: BipolarHydroState, law1: eos.GasLaw, law2: eos.GasLaw,
                 floor: float = DENSITY_FLOOR) -> EnergyBreakdown:
    """eps/2 (rho|u|^2 + n|v|^2) + h1(rho) + h2(n) + |grad phi|^2 / 2, integrated."""
    dv = s.grid.cell_volume
    parts = []
    for mom, dens in ((s.mom_rho, s.rho), (s.mom_n, s.n)):
        u = cell_velocity(mom, dens, floor)
        ke = 0.5 * s.eps * float((dens.values * sum(c * c for c in u)).sum()) * dv
        parts.append(ke)
    internal_rho = float(eos.internal_energy_value(law1, s.rho.values).sum()) * dv
    internal_n = float(eos.internal_energy_value(law2, s.n.values).sum()) * dv
    field = 0.5 * face_integral(s.grad_phi, s.grad_phi)
    total = parts[0] + parts[1] + internal_rho + internal_n + field
    return EnergyBreakdown(
        kinetic_rho=parts[0], kinetic_n=parts[1],
        internal_rho=internal_rho, internal_n=internal_n,
        field=field, total=total,
    )


def _friction_rate(s: BipolarHydroState, floor: float) -> float:
    """integral of rho|u|^2 + n|v|^2 with face-based velocities.

    Matches the exact per-step kinetic loss of the friction factor, so the
    budget defect below is governed by the transport/splitting error only.
    """
    dv = s.grid.cell_volume
    total = 0.0
    for mom, dens in ((s.mom_rho, s.rho), (s.mom_n, s.n)):
        for axis in range(s.grid.dim):
            rho_face = faces_from_cells(s.grid, dens.values, axis)
            m = mom.components[axis]
            total += float((m * m / np.maximum(rho_face, floor)).sum()) * dv
    return total


def dissipation_budget(
    history,
    law1: eos.GasLaw,
    law2: eos.GasLaw,
    floor: float = DENSITY_FLOOR,
    rise_tol: float = None,
):
    """Energy-budget audit over a run.

    Returns (defect, sign_ok): defect is the max over checkpoints of
    E(t) - E(0) + int_0^t int rho|u|^2 + n|v|^2 (trapezoidal in time), which
    a dissipative solution keeps nonpositive up to discretization error;
    sign_ok reports whether E never rises between checkpoints beyond
    ``rise_tol``.
    """
    if len(history) < 2:
        raise DomainError("dissipation budget needs at least two states")
    times = np.array([st.t for st in history])
    energies = np.array([total_energy(st, law1, law2, floor).total for st in history])
    rates = np.array([_friction_rate(st, floor) for st in history])
    defect = -np.inf
    for k in range(len(history)):
        dissipated = float(np.trapezoid(rates[: k + 1], times[: k + 1]))
        defect = max(defect, energies[k] - energies[0] + dissipated)
    if rise_tol is None:
        rise_tol = 1e-9 * max(abs(energies[0]), 1.0)
    sign_ok = bool(np.all(np.diff(energies) <= rise_tol))
    return float(defect), sign_ok


def diffusive_rescale(tau: float, t_hyp: float, u_hyp: VectorField, v_hyp: VectorField):
    """Map hyperbolic-scale time and velocities to the diffusive scale.

    t = tau * t_hyp, u = u_hyp / tau, v = v_hyp / tau, eps = tau**2.
    tau = 1 is the identity and composition multiplies the scale factors.
    """
    if tau <= 0:
        raise DomainError("tau must be positive")
    grid = u_hyp.grid
    u = VectorField(grid, tuple(c / tau for c in u_hyp.components))
    v = VectorField(grid, tuple(c / tau for c in v_hyp.components))
    return tau * t_hyp, u, v, tau**2


def simulate(
    initial: BipolarHydroState,
    law1: eos.GasLaw,
    law2: eos.GasLaw,
    checkpoint_times,
    cfl: float = 0.45,
    floor: float = DENSITY_FLOOR,
    poisson_tol: float = 1e-10,
    max_steps: int = 10**8,
):
    """Advance to each checkpoint time exactly; returns one state per time."""
    times = list(checkpoint_times)
    if not times:
        raise DomainError("need at least one checkpoint time")
    state = initial
    out = []
    steps = 0
    for target in times:
        if target < state.t - 1e-14:
            raise DomainError("checkpoint times must be nondecreasing")
        while state.t < target - 1e-14:
            dt = min(stable_dt(state, law1, law2, cfl), target - state.t)
            state = ep_step(state, law1, law2, dt, floor=floor, poisson_tol=poisson_tol)
            if abs(state.t - target) < 1e-14:
                state = replace(state, t=target)
            steps += 1
            if steps > max_steps:
                raise StabilityError("step budget exhausted")
        out.append(replace(state, t=target) if state.t != target else state)
        state = out[-1]
    return out
