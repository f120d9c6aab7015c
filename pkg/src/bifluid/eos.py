"""Isentropic gas laws and their relative (Bregman) quantities.

The shipped laws are power laws p(r) = k r^gamma with internal energy
h(r) = k r^gamma / (gamma - 1), gamma > 1.  They satisfy the thermodynamic
consistency relations

    r h''(r) = p'(r),        r h'(r) = p(r) + h(r),

the curvature bound |p''(r)| <= khat p'(r)/r with khat = gamma - 1, and the
growth condition h(r)/r^gamma -> k/(gamma - 1).  All functions accept scalars
or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class GasLaw:
    """One species' pressure/internal-energy law.

    ``khat`` is the constant in the pressure-curvature bound; for a power law
    the sharp value gamma - 1 is used when it is not given explicitly.
    """

    k: float
    gamma: float
    khat: float = field(default=None)

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"law coefficient k must be positive, got {self.k}")
        if not self.gamma > 1:
            raise DomainError(f"adiabatic exponent must exceed 1, got {self.gamma}")
        if self.khat is None:
            object.__setattr__(self, "khat", self.gamma - 1.0)
        if not self.khat > 0:
            raise DomainError(f"curvature constant khat must be positive, got {self.khat}")

    def to_dict(self):
        return {"k": self.k, "gamma": self.gamma, "khat": self.khat}

    @classmethod
    def from_dict(cls, d):
        return cls(k=float(d["k"]), gamma=float(d["gamma"]), khat=float(d["khat"]))


def _check_nonneg(r, name="r"):
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise DomainError(f"{name} must be nonnegative")
    return arr


def pressure(law: GasLaw, r):
    """p(r) = k r^gamma, continuous at r = 0 with value 0."""
    arr = _check_nonneg(r)
    out = law.k * arr**law.gamma
    return out if isinstance(r, np.ndarray) else float(out)


def pressure_prime(law: GasLaw, r):
    """p'(r) = k gamma r^(gamma-1)."""
    arr = _check_nonneg(r)
    out = law.k * law.gamma * arr ** (law.gamma - 1.0)
    return out if isinstance(r, np.ndarray) else float(out)


def pressure_second(law: GasLaw, r):
    """p''(r) = k gamma (gamma-1) r^(gamma-2); r > 0."""
    arr = _check_nonneg(r)
    if np.any(arr == 0):
        raise DomainError("p'' requires r > 0")
    out = law.k * law.gamma * (law.gamma - 1.0) * arr ** (law.gamma - 2.0)
    return out if isinstance(r, np.ndarray) else float(out)


def internal_energy_value(law: GasLaw, r):
    """h(r) = k r^gamma / (gamma - 1); extends continuously to r = 0."""
    arr = _check_nonneg(r)
    out = law.k / (law.gamma - 1.0) * arr**law.gamma
    return out if isinstance(r, np.ndarray) else float(out)


def internal_energy(law: GasLaw, r):
    """Return (h, h', h'') at r.

    The derivative components require r > 0 (the contract is uniform in
    gamma even though only gamma < 2 actually blows up at the origin).
    """
    arr = _check_nonneg(r)
    if np.any(arr == 0):
        raise DomainError("internal_energy derivatives require r > 0")
    g = law.gamma
    h = law.k / (g - 1.0) * arr**g
    h1 = law.k * g / (g - 1.0) * arr ** (g - 1.0)
    h2 = law.k * g * arr ** (g - 2.0)
    if isinstance(r, np.ndarray):
        return h, h1, h2
    return float(h), float(h1), float(h2)


def h_prime(law: GasLaw, r):
    """h'(r) = k gamma/(gamma-1) r^(gamma-1); r > 0."""
    arr = _check_nonneg(r)
    if np.any(arr == 0):
        raise DomainError("h' requires r > 0")
    out = law.k * law.gamma / (law.gamma - 1.0) * arr ** (law.gamma - 1.0)
    return out if isinstance(r, np.ndarray) else float(out)


def _check_positive_ref(rbar):
    arr = np.asarray(rbar, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("reference density must be positive")
    return arr


def relative_internal(law: GasLaw, r, rbar):
    """h(r|rbar) = h(r) - h(rbar) - h'(rbar)(r - rbar), nonnegative by convexity."""
    rr = _check_nonneg(r)
    rb = _check_positive_ref(rbar)
    g = law.gamma
    h = law.k / (g - 1.0)
    out = h * rr**g - h * rb**g - law.k * g / (g - 1.0) * rb ** (g - 1.0) * (rr - rb)
    if isinstance(r, np.ndarray) or isinstance(rbar, np.ndarray):
        return out
    return float(out)


def relative_pressure(law: GasLaw, r, rbar):
    """p(r|rbar) = p(r) - p(rbar) - p'(rbar)(r - rbar).

    For a power law this equals (gamma - 1) h(r|rbar) exactly, so the
    curvature bound p(r|rbar) <= khat h(r|rbar) holds with equality at the
    sharp khat.
    """
    rr = _check_nonneg(r)
    rb = _check_positive_ref(rbar)
    g = law.gamma
    out = law.k * rr**g - law.k * rb**g - law.k * g * rb ** (g - 1.0) * (rr - rb)
    if isinstance(r, np.ndarray) or isinstance(rbar, np.ndarray):
        return out
    return float(out)


@dataclass(frozen=True)
class LowerBoundConstants:
    """Grid-certified lower-bound constants for h(r|rbar).

    ``c_quad`` bounds h(r|rbar) >= c_quad |r - rbar|^2 on [0, r_switch] x
    [delta, m_cap]; ``c_power`` bounds h(r|rbar) >= c_power |r - rbar|^gamma
    on (r_switch, r_max].  Certification is on the sampled grid only.
    """

    c_quad: float
    c_power: float
    r_switch: float
    delta: float
    m_cap: float

    def global_quadratic(self, gamma: float) -> float:
        """Quadratic constant valid on all of [0, r_max] when gamma >= 2."""
        if gamma < 2:
            raise DomainError("global quadratic bound requires gamma >= 2")
        return min(self.c_quad, self.c_power)


# Points closer to the diagonal than this are replaced by the analytic
# limit h''(rbar)/2 of the quadratic ratio (removable singularity).
_DIAGONAL_EXCLUSION = 1e-8


def lower_bound_constants(
    law: GasLaw, delta: float, m_cap: float, r_max: float, grid_n: int = 256
) -> LowerBoundConstants:
    """Brute-force minimization of the two ratio families on a uniform grid.

    r_switch is fixed at m_cap + 1.  Both returned constants are strictly
    positive for any law with gamma > 1.
    """
    if not (0 < delta <= m_cap < r_max):
        raise DomainError("need 0 < delta <= m_cap < r_max")
    if grid_n < 100:
        raise DomainError("grid_n must be at least 100")
    r_switch = m_cap + 1.0
    if r_switch >= r_max:
        raise DomainError("empty search region: r_max must exceed m_cap + 1")

    rbar = np.linspace(delta, m_cap, grid_n)

    r_lo = np.linspace(0.0, r_switch, grid_n)
    rr, bb = np.meshgrid(r_lo, rbar, indexing="ij")
    diff = rr - bb
    ratio = np.where(
        np.abs(diff) < _DIAGONAL_EXCLUSION,
        0.5 * internal_energy(law, bb)[2],
        relative_internal(law, rr, bb) / np.maximum(diff**2, _DIAGONAL_EXCLUSION**2),
    )
    c_quad = float(ratio.min())

    r_hi = np.linspace(np.nextafter(r_switch, r_max), r_max, grid_n)
    rr, bb = np.meshgrid(r_hi, rbar, indexing="ij")
    diff = np.abs(rr - bb)
    ratio = relative_internal(law, rr, bb) / diff**law.gamma
    c_power = float(ratio.min())

    if not (c_quad > 0 and c_power > 0):
        raise DomainError("lower-bound search produced a nonpositive constant")
    return LowerBoundConstants(
        c_quad=c_quad, c_power=c_power, r_switch=r_switch, delta=delta, m_cap=m_cap
    )
