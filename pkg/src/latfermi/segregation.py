"""Segregated-state energetics: the volume-fraction minimizer and phase map.

A segregated state parcels the domain into a light region (volume fraction
1-nu) and a heavy region (fraction nu), with nu free in
[rho2, 1-rho1].  Its energy per site is

    e_seg(nu) = (1-nu) e(rho1/(1-nu)) + t nu e(rho2/nu)

whose nu-derivative is xi(rho1/(1-nu)) - t xi(rho2/nu).  Because xi is
increasing, e_seg is convex in nu and the minimizer is either the left
endpoint (heavy region fully packed, density 1) or the unique zero of the
derivative.  The hopping ratio separating the two regimes is
t_c = xi(rho1/(1-rho2)) / (2d).

Evaluators come from BulkFunctions, whose xi is the exact derivative of its
e spline; the derivative formula below therefore matches finite differences
of the energy to truncation error, and at t=1 the minimizer lands exactly
on rho2/(rho1+rho2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bulk import BulkFunctions

PHASE_SATURATED = "heavy-saturated"
PHASE_PARTIAL = "heavy-partial"
PHASE_UNIFORM = "heavy-uniform-density"

NU_TOL = 1e-10


@dataclass(frozen=True)
class SegPoint:
    """Densities, hopping ratio and dimension of one segregation problem."""

    rho1: float
    rho2: float
    t: float
    d: int

    def __post_init__(self):
        if not (self.rho1 > 0 and self.rho2 > 0 and self.rho1 + self.rho2 <= 1.0 + 1e-12):
            raise ValueError("need rho1 > 0, rho2 > 0, rho1 + rho2 <= 1")
        if not 0.0 <= self.t <= 1.0:
            raise ValueError("hopping ratio t must lie in [0, 1]")
        if self.d not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")

    @property
    def nu_range(self) -> tuple:
        return (self.rho2, 1.0 - self.rho1)

    @property
    def nu_uniform(self) -> float:
        return self.rho2 / (self.rho1 + self.rho2)


@dataclass(frozen=True)
class SegResult:
    nu_star: float
    energy: float
    phase: str
    t_critical: float


def _bulkfns(p_or_d, bulkfns) -> BulkFunctions:
    if bulkfns is not None:
        return bulkfns
    d = p_or_d.d if isinstance(p_or_d, SegPoint) else p_or_d
    return BulkFunctions.for_dimension(d)


def _check_nu(p: SegPoint, nu: float):
    lo, hi = p.nu_range
    if not lo - 1e-12 <= nu <= hi + 1e-12:
        raise ValueError(f"nu={nu} outside [{lo}, {hi}]")


def seg_energy(p: SegPoint, nu: float, bulkfns: BulkFunctions | None = None) -> float:
    """Energy per site of the segregated state at heavy volume fraction nu."""
    _check_nu(p, nu)
    fns = _bulkfns(p, bulkfns)
    nu = min(max(nu, p.rho2), 1.0 - p.rho1)
    light = (1.0 - nu) * fns.e(p.rho1 / (1.0 - nu)) if nu < 1.0 else 0.0
    heavy = p.t * nu * fns.e(p.rho2 / nu)
    return light + heavy


def seg_energy_derivative(p: SegPoint, nu: float, bulkfns: BulkFunctions | None = None) -> float:
    """d/d(nu) of seg_energy: xi(rho1/(1-nu)) - t*xi(rho2/nu)."""
    _check_nu(p, nu)
    fns = _bulkfns(p, bulkfns)
    nu = min(max(nu, p.rho2), 1.0 - p.rho1)
    left = fns.xi(p.rho1 / (1.0 - nu)) if nu < 1.0 else fns.xi(1.0)
    return left - p.t * fns.xi(p.rho2 / nu)


def critical_hopping(rho1: float, rho2: float, d: int, bulkfns: BulkFunctions | None = None) -> float:
    """Hopping ratio below which the heavy region stays fully packed."""
    fns = _bulkfns(d, bulkfns)
    return fns.xi(rho1 / (1.0 - rho2)) / (2.0 * d)


def minimize_nu(p: SegPoint, bulkfns: BulkFunctions | None = None, tol: float = NU_TOL) -> SegResult:
    """Minimize the segregated energy over nu via the monotone derivative."""
    fns = _bulkfns(p, bulkfns)
    t_c = critical_hopping(p.rho1, p.rho2, p.d, fns)
    lo, hi = p.nu_range
    # sign tolerance so the tie at t == t_c lands on the packed branch
    # instead of chasing a rounding-level root
    if seg_energy_derivative(p, lo, fns) >= -1e-12:
        return SegResult(lo, seg_energy(p, lo, fns), PHASE_SATURATED, t_c)
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if seg_energy_derivative(p, mid, fns) < 0.0:
            a = mid
        else:
            b = mid
    nu_star = 0.5 * (a + b)
    phase = PHASE_UNIFORM if p.t == 1.0 else PHASE_PARTIAL
    return SegResult(nu_star, seg_energy(p, nu_star, fns), phase, t_c)


def classify_from_nu(p: SegPoint, nu_star: float, tol: float = 1e-8) -> str:
    """Phase label recovered from the minimizer alone (consistency checks)."""
    if abs(nu_star - p.rho2) <= tol:
        return PHASE_SATURATED
    if abs(nu_star - p.nu_uniform) <= tol and p.t == 1.0:
        return PHASE_UNIFORM
    return PHASE_PARTIAL


@dataclass(frozen=True)
class PhasePoint:
    d: int
    rho1: float
    rho2: float
    x: float
    t: float
    nu_star: float
    heavy_density: float
    phase: str


def phase_diagram(
    d: int,
    nx: int = 50,
    nt: int = 50,
    bulkfns: BulkFunctions | None = None,
) -> list:
    """Grid the (x, t) plane, x = rho1/(1-rho2), and classify each point.

    The diagram depends on the pair (x, t) only; the nu_star column needs a
    concrete density pair, for which the symmetric representative
    rho1 = rho2 = x/(1+x) is used.
    """
    fns = _bulkfns(d, bulkfns)
    rows = []
    for i in range(nx):
        x = (i + 1) / (nx + 1)
        rho = x / (1.0 + x)
        for j in range(nt):
            t = (j + 1) / nt
            p = SegPoint(rho, rho, t, d)
            res = minimize_nu(p, fns)
            rows.append(
                PhasePoint(
                    d=d,
                    rho1=rho,
                    rho2=rho,
                    x=x,
                    t=t,
                    nu_star=res.nu_star,
                    heavy_density=rho / res.nu_star,
                    phase=res.phase,
                )
            )
    return rows
