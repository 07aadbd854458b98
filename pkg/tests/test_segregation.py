"""Segregated-state energy, its minimizer, and the restricted phase map."""

import numpy as np
import pytest

from latfermi import bulk, segregation
from latfermi.segregation import (
    PHASE_PARTIAL,
    PHASE_SATURATED,
    PHASE_UNIFORM,
    SegPoint,
    classify_from_nu,
    critical_hopping,
    minimize_nu,
    phase_diagram,
    seg_energy,
    seg_energy_derivative,
)


def energy_1d(rho):
    return 2.0 * rho - (2.0 / np.pi) * np.sin(np.pi * rho)


def xi_1d(rho):
    return rho * (2.0 - 2.0 * np.cos(np.pi * rho)) - energy_1d(rho)


def test_segpoint_validation():
    with pytest.raises(ValueError):
        SegPoint(0.0, 0.3, 0.5, 1)
    with pytest.raises(ValueError):
        SegPoint(0.6, 0.6, 0.5, 1)
    with pytest.raises(ValueError):
        SegPoint(0.2, 0.3, 1.5, 1)
    with pytest.raises(ValueError):
        SegPoint(0.2, 0.3, 0.5, 5)


def test_energy_at_packed_endpoint():
    p = SegPoint(0.3, 0.2, 0.7, 1)
    fns = bulk.BulkFunctions.for_dimension(1)
    expected = (1 - 0.2) * fns.e(0.3 / 0.8) + 2 * 1 * 0.7 * 0.2
    assert seg_energy(p, 0.2) == pytest.approx(expected, abs=1e-12)


def test_energy_symmetric_point():
    p = SegPoint(0.25, 0.25, 1.0, 1)
    val = seg_energy(p, 0.5)
    assert val == pytest.approx(energy_1d(0.5), abs=1e-7)
    # symmetry of the energy in nu <-> 1 - nu when densities match at t=1
    for nu in (0.3, 0.41, 0.62):
        assert seg_energy(p, nu) == pytest.approx(seg_energy(p, 1 - nu), abs=1e-10)


def test_energy_nu_validation():
    p = SegPoint(0.3, 0.2, 0.5, 1)
    with pytest.raises(ValueError):
        seg_energy(p, 0.1)
    with pytest.raises(ValueError):
        seg_energy(p, 0.9)


def test_derivative_at_packed_endpoint():
    p = SegPoint(0.3, 0.25, 0.4, 2)
    fns = bulk.BulkFunctions.for_dimension(2)
    expected = fns.xi(0.3 / 0.75) - 2 * 2 * 0.4
    assert seg_energy_derivative(p, 0.25) == pytest.approx(expected, abs=1e-12)


def test_derivative_zero_at_uniform_point_t1():
    p = SegPoint(0.3, 0.2, 1.0, 2)
    assert seg_energy_derivative(p, p.nu_uniform) == pytest.approx(0.0, abs=1e-14)


def test_derivative_nonnegative_at_right_endpoint():
    for rho1, rho2 in ((0.1, 0.2), (0.3, 0.3), (0.45, 0.1), (0.2, 0.6)):
        for t in (0.1, 0.5, 1.0):
            for d in (1, 2):
                p = SegPoint(rho1, rho2, t, d)
                assert seg_energy_derivative(p, 1 - rho1) >= -1e-10


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(7)
    for d in (1, 2):
        for _ in range(50):
            rho1 = float(rng.uniform(0.05, 0.6))
            rho2 = float(rng.uniform(0.05, min(0.9 - rho1, 0.6)))
            t = float(rng.uniform(0.0, 1.0))
            p = SegPoint(rho1, rho2, t, d)
            lo, hi = p.nu_range
            nu = float(rng.uniform(lo + 0.02, hi - 0.02))
            h = 1e-4
            fd = (seg_energy(p, nu + h) - seg_energy(p, nu - h)) / (2 * h)
            assert seg_energy_derivative(p, nu) == pytest.approx(fd, abs=1e-6)


def test_energy_convex_in_nu():
    rng = np.random.default_rng(8)
    for _ in range(40):
        rho1 = float(rng.uniform(0.05, 0.5))
        rho2 = float(rng.uniform(0.05, min(0.9 - rho1, 0.5)))
        p = SegPoint(rho1, rho2, float(rng.uniform(0, 1)), 2)
        lo, hi = p.nu_range
        nu = float(rng.uniform(lo + 0.03, hi - 0.03))
        h = 0.01
        second = seg_energy(p, nu + h) - 2 * seg_energy(p, nu) + seg_energy(p, nu - h)
        assert second >= -1e-8


def test_critical_hopping_values():
    assert critical_hopping(0.25, 0.25, 1) == pytest.approx(xi_1d(1 / 3) / 2, abs=2e-5)
    assert critical_hopping(0.25, 0.25, 1) == pytest.approx(0.10900, abs=1e-4)
    # rho1/(1-rho2) = 1/2 in two dimensions
    assert critical_hopping(0.25, 0.5, 2) == pytest.approx(0.2026424, abs=1e-4)
    assert critical_hopping(1e-6, 0.3, 1) < 1e-4
    tcs = [critical_hopping(r, 0.25, 1) for r in np.linspace(0.05, 0.7, 12)]
    assert all(b >= a for a, b in zip(tcs, tcs[1:]))


def test_minimizer_saturated():
    p = SegPoint(0.25, 0.25, 0.05, 1)
    res = minimize_nu(p)
    assert res.phase == PHASE_SATURATED
    assert res.nu_star == p.rho2
    assert classify_from_nu(p, res.nu_star) == PHASE_SATURATED


def test_minimizer_at_critical_hopping_is_saturated():
    t_c = critical_hopping(0.25, 0.25, 1)
    res = minimize_nu(SegPoint(0.25, 0.25, t_c, 1))
    assert res.phase == PHASE_SATURATED


def test_minimizer_partial():
    p = SegPoint(0.25, 0.25, 0.5, 1)
    res = minimize_nu(p)
    assert res.phase == PHASE_PARTIAL
    assert p.rho2 < res.nu_star < p.nu_uniform
    assert classify_from_nu(p, res.nu_star) == PHASE_PARTIAL
    # heavy density strictly between rho1+rho2 and 1
    heavy = p.rho2 / res.nu_star
    assert p.rho1 + p.rho2 < heavy < 1.0


def test_minimizer_uniform_at_t1():
    for rho1, rho2, d in ((0.25, 0.25, 1), (0.3, 0.15, 2), (0.1, 0.4, 1)):
        p = SegPoint(rho1, rho2, 1.0, d)
        res = minimize_nu(p)
        assert res.phase == PHASE_UNIFORM
        assert res.nu_star == pytest.approx(p.nu_uniform, abs=1e-8)


def test_minimizer_is_minimum():
    rng = np.random.default_rng(10)
    p = SegPoint(0.2, 0.3, 0.6, 1)
    res = minimize_nu(p)
    lo, hi = p.nu_range
    for nu in rng.uniform(lo, hi, 300):
        assert seg_energy(p, float(nu)) >= res.energy - 1e-10


def test_t0_minimizer_is_packed():
    res = minimize_nu(SegPoint(0.3, 0.2, 0.0, 2))
    assert res.phase == PHASE_SATURATED and res.nu_star == 0.2


def test_phase_diagram_boundary_d1():
    rows = phase_diagram(1, nx=16, nt=16)
    by_x = {}
    for r in rows:
        by_x.setdefault(r.x, []).append(r)
    fns = bulk.BulkFunctions.for_dimension(1)
    for x, col in by_x.items():
        col.sort(key=lambda r: r.t)
        t_c = fns.xi(x) / 2.0
        sat = [r.t for r in col if r.phase == PHASE_SATURATED]
        cell = 1.0 / 16
        if sat:
            # saturated exactly up to the critical curve, within one cell
            assert max(sat) <= t_c + cell + 1e-9
            assert all(r.phase != PHASE_SATURATED for r in col if r.t > max(sat))
        for r in col:
            if r.t < t_c - cell:
                assert r.phase == PHASE_SATURATED
            if t_c + cell < r.t < 1.0:
                assert r.phase == PHASE_PARTIAL
            if r.t == 1.0:
                assert r.phase == PHASE_UNIFORM
        assert col[-1].heavy_density == pytest.approx(
            col[-1].rho1 + col[-1].rho2, abs=1e-6
        )


def test_phase_diagram_corner():
    # as x -> 1 the critical curve reaches t = 1
    assert critical_hopping(0.5, 0.5, 1) == pytest.approx(1.0, abs=1e-10)
    assert critical_hopping(0.5, 0.5, 3) == pytest.approx(1.0, abs=1e-10)
