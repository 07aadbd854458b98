"""Sandwich verification, surface ratios, and the minimal-energy search."""

from fractions import Fraction

import numpy as np
import pytest

from latfermi import bounds, bulk, lattice
from latfermi.lattice import LatticeDomain


def test_single_site_full_density_tight():
    dom = LatticeDomain(2, [(0, 0)])
    rec = bounds.verify_sandwich(dom, 1)
    assert rec.lower_ok and rec.upper_ok
    assert rec.lower_margin == pytest.approx(0.0, abs=1e-12)
    assert rec.upper_margin == pytest.approx(0.0, abs=1e-12)
    assert rec.surface_ratio == pytest.approx(0.0, abs=1e-12)


def test_two_site_chain_half_filling():
    dom = lattice.segment(2)
    rec = bounds.verify_sandwich(dom, 1)
    e_half = 1.0 - 2.0 / np.pi
    assert rec.s_lowest == pytest.approx(1.0, abs=1e-12)
    assert rec.lower_margin == pytest.approx(1.0 - 2 * e_half, abs=1e-8)
    assert rec.upper_margin == pytest.approx(2 * e_half + 2 / np.pi - 1.0, abs=1e-8)
    assert rec.surface_ratio == pytest.approx((1.0 - 2 * e_half) / 2.0, abs=1e-8)
    assert rec.surface_ratio == pytest.approx(0.1366197, abs=1e-6)


def test_verify_sandwich_validation():
    dom = lattice.segment(3)
    with pytest.raises(ValueError):
        bounds.verify_sandwich(dom, 0)
    with pytest.raises(ValueError):
        bounds.verify_sandwich(dom, 4)


def test_sandwich_sweep_small_polyominoes():
    for dom in lattice.enumerate_domains(2, 6):
        for n in range(1, len(dom) + 1):
            rec = bounds.verify_sandwich(dom, n)
            assert rec.lower_ok, (dom, n, rec.lower_margin)
            assert rec.upper_ok, (dom, n, rec.upper_margin)
            assert -1e-9 <= rec.surface_ratio <= bulk.upper_coeff(rec.rho, 2) + 1e-9


def test_isolated_sites_saturate_upper_coefficient():
    """m isolated sites at half filling sit exactly on the upper bound."""
    for m in (2, 4, 6):
        dom = lattice.add_isolated_sites(LatticeDomain(1, [(0,)]), m - 1)
        ratio = bounds.surface_ratio(dom, m // 2)
        assert ratio == pytest.approx(1.0 / np.pi, abs=1e-8)
        rec = bounds.verify_sandwich(dom, m // 2)
        assert rec.upper_margin == pytest.approx(0.0, abs=1e-10)


def test_ratio_particle_hole():
    dom = lattice.segment(4)
    res = bounds.ratio_particle_hole_check(dom, 1)
    assert res["passed"]
    for dom in lattice.enumerate_domains(2, 5):
        if len(dom) < 2:
            continue
        for n in range(1, len(dom)):
            assert bounds.ratio_particle_hole_check(dom, n)["passed"]
    with pytest.raises(ValueError):
        bounds.ratio_particle_hole_check(dom, len(dom))


def test_estimate_a_d1_segments():
    fam = bounds.FamilySpec(connected=True, max_size=12)
    est = bounds.estimate_a(Fraction(1, 2), 1, fam)
    assert est.empirical_min == pytest.approx(0.1366197, abs=1e-6)
    assert est.witness == lattice.segment(2)
    # segment ratios grow with length at half filling
    ratios = [bounds.surface_ratio(lattice.segment(m), m // 2) for m in (2, 4, 6)]
    assert ratios == sorted(ratios)
    assert ratios[0] == pytest.approx(0.13662, abs=1e-5)
    assert ratios[1] == pytest.approx(0.15521, abs=1e-5)
    assert ratios[2] == pytest.approx(0.16288, abs=1e-5)


def test_estimate_a_full_density_zero():
    est = bounds.estimate_a(1, 2, bounds.FamilySpec(max_size=4))
    assert est.empirical_min == pytest.approx(0.0, abs=1e-9)


def test_estimate_a_d2_half_filling():
    est = bounds.estimate_a(Fraction(1, 2), 2, bounds.FamilySpec(max_size=6))
    assert est.empirical_min > 0
    assert est.window_high == pytest.approx(0.2026424, abs=1e-6)
    assert est.window_low is None  # half filling is not a low density


def test_estimate_a_deterministic():
    fam = bounds.FamilySpec(connected=True, max_size=8)
    a = bounds.estimate_a(Fraction(1, 2), 1, fam)
    b = bounds.estimate_a(Fraction(1, 2), 1, fam)
    assert a.empirical_min == b.empirical_min
    assert a.witness == b.witness


def test_estimate_a_rejects_bad_density():
    with pytest.raises(ValueError):
        bounds.estimate_a(Fraction(1, 97), 1, bounds.FamilySpec(max_size=4))
    with pytest.raises(ValueError):
        bounds.estimate_a(Fraction(1, 7), 1, bounds.FamilySpec(max_size=6))


def test_check_theorem2_reports():
    est = bounds.estimate_a(Fraction(1, 2), 1, bounds.FamilySpec(max_size=8))
    rep = bounds.check_theorem2(Fraction(1, 2), 1, est, eta=0.5)
    assert rep.positive
    assert rep.lower_coeff is None  # eta inadmissible at rho = 1/2
    assert rep.window_high == pytest.approx(1.0 / np.pi, abs=1e-8)


def test_check_theorem2_low_density():
    fam = bounds.FamilySpec(connected=True, max_size=48)
    est = bounds.estimate_a(Fraction(1, 24), 1, fam)
    rep = bounds.check_theorem2(Fraction(1, 24), 1, est, eta=0.5)
    assert rep.positive
    assert rep.lower_coeff is not None and rep.above_lower


def test_bathtub_long_segment():
    rep = bounds.check_bathtub_lower(lattice.segment(24), 1, eta=0.5)
    assert rep.applied and rep.passed and rep.margin > 0


def test_bathtub_skips():
    half = bounds.check_bathtub_lower(lattice.segment(8), 4, eta=0.5)
    assert not half.applied and "inadmissible" in half.skip_reason
    iso = bounds.check_bathtub_lower(
        lattice.add_isolated_sites(LatticeDomain(1, [(0,)]), 23), 1, eta=0.5
    )
    assert not iso.applied and iso.skip_reason == "4*e_N >= eta/2"


def test_scan_records_cover_all_n():
    doms = list(lattice.enumerate_domains(2, 3))
    recs = bounds.scan_records(doms)
    assert len(recs) == sum(len(d) for d in doms)
