"""Single-particle matrices, spectra, partial sums, boundary vectors."""

import numpy as np
import pytest

from latfermi import lattice, spectral
from latfermi.errors import BudgetExceededError
from latfermi.lattice import LatticeDomain


def path_eigenvalues(length):
    """Closed form for the open chain: 2 - 2 cos(j pi / (L+1))."""
    j = np.arange(1, length + 1)
    return np.sort(2.0 - 2.0 * np.cos(j * np.pi / (length + 1)))


def random_polyominoes(count, max_size, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        sites = {(0, 0)}
        target = int(rng.integers(1, max_size + 1))
        while len(sites) < target:
            base = list(sites)[int(rng.integers(len(sites)))]
            nb = lattice.neighbors(base)[int(rng.integers(4))]
            sites.add(nb)
        out.append(LatticeDomain(2, sites))
    return out


def test_single_site_laplacian():
    for dim in (1, 2, 3):
        dom = LatticeDomain(dim, [(0,) * dim])
        m = spectral.build_matrix(dom, spectral.LAPLACIAN)
        assert m.matrix.shape == (1, 1)
        assert m.matrix[0, 0] == 2 * dim


def test_two_site_chain_matrix():
    m = spectral.build_matrix(lattice.segment(2), spectral.LAPLACIAN)
    assert np.array_equal(m.matrix, [[2.0, -1.0], [-1.0, 2.0]])


def test_convention_identity():
    dom = LatticeDomain(2, [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)])
    lap = spectral.build_matrix(dom, spectral.LAPLACIAN).matrix
    hop = spectral.build_matrix(dom, spectral.HOPPING).matrix
    assert np.allclose(lap - hop, 2 * dom.dim * np.eye(len(dom)))
    assert np.allclose(hop.diagonal(), 0.0)


def test_unknown_convention():
    with pytest.raises(ValueError):
        spectral.build_matrix(lattice.segment(2), "adjacency")


def test_path_closed_form():
    for length in range(2, 9):
        got = np.asarray(spectral.spectrum(lattice.segment(length)))
        assert np.allclose(got, path_eigenvalues(length), atol=1e-12)


def test_two_site_spectrum():
    assert np.allclose(spectral.spectrum(lattice.segment(2)), [1.0, 3.0])


def test_trace_identity():
    for dom in random_polyominoes(10, 8, seed=3):
        total = spectral.sum_lowest(dom, len(dom), spectral.LAPLACIAN)
        assert abs(total - 2 * dom.dim * len(dom)) < 1e-9


def test_sum_lowest_edges():
    dom = lattice.segment(2)
    assert spectral.sum_lowest(dom, 0) == 0.0
    assert abs(spectral.sum_lowest(dom, 1) - 1.0) < 1e-12
    with pytest.raises(ValueError):
        spectral.sum_lowest(dom, 3)
    with pytest.raises(ValueError):
        spectral.sum_lowest(dom, -1)


def test_sum_lowest_monotone_in_n():
    dom = LatticeDomain(2, [(0, 0), (1, 0), (2, 0), (2, 1)])
    sums = [spectral.sum_lowest(dom, n) for n in range(len(dom) + 1)]
    assert all(b >= a - 1e-12 for a, b in zip(sums, sums[1:]))


def test_eigen_residual_and_orthonormality():
    dom = lattice.box_domain(2, 3)
    res = spectral.eigen_ascending(spectral.build_matrix(dom), want_vectors=True)
    v = res.eigenvectors
    assert np.allclose(v.T @ v, np.eye(len(dom)), atol=1e-10)


def test_dense_ceiling():
    m = spectral.build_matrix(lattice.segment(64))
    with pytest.raises(BudgetExceededError):
        spectral.eigen_ascending(m, dense_ceiling=32)


def test_spectral_reflection_symmetry():
    """Sorted spectrum pairs to 4d about the midpoint on every small domain."""
    for dom in lattice.enumerate_domains(2, 6):
        vals = np.asarray(spectral.spectrum(dom))
        assert np.abs(vals + vals[::-1] - 4 * dom.dim).max() < 1e-9
        assert vals.min() > -1e-9 and vals.max() < 4 * dom.dim + 1e-9


def test_particle_hole_sum_identity():
    for dom in random_polyominoes(15, 8, seed=9):
        size, d = len(dom), dom.dim
        for n in range(size + 1):
            lhs = spectral.sum_lowest(dom, size - n)
            rhs = 2 * d * size - 4 * d * n + spectral.sum_lowest(dom, n)
            assert abs(lhs - rhs) < 1e-9


def test_boundary_vector_segment():
    bv = spectral.boundary_vector(lattice.segment(4), (0.0,))
    vals = bv.values
    assert vals[0] == pytest.approx(1.0) and vals[3] == pytest.approx(1.0)
    assert np.allclose(vals[1:3], 0.0)
    assert bv.norm_sq == pytest.approx(2.0)  # equals B: one exterior bond per endpoint


def test_boundary_vector_single_site():
    for dim in (1, 2, 3):
        dom = LatticeDomain(dim, [(0,) * dim])
        bv = spectral.boundary_vector(dom, (0.0,) * dim)
        assert bv.norm_sq == pytest.approx(4.0 * dim * dim)  # upper edge 2d * B


def test_boundary_vector_square():
    dom = lattice.box_domain(2, 2)
    bv = spectral.boundary_vector(dom, (0.0, 0.0))
    assert np.allclose(np.abs(bv.values), 2.0)
    assert bv.norm_sq == pytest.approx(16.0)
    assert 8.0 <= bv.norm_sq <= 32.0


def test_boundary_vector_k_validation():
    with pytest.raises(ValueError):
        spectral.boundary_vector(lattice.segment(3), (4.0,))
    with pytest.raises(ValueError):
        spectral.boundary_vector(lattice.segment(3), (0.1, 0.2))


def test_boundary_vector_norm_window():
    rng = np.random.default_rng(21)
    for dom in random_polyominoes(40, 8, seed=33):
        b = lattice.boundary_bond_count(dom)
        for _ in range(5):
            k = rng.uniform(-np.pi / 4, np.pi / 4, size=2)
            nsq = spectral.boundary_vector(dom, k).norm_sq
            assert b - 1e-9 <= nsq <= 2 * dom.dim * b + 1e-9


def test_boundary_vector_support_is_inner_boundary():
    dom = lattice.box_domain(2, 3)
    bv = spectral.boundary_vector(dom, (0.3, -0.2))
    inner = lattice.inner_boundary(dom)
    for site, val in zip(dom.sites, bv.values):
        if site not in inner:
            assert val == 0


def test_sum_decreases_under_isolated_augmentation():
    """Adding far-away isolated sites never raises the N-particle energy."""
    rng = np.random.default_rng(4)
    for dom in random_polyominoes(10, 6, seed=44):
        m = int(rng.integers(1, 4))
        grown = lattice.add_isolated_sites(dom, m)
        for n in range(1, len(dom) + 1):
            s_small = spectral.sum_lowest(dom, n)
            s_big = spectral.sum_lowest(grown, n)
            assert s_big <= s_small + 1e-9
            if n / len(dom) <= 0.5:
                assert abs(s_big - s_small) < 1e-9
