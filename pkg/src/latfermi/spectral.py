"""Single-particle matrices on a domain, their spectra, and boundary vectors.

Two matrix conventions coexist and are always named explicitly:

* ``laplacian``: diagonal 2d, off-diagonal -1 on nearest-neighbor pairs.
  Spectrum lies in [0, 4d] and is symmetric about 2d on bipartite Z^d.
* ``hopping``: zero diagonal, same off-diagonal.  This is the kinetic term
  of the two-species Hamiltonian; laplacian = hopping + 2d*I.

Mixing the two silently shifts every N-particle energy by 2dN, which is the
easiest bug to make in this problem, hence the explicit tagging.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetExceededError
from .lattice import LatticeDomain, exterior_neighbor_counts, neighbors

LAPLACIAN = "laplacian"
HOPPING = "hopping"

DENSE_CEILING = 4096


@dataclass(frozen=True, eq=False)
class SingleParticleMatrix:
    convention: str
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class BoundaryVector:
    """Complex amplitudes supported on the inner boundary, in site order."""

    k: tuple
    values: np.ndarray

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.values, self.values).real)


def build_matrix(dom: LatticeDomain, convention: str = LAPLACIAN) -> SingleParticleMatrix:
    """Adjacency-based matrix of a domain in its canonical site order."""
    if convention not in (LAPLACIAN, HOPPING):
        raise ValueError(f"unknown convention {convention!r}")
    n = len(dom)
    index = {s: i for i, s in enumerate(dom.sites)}
    m = np.zeros((n, n))
    for i, s in enumerate(dom.sites):
        for nb in neighbors(s):
            j = index.get(nb)
            if j is not None:
                m[i, j] = -1.0
    if convention == LAPLACIAN:
        m[np.diag_indices(n)] = 2.0 * dom.dim
    return SingleParticleMatrix(convention, m)


def eigen_ascending(
    m: SingleParticleMatrix,
    want_vectors: bool = False,
    dense_ceiling: int = DENSE_CEILING,
) -> SpectralResult:
    """Full dense symmetric eigendecomposition, eigenvalues ascending."""
    if m.size > dense_ceiling:
        raise BudgetExceededError(
            f"matrix size {m.size} exceeds dense ceiling {dense_ceiling}"
        )
    if not want_vectors:
        return SpectralResult(np.linalg.eigvalsh(m.matrix))
    vals, vecs = np.linalg.eigh(m.matrix)
    scale = max(np.abs(vals).max(), 1.0)
    residual = np.abs(m.matrix @ vecs - vecs * vals[None, :]).max()
    if residual > 1e-10 * scale * m.size:
        raise RuntimeError(f"eigenpair residual {residual:.3e} out of tolerance")
    return SpectralResult(vals, vecs)


@lru_cache(maxsize=65536)
def spectrum(dom: LatticeDomain, convention: str = LAPLACIAN) -> tuple:
    """Cached ascending spectrum of a domain (as a tuple, for hashability)."""
    return tuple(eigen_ascending(build_matrix(dom, convention)).eigenvalues)


def sum_lowest(dom: LatticeDomain, n: int, convention: str = LAPLACIAN) -> float:
    """Sum of the n lowest eigenvalues; the ground energy of n free fermions."""
    if not 0 <= n <= len(dom):
        raise ValueError(f"N={n} outside 0..{len(dom)}")
    if n == 0:
        return 0.0
    return float(np.sum(np.asarray(spectrum(dom, convention))[:n]))


def boundary_vector(dom: LatticeDomain, k) -> BoundaryVector:
    """Plane-wave-weighted exterior-direction sums on the inner boundary.

    b_k(x) = exp(-i k.x) * sum of exp(-i k.e) over unit steps e leaving the
    domain from x.  The squared norm lies in [B, 2d*B] whenever
    max|k_i| <= pi/4; that window is asserted here since its failure would
    indicate a broken boundary computation, not a data issue.
    """
    kv = np.atleast_1d(np.asarray(k, dtype=float))
    if kv.shape != (dom.dim,):
        raise ValueError(f"k must have {dom.dim} components")
    if np.any(np.abs(kv) > np.pi + 1e-12):
        raise ValueError("k components must lie in [-pi, pi]")
    values = np.zeros(len(dom), dtype=complex)
    for i, s in enumerate(dom.sites):
        acc = 0.0 + 0.0j
        for axis in range(dom.dim):
            for step in (-1, 1):
                nb = list(s)
                nb[axis] += step
                if tuple(nb) not in dom:
                    acc += np.exp(-1j * kv[axis] * step)
        if acc != 0:
            values[i] = np.exp(-1j * float(np.dot(kv, s))) * acc
    bv = BoundaryVector(tuple(kv.tolist()), values)
    if np.abs(kv).max() <= np.pi / 4 + 1e-12:
        b = int(exterior_neighbor_counts(dom).sum())
        nsq = bv.norm_sq
        if not (b - 1e-9 <= nsq <= 2 * dom.dim * b + 1e-9):
            raise RuntimeError(
                f"boundary vector norm {nsq:.6f} escaped window [{b}, {2*dom.dim*b}]"
            )
    return bv
