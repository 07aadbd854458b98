"""Two-species fermions on a domain: exact diagonalization and the t=0 limit.

The Hamiltonian is a nearest-neighbor hop of amplitude -1 for the light
species, -t for the heavy species (0 <= t <= 1), and an on-site repulsion U
between the species.  Both particle numbers are conserved, so everything is
built per (N1, N2) sector.

Occupation words are integers whose bit i is the occupation of canonical
site i.  The composite basis is heavy-major: index = heavy_rank * D1 +
light_rank, which makes the t=0 block structure (one block per heavy
configuration) contiguous and heavy marginals a reshape away.  Fermionic
signs follow the canonical site order: a hop between sites i < j picks up
the parity of occupied sites of the same species strictly between them.
Any consistent ordering gives the same spectrum; a test reverses the order
to confirm.

At t=0 the heavy configuration is classical: the sector Hamiltonian is block
diagonal and the block energy is the sum of the N1 lowest eigenvalues of the
single-particle hopping matrix plus U on the occupied sites.  That is the
Falicov-Kimball ground-state problem solved by `fk_ground`, either
exhaustively or by simulated annealing over single-site heavy moves.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from . import bulk, lattice, spectral
from .errors import BudgetExceededError, ConvergenceError
from .lattice import LatticeDomain

DENSE_SECTOR_CEILING = 2000
SECTOR_BUDGET = 300_000
FK_EXHAUSTIVE_BUDGET = 1_000_000
DEGENERACY_TOL = 1e-7
TIE_TOL = 1e-9


# ---------------------------------------------------------------------------
# occupation words and sectors
# ---------------------------------------------------------------------------

def occupation_words(n_sites: int, n_particles: int) -> np.ndarray:
    """All words with n_particles bits set among n_sites, ascending."""
    if not 0 <= n_particles <= n_sites:
        raise ValueError("particle number outside 0..n_sites")
    out = [
        sum(1 << i for i in occ) for occ in combinations(range(n_sites), n_particles)
    ]
    return np.array(sorted(out), dtype=np.int64)


def combinadic_rank(word: int, n_sites: int) -> int:
    """Rank of a word among same-weight words in ascending order.

    Ascending integer order of fixed-weight words coincides with the
    colexicographic combination order, so the rank is the colex combinadic
    sum of C(position, 1 + bits seen so far).
    """
    rank = 0
    seen = 0
    for pos in range(n_sites):
        if (word >> pos) & 1:
            seen += 1
            rank += comb(pos, seen)
    return rank


def word_bits(word: int, n_sites: int) -> np.ndarray:
    return (word >> np.arange(n_sites, dtype=np.int64)) & 1


def word_string(word: int, n_sites: int) -> str:
    """Occupation string, site 0 leftmost."""
    return "".join("1" if (word >> i) & 1 else "0" for i in range(n_sites))


@dataclass(frozen=True)
class HeavyConfig:
    """A classical heavy-species placement on a domain's canonical sites."""

    word: int
    n_sites: int

    @property
    def n_heavy(self) -> int:
        return int(word_bits(self.word, self.n_sites).sum())

    def occupied_indices(self) -> tuple:
        return tuple(int(i) for i in np.nonzero(word_bits(self.word, self.n_sites))[0])

    def as_domain(self, dom: LatticeDomain) -> LatticeDomain:
        """Occupied sites viewed as their own domain in Z^d."""
        if self.n_sites != len(dom):
            raise ValueError("config length does not match domain size")
        return LatticeDomain(dom.dim, [dom.sites[i] for i in self.occupied_indices()])

    def bond_count(self, dom: LatticeDomain) -> int:
        """Exterior bonds of the occupied set in Z^d (complement includes
        both the empty sites of the domain and everything outside it)."""
        return lattice.boundary_bond_count(self.as_domain(dom))


class FockSector:
    """Fixed-(N1, N2) two-species basis over a domain."""

    def __init__(self, dom: LatticeDomain, n_light: int, n_heavy: int,
                 budget: int = SECTOR_BUDGET):
        size = len(dom)
        dim = comb(size, n_light) * comb(size, n_heavy)
        if dim > budget:
            raise BudgetExceededError(
                f"sector dimension {dim} exceeds budget {budget}"
            )
        self.dom = dom
        self.n_light = n_light
        self.n_heavy = n_heavy
        self.light_words = occupation_words(size, n_light)
        self.heavy_words = occupation_words(size, n_heavy)

    @property
    def dim_light(self) -> int:
        return len(self.light_words)

    @property
    def dim_heavy(self) -> int:
        return len(self.heavy_words)

    @property
    def dim(self) -> int:
        return self.dim_light * self.dim_heavy

    def index(self, light_word: int, heavy_word: int) -> int:
        """Composite heavy-major index of a basis pair."""
        r1 = combinadic_rank(light_word, len(self.dom))
        r2 = combinadic_rank(heavy_word, len(self.dom))
        return r2 * self.dim_light + r1


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------

def _directed_bonds(dom: LatticeDomain) -> list:
    index = {s: i for i, s in enumerate(dom.sites)}
    bonds = []
    for i, s in enumerate(dom.sites):
        for nb in lattice.neighbors(s):
            j = index.get(nb)
            if j is not None and j > i:
                bonds.append((i, j))
    return bonds


def species_hop_matrix(dom: LatticeDomain, words: np.ndarray) -> sp.csr_matrix:
    """Hop matrix (amplitude -1, fermionic signs) on one species' words."""
    n_dim = len(words)
    rows, cols, vals = [], [], []
    for (i, j) in _directed_bonds(dom):
        mask = (1 << i) | (1 << j)
        between = ((1 << j) - 1) & ~((1 << (i + 1)) - 1)
        occ_i = (words >> i) & 1
        occ_j = (words >> j) & 1
        hoppable = occ_i != occ_j
        src = np.nonzero(hoppable)[0]
        if len(src) == 0:
            continue
        new_words = words[src] ^ mask
        dst = np.searchsorted(words, new_words)
        if not np.array_equal(words[dst], new_words):
            raise RuntimeError("hop left the fixed-number sector")
        parity = np.bitwise_count(words[src] & between) & 1
        sign = np.where(parity == 0, -1.0, 1.0)  # amplitude -1 times JW sign
        rows.append(dst)
        cols.append(src)
        vals.append(sign)
    if not rows:
        return sp.csr_matrix((n_dim, n_dim))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_dim, n_dim),
    )


class HubbardOperator:
    """Sector Hamiltonian held as a sparse symmetric matrix."""

    def __init__(self, sector: FockSector, u: float, t: float, matrix: sp.csr_matrix):
        self.sector = sector
        self.u = u
        self.t = t
        self.matrix = matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec


def build_hubbard(sector: FockSector, u: float, t: float) -> HubbardOperator:
    """Assemble the sector Hamiltonian: light hops + t * heavy hops + U overlap."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("hopping ratio t must lie in [0, 1]")
    if u < 0.0:
        raise ValueError("U must be >= 0")
    t_light = species_hop_matrix(sector.dom, sector.light_words)
    t_heavy = species_hop_matrix(sector.dom, sector.heavy_words)
    overlap = np.bitwise_count(
        sector.heavy_words[:, None] & sector.light_words[None, :]
    ).astype(float).ravel()
    h = (
        sp.kron(sp.eye(sector.dim_heavy), t_light)
        + t * sp.kron(t_heavy, sp.eye(sector.dim_light))
        + sp.diags(u * overlap)
    )
    return HubbardOperator(sector, u, t, h.tocsr())


@dataclass(frozen=True, eq=False)
class ManyBodyGroundState:
    energy: float
    vector: np.ndarray
    sector: FockSector
    degeneracy: int | None
    residual: float
    seed: int


def ground_state(
    op: HubbardOperator,
    tol: float = 1e-9,
    seed: int = 0,
    dense_ceiling: int = DENSE_SECTOR_CEILING,
) -> ManyBodyGroundState:
    """Lowest eigenpair of a sector operator.

    Dense below `dense_ceiling`, otherwise Lanczos (ARPACK) with a seeded
    start vector so repeated runs are bit-identical.  Degeneracy counts
    eigenvalues within 1e-7 of the minimum among those computed.
    """
    n = op.dim
    if n == 1:
        val = float(op.matrix[0, 0].item() if sp.issparse(op.matrix) else op.matrix[0, 0])
        return ManyBodyGroundState(val, np.ones(1), op.sector, 1, 0.0, seed)
    if n <= dense_ceiling:
        vals, vecs = np.linalg.eigh(op.matrix.toarray())
        energy = float(vals[0])
        vector = vecs[:, 0]
        degeneracy = int(np.sum(vals <= vals[0] + DEGENERACY_TOL))
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        k = min(6, n - 1)
        try:
            vals, vecs = spl.eigsh(
                op.matrix, k=k, which="SA", v0=v0, tol=min(tol, 1e-10), maxiter=100_000
            )
        except spl.ArpackNoConvergence as exc:
            raise ConvergenceError(f"Lanczos did not converge: {exc}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        energy = float(vals[0])
        vector = vecs[:, 0]
        degeneracy = int(np.sum(vals <= vals[0] + DEGENERACY_TOL))
        if degeneracy == k:
            degeneracy = None  # all computed values tie; true count unknown
    vector = vector / np.linalg.norm(vector)
    residual = float(np.linalg.norm(op.apply(vector) - energy * vector))
    scale = max(abs(energy), 1.0)
    if residual > max(tol * scale * 100, 1e-8):
        raise ConvergenceError(f"ground-state residual {residual:.3e} above tolerance")
    return ManyBodyGroundState(energy, vector, op.sector, degeneracy, residual, seed)


# ---------------------------------------------------------------------------
# t = 0: classical heavy configurations
# ---------------------------------------------------------------------------

def fk_energy(dom: LatticeDomain, config, n_light: int, u: float) -> float:
    """Light ground energy in the external potential U on occupied sites.

    Hopping convention (no 2d diagonal): at U=0 this equals the laplacian
    partial sum minus 2d*N1.
    """
    word = config.word if isinstance(config, HeavyConfig) else int(config)
    size = len(dom)
    if not 0 <= n_light <= size:
        raise ValueError("N1 outside 0..|domain|")
    if u < 0.0:
        raise ValueError("U must be >= 0")
    if n_light == 0:
        return 0.0
    m = spectral.build_matrix(dom, spectral.HOPPING).matrix.copy()
    occ = word_bits(word, size).astype(float)
    m[np.diag_indices(size)] += u * occ
    vals = np.linalg.eigvalsh(m)
    return float(vals[:n_light].sum())


@dataclass(frozen=True)
class FKGroundResult:
    configs: tuple          # HeavyConfig winners, ascending word order
    energy: float
    strategy: str
    n_evaluated: int
    seed: int | None = None


def fk_ground(
    dom: LatticeDomain,
    n_light: int,
    n_heavy: int,
    u: float,
    strategy: str = "exhaustive",
    budget: int = FK_EXHAUSTIVE_BUDGET,
    seed: int = 0,
    steps: int = 20_000,
    t_start: float = 2.0,
    cooling: float = 0.9995,
) -> FKGroundResult:
    """Minimize the light energy over heavy configurations.

    exhaustive: every configuration, returning all minimizers within 1e-9.
    anneal: Metropolis walk over single-site heavy moves to nearest
    neighbors with a geometric temperature schedule; best-found only, seed
    recorded.  The walk is sequential, so a larger step budget with the same
    seed can only improve the result.
    """
    size = len(dom)
    if not 0 <= n_heavy <= size:
        raise ValueError("N2 outside 0..|domain|")
    if strategy == "exhaustive":
        n_configs = comb(size, n_heavy)
        if n_configs > budget:
            raise BudgetExceededError(
                f"{n_configs} configurations exceed budget {budget}; use anneal"
            )
        best = None
        winners: list[int] = []
        for word in occupation_words(size, n_heavy):
            word = int(word)
            e = fk_energy(dom, word, n_light, u)
            if best is None or e < best - TIE_TOL:
                best, winners = e, [word]
            elif e <= best + TIE_TOL:
                winners.append(word)
                best = min(best, e)
        winners = [w for w in winners if fk_energy(dom, w, n_light, u) <= best + TIE_TOL]
        return FKGroundResult(
            tuple(HeavyConfig(w, size) for w in sorted(winners)),
            best,
            "exhaustive",
            n_configs,
        )
    if strategy == "anneal":
        return _fk_anneal(dom, n_light, n_heavy, u, seed, steps, t_start, cooling)
    raise ValueError(f"unknown strategy {strategy!r}")


def _fk_anneal(dom, n_light, n_heavy, u, seed, steps, t_start, cooling) -> FKGroundResult:
    size = len(dom)
    rng = np.random.default_rng(seed)
    site_index = {s: i for i, s in enumerate(dom.sites)}
    nbr_lists = [
        [site_index[nb] for nb in lattice.neighbors(s) if nb in site_index]
        for s in dom.sites
    ]
    occ = list(range(n_heavy))
    word = sum(1 << i for i in occ)
    energy = fk_energy(dom, word, n_light, u)
    best_word, best_energy = word, energy
    temp = t_start
    for _ in range(steps):
        if n_heavy == 0 or n_heavy == size:
            break
        src = int(rng.choice(occ))
        moves = [j for j in nbr_lists[src] if not (word >> j) & 1]
        temp *= cooling
        if not moves:
            continue
        dst = int(moves[int(rng.integers(len(moves)))])
        new_word = word ^ (1 << src) ^ (1 << dst)
        new_energy = fk_energy(dom, new_word, n_light, u)
        if new_energy <= energy or rng.random() < np.exp(-(new_energy - energy) / max(temp, 1e-12)):
            word, energy = new_word, new_energy
            occ = [i for i in range(size) if (word >> i) & 1]
            if energy < best_energy - 1e-15:
                best_word, best_energy = word, energy
    return FKGroundResult(
        (HeavyConfig(best_word, size),), best_energy, "anneal", steps, seed
    )


# ---------------------------------------------------------------------------
# correlation observables
# ---------------------------------------------------------------------------

def _as_displacement(x, dim: int) -> tuple:
    if isinstance(x, int):
        if dim != 1:
            raise ValueError("integer displacement only valid for d=1")
        return (x,)
    xt = tuple(int(c) for c in x)
    if len(xt) != dim:
        raise ValueError(f"displacement must have {dim} components")
    return xt


def sigma_classical(dom: LatticeDomain, config, x, restricted: bool = False) -> float:
    """Mean squared heavy-occupation difference at displacement x.

    The occupation indicator extends by zero outside the domain; with
    restricted=True the sum keeps only offsets y+x inside the domain instead
    (sensitivity check for the extension convention).
    """
    word = config.word if isinstance(config, HeavyConfig) else int(config)
    xt = _as_displacement(x, dom.dim)
    occupied = {
        dom.sites[i] for i in range(len(dom)) if (word >> i) & 1
    }
    count = 0
    for y in dom.sites:
        z = tuple(c + o for c, o in zip(y, xt))
        if restricted and z not in dom:
            continue
        if (y in occupied) != (z in occupied):
            count += 1
    return count / len(dom)


def directional_mismatch_count(dom: LatticeDomain, word: int, x) -> int:
    """#{occupied y with y+x unoccupied}, the one-sided mismatch count."""
    xt = _as_displacement(x, dom.dim)
    occupied = {dom.sites[i] for i in range(len(dom)) if (word >> i) & 1}
    return sum(
        1
        for y in occupied
        if tuple(c + o for c, o in zip(y, xt)) not in occupied
    )


def heavy_marginals(gs: ManyBodyGroundState) -> np.ndarray:
    """Probability of each heavy configuration, aligned with heavy_words."""
    sector = gs.sector
    return (gs.vector.reshape(sector.dim_heavy, sector.dim_light) ** 2).sum(axis=1)


def sigma_expectation(gs: ManyBodyGroundState, x) -> float:
    """Heavy density-difference correlation of the ground state.

    For x != 0: 2/|domain| * sum over configs of a^2 times the one-sided
    mismatch count (the decomposition over heavy configurations).  x = 0 is
    definitionally zero and returned as such.
    """
    sector = gs.sector
    xt = _as_displacement(x, sector.dom.dim)
    if all(c == 0 for c in xt):
        return 0.0
    weights = heavy_marginals(gs)
    total = 0.0
    for w, word in zip(weights, sector.heavy_words):
        if w < 1e-15:
            continue
        total += w * directional_mismatch_count(sector.dom, int(word), xt)
    return 2.0 * total / len(sector.dom)


def sigma_profile(gs: ManyBodyGroundState, max_range: int = 4) -> dict:
    """sigma_expectation over all displacements with sup-norm <= max_range."""
    dim = gs.sector.dom.dim
    from itertools import product as iproduct

    out = {}
    for xt in iproduct(range(-max_range, max_range + 1), repeat=dim):
        out[xt] = sigma_expectation(gs, xt)
    return out


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaProxy:
    """Large-U surrogate 8 d^2 / U for the finite-U surface correction."""

    u: float
    d: int

    @property
    def value(self) -> float:
        if self.u <= 0:
            raise ValueError("U must be positive for the gamma proxy")
        return 8.0 * self.d * self.d / self.u


@dataclass(frozen=True)
class CoefficientBoundReport:
    lhs: float                 # sum of a^2 * B over heavy configs
    rhs: float | None          # bound from the supplied surface estimate
    admissible: bool           # a_estimate > gamma + t
    gamma: float
    a_estimate: float
    t: float
    note: str


def coefficient_bound_report(
    gs: ManyBodyGroundState, u: float, t: float, a_estimate: float
) -> CoefficientBoundReport:
    """Compare sum a^2 B against its segregation bound.

    The supplied a_estimate is an upper estimate of the true minimal surface
    energy, which makes the reported right side smaller than the theorem's;
    the comparison is diagnostic, not a hard assertion.
    """
    sector = gs.sector
    size = len(sector.dom)
    rho1 = sector.n_light / size
    rho2 = sector.n_heavy / size
    if rho1 + rho2 >= 1.0:
        raise ValueError(
            "coefficient bound requires rho1 + rho2 < 1; use the hole-particle "
            "mapped densities instead"
        )
    d = sector.dom.dim
    gamma = GammaProxy(u, d).value
    weights = heavy_marginals(gs)
    lhs = 0.0
    for w, word in zip(weights, sector.heavy_words):
        if w < 1e-15:
            continue
        lhs += w * HeavyConfig(int(word), size).bond_count(sector.dom)
    admissible = a_estimate > gamma + t
    if admissible:
        x = rho1 / (1.0 - rho2)
        rhs = (
            4.0 * d * bulk.upper_coeff(x, d) * rho2 ** (1.0 - 1.0 / d)
            / (a_estimate - gamma - t) * size ** (1.0 - 1.0 / d)
        )
        note = "admissible; rhs uses the empirical surface estimate"
    else:
        rhs = None
        note = "inadmissible (a_estimate <= gamma + t); report-only"
    return CoefficientBoundReport(lhs, rhs, admissible, gamma, a_estimate, t, note)


@dataclass(frozen=True)
class ScalingRow:
    length: int
    n_light: int
    n_heavy: int
    u: float
    t: float
    x: tuple
    sigma: float
    sum_a2_bonds: float
    energy: float
    sector_dim: int


@dataclass(frozen=True)
class ScalingStudy:
    rows: tuple
    exponent: float | None


def theorem1_scaling(
    lengths,
    rho1,
    rho2,
    u: float,
    t: float,
    x=1,
    seed: int = 0,
    budget: int = SECTOR_BUDGET,
) -> ScalingStudy:
    """sigma at a fixed displacement across chain sizes, plus a power-law fit.

    Densities must be exactly realizable at every length.  The fitted
    exponent is the slope of log sigma against log length (None if any
    sigma vanishes).
    """
    from fractions import Fraction

    f1, f2 = Fraction(rho1), Fraction(rho2)
    rows = []
    for length in lengths:
        n1 = f1 * length
        n2 = f2 * length
        if n1.denominator != 1 or n2.denominator != 1:
            raise ValueError(f"densities not realizable at length {length}")
        dom = lattice.segment(length)
        sector = FockSector(dom, int(n1), int(n2), budget=budget)
        gs = ground_state(build_hubbard(sector, u, t), seed=seed)
        weights = heavy_marginals(gs)
        sum_a2b = float(
            sum(
                w * HeavyConfig(int(word), length).bond_count(dom)
                for w, word in zip(weights, sector.heavy_words)
                if w >= 1e-15
            )
        )
        rows.append(
            ScalingRow(
                length, int(n1), int(n2), u, t, _as_displacement(x, 1),
                sigma_expectation(gs, x), sum_a2b, gs.energy, sector.dim,
            )
        )
    sigmas = np.array([r.sigma for r in rows])
    exponent = None
    if np.all(sigmas > 0):
        exponent = float(
            np.polyfit(np.log([r.length for r in rows]), np.log(sigmas), 1)[0]
        )
    return ScalingStudy(tuple(rows), exponent)
