"""Finite domains of Z^d: boundary data, canonical enumeration, serialization.

A domain is a finite set of lattice sites.  All quantities of interest here
(exterior bond count, inner boundary, spectra downstream) are translation
invariant, so domains are stored in canonical form: the minimal corner of the
bounding box is translated to the origin and sites are kept in lexicographic
order.  Rotations and reflections are deliberately not quotiented out; the
enumeration therefore produces fixed polyominoes (1, 2, 6, 19, 63, 216, ...
for d=2).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import BudgetExceededError

Site = tuple  # tuple of d ints

SUPPORTED_DIMS = (1, 2, 3)


def _as_site(coords) -> Site:
    return tuple(int(c) for c in coords)


def neighbors(site: Site) -> list:
    """The 2d nearest neighbors of a site."""
    out = []
    for axis in range(len(site)):
        for step in (-1, 1):
            nb = list(site)
            nb[axis] += step
            out.append(tuple(nb))
    return out


class LatticeDomain:
    """An immutable finite subset of Z^d in canonical (origin-anchored) form."""

    __slots__ = ("dim", "sites", "_site_set", "_hash")

    def __init__(self, dim: int, sites: Iterable[Sequence[int]]):
        if dim not in SUPPORTED_DIMS:
            raise ValueError(f"dimension must be one of {SUPPORTED_DIMS}, got {dim!r}")
        raw = [_as_site(s) for s in sites]
        if not raw:
            raise ValueError("domain must be nonempty")
        for s in raw:
            if len(s) != dim:
                raise ValueError(f"site {s} does not have {dim} coordinates")
        site_set = set(raw)
        if len(site_set) != len(raw):
            raise ValueError("duplicate sites in domain")
        corner = tuple(min(s[a] for s in site_set) for a in range(dim))
        shifted = sorted(tuple(c - o for c, o in zip(s, corner)) for s in site_set)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "sites", tuple(shifted))
        object.__setattr__(self, "_site_set", frozenset(shifted))
        object.__setattr__(self, "_hash", hash((dim, tuple(shifted))))

    def __setattr__(self, name, value):
        raise AttributeError("LatticeDomain is immutable")

    def __len__(self) -> int:
        return len(self.sites)

    def __contains__(self, site) -> bool:
        return tuple(site) in self._site_set

    def __iter__(self):
        return iter(self.sites)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LatticeDomain)
            and self.dim == other.dim
            and self.sites == other.sites
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"LatticeDomain(dim={self.dim}, sites={list(self.sites)})"

    @property
    def site_set(self) -> frozenset:
        return self._site_set

    def index_of(self, site) -> int:
        """Position of a site in the canonical order."""
        return self.sites.index(tuple(site))

    def bounding_box(self) -> tuple:
        """Per-axis (min, max) over sites; min is 0 by canonicalization."""
        return tuple(
            (0, max(s[a] for s in self.sites)) for a in range(self.dim)
        )

    def translate(self, offset) -> "LatticeDomain":
        """Translation returns the same canonical domain (identity is shift-free)."""
        off = _as_site(offset)
        return LatticeDomain(self.dim, [tuple(c + o for c, o in zip(s, off)) for s in self.sites])

    def to_text(self) -> str:
        lines = [f"d={self.dim}"]
        lines.extend(",".join(str(c) for c in s) for s in self.sites)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LatticeDomain":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("d="):
            raise ValueError("domain text must start with a 'd=<dim>' line")
        dim = int(lines[0][2:])
        sites = [tuple(int(tok) for tok in ln.split(",")) for ln in lines[1:]]
        return cls(dim, sites)


def segment(length: int) -> LatticeDomain:
    """The 1-D chain of a given length."""
    return LatticeDomain(1, [(i,) for i in range(length)])


def box_domain(dim: int, sides) -> LatticeDomain:
    """A full rectangular box with the given side lengths."""
    if isinstance(sides, int):
        sides = (sides,) * dim
    return LatticeDomain(dim, product(*(range(s) for s in sides)))


@dataclass(frozen=True)
class BoundaryData:
    """Exterior bond count B and the inner boundary set of a domain."""

    bond_count: int
    inner_boundary: frozenset


def exterior_neighbor_counts(dom: LatticeDomain) -> np.ndarray:
    """Number of exterior nearest neighbors of each site, in canonical order."""
    counts = np.zeros(len(dom), dtype=np.int64)
    for i, s in enumerate(dom.sites):
        counts[i] = sum(1 for nb in neighbors(s) if nb not in dom)
    return counts


def boundary_bond_count(dom: LatticeDomain) -> int:
    """Number of nearest-neighbor bonds joining the domain to its complement."""
    return int(exterior_neighbor_counts(dom).sum())


def inner_boundary(dom: LatticeDomain) -> frozenset:
    """Sites of the domain with at least one exterior nearest neighbor."""
    return frozenset(
        s for s in dom.sites if any(nb not in dom for nb in neighbors(s))
    )


def boundary_data(dom: LatticeDomain) -> BoundaryData:
    return BoundaryData(boundary_bond_count(dom), inner_boundary(dom))


def add_isolated_sites(dom: LatticeDomain, m: int) -> LatticeDomain:
    """Adjoin m pairwise-isolated sites, each at distance >= 2 from the domain.

    Sites are placed collinearly along the first axis beyond the bounding box
    with gaps of 2, which keeps the construction deterministic and guarantees
    B(union) = B(dom) + 2*dim*m.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return dom
    x_max = max(s[0] for s in dom.sites)
    tail = (0,) * (dom.dim - 1)
    extra = [(x_max + 2 + 2 * i,) + tail for i in range(m)]
    return LatticeDomain(dom.dim, list(dom.sites) + extra)


def quasi_cube_domain(dim: int, n: int) -> LatticeDomain:
    """A nearly cubic domain of n sites: lexicographic prefix of the smallest
    enclosing cube.  Its boundary stays below 4*dim*n^(1-1/dim)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    side = 1
    while side**dim < n:
        side += 1
    cells = sorted(product(range(side), repeat=dim))
    return LatticeDomain(dim, cells[:n])


def _canonical_site_tuple(sites) -> tuple:
    dim = len(next(iter(sites)))
    corner = tuple(min(s[a] for s in sites) for a in range(dim))
    return tuple(sorted(tuple(c - o for c, o in zip(s, corner)) for s in sites))


def enumerate_domains(
    dim: int,
    n_max: int,
    connected: bool = True,
    box_side: int | None = None,
    budget: int = 1_000_000,
) -> Iterator[LatticeDomain]:
    """Yield every domain of size 1..n_max exactly once up to translation.

    Connected enumeration grows domains one exterior neighbor at a time with
    canonical-form deduplication.  The unrestricted family is infinite under
    translation of its parts, so connected=False requires a bounding box side
    and enumerates subsets of that box instead.  Order is deterministic:
    ascending size, then lexicographic canonical form.
    """
    if dim not in SUPPORTED_DIMS:
        raise ValueError(f"dimension must be one of {SUPPORTED_DIMS}, got {dim!r}")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if connected:
        yield from _enumerate_connected(dim, n_max, budget)
    else:
        if box_side is None:
            raise ValueError("disconnected enumeration requires box_side")
        yield from _enumerate_in_box(dim, n_max, box_side, budget)


def _enumerate_connected(dim: int, n_max: int, budget: int) -> Iterator[LatticeDomain]:
    origin = (0,) * dim
    level = {(origin,)}
    emitted = 0
    for size in range(1, n_max + 1):
        for sites in sorted(level):
            emitted += 1
            if emitted > budget:
                raise BudgetExceededError(
                    f"domain enumeration exceeded budget {budget}"
                )
            yield LatticeDomain(dim, sites)
        if size == n_max:
            break
        nxt = set()
        for sites in level:
            site_set = set(sites)
            for s in sites:
                for nb in neighbors(s):
                    if nb not in site_set:
                        nxt.add(_canonical_site_tuple(sites + (nb,)))
                        if len(nxt) > budget:
                            raise BudgetExceededError(
                                f"domain enumeration exceeded budget {budget}"
                            )
        level = nxt


def _enumerate_in_box(
    dim: int, n_max: int, box_side: int, budget: int
) -> Iterator[LatticeDomain]:
    cells = sorted(product(range(box_side), repeat=dim))
    emitted = 0
    for size in range(1, min(n_max, len(cells)) + 1):
        seen = set()
        for combo in combinations(cells, size):
            canon = _canonical_site_tuple(combo)
            if canon in seen:
                continue
            seen.add(canon)
            emitted += 1
            if emitted > budget:
                raise BudgetExceededError(
                    f"domain enumeration exceeded budget {budget}"
                )
            yield LatticeDomain(dim, canon)


def random_subset_domains(
    dim: int,
    box_side: int,
    count: int,
    rng: np.random.Generator,
    sizes=None,
) -> list:
    """Sample arbitrary (not necessarily connected) subsets of a box.

    Used for randomized scans; connectivity is not enforced.  sizes may be an
    int, a sequence to draw from, or None for uniform over 1..box volume.
    """
    cells = sorted(product(range(box_side), repeat=dim))
    volume = len(cells)
    if sizes is None:
        size_pool = list(range(1, volume + 1))
    elif isinstance(sizes, int):
        size_pool = [sizes]
    else:
        size_pool = list(sizes)
    out = []
    for _ in range(count):
        n = int(rng.choice(size_pool))
        picks = rng.choice(volume, size=n, replace=False)
        out.append(LatticeDomain(dim, [cells[int(i)] for i in picks]))
    return out
