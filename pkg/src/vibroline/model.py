"""Domain types and unit conventions shared by the whole toolkit.

Units are fixed globally: lengths in Angstrom, masses in amu, force
constants in eV/A^2, spectral energies in meV.  The one conversion constant
everything downstream depends on is ``HBAR_SQ`` below; it is defined here
and nowhere else.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import MismatchedStructures, WrapAmbiguity

__all__ = [
    "HBAR_SQ",
    "KB_MEV_PER_K",
    "AtomSite",
    "CrystalStructure",
    "GeometryPair",
    "ForceConstants",
    "Spectrum",
    "validate_pair",
]

#: hbar^2 in amu * A^2 * eV.  Converts between force-constant eigenvalues
#: (eV / A^2 / amu) and squared phonon energies (eV^2), and sets the scale
#: of the dimensionless mode couplings.
HBAR_SQ = 4.18103e-3

#: Boltzmann constant in meV / K.
KB_MEV_PER_K = 0.0861733


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AtomSite:
    """One atomic site: chemical symbol, mass (amu), Cartesian position (A)."""

    species: str
    mass: float
    position: np.ndarray

    def __post_init__(self):
        pos = _readonly(np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "position", pos)
        if not (self.mass > 0):
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("position must be finite")


@dataclass(frozen=True)
class CrystalStructure:
    """A lattice plus an ordered list of sites.

    The site order is the canonical atom index used everywhere downstream;
    two structures are comparable only if their orderings agree.
    """

    lattice: np.ndarray
    sites: tuple[AtomSite, ...]
    periodic: bool = True

    def __post_init__(self):
        lat = _readonly(np.asarray(self.lattice, dtype=float).reshape(3, 3))
        object.__setattr__(self, "lattice", lat)
        object.__setattr__(self, "sites", tuple(self.sites))
        if len(self.sites) < 1:
            raise ValueError("structure needs at least one site")
        if self.periodic and np.linalg.det(lat) <= 0:
            raise ValueError("periodic lattice must have positive determinant")

    @property
    def n_atoms(self) -> int:
        return len(self.sites)

    @property
    def positions(self) -> np.ndarray:
        """(N, 3) Cartesian positions in A."""
        return np.array([s.position for s in self.sites])

    @property
    def masses(self) -> np.ndarray:
        return np.array([s.mass for s in self.sites])

    @property
    def species(self) -> tuple[str, ...]:
        return tuple(s.species for s in self.sites)


@dataclass(frozen=True)
class GeometryPair:
    """Ground- and excited-state geometries of the same cell.

    Invariants (same lattice, species sequence, and count; displacements
    below half the shortest lattice vector) are checked by
    :func:`validate_pair`, which is the entry point for all consumers.
    """

    ground: CrystalStructure
    excited: CrystalStructure


@dataclass(frozen=True)
class ForceConstants:
    """Second-order force constants as pairwise 3x3 blocks in eV/A^2.

    ``blocks`` maps (i, j) atom-index pairs to 3x3 arrays.  Storing either
    orientation of a pair is enough; the symmetric counterpart
    block(j, i) = block(i, j)^T is filled in on construction.  Unstored
    pairs are zero.
    """

    blocks: dict[tuple[int, int], np.ndarray]
    structure: CrystalStructure
    _sym_tol: float = field(default=1e-8, repr=False)

    def __post_init__(self):
        n = self.structure.n_atoms
        full: dict[tuple[int, int], np.ndarray] = {}
        for (i, j), b in self.blocks.items():
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"block index ({i}, {j}) out of range for {n} atoms")
            b = np.asarray(b, dtype=float).reshape(3, 3)
            if i == j:
                # self blocks are stored as given; sum-rule corrections on
                # noisy fits can leave them slightly asymmetric
                full[(i, i)] = _readonly(b.copy())
                continue
            for key, val in (((i, j), b), ((j, i), b.T)):
                if key in full:
                    if not np.allclose(full[key], val, atol=self._sym_tol):
                        raise ValueError(
                            f"blocks for pair {key} violate transposition symmetry"
                        )
                else:
                    full[key] = _readonly(val.copy())
        object.__setattr__(self, "blocks", full)

    def block(self, i: int, j: int) -> np.ndarray:
        """The (i, j) block, zero if the pair is not stored."""
        b = self.blocks.get((i, j))
        return b if b is not None else np.zeros((3, 3))

    def pairs(self) -> list[tuple[int, int]]:
        """Stored pairs in deterministic order."""
        return sorted(self.blocks)


@dataclass(frozen=True)
class Spectrum:
    """A uniformly gridded (energy meV, intensity) series.

    ``normalization`` records the integrated area of ``intensities`` over
    ``energies``.
    """

    energies: np.ndarray
    intensities: np.ndarray
    zpl_energy: float
    normalization: float

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        y = np.asarray(self.intensities, dtype=float)
        if e.ndim != 1 or e.shape != y.shape or e.size < 2:
            raise ValueError("energies and intensities must be equal-length 1D arrays")
        steps = np.diff(e)
        h = steps[0]
        if h <= 0 or np.max(np.abs(steps - h)) > 1e-9 * abs(h):
            raise ValueError("energy grid must be uniform to 1 part in 1e9")
        if np.min(y) < -1e-12 * max(np.max(y), 1.0):
            raise ValueError("intensities must be non-negative")
        object.__setattr__(self, "energies", _readonly(e))
        object.__setattr__(self, "intensities", _readonly(np.maximum(y, 0.0)))

    @property
    def spacing(self) -> float:
        return float(self.energies[1] - self.energies[0])

    def area(self) -> float:
        return float(np.trapezoid(self.intensities, self.energies))


def _min_image(delta_cart: np.ndarray, lattice: np.ndarray) -> tuple[np.ndarray, float]:
    """Shortest periodic image of a Cartesian difference vector.

    Searches the 27 neighbouring lattice translations, which is sufficient
    for the near-orthogonal cells this toolkit targets.  Returns the image
    vector and the gap between the two shortest candidates (zero gap means
    the image is ambiguous).
    """
    frac = delta_cart @ np.linalg.inv(lattice)
    frac -= np.round(frac)
    shifts = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=3)))
    cands = (frac + shifts) @ lattice
    norms = np.linalg.norm(cands, axis=1)
    order = np.argsort(norms, kind="stable")
    best = cands[order[0]]
    gap = norms[order[1]] - norms[order[0]]
    return best, float(gap)


def validate_pair(pair: GeometryPair) -> np.ndarray:
    """Check pair invariants and return per-site displacements (N, 3) in A.

    Displacements are excited minus ground positions, reduced by the
    minimum-image convention when the structures are periodic.  Raises
    :class:`MismatchedStructures` if the two members are not comparable and
    :class:`WrapAmbiguity` if any displacement reaches half the shortest
    lattice vector.
    """
    g, e = pair.ground, pair.excited
    if g.n_atoms != e.n_atoms:
        raise MismatchedStructures(
            f"site counts differ: {g.n_atoms} vs {e.n_atoms}"
        )
    if g.species != e.species:
        raise MismatchedStructures("species sequences differ")
    if g.periodic != e.periodic or not np.allclose(g.lattice, e.lattice, atol=1e-10):
        raise MismatchedStructures("lattices differ")
    if not np.allclose(g.masses, e.masses, rtol=1e-12):
        raise MismatchedStructures("site masses differ")

    raw = e.positions - g.positions
    if not g.periodic:
        return raw

    half_min_vec = 0.5 * min(np.linalg.norm(g.lattice[k]) for k in range(3))
    out = np.empty_like(raw)
    for a in range(g.n_atoms):
        img, _gap = _min_image(raw[a], g.lattice)
        if np.linalg.norm(img) >= half_min_vec:
            raise WrapAmbiguity(
                f"site {a} displaced by {np.linalg.norm(img):.4f} A, at or beyond "
                f"half the shortest lattice vector ({half_min_vec:.4f} A)"
            )
        out[a] = img
    return out
