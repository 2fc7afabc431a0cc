"""Harmonic lattice dynamics: dynamical matrices, acoustic sum rule, and
supercell-to-primitive band unfolding.

Eigenvectors are kept in the mass-weighted convention throughout: the
returned mode vectors are the eigenvectors of the dynamical matrix itself,
orthonormal under the plain complex inner product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentIndices, NotCommensurate, NotHermitian
from .model import HBAR_SQ, CrystalStructure, ForceConstants

__all__ = [
    "PhononBasis",
    "UnfoldedWeights",
    "enforce_asr",
    "dynamical_matrix",
    "diagonalize",
    "unfold",
]

#: asymmetry (eV/A^2/amu) above which a matrix is rejected as non-Hermitian
HERMITICITY_TOL = 1e-6

#: distance slack (A) within which periodic images count as tied
IMAGE_TIE_TOL = 1e-7


def reciprocal_lattice(lattice: np.ndarray) -> np.ndarray:
    """Rows b_i with b_i . a_j = 2 pi delta_ij for row-vector lattice a."""
    return 2.0 * np.pi * np.linalg.inv(np.asarray(lattice, dtype=float)).T


@dataclass(frozen=True)
class PhononBasis:
    """Mode energies (meV, ascending) and mass-weighted eigenvectors at one
    wavevector.

    ``qpoint`` is fractional in the reciprocal basis named by ``frame``
    (the supercell actually diagonalized, or a primitive reference).
    Unstable modes appear as negative energies and are never dropped.
    ``eigenvectors[k]`` is the length-3N complex vector of mode k.
    """

    qpoint: np.ndarray
    frequencies: np.ndarray
    eigenvectors: np.ndarray
    frame: str = "supercell"

    def __post_init__(self):
        q = np.asarray(self.qpoint, dtype=float).reshape(3)
        f = np.asarray(self.frequencies, dtype=float)
        v = np.asarray(self.eigenvectors, dtype=complex)
        if v.shape != (f.size, f.size):
            raise ValueError("eigenvectors must be (n_modes, 3N) with n_modes == 3N")
        if np.any(np.diff(f) < 0):
            raise ValueError("frequencies must be sorted ascending")
        gram = v @ v.conj().T
        if np.max(np.abs(gram - np.eye(f.size))) > 1e-8:
            raise ValueError("eigenvectors are not orthonormal to 1e-8")
        for name, arr in (("qpoint", q), ("frequencies", f)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        v.setflags(write=False)
        object.__setattr__(self, "eigenvectors", v)

    @property
    def n_modes(self) -> int:
        return self.frequencies.size


@dataclass(frozen=True)
class UnfoldedWeights:
    """Spectral weights of supercell modes on a primitive-cell q path.

    ``entries[k]`` is a list of (energy meV, weight) tuples for path point
    ``path[k]``; weights lie in [0, 1] up to 1e-6 numerical slack.
    """

    path: tuple[np.ndarray, ...]
    entries: tuple[tuple[tuple[float, float], ...], ...]

    def __post_init__(self):
        for qe in self.entries:
            for _, w in qe:
                if w < -1e-6 or w > 1.0 + 1e-6:
                    raise ValueError(f"unfolding weight {w} outside [0, 1]")


def enforce_asr(fc: ForceConstants) -> ForceConstants:
    """Return force constants whose self-blocks absorb the row sums.

    After the correction, sum_j block(i, j)[a, b] == 0 exactly for every
    atom i and Cartesian pair (a, b); off-diagonal blocks are untouched.
    """
    n = fc.structure.n_atoms
    row_sums = {i: np.zeros((3, 3)) for i in range(n)}
    new_blocks: dict[tuple[int, int], np.ndarray] = {}
    for (i, j), b in fc.blocks.items():
        if i != j:
            row_sums[i] += b
            new_blocks[(i, j)] = np.asarray(b)
    for i in range(n):
        new_blocks[(i, i)] = -row_sums[i]
    return ForceConstants(new_blocks, fc.structure)


def _pair_images(structure: CrystalStructure, i: int, j: int) -> np.ndarray:
    """All shortest-image Cartesian vectors from atom i to atom j, (k, 3).

    Ties (several images at the same minimal distance, as happens in small
    supercells) are all returned; callers average phase factors over them.
    """
    delta = structure.sites[j].position - structure.sites[i].position
    if not structure.periodic:
        return delta[None, :]
    lat = structure.lattice
    frac = delta @ np.linalg.inv(lat)
    frac -= np.round(frac)
    shifts = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=3)))
    cands = (frac + shifts) @ lat
    norms = np.linalg.norm(cands, axis=1)
    return cands[norms <= norms.min() + IMAGE_TIE_TOL]


def dynamical_matrix(
    fc: ForceConstants, structure: CrystalStructure, q: np.ndarray
) -> np.ndarray:
    """Mass-weighted Fourier transform of the force constants at reduced
    wavevector ``q`` (fractional in the structure's reciprocal basis).

    Each stored pair block is the image-summed coupling; its phase factor is
    averaged over all tied shortest images, which reproduces the exact
    lattice sum whenever interactions reach at most half the cell.
    """
    if fc.structure.n_atoms != structure.n_atoms or not np.allclose(
        fc.structure.lattice, structure.lattice, atol=1e-8
    ):
        raise InconsistentIndices(
            "force constants were built for a different structure"
        )
    q = np.asarray(q, dtype=float).reshape(3)
    if not structure.periodic and np.any(q != 0.0):
        raise InconsistentIndices("non-periodic structure admits only q = 0")

    n = structure.n_atoms
    masses = structure.masses
    q_cart = q @ reciprocal_lattice(structure.lattice) if structure.periodic else q
    dyn = np.zeros((3 * n, 3 * n), dtype=complex)
    for (i, j), block in fc.blocks.items():
        if i == j:
            phase = 1.0 + 0.0j
        else:
            images = _pair_images(structure, i, j)
            phase = np.mean(np.exp(1j * images @ q_cart))
        dyn[3 * i : 3 * i + 3, 3 * j : 3 * j + 3] = (
            block * phase / np.sqrt(masses[i] * masses[j])
        )
    return dyn


def diagonalize(
    dyn: np.ndarray,
    masses: np.ndarray,
    qpoint: np.ndarray = (0.0, 0.0, 0.0),
    frame: str = "supercell",
) -> PhononBasis:
    """Solve the Hermitian eigenproblem and convert eigenvalues to meV.

    Eigenvalues lam in eV/A^2/amu map to energies
    sign(lam) * sqrt(HBAR_SQ * |lam|) * 1000; unstable modes therefore show
    up as negative energies.  Raises :class:`NotHermitian` if the input
    asymmetry exceeds ``HERMITICITY_TOL``.
    """
    dyn = np.asarray(dyn, dtype=complex)
    masses = np.asarray(masses, dtype=float)
    if dyn.shape != (3 * masses.size, 3 * masses.size):
        raise InconsistentIndices(
            f"matrix of shape {dyn.shape} does not match {masses.size} atoms"
        )
    asym = np.max(np.abs(dyn - dyn.conj().T))
    if asym > HERMITICITY_TOL:
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds {HERMITICITY_TOL:.0e}")
    herm = 0.5 * (dyn + dyn.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    energies = np.sign(vals) * 1000.0 * np.sqrt(HBAR_SQ * np.abs(vals))
    return PhononBasis(
        qpoint=np.asarray(qpoint, dtype=float),
        frequencies=energies,
        eigenvectors=vecs.T,
        frame=frame,
    )


def _commensurate_multiplier(
    supercell_lattice: np.ndarray, primitive_lattice: np.ndarray, tol: float = 1e-6
) -> np.ndarray:
    """Integer matrix M with A_sc = M @ A_prim, or raise NotCommensurate."""
    m = supercell_lattice @ np.linalg.inv(primitive_lattice)
    m_int = np.round(m)
    residual = np.max(np.abs((m - m_int) @ primitive_lattice))
    if residual > tol:
        raise NotCommensurate(
            f"supercell/primitive transformation residual {residual:.3e} A"
        )
    if abs(np.linalg.det(m_int)) < 0.5:
        raise NotCommensurate("degenerate supercell transformation")
    return m_int.astype(int)


def _site_channels(
    supercell: CrystalStructure, primitive_lattice: np.ndarray, site_tol: float
) -> list[list[int]]:
    """Group supercell atoms that occupy the same primitive site.

    Atoms are compared by species and by primitive-cell fractional position
    modulo one, with a Cartesian tolerance ``site_tol`` (A) to absorb small
    relaxations around defects.
    """
    inv_prim = np.linalg.inv(primitive_lattice)
    groups: list[tuple[str, np.ndarray, list[int]]] = []
    for idx, site in enumerate(supercell.sites):
        frac = (site.position @ inv_prim) % 1.0
        for spec, ref, members in groups:
            if spec != site.species:
                continue
            d = frac - ref
            d -= np.round(d)
            if np.linalg.norm(d @ primitive_lattice) < site_tol:
                members.append(idx)
                break
        else:
            groups.append((site.species, frac, [idx]))
    return [members for _, _, members in groups]


def unfold(
    bases: list[PhononBasis],
    supercell: CrystalStructure,
    primitive_lattice: np.ndarray,
    path: list[np.ndarray],
    site_tol: float = 0.3,
) -> UnfoldedWeights:
    """Project supercell modes onto primitive-cell wavevectors.

    ``path`` holds fractional q-points of the primitive reciprocal basis.
    Each is folded into the supercell zone and must match the qpoint of one
    entry of ``bases`` (supplied by the caller, e.g. from
    :func:`dynamical_matrix` + :func:`diagonalize` at the folded points).

    The weight of mode lambda at primitive wavevector Q is the squared
    projection of its physical displacement pattern onto plane waves
    exp(-i Q . r) per primitive site/polarization channel, scaled so a
    pristine supercell reproduces the primitive bands with unit weight.
    """
    primitive_lattice = np.asarray(primitive_lattice, dtype=float).reshape(3, 3)
    m_int = _commensurate_multiplier(supercell.lattice, primitive_lattice)
    n_cells = abs(round(float(np.linalg.det(m_int))))
    groups = _site_channels(supercell, primitive_lattice, site_tol)

    b_prim = reciprocal_lattice(primitive_lattice)
    b_sc_inv = supercell.lattice.T / (2.0 * np.pi)
    positions = supercell.positions

    by_q: dict[tuple[int, ...], PhononBasis] = {}
    for b in bases:
        key = tuple(np.round(np.asarray(b.qpoint) % 1.0, 8) % 1.0)
        by_q[key] = b

    out_path = []
    out_entries = []
    for q_prim in path:
        q_prim = np.asarray(q_prim, dtype=float).reshape(3)
        q_cart = q_prim @ b_prim
        q_sc = (q_cart @ b_sc_inv) % 1.0
        key = tuple(np.round(q_sc, 8) % 1.0)
        basis = by_q.get(key)
        if basis is None:
            raise ValueError(
                f"no supercell basis supplied at folded qpoint {np.round(q_sc, 6)}"
            )
        q_sc_cart = basis.qpoint @ reciprocal_lattice(supercell.lattice)
        # combined phase: physical pattern e^{i q_sc r} projected on e^{-i Q r}
        phases = np.exp(1j * positions @ (q_sc_cart - q_cart))
        vecs = basis.eigenvectors.reshape(basis.n_modes, supercell.n_atoms, 3)
        entry = []
        for k in range(basis.n_modes):
            u = vecs[k] * phases[:, None]
            w = 0.0
            for members in groups:
                proj = np.sum(u[members], axis=0)
                w += float(np.sum(np.abs(proj) ** 2))
            entry.append((float(basis.frequencies[k]), w / n_cells))
        out_path.append(q_prim)
        out_entries.append(tuple(entry))
    return UnfoldedWeights(path=tuple(out_path), entries=tuple(out_entries))
