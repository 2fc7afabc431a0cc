"""Desk-scale synthetic models: spring lattices, chains, and fixtures with
exactly prescribed mode energies and couplings.

These builders exist so every pipeline stage can be exercised against
closed-form or constructed ground truth without any external data.
"""

from __future__ import annotations

import itertools

import numpy as np

from .model import HBAR_SQ, AtomSite, CrystalStructure, ForceConstants, GeometryPair
from .phonons import enforce_asr

__all__ = [
    "orthorhombic_cell",
    "make_supercell",
    "spring_force_constants",
    "monoatomic_ring",
    "diatomic_chain",
    "designed_gamma_fixture",
    "single_mode_benchmark",
    "four_mode_benchmark",
    "FOUR_MODE_ENERGIES_MEV",
    "FOUR_MODE_HR",
]

#: energies (meV) of the four-mode benchmark coupling: two dispersive-branch
#: modes and a close defect doublet
FOUR_MODE_ENERGIES_MEV = (31.3, 35.3, 73.45, 74.4)

#: mode couplings of the benchmark, found by coarse grid search so that the
#: first sideband peak of the resulting emission lineshape sits ~36 meV
#: below the elastic line; they sum to 2.785
FOUR_MODE_HR = (0.13925, 1.53175, 0.52915, 0.58485)


def orthorhombic_cell(
    abc: tuple[float, float, float],
    species: str = "Si",
    mass: float = 28.0855,
) -> CrystalStructure:
    """One atom at the origin of an orthorhombic box."""
    ax, ay, az = abc
    return CrystalStructure(
        lattice=np.diag([ax, ay, az]),
        sites=(AtomSite(species, mass, np.zeros(3)),),
    )


def make_supercell(cell: CrystalStructure, reps: tuple[int, int, int]) -> CrystalStructure:
    """Replicate a periodic cell reps[0] x reps[1] x reps[2] times.

    Atom order is cell-major: all sites of translation (0,0,0) first, then
    (0,0,1), and so on in lexicographic order.
    """
    n1, n2, n3 = reps
    lattice = cell.lattice * np.array([[n1], [n2], [n3]], dtype=float)
    sites = []
    for t in itertools.product(range(n1), range(n2), range(n3)):
        shift = t @ cell.lattice
        for s in cell.sites:
            sites.append(AtomSite(s.species, s.mass, s.position + shift))
    return CrystalStructure(lattice=lattice, sites=tuple(sites))


def spring_force_constants(
    structure: CrystalStructure,
    cutoff: float,
    k_longitudinal,
    k_transverse=0.0,
) -> ForceConstants:
    """Pair springs between all atoms within ``cutoff`` (A), ASR applied.

    Each bond contributes -(k_l d d^T + k_t (1 - d d^T)) along its unit
    direction d; several tied periodic images of the same pair are summed.
    Either constant may be a scalar or a length-3 sequence indexed by the
    dominant Cartesian axis of the bond, which breaks the symmetry
    degeneracies of highly regular lattices.  ``cutoff`` beyond the
    shortest-image shell of any pair is rejected because the pairwise block
    storage cannot represent it.
    """
    k_long = np.broadcast_to(np.asarray(k_longitudinal, dtype=float), (3,))
    k_trans = np.broadcast_to(np.asarray(k_transverse, dtype=float), (3,))
    n = structure.n_atoms
    lat = structure.lattice
    inv_lat = np.linalg.inv(lat) if structure.periodic else None
    shifts = (
        np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=3)))
        if structure.periodic
        else np.zeros((1, 3))
    )
    blocks: dict[tuple[int, int], np.ndarray] = {}
    for i in range(n):
        for j in range(i + 1, n):
            delta = structure.sites[j].position - structure.sites[i].position
            if structure.periodic:
                frac = delta @ inv_lat
                frac -= np.round(frac)
                cands = (frac + shifts) @ lat
            else:
                cands = delta[None, :]
            norms = np.linalg.norm(cands, axis=1)
            within = norms <= cutoff
            if not np.any(within):
                continue
            if np.any(norms[within] > norms.min() + 1e-7):
                raise ValueError(
                    "cutoff reaches beyond the shortest-image shell of pair "
                    f"({i}, {j}); use a larger cell or a smaller cutoff"
                )
            block = np.zeros((3, 3))
            for d, r in zip(cands[within], norms[within]):
                u = d / r
                axis = int(np.argmax(np.abs(u)))
                outer = np.outer(u, u)
                block -= k_long[axis] * outer + k_trans[axis] * (np.eye(3) - outer)
            blocks[(i, j)] = block
    return enforce_asr(ForceConstants(blocks, structure))


def monoatomic_ring(
    n_atoms: int,
    spacing: float = 2.5,
    mass: float = 28.0855,
    k: float = 5.0,
) -> tuple[CrystalStructure, ForceConstants]:
    """Periodic chain of identical atoms with nearest-neighbour springs.

    The springs act along the chain only, so the analytic dispersion of the
    longitudinal branch is hbar*omega = 2*sqrt(k/m)*|sin(Q a / 2)| in the
    units of this package.
    """
    lattice = np.diag([n_atoms * spacing, 30.0, 30.0])
    sites = tuple(
        AtomSite("Si", mass, np.array([i * spacing, 0.0, 0.0]))
        for i in range(n_atoms)
    )
    structure = CrystalStructure(lattice=lattice, sites=sites)
    fc = spring_force_constants(structure, cutoff=spacing * 1.01, k_longitudinal=k)
    return structure, fc


def diatomic_chain(
    m1: float = 28.0855,
    m2: float = 12.011,
    spacing: float = 2.0,
    k: float = 5.0,
    k_transverse: float = 0.0,
) -> tuple[CrystalStructure, ForceConstants]:
    """Two alternating masses per cell joined by identical springs.

    At q = 0 the optical branch sits at hbar*sqrt(2 k (1/m1 + 1/m2)); a
    nonzero ``k_transverse`` lifts the transverse branches off zero with
    the same closed form in k_transverse.
    """
    lattice = np.diag([2.0 * spacing, 30.0, 30.0])
    sites = (
        AtomSite("Si", m1, np.array([0.0, 0.0, 0.0])),
        AtomSite("C", m2, np.array([spacing, 0.0, 0.0])),
    )
    structure = CrystalStructure(lattice=lattice, sites=sites)
    fc = spring_force_constants(
        structure, cutoff=spacing * 1.01, k_longitudinal=k, k_transverse=k_transverse
    )
    return structure, fc


def _translation_modes(masses: np.ndarray) -> np.ndarray:
    """Three orthonormal mass-weighted rigid translations, shape (3, 3N)."""
    n = masses.size
    t = np.zeros((3, 3 * n))
    for a in range(3):
        t[a, a::3] = np.sqrt(masses)
        t[a] /= np.linalg.norm(t[a])
    return t


def designed_gamma_fixture(
    energies_mev,
    delta_q,
    masses=None,
    seed: int = 7,
    spare_start_mev: float = 180.0,
) -> tuple[GeometryPair, ForceConstants]:
    """Build a periodic toy cell whose zone-centre spectrum and couplings
    are exactly the ones requested.

    The force constants are assembled in a designed mass-weighted eigenbasis
    (three exact translations plus a seeded random orthonormal complement),
    so diagonalizing them reproduces ``energies_mev`` exactly; the excited
    geometry is displaced along the corresponding modes by ``delta_q``
    (sqrt(amu)*A each).  Any leftover modes are parked at high energies
    starting from ``spare_start_mev`` with zero coupling.
    """
    energies_mev = np.asarray(energies_mev, dtype=float)
    delta_q = np.asarray(delta_q, dtype=float)
    if energies_mev.shape != delta_q.shape:
        raise ValueError("energies and couplings must have matching lengths")
    n_target = energies_mev.size
    n_atoms = max(2, int(np.ceil((3 + n_target) / 3.0)))
    if masses is None:
        masses = np.array(
            [28.0855 if i % 2 == 0 else 12.011 for i in range(n_atoms)]
        )
    else:
        masses = np.asarray(masses, dtype=float)
        n_atoms = masses.size

    n_dof = 3 * n_atoms
    if n_target > n_dof - 3:
        raise ValueError("too many target modes for the atom count")

    # well separated atoms in a big box; the model is not meant to be local
    lattice = np.diag([10.0 * n_atoms, 17.0, 19.0])
    positions = np.array(
        [[10.0 * i + 1.0, 2.0 + 0.5 * i, 3.0] for i in range(n_atoms)]
    )
    sites = tuple(
        AtomSite("Si" if i % 2 == 0 else "C", masses[i], positions[i])
        for i in range(n_atoms)
    )
    ground = CrystalStructure(lattice=lattice, sites=sites)

    trans = _translation_modes(masses)
    rng = np.random.default_rng(seed)
    rest = rng.standard_normal((n_dof, n_dof))
    rest -= (rest @ trans.T) @ trans
    q, _ = np.linalg.qr(rest.T)
    basis = np.vstack([trans, q.T[: n_dof - 3]])

    n_spare = n_dof - 3 - n_target
    spare = spare_start_mev + 10.0 * np.arange(n_spare)
    all_e = np.concatenate([np.zeros(3), energies_mev, spare])
    eigvals = (all_e / 1000.0) ** 2 / HBAR_SQ
    dyn = basis.T @ (eigvals[:, None] * basis)

    sqrt_m = np.sqrt(masses)
    blocks = {}
    for i in range(n_atoms):
        for j in range(i, n_atoms):
            blocks[(i, j)] = (
                dyn[3 * i : 3 * i + 3, 3 * j : 3 * j + 3] * sqrt_m[i] * sqrt_m[j]
            )
    fc = ForceConstants(blocks, ground)

    disp_mw = delta_q @ basis[3 : 3 + n_target]
    disp = disp_mw.reshape(n_atoms, 3) / sqrt_m[:, None]
    excited = CrystalStructure(
        lattice=lattice,
        sites=tuple(
            AtomSite(s.species, s.mass, s.position + d)
            for s, d in zip(sites, disp)
        ),
    )
    return GeometryPair(ground=ground, excited=excited), fc


def _delta_q_for_hr(energies_mev, hr) -> np.ndarray:
    """Couplings (sqrt(amu)*A) that realize the given per-mode strengths."""
    e_ev = np.asarray(energies_mev, dtype=float) / 1000.0
    return np.sqrt(2.0 * HBAR_SQ * np.asarray(hr, dtype=float) / e_ev)


def single_mode_benchmark(
    total_hr: float = 2.785, energy_mev: float = 36.0
) -> tuple[GeometryPair, ForceConstants]:
    """One coupled mode carrying the whole coupling strength."""
    dq = _delta_q_for_hr([energy_mev], [total_hr])
    return designed_gamma_fixture([energy_mev], dq)


def four_mode_benchmark() -> tuple[GeometryPair, ForceConstants]:
    """The four-mode coupling used across the acceptance suite."""
    dq = _delta_q_for_hr(FOUR_MODE_ENERGIES_MEV, FOUR_MODE_HR)
    return designed_gamma_fixture(list(FOUR_MODE_ENERGIES_MEV), dq)


def random_snapshots(
    fc: ForceConstants,
    n_snapshots: int,
    amplitude: float = 0.02,
    seed: int = 0,
    force_noise: float = 0.0,
):
    """Displacement snapshots with forces from the harmonic model F = -Phi u.

    ``amplitude`` is the per-component displacement standard deviation (A);
    ``force_noise`` adds Gaussian noise of that standard deviation (eV/A) to
    every force component.  Returns a list of
    :class:`vibroline.ifcfit.TrainingSnapshot`.
    """
    from .ifcfit import TrainingSnapshot

    n = fc.structure.n_atoms
    phi = np.zeros((3 * n, 3 * n))
    for (i, j), b in fc.blocks.items():
        phi[3 * i : 3 * i + 3, 3 * j : 3 * j + 3] = b
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_snapshots):
        u = rng.normal(0.0, amplitude, size=(n, 3))
        f = -(phi @ u.reshape(-1)).reshape(n, 3)
        if force_noise > 0:
            f = f + rng.normal(0.0, force_noise, size=f.shape)
        out.append(TrainingSnapshot(displacements=u, forces=f))
    return out
