import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vibroline import phonons
from vibroline.errors import InconsistentIndices, NotCommensurate, NotHermitian
from vibroline.model import HBAR_SQ, AtomSite, CrystalStructure, ForceConstants
from vibroline.synthetic import (
    diatomic_chain,
    make_supercell,
    monoatomic_ring,
    orthorhombic_cell,
    spring_force_constants,
)

from conftest import random_structure


def _random_fc(structure, seed, symmetric_blocks=True):
    """Random pair blocks obeying the transposition invariant."""
    rng = np.random.default_rng(seed)
    n = structure.n_atoms
    blocks = {}
    for i in range(n):
        for j in range(i, n):
            b = rng.normal(0.0, 1.0, size=(3, 3))
            if symmetric_blocks or i == j:
                b = 0.5 * (b + b.T)
            blocks[(i, j)] = b
    return ForceConstants(blocks, structure)


def _row_sums(fc):
    n = fc.structure.n_atoms
    return np.array([sum(fc.block(i, j) for j in range(n)) for i in range(n)])


def test_asr_is_a_fixed_point():
    st_, fc = diatomic_chain()
    again = phonons.enforce_asr(fc)
    for key in fc.blocks:
        assert np.max(np.abs(again.block(*key) - fc.block(*key))) < 1e-15


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_asr_zeroes_row_sums(seed):
    structure = random_structure(seed, n_atoms=5)
    fc = phonons.enforce_asr(_random_fc(structure, seed))
    assert np.max(np.abs(_row_sums(fc))) < 1e-12


def test_asr_restores_acoustic_modes_on_two_atom_toy():
    structure, fc = diatomic_chain(k=4.0)
    # corrupt the self terms by 10%
    bad = {k: v.copy() for k, v in fc.blocks.items() if k[0] <= k[1]}
    for i in range(2):
        bad[(i, i)] = 1.1 * bad[(i, i)]
    broken = ForceConstants(bad, structure)
    energies = phonons.diagonalize(
        phonons.dynamical_matrix(phonons.enforce_asr(broken), structure, np.zeros(3)),
        structure.masses,
    ).frequencies
    assert np.sum(np.abs(energies) < 1e-3) >= 3


def test_diatomic_chain_optical_mode():
    m1, m2, k = 28.0855, 12.011, 5.0
    structure, fc = diatomic_chain(m1=m1, m2=m2, k=k)
    basis = phonons.diagonalize(
        phonons.dynamical_matrix(fc, structure, np.zeros(3)), structure.masses
    )
    analytic = 1000.0 * np.sqrt(HBAR_SQ * 2.0 * k * (1.0 / m1 + 1.0 / m2))
    assert basis.frequencies[-1] == pytest.approx(analytic, rel=1e-8)


def test_monoatomic_chain_zone_boundary():
    m, k = 28.0855, 5.0
    structure, fc = monoatomic_ring(2, mass=m, k=k)
    basis = phonons.diagonalize(
        phonons.dynamical_matrix(fc, structure, np.zeros(3)), structure.masses
    )
    analytic = 1000.0 * np.sqrt(HBAR_SQ * 4.0 * k / m)  # 2 sqrt(k/m) in energy units
    assert basis.frequencies[-1] == pytest.approx(analytic, rel=1e-8)


@pytest.mark.parametrize("q_frac", [0.0, 0.25, 0.5, 0.3])
def test_ring_dispersion_folding(q_frac):
    n, m, k = 6, 28.0855, 5.0
    structure, fc = monoatomic_ring(n, mass=m, k=k)
    basis = phonons.diagonalize(
        phonons.dynamical_matrix(fc, structure, np.array([q_frac, 0.0, 0.0])),
        structure.masses,
        qpoint=np.array([q_frac, 0.0, 0.0]),
    )
    # longitudinal branch folds onto the n-atom cell: energies at (q + m)/n
    expected = sorted(
        1000.0
        * np.sqrt(HBAR_SQ * 2.0 * k * (1.0 - np.cos(2.0 * np.pi * (q_frac + j) / n)) / m)
        for j in range(n)
    )
    nonzero = basis.frequencies[basis.frequencies > 1e-6]
    expected_nonzero = [e for e in expected if e > 1e-6]
    assert np.allclose(sorted(nonzero), expected_nonzero, rtol=1e-8)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_time_reversal_symmetry(seed):
    structure = random_structure(seed, n_atoms=4)
    fc = phonons.enforce_asr(_random_fc(structure, seed))
    rng = np.random.default_rng(seed + 1)
    q = rng.uniform(-0.5, 0.5, size=3)
    d_plus = phonons.dynamical_matrix(fc, structure, q)
    d_minus = phonons.dynamical_matrix(fc, structure, -q)
    assert np.max(np.abs(d_plus - d_minus.conj())) < 1e-12


def test_diagonalize_rejects_non_hermitian():
    masses = np.ones(2)
    d = np.zeros((6, 6))
    d[0, 1] = 1e-3  # asymmetry far above tolerance
    with pytest.raises(NotHermitian):
        phonons.diagonalize(d, masses)


def test_diagonalize_identity_zero():
    basis = phonons.diagonalize(np.zeros((6, 6)), np.ones(2))
    assert np.allclose(basis.frequencies, 0.0)


def test_negative_eigenvalues_reported_not_dropped():
    d = np.diag([-2.0, -1.0, 0.0, 1.0, 2.0, 3.0]).astype(complex)
    basis = phonons.diagonalize(d, np.ones(2))
    assert basis.frequencies[0] < 0
    assert np.all(np.diff(basis.frequencies) >= 0)
    assert basis.frequencies[0] == pytest.approx(
        -1000.0 * np.sqrt(HBAR_SQ * 2.0), rel=1e-12
    )


@settings(max_examples=5, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_eigenvector_orthonormality_on_30_atoms(seed):
    structure = random_structure(seed, n_atoms=30, box=40.0)
    fc = phonons.enforce_asr(_random_fc(structure, seed))
    basis = phonons.diagonalize(
        phonons.dynamical_matrix(fc, structure, np.zeros(3)), structure.masses
    )
    gram = basis.eigenvectors @ basis.eigenvectors.conj().T
    assert np.max(np.abs(gram - np.eye(basis.n_modes))) < 1e-8


def test_diagonalize_is_bitwise_deterministic():
    structure, fc = diatomic_chain(k=3.3, k_transverse=0.9)
    dyn = phonons.dynamical_matrix(fc, structure, np.array([0.3, 0.0, 0.0]))
    a = phonons.diagonalize(dyn, structure.masses)
    b = phonons.diagonalize(dyn.copy(), structure.masses)
    assert np.array_equal(a.frequencies, b.frequencies)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_inconsistent_structures_rejected():
    s1, fc = diatomic_chain()
    s2 = random_structure(0, n_atoms=3)
    with pytest.raises(InconsistentIndices):
        phonons.dynamical_matrix(fc, s2, np.zeros(3))


def test_rigid_translation_leaves_spectrum():
    structure, fc = diatomic_chain()
    shifted = CrystalStructure(
        lattice=structure.lattice,
        sites=tuple(
            AtomSite(s.species, s.mass, s.position + np.array([1.3, -0.7, 2.1]))
            for s in structure.sites
        ),
    )
    fc2 = ForceConstants(
        {k: v for k, v in fc.blocks.items() if k[0] <= k[1]}, shifted
    )
    f1 = phonons.diagonalize(
        phonons.dynamical_matrix(fc, structure, np.zeros(3)), structure.masses
    ).frequencies
    f2 = phonons.diagonalize(
        phonons.dynamical_matrix(fc2, shifted, np.zeros(3)), shifted.masses
    ).frequencies
    assert np.allclose(f1, f2, atol=1e-10)


# ---------------------------------------------------------------------------
# unfolding

KL = (4.0, 5.3, 6.9)
KT = (1.3, 1.9, 2.6)
PATH = [
    np.array(q, dtype=float)
    for q in [(0, 0, 0), (0.5, 0, 0), (0, 0.5, 0), (0.5, 0.5, 0.5), (0.3, 0, 0), (0, 0.15, 0)]
]


def _pristine_setup():
    prim = orthorhombic_cell((2.8, 3.1, 3.5))
    sc = make_supercell(prim, (2, 2, 2))
    fc = spring_force_constants(sc, cutoff=3.6, k_longitudinal=KL, k_transverse=KT)
    return prim, sc, fc


def _bases_for(sc, fc, prim_lattice, path):
    b_prim = phonons.reciprocal_lattice(prim_lattice)
    b_sc_inv = sc.lattice.T / (2.0 * np.pi)
    folded = sorted({tuple(np.round((q @ b_prim @ b_sc_inv) % 1.0, 8) % 1.0) for q in path})
    return [
        phonons.diagonalize(
            phonons.dynamical_matrix(fc, sc, np.array(k)), sc.masses, qpoint=np.array(k)
        )
        for k in folded
    ]


def _analytic_branch_energies(q_frac, mass=28.0855):
    out = []
    for a in range(3):
        val = sum(
            2.0 * (KL[d] if d == a else KT[d]) * (1.0 - np.cos(2.0 * np.pi * q_frac[d]))
            for d in range(3)
        )
        out.append(1000.0 * np.sqrt(HBAR_SQ * val / 28.0855))
    return np.array(sorted(out))


def test_unfold_pristine_identity():
    prim, sc, fc = _pristine_setup()
    bases = _bases_for(sc, fc, prim.lattice, PATH)
    uw = phonons.unfold(bases, sc, prim.lattice, PATH)
    for q, entry in zip(uw.path, uw.entries):
        ws = np.array([w for _, w in entry])
        es = np.array([e for e, _ in entry])
        on = ws > 0.5
        # weights are 0 or 1 to within a tight numerical slack
        assert np.max(np.abs(1.0 - ws[on])) < 1e-6
        assert np.max(ws[~on]) < 1e-6
        assert on.sum() == 3
        assert np.allclose(np.sort(es[on]), _analytic_branch_energies(q), atol=1e-5)


def test_unfold_weight_sums_conserved():
    prim, sc, fc = _pristine_setup()
    bases = _bases_for(sc, fc, prim.lattice, PATH)
    uw = phonons.unfold(bases, sc, prim.lattice, PATH)
    for entry in uw.entries:
        assert abs(sum(w for _, w in entry) - 3.0) < 1e-4


def test_unfold_defective_supercell_conserves_weight():
    prim, sc, _ = _pristine_setup()
    # mass defect: heavier substitutional atom at the first site
    sites = list(sc.sites)
    sites[0] = AtomSite("Ge", 72.63, sites[0].position)
    defective = CrystalStructure(lattice=sc.lattice, sites=tuple(sites))
    fc = spring_force_constants(defective, cutoff=3.6, k_longitudinal=KL, k_transverse=KT)
    bases = _bases_for(defective, fc, prim.lattice, PATH)
    uw = phonons.unfold(bases, defective, prim.lattice, PATH, site_tol=0.5)
    for entry in uw.entries:
        ws = np.array([w for _, w in entry])
        assert abs(ws.sum() - 3.0) < 1e-4
        assert np.all(ws > -1e-6) and np.all(ws < 1.0 + 1e-6)


def test_unfold_identity_map_for_primitive_supercell():
    prim = orthorhombic_cell((3.0, 3.2, 3.4))
    sc = make_supercell(prim, (1, 1, 1))
    fc = spring_force_constants(sc, cutoff=3.5, k_longitudinal=4.0, k_transverse=1.5)
    path = [np.zeros(3)]
    bases = _bases_for(sc, fc, prim.lattice, path)
    uw = phonons.unfold(bases, sc, prim.lattice, path)
    ws = [w for _, w in uw.entries[0]]
    assert np.allclose(ws, 1.0, atol=1e-9)


def test_unfold_rejects_incommensurate_lattice():
    prim, sc, fc = _pristine_setup()
    bases = _bases_for(sc, fc, prim.lattice, [np.zeros(3)])
    bad_prim = prim.lattice * 1.1
    with pytest.raises(NotCommensurate):
        phonons.unfold(bases, sc, bad_prim, [np.zeros(3)])
