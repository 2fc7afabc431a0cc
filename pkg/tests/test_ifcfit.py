import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vibroline import ifcfit, phonons
from vibroline.errors import InsufficientData, SingularFit
from vibroline.ifcfit import TrainingSnapshot, build_features, fit, rfe
from vibroline.model import AtomSite, CrystalStructure
from vibroline.synthetic import (
    make_supercell,
    orthorhombic_cell,
    random_snapshots,
    spring_force_constants,
)

from conftest import random_structure

KL = (4.0, 5.3, 6.9)
KT = (1.3, 1.9, 2.6)


def _supercell():
    return make_supercell(orthorhombic_cell((2.9, 3.2, 3.4)), (2, 2, 2))


def _generator(sc):
    return spring_force_constants(sc, cutoff=3.6, k_longitudinal=KL, k_transverse=KT)


def test_feature_counts_two_atom_cell():
    lattice = np.diag([20.0, 20.0, 20.0])
    sites = (
        AtomSite("Si", 28.0855, np.array([1.0, 1.0, 1.0])),
        AtomSite("C", 12.011, np.array([4.0, 1.0, 1.0])),
    )
    cell = CrystalStructure(lattice=lattice, sites=sites)
    assert build_features(cell, 2.0).n_parameters == 0
    assert build_features(cell, 3.5).n_parameters == 9


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), cutoff=st.floats(1.0, 9.0))
def test_feature_count_matches_brute_force(seed, cutoff):
    structure = random_structure(seed, n_atoms=5)
    features = build_features(structure, cutoff)
    inv = np.linalg.inv(structure.lattice)
    count = 0
    for i in range(5):
        for j in range(i + 1, 5):
            delta = structure.sites[j].position - structure.sites[i].position
            frac = delta @ inv
            frac -= np.round(frac)
            dmin = min(
                np.linalg.norm((frac + np.array(n, dtype=float)) @ structure.lattice)
                for n in itertools.product((-1, 0, 1), repeat=3)
            )
            count += dmin <= cutoff
    assert features.n_parameters == 9 * count


def test_exact_recovery_from_noiseless_snapshots():
    sc = _supercell()
    gen = _generator(sc)
    snaps = random_snapshots(gen, 30, amplitude=0.02, seed=11)
    report = fit(snaps, build_features(sc, 3.6), ridge=0.0)
    for i in range(sc.n_atoms):
        for j in range(sc.n_atoms):
            assert np.max(np.abs(report.fc.block(i, j) - gen.block(i, j))) < 1e-8
    assert report.rmse_validation < 1e-6
    assert report.rank == report.n_parameters_initial


def test_fitted_frequencies_match_generator():
    sc = _supercell()
    gen = _generator(sc)
    snaps = random_snapshots(gen, 30, amplitude=0.02, seed=3)
    report = fit(snaps, build_features(sc, 3.6), ridge=0.0)
    f_gen = phonons.diagonalize(
        phonons.dynamical_matrix(gen, sc, np.zeros(3)), sc.masses
    ).frequencies
    f_fit = phonons.diagonalize(
        phonons.dynamical_matrix(report.fc, sc, np.zeros(3)), sc.masses
    ).frequencies
    above = f_gen > 1.0
    assert np.max(np.abs((f_fit[above] - f_gen[above]) / f_gen[above])) < 1e-3


def test_noise_floor_reflected_in_validation_rmse():
    sc = _supercell()
    gen = _generator(sc)
    snaps = random_snapshots(gen, 40, amplitude=0.02, seed=12, force_noise=0.010)
    report = fit(snaps, build_features(sc, 3.6))
    assert 7.0 <= report.rmse_validation <= 13.0  # 10 meV/A within 30%


def test_zero_displacement_snapshots_are_singular():
    sc = _supercell()
    n = sc.n_atoms
    snaps = [
        TrainingSnapshot(displacements=np.zeros((n, 3)), forces=np.zeros((n, 3)))
        for _ in range(5)
    ]
    with pytest.raises(SingularFit):
        fit(snaps, build_features(sc, 3.6), ridge=0.0)
    with pytest.raises(SingularFit):
        fit(snaps, build_features(sc, 3.6))  # no information at any ridge


def test_no_snapshots_is_insufficient():
    sc = _supercell()
    with pytest.raises(InsufficientData):
        fit([], build_features(sc, 3.6))


def test_fitted_fc_satisfies_symmetry_and_asr():
    sc = _supercell()
    gen = _generator(sc)
    snaps = random_snapshots(gen, 12, amplitude=0.02, seed=5, force_noise=0.02)
    report = fit(snaps, build_features(sc, 3.6))
    fc = report.fc
    for i in range(sc.n_atoms):
        row = sum(fc.block(i, j) for j in range(sc.n_atoms))
        assert np.max(np.abs(row)) < 1e-12
        for j in range(i + 1, sc.n_atoms):
            assert np.array_equal(fc.block(i, j), fc.block(j, i).T)


def test_linearity_doubled_forces_double_parameters():
    sc = _supercell()
    gen = _generator(sc)
    snaps = random_snapshots(gen, 12, amplitude=0.02, seed=8)
    doubled = [
        TrainingSnapshot(displacements=s.displacements, forces=2.0 * s.forces)
        for s in snaps
    ]
    features = build_features(sc, 3.6)
    r1 = fit(snaps, features, ridge=0.0)
    r2 = fit(doubled, features, ridge=0.0)
    for i, j in features.pairs:
        assert np.allclose(r2.fc.block(i, j), 2.0 * r1.fc.block(i, j), atol=1e-10)


def test_rfe_eliminates_planted_redundant_block_first():
    sc = _supercell()
    gen = _generator(sc)  # true interactions stop at 3.6 A
    snaps = random_snapshots(gen, 30, amplitude=0.02, seed=21)
    wide = build_features(sc, 4.6)  # includes zero-coupling diagonal pairs
    narrow = build_features(sc, 3.6)
    assert len(wide.pairs) > len(narrow.pairs)
    report = rfe(
        snaps,
        wide,
        target_fraction=(len(wide.pairs) - 1) / len(wide.pairs),
        tolerance=np.inf,
    )
    surviving = {p for p in wide.pairs if np.max(np.abs(report.fc.block(*p))) > 1e-10}
    removed = set(wide.pairs) - surviving
    assert len(removed) == 1
    assert removed.pop() not in set(narrow.pairs)


def test_rfe_unconstrained_path_reaches_target_fraction():
    sc = _supercell()
    gen = _generator(sc)
    snaps = random_snapshots(gen, 20, amplitude=0.02, seed=22, force_noise=0.01)
    wide = build_features(sc, 4.6)
    report = rfe(snaps, wide, target_fraction=0.5, tolerance=np.inf)
    assert report.n_parameters_final <= 0.5 * report.n_parameters_initial + 9
    assert report.n_parameters_final < report.n_parameters_initial


@settings(max_examples=5, deadline=None)
@given(seed=st.integers(0, 10**5))
def test_rfe_never_returns_worse_than_full_plus_tolerance(seed):
    sc = _supercell()
    gen = _generator(sc)
    snaps = random_snapshots(gen, 15, amplitude=0.02, seed=seed, force_noise=0.02)
    wide = build_features(sc, 4.6)
    tolerance = 2.0
    full = fit(snaps, wide)
    report = rfe(snaps, wide, tolerance=tolerance)
    assert report.rmse_validation <= full.rmse_validation + tolerance


def test_rfe_needs_holdout_split():
    sc = _supercell()
    gen = _generator(sc)
    snaps = random_snapshots(gen, 1, amplitude=0.02, seed=1)
    with pytest.raises(InsufficientData):
        rfe(snaps, build_features(sc, 3.6))
