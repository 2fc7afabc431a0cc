import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vibroline.errors import MismatchedStructures, WrapAmbiguity
from vibroline.model import (
    HBAR_SQ,
    AtomSite,
    CrystalStructure,
    GeometryPair,
    Spectrum,
    validate_pair,
)

from conftest import random_structure


def _displaced(structure, index, shift):
    sites = list(structure.sites)
    s = sites[index]
    sites[index] = AtomSite(s.species, s.mass, s.position + np.asarray(shift))
    return CrystalStructure(lattice=structure.lattice, sites=tuple(sites), periodic=structure.periodic)


def brute_force_min_image(delta, lattice):
    """Independent oracle: scan all 27 lattice-translation images."""
    best = None
    for n in itertools.product((-1, 0, 1), repeat=3):
        cand = delta + np.asarray(n, dtype=float) @ lattice
        if best is None or np.linalg.norm(cand) < np.linalg.norm(best):
            best = cand
    return best


def test_identical_structures_give_zero_displacements():
    g = random_structure(1)
    disp = validate_pair(GeometryPair(ground=g, excited=g))
    assert np.all(disp == 0.0)


def test_single_moved_atom():
    g = random_structure(2)
    e = _displaced(g, 1, (0.1, 0.0, 0.0))
    disp = validate_pair(GeometryPair(ground=g, excited=e))
    assert np.allclose(disp[1], (0.1, 0.0, 0.0))
    others = np.delete(disp, 1, axis=0)
    assert np.all(others == 0.0)


def test_boundary_crossing_uses_minimum_image():
    lattice = np.diag([10.0, 12.0, 14.0])
    a = AtomSite("Si", 28.0855, np.array([9.9, 1.0, 1.0]))  # fractional 0.99
    b = AtomSite("Si", 28.0855, np.array([0.1, 1.0, 1.0]))  # fractional 0.01
    g = CrystalStructure(lattice=lattice, sites=(a,))
    e = CrystalStructure(lattice=lattice, sites=(b,))
    disp = validate_pair(GeometryPair(ground=g, excited=e))
    oracle = brute_force_min_image(b.position - a.position, lattice)
    assert np.allclose(disp[0], oracle)
    assert np.isclose(np.linalg.norm(disp[0]), 0.02 * 10.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_minimum_image_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    g = random_structure(seed)
    # stay below half the shortest lattice vector (box >= 8 A)
    shifts = rng.uniform(-2.0, 2.0, size=(g.n_atoms, 3))
    e = CrystalStructure(
        lattice=g.lattice,
        sites=tuple(
            AtomSite(s.species, s.mass, s.position + d) for s, d in zip(g.sites, shifts)
        ),
    )
    disp = validate_pair(GeometryPair(ground=g, excited=e))
    for k in range(g.n_atoms):
        oracle = brute_force_min_image(shifts[k], g.lattice)
        assert np.allclose(disp[k], oracle, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_rigid_translation_invariance(seed):
    rng = np.random.default_rng(seed)
    g = random_structure(seed, n_atoms=3)
    wiggle = rng.uniform(-0.5, 0.5, size=(3, 3))
    e = CrystalStructure(
        lattice=g.lattice,
        sites=tuple(
            AtomSite(s.species, s.mass, s.position + d) for s, d in zip(g.sites, wiggle)
        ),
    )
    ref = validate_pair(GeometryPair(ground=g, excited=e))
    t = rng.uniform(-20.0, 20.0, size=3)
    g2 = CrystalStructure(
        lattice=g.lattice,
        sites=tuple(AtomSite(s.species, s.mass, s.position + t) for s in g.sites),
    )
    e2 = CrystalStructure(
        lattice=g.lattice,
        sites=tuple(AtomSite(s.species, s.mass, s.position + t) for s in e.sites),
    )
    shifted = validate_pair(GeometryPair(ground=g2, excited=e2))
    assert np.allclose(ref, shifted, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_permutation_equivariance(seed):
    rng = np.random.default_rng(seed)
    g = random_structure(seed, n_atoms=5)
    wiggle = rng.uniform(-0.4, 0.4, size=(5, 3))
    e = CrystalStructure(
        lattice=g.lattice,
        sites=tuple(
            AtomSite(s.species, s.mass, s.position + d) for s, d in zip(g.sites, wiggle)
        ),
    )
    ref = validate_pair(GeometryPair(ground=g, excited=e))
    perm = rng.permutation(5)
    gp = CrystalStructure(lattice=g.lattice, sites=tuple(g.sites[k] for k in perm))
    ep = CrystalStructure(lattice=e.lattice, sites=tuple(e.sites[k] for k in perm))
    out = validate_pair(GeometryPair(ground=gp, excited=ep))
    assert np.allclose(out, ref[perm], atol=1e-12)


def test_mismatched_counts_rejected():
    g = random_structure(5, n_atoms=3)
    e = CrystalStructure(lattice=g.lattice, sites=g.sites[:2])
    with pytest.raises(MismatchedStructures):
        validate_pair(GeometryPair(ground=g, excited=e))


def test_mismatched_species_rejected():
    g = random_structure(6, n_atoms=2)
    sites = (
        AtomSite("C", g.sites[0].mass, g.sites[0].position),
        AtomSite(g.sites[1].species, g.sites[1].mass, g.sites[1].position),
    )
    e = CrystalStructure(lattice=g.lattice, sites=sites)
    with pytest.raises(MismatchedStructures):
        validate_pair(GeometryPair(ground=g, excited=e))


def test_mismatched_lattice_rejected():
    g = random_structure(7)
    e = CrystalStructure(lattice=g.lattice * 1.01, sites=g.sites)
    with pytest.raises(MismatchedStructures):
        validate_pair(GeometryPair(ground=g, excited=e))


def test_wrap_ambiguity_detected():
    lattice = np.diag([6.0, 20.0, 20.0])
    a = AtomSite("Si", 28.0855, np.array([1.0, 1.0, 1.0]))
    g = CrystalStructure(lattice=lattice, sites=(a,))
    e = _displaced(g, 0, (3.0, 0.0, 0.0))  # exactly half the shortest vector
    with pytest.raises(WrapAmbiguity):
        validate_pair(GeometryPair(ground=g, excited=e))


def test_site_invariants():
    with pytest.raises(ValueError):
        AtomSite("Si", -1.0, np.zeros(3))
    with pytest.raises(ValueError):
        AtomSite("Si", 28.0, np.array([np.inf, 0.0, 0.0]))
    with pytest.raises(ValueError):
        CrystalStructure(lattice=np.diag([-1.0, 1.0, 1.0]), sites=(AtomSite("Si", 1.0, np.zeros(3)),))


def test_spectrum_invariants():
    e = np.linspace(0.0, 10.0, 11)
    Spectrum(energies=e, intensities=np.ones(11), zpl_energy=5.0, normalization=10.0)
    with pytest.raises(ValueError):
        Spectrum(energies=np.array([0.0, 1.0, 2.5]), intensities=np.zeros(3), zpl_energy=0.0, normalization=0.0)
    with pytest.raises(ValueError):
        Spectrum(energies=e, intensities=-np.ones(11), zpl_energy=0.0, normalization=0.0)


def test_unit_constant_pinned():
    # the one conversion constant everything relies on
    assert HBAR_SQ == 4.18103e-3
