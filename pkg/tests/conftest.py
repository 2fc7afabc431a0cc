import numpy as np
import pytest

from vibroline.model import AtomSite, CrystalStructure


def random_structure(seed: int, n_atoms: int = 4, box: float = 8.0) -> CrystalStructure:
    """Periodic box with well-separated atoms, deterministic per seed."""
    rng = np.random.default_rng(seed)
    lattice = np.diag(box + rng.uniform(0.0, 2.0, size=3))
    # jittered grid keeps atoms apart
    base = np.linspace(0.5, box - 0.5, n_atoms)
    positions = np.column_stack(
        [base, rng.uniform(1.0, box - 1.0, n_atoms), rng.uniform(1.0, box - 1.0, n_atoms)]
    )
    sites = tuple(
        AtomSite("Si" if k % 2 == 0 else "C", 28.0855 if k % 2 == 0 else 12.011, positions[k])
        for k in range(n_atoms)
    )
    return CrystalStructure(lattice=lattice, sites=sites)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
