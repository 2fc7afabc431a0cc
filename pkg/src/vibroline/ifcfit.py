"""Second-order force constants from displacement-force snapshots.

The model is harmonic and pairwise: one free 3x3 block per atom pair within
the cutoff, with the transposed counterpart tied to it and self-blocks fixed
by the acoustic sum rule, so forces are linear in the parameters.  Fitting
is ridge-regularized least squares; :func:`rfe` prunes whole pair blocks
recursively against a held-out snapshot split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, SingularFit
from .model import CrystalStructure, ForceConstants
from .phonons import _pair_images, enforce_asr

__all__ = [
    "TrainingSnapshot",
    "FeatureMap",
    "FitReport",
    "build_features",
    "fit",
    "rfe",
    "DEFAULT_RIDGE",
]

#: default scale-relative ridge weight; multiplied by the mean diagonal of
#: the normal matrix before use, so it is dimensionless
DEFAULT_RIDGE = 1e-8


@dataclass(frozen=True)
class TrainingSnapshot:
    """Per-atom displacements (A) and forces (eV/A) for one configuration."""

    displacements: np.ndarray
    forces: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.displacements, dtype=float)
        f = np.asarray(self.forces, dtype=float)
        if u.ndim != 2 or u.shape[1] != 3 or u.shape != f.shape:
            raise ValueError("displacements and forces must both be (N, 3)")
        object.__setattr__(self, "displacements", u)
        object.__setattr__(self, "forces", f)

    @property
    def n_atoms(self) -> int:
        return self.displacements.shape[0]


@dataclass(frozen=True)
class FeatureMap:
    """Free parameters of the pairwise model: 9 per in-cutoff pair."""

    structure: CrystalStructure
    cutoff: float
    pairs: tuple[tuple[int, int], ...]

    @property
    def n_parameters(self) -> int:
        return 9 * len(self.pairs)

    def without(self, pair: tuple[int, int]) -> "FeatureMap":
        return FeatureMap(
            structure=self.structure,
            cutoff=self.cutoff,
            pairs=tuple(p for p in self.pairs if p != pair),
        )


@dataclass(frozen=True)
class FitReport:
    """Outcome of a force-constant fit."""

    fc: ForceConstants
    rmse_validation: float  # meV/A per force component
    n_parameters_initial: int
    n_parameters_final: int
    cutoff: float
    rank: int

    def __post_init__(self):
        if self.rmse_validation < 0:
            raise ValueError("validation RMSE cannot be negative")
        if self.n_parameters_final > self.n_parameters_initial:
            raise ValueError("parameter count cannot grow during fitting")


def build_features(structure: CrystalStructure, cutoff: float) -> FeatureMap:
    """Enumerate atom pairs whose shortest-image distance is within cutoff.

    Self-blocks are not free parameters; they are fixed by the acoustic sum
    rule at assembly time.
    """
    if not (cutoff > 0):
        raise ValueError("cutoff must be positive")
    pairs = []
    for i in range(structure.n_atoms):
        for j in range(i + 1, structure.n_atoms):
            images = _pair_images(structure, i, j)
            if np.linalg.norm(images[0]) <= cutoff:
                pairs.append((i, j))
    return FeatureMap(structure=structure, cutoff=cutoff, pairs=tuple(pairs))


def _design_matrix(snapshots, features: FeatureMap) -> tuple[np.ndarray, np.ndarray]:
    """Rows: force components of every snapshot; columns: block entries."""
    n = features.structure.n_atoms
    n_rows = 3 * n * len(snapshots)
    x = np.zeros((n_rows, features.n_parameters))
    y = np.empty(n_rows)
    for s_idx, snap in enumerate(snapshots):
        if snap.n_atoms != n:
            raise ValueError("snapshot atom count does not match the structure")
        base_row = 3 * n * s_idx
        y[base_row : base_row + 3 * n] = snap.forces.reshape(-1)
        u = snap.displacements
        for p_idx, (i, j) in enumerate(features.pairs):
            du = u[j] - u[i]
            col = 9 * p_idx
            for a in range(3):
                # F_i,a gets -Phi_ab * (u_j - u_i)_b
                x[base_row + 3 * i + a, col + 3 * a : col + 3 * a + 3] -= du
                # F_j,b gets +Phi_ab * (u_j - u_i)_a  (transposed block)
                for b in range(3):
                    x[base_row + 3 * j + b, col + 3 * a + b] += du[a]
    return x, y


def _assemble(features: FeatureMap, params: np.ndarray) -> ForceConstants:
    blocks = {
        pair: params[9 * p : 9 * p + 9].reshape(3, 3)
        for p, pair in enumerate(features.pairs)
    }
    return enforce_asr(ForceConstants(blocks, features.structure))


def _predict(fc: ForceConstants, snapshots) -> np.ndarray:
    n = fc.structure.n_atoms
    phi = np.zeros((3 * n, 3 * n))
    for (i, j), b in fc.blocks.items():
        phi[3 * i : 3 * i + 3, 3 * j : 3 * j + 3] = b
    return np.concatenate(
        [-(phi @ s.displacements.reshape(-1)) for s in snapshots]
    )


def _split(snapshots) -> tuple[list, list]:
    """Deterministic holdout: the last ceil(10%) snapshots validate."""
    n = len(snapshots)
    n_val = math.ceil(0.1 * n)
    if n - n_val < 1:
        return list(snapshots), list(snapshots)
    return list(snapshots[: n - n_val]), list(snapshots[n - n_val :])


def fit(
    snapshots,
    features: FeatureMap,
    ridge: float = DEFAULT_RIDGE,
) -> FitReport:
    """Least-squares force constants with optional ridge regularization.

    Training uses all but the last ceil(10%) of the snapshots; those form
    the validation set whose per-component force RMSE (meV/A) is reported.
    A single snapshot trains and validates in-sample.  Raises
    :class:`SingularFit` when the design matrix carries no information, or
    is rank-deficient with ``ridge`` exactly zero.
    """
    snapshots = list(snapshots)
    if not snapshots:
        raise InsufficientData("at least one snapshot is required")
    train, val = _split(snapshots)
    x, y = _design_matrix(train, features)
    n_par = features.n_parameters
    if n_par == 0:
        params = np.empty(0)
        rank = 0
    else:
        rank = int(np.linalg.matrix_rank(x))
        if rank == 0 or (ridge == 0.0 and rank < n_par):
            raise SingularFit(
                f"design matrix rank {rank} < {n_par} parameters"
            )
        if ridge > 0.0:
            scale = float(np.sum(x * x)) / n_par
            aug = math.sqrt(ridge * scale)
            x_solve = np.vstack([x, aug * np.eye(n_par)])
            y_solve = np.concatenate([y, np.zeros(n_par)])
        else:
            x_solve, y_solve = x, y
        params = np.linalg.lstsq(x_solve, y_solve, rcond=None)[0]
    fc = _assemble(features, params)
    resid = np.concatenate([s.forces.reshape(-1) for s in val]) - _predict(fc, val)
    rmse = 1000.0 * float(np.sqrt(np.mean(resid**2)))
    return FitReport(
        fc=fc,
        rmse_validation=rmse,
        n_parameters_initial=n_par,
        n_parameters_final=n_par,
        cutoff=features.cutoff,
        rank=rank,
    )


def _weakest_pair(features: FeatureMap, fc: ForceConstants) -> tuple[int, int]:
    norms = [
        (float(np.linalg.norm(fc.block(i, j))), (i, j)) for i, j in features.pairs
    ]
    return min(norms)[1]


def rfe(
    snapshots,
    features: FeatureMap,
    target_fraction: float | None = None,
    tolerance: float = 0.0,
    ridge: float = DEFAULT_RIDGE,
) -> FitReport:
    """Recursive elimination of the weakest pair blocks.

    Starting from the full model, the pair block with the smallest
    Frobenius-norm coefficient is dropped and the model refit, until the
    held-out RMSE would rise more than ``tolerance`` (meV/A) above the
    full-model RMSE, only one block remains, or ``target_fraction`` of the
    initial parameters is reached.  With a target fraction the last model
    on that path is returned; otherwise the best-scoring one.
    """
    snapshots = list(snapshots)
    if len(snapshots) < 2:
        raise InsufficientData("recursive elimination needs a held-out split")
    if not features.pairs:
        raise InsufficientData("no parameters to eliminate")

    full = fit(snapshots, features, ridge)
    n_initial = features.n_parameters
    target = (
        None
        if target_fraction is None
        else max(9, int(math.floor(target_fraction * n_initial)))
    )
    path = [(features, full)]
    cur_features, cur_report = features, full
    while len(cur_features.pairs) > 1:
        if target is not None and cur_features.n_parameters <= target:
            break
        cand_features = cur_features.without(
            _weakest_pair(cur_features, cur_report.fc)
        )
        cand = fit(snapshots, cand_features, ridge)
        if cand.rmse_validation > full.rmse_validation + tolerance:
            break
        path.append((cand_features, cand))
        cur_features, cur_report = cand_features, cand

    if target is not None:
        chosen_features, chosen = path[-1]
    else:
        best = min(range(len(path)), key=lambda k: path[k][1].rmse_validation)
        chosen_features, chosen = path[best]
    return FitReport(
        fc=chosen.fc,
        rmse_validation=chosen.rmse_validation,
        n_parameters_initial=n_initial,
        n_parameters_final=chosen_features.n_parameters,
        cutoff=features.cutoff,
        rank=chosen.rank,
    )
