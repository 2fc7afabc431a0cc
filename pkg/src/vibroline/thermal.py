"""Single-activation-energy fits to temperature-quenched emission series.

The model is value(T) = amplitude / (1 + C exp(-E_a / kB T)).  Fitting is
fully deterministic: a coarse log-grid over (C, E_a) with the amplitude
solved linearly at each node, followed by damped Gauss-Newton refinement in
(amplitude, log C, log E_a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, NonConvergence
from .model import KB_MEV_PER_K

__all__ = ["ThermalSeries", "ArrheniusFit", "model_eval", "fit"]

_C_GRID = np.logspace(-2.0, 3.0, 26)
_EA_GRID = np.logspace(0.0, math.log10(500.0), 28)
_MAX_ITER = 500
_GRAD_TOL = 1e-10


@dataclass(frozen=True)
class ThermalSeries:
    """Temperature series of an emission-related quantity.

    ``points`` holds (temperature K, value, uncertainty-or-None) tuples,
    sorted by temperature on construction; duplicate temperatures are
    rejected.  Fitting requires at least four points.
    """

    points: tuple[tuple[float, float, float | None], ...]
    label: str = ""

    def __post_init__(self):
        pts = sorted((float(t), float(v), s) for t, v, s in self.points)
        if any(t <= 0 for t, _, _ in pts):
            raise ValueError("temperatures must be positive")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError("temperatures must be strictly increasing")
        object.__setattr__(self, "points", tuple(pts))

    @property
    def temperatures(self) -> np.ndarray:
        return np.array([t for t, _, _ in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v, _ in self.points])

    @property
    def weights(self) -> np.ndarray:
        """1/sigma^2 when every point has an uncertainty, else uniform."""
        sigmas = [s for _, _, s in self.points]
        if all(s is not None and s > 0 for s in sigmas):
            return 1.0 / np.array(sigmas, dtype=float) ** 2
        return np.ones(len(self.points))


@dataclass(frozen=True)
class ArrheniusFit:
    """Best-fit parameters, 1-sigma covariance, and the residual scale."""

    amplitude: float
    c: float
    e_a: float  # meV
    covariance: np.ndarray  # 3x3 over (amplitude, c, e_a)
    rms_residual: float

    def __post_init__(self):
        if not (self.e_a > 0 and self.c > 0):
            raise ValueError("fitted C and E_a must be positive")
        cov = np.asarray(self.covariance, dtype=float).reshape(3, 3)
        if not np.allclose(cov, cov.T, atol=1e-10 * (1 + np.abs(cov).max())):
            raise ValueError("covariance must be symmetric")
        if np.any(np.linalg.eigvalsh(0.5 * (cov + cov.T)) < -1e-10):
            raise ValueError("covariance must be positive semidefinite")
        cov.setflags(write=False)
        object.__setattr__(self, "covariance", cov)

    @property
    def sigma_e_a(self) -> float:
        return float(np.sqrt(max(self.covariance[2, 2], 0.0)))


def model_eval(amplitude: float, c: float, e_a: float, t) -> np.ndarray | float:
    """Activation model amplitude / (1 + c exp(-e_a / kB T)) at T > 0 (K)."""
    t = np.asarray(t, dtype=float)
    out = amplitude / (1.0 + c * np.exp(-e_a / (KB_MEV_PER_K * t)))
    return float(out) if out.ndim == 0 else out


def _shape(c: float, e_a: float, t: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + c * np.exp(-e_a / (KB_MEV_PER_K * t)))


def _residual_and_jacobian(theta, t, v, w):
    """Weighted residuals and Jacobian in (amplitude, log C, log E_a)."""
    amp, log_c, log_ea = theta
    c, e_a = math.exp(log_c), math.exp(log_ea)
    x = e_a / (KB_MEV_PER_K * t)
    g = 1.0 / (1.0 + c * np.exp(-x))
    sw = np.sqrt(w)
    r = sw * (v - amp * g)
    dg_dlogc = -c * np.exp(-x) * g**2
    dg_dlogea = c * np.exp(-x) * g**2 * x
    jac = np.column_stack([-sw * g, -sw * amp * dg_dlogc, -sw * amp * dg_dlogea])
    return r, jac


def fit(series: ThermalSeries, initial: tuple[float, float, float] | None = None) -> ArrheniusFit:
    """Weighted least-squares activation fit.

    ``initial`` optionally seeds the refinement with (amplitude, C, E_a);
    otherwise the best node of the coarse grid is used.  Raises
    :class:`DegenerateData` for constant series and :class:`NonConvergence`
    if refinement does not reach the gradient tolerance in 500 iterations.
    """
    if len(series.points) < 4:
        raise ValueError("fitting needs at least four points")
    t, v, w = series.temperatures, series.values, series.weights
    if np.ptp(v) == 0.0:
        raise DegenerateData("all series values are equal")

    if initial is not None:
        amp0, c0, ea0 = initial
        best = (amp0, math.log(c0), math.log(ea0))
    else:
        best, best_cost = None, np.inf
        for c0 in _C_GRID:
            for ea0 in _EA_GRID:
                g = _shape(c0, ea0, t)
                denom = float(np.sum(w * g * g))
                if denom <= 0:
                    continue
                amp = float(np.sum(w * v * g)) / denom
                cost = float(np.sum(w * (v - amp * g) ** 2))
                if cost < best_cost:
                    best, best_cost = (amp, math.log(c0), math.log(ea0)), cost
        assert best is not None

    theta = np.array(best)
    lam = 1e-3
    r, jac = _residual_and_jacobian(theta, t, v, w)
    cost = float(r @ r)
    grad_norm = float(np.linalg.norm(jac.T @ r))
    for _ in range(_MAX_ITER):
        if grad_norm < _GRAD_TOL:
            break
        grad = jac.T @ r
        jtj = jac.T @ jac
        step = np.linalg.solve(jtj + lam * np.eye(3), -grad)
        trial = theta + step
        r_t, jac_t = _residual_and_jacobian(trial, t, v, w)
        cost_t = float(r_t @ r_t)
        grad_t = float(np.linalg.norm(jac_t.T @ r_t))
        # near the rounding floor the cost plateaus; a step that keeps it
        # flat while shrinking the gradient still makes progress
        if cost_t < cost or (cost_t <= cost * (1.0 + 1e-12) and grad_t < grad_norm):
            theta, r, jac, cost, grad_norm = trial, r_t, jac_t, cost_t, grad_t
            lam = max(lam * 0.3, 1e-14)
        else:
            lam = min(lam * 10.0, 1e15)
    else:
        raise NonConvergence("refinement exceeded 500 iterations")

    amp, log_c, log_ea = theta
    c, e_a = math.exp(log_c), math.exp(log_ea)
    dof = max(len(series.points) - 3, 1)
    var = cost / dof
    jtj = jac.T @ jac
    try:
        cov_log = var * np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov_log = var * np.linalg.pinv(jtj)
    scale = np.diag([1.0, c, e_a])  # d(param)/d(fit variable)
    cov = scale @ cov_log @ scale
    cov = 0.5 * (cov + cov.T)
    return ArrheniusFit(
        amplitude=float(amp),
        c=float(c),
        e_a=float(e_a),
        covariance=cov,
        rms_residual=float(np.sqrt(np.mean((v - amp * _shape(c, e_a, t)) ** 2))),
    )
