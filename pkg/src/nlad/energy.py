"""Energy functional diagnostics: nonlocal and local energy, dissipation rate,
and the analytic lower bound.

The energy combines species entropies with pairwise interaction energy,
E = int sum_i u_i (D_i ln u_i + 1/2 sum_j gamma_ij K*u_j) dx, and is
non-increasing along trajectories when gamma is symmetric.  Its rate of change
equals the (nonpositive) dissipation
-int sum_i u_i |d/dx (D_i ln u_i + sum_j gamma_ij K*u_j)|^2 dx.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .kernels import periodic_convolve
from .model import Grid, ModelParams, State

# u ln u is extended continuously by 0 at u = 0; cells at or below this floor
# contribute nothing to entropy or dissipation (needed for piecewise templates).
U_FLOOR = 1e-14


def _entropy_term(u: np.ndarray) -> np.ndarray:
    safe = np.where(u > U_FLOOR, u, 1.0)
    return np.where(u > U_FLOOR, u * np.log(safe), 0.0)


def _interaction_fields(state: State, params: ModelParams, grid: Grid) -> np.ndarray:
    """Stack of sum_j gamma_ij K*u_j for each species i."""
    conv = periodic_convolve(state.u, params.kernel, grid)
    return params.gamma @ conv


def energy(state: State, params: ModelParams, grid: Grid) -> float:
    """Nonlocal energy by midpoint quadrature on the solver grid."""
    params.require_symmetric("energy")
    dens = (params.D[:, None] * _entropy_term(state.u)
            + 0.5 * state.u * _interaction_fields(state, params, grid))
    return float(dens.sum() * grid.h)


def local_energy(state: State, params: ModelParams, grid: Grid) -> float:
    """Local-limit energy: the nonlocal form with K*u_j replaced by u_j."""
    params.require_symmetric("energy")
    dens = (params.D[:, None] * _entropy_term(state.u)
            + 0.5 * state.u * (params.gamma @ state.u))
    return float(dens.sum() * grid.h)


def dissipation(state: State, params: ModelParams, grid: Grid) -> float:
    """Instantaneous dE/dt; nonpositive, and zero exactly at steady states."""
    params.require_symmetric("dissipation")
    u = state.u
    conv = _interaction_fields(state, params, grid)
    # d/dx (D_i ln u_i + sum_j gamma_ij K*u_j) via spectral differentiation;
    # cells below the density floor carry no flux.
    logu = np.where(u > U_FLOOR, np.log(np.where(u > U_FLOOR, u, 1.0)), 0.0)
    f = params.D[:, None] * logu + conv
    dfdx = np.real(np.fft.ifft(1j * grid.kappa * np.fft.fft(f, axis=-1), axis=-1))
    integrand = np.where(u > U_FLOOR, u * dfdx ** 2, 0.0)
    return -float(integrand.sum() * grid.h)


def lower_bound(params: ModelParams) -> float:
    """Analytic lower bound -L sum_i D_i / e - ||K||_inf sum_ij |gamma_ij| p_i p_j / 2."""
    if not np.isfinite(params.kernel.sup_norm):
        raise ValueError("lower bound requires a kernel with finite sup norm")
    entropy_part = -np.exp(-1.0) * params.L * params.D.sum()
    interaction = np.abs(params.gamma) * np.outer(params.p, params.p)
    return float(entropy_part - 0.5 * params.kernel.sup_norm * interaction.sum())


@dataclass
class EnergyReport:
    E_nonlocal: float
    E_local: float
    dissipation: float
    lower_bound: float
    symmetric_required: bool = True

    def to_json(self) -> str:
        return json.dumps({
            "E": self.E_nonlocal,
            "E_local": self.E_local,
            "dissipation": self.dissipation,
            "lower_bound": self.lower_bound,
        }, indent=2)


def energy_report(state: State, params: ModelParams, grid: Grid) -> EnergyReport:
    return EnergyReport(
        E_nonlocal=energy(state, params, grid),
        E_local=local_energy(state, params, grid),
        dissipation=dissipation(state, params, grid),
        lower_bound=lower_bound(params),
    )
