"""Simulation and analysis toolkit for systems of species that diffuse and
drift in response to spatially averaged densities of one another on a periodic
1-D domain.

Subpackages cover: pseudospectral kernels, an IMEX finite-volume solver with
mass and positivity guarantees, energy-dissipation diagnostics, linear
stability and dispersion relations, analytic classification of minimum-energy
states for two species, hysteresis continuation sweeps, and exact symbolic
finiteness certificates for local-limit steady states (determinant chains plus
Groebner bases over the rationals).
"""

__version__ = "0.1.0"

from .kernels import KernelSpec, delta, kernel_fourier, periodic_convolve, tophat
from .model import (Grid, ModelParams, State, homogeneous_state,
                    perturbed_state, template_state)
from .solver import SolverConfig, Trajectory, run_to_steady
from .energy import energy, dissipation, energy_report, lower_bound
from .stability import dispersion, eigenvalues_n2, is_unstable
from .minimizers import candidate_minima, classify_regime, script_energy
from .sweep import SweepPlan, run_sweep
from .poly import Polynomial, PolyMatrix, determinant
from .groebner import GroebnerResult, buchberger
from .chains import finiteness_verdict, solve_n2, steady_matrix

__all__ = [
    "KernelSpec", "delta", "tophat", "kernel_fourier", "periodic_convolve",
    "Grid", "ModelParams", "State", "homogeneous_state", "perturbed_state",
    "template_state", "SolverConfig", "Trajectory", "run_to_steady",
    "energy", "dissipation", "energy_report", "lower_bound",
    "dispersion", "eigenvalues_n2", "is_unstable",
    "candidate_minima", "classify_regime", "script_energy",
    "SweepPlan", "run_sweep",
    "Polynomial", "PolyMatrix", "determinant",
    "GroebnerResult", "buchberger",
    "finiteness_verdict", "solve_n2", "steady_matrix",
    "__version__",
]
