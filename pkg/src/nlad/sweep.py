"""Hysteresis continuation sweeps over the cross-interaction rate gamma12.

Each sweep point re-runs the solver to steady state starting from a small
random perturbation of the previous point's steady state, reproducing the
slow-parameter-change bifurcation protocol.  Branch points record the solution
amplitude (max density), steady-state energy, and a qualitative class guess
from the plateau signature of the final state.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import energy as energy_functional
from .model import Grid, ModelParams, State, perturbed_state
from .solver import SolverConfig, SolverError, Trajectory, run_to_steady

COLLAPSE_TOL = 1e-3     # amplitude distance to the homogeneous branch
ACTIVE_RATIO = 1.2      # superlevel threshold relative to the mean density
SPIKE_RATIO = 4.0       # height ratio separating spikes from finite plateaus


@dataclass
class SweepPlan:
    params: ModelParams
    start: float
    stop: float
    step: float
    initial_state: State
    perturb_amplitude: float = 1e-2
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    restart_from_homogeneous: bool = False

    def __post_init__(self):
        if self.step == 0:
            raise ValueError("sweep step must be nonzero")
        if self.start == self.stop:
            raise ValueError("sweep start and stop must differ")

    def gamma12_values(self) -> np.ndarray:
        step = abs(self.step) * np.sign(self.stop - self.start)
        n = int(round((self.stop - self.start) / step)) + 1
        return self.start + step * np.arange(n)


@dataclass
class BranchPoint:
    gamma12: float
    amplitude: float
    energy: float
    converged: bool
    class_guess: str
    error: str | None = None


def _with_gamma12(params: ModelParams, g12: float) -> ModelParams:
    gamma = params.gamma.copy()
    gamma[0, 1] = gamma[1, 0] = g12
    return replace(params, gamma=gamma)


def _superlevel_regions(mask: np.ndarray) -> int:
    """Number of connected True regions of a periodic boolean mask."""
    if mask.all():
        return 1
    if not mask.any():
        return 0
    edges = np.logical_and(mask, ~np.roll(mask, 1))
    return int(edges.sum())


def classify_state(state: State, params: ModelParams) -> str:
    """Plateau-signature class guess: superlevel supports, overlap sign, and
    spike-versus-plateau height ratio."""
    ubar = params.ubar
    masks = state.u > ACTIVE_RATIO * ubar[:, None]
    ratios = state.u.max(axis=1) / ubar
    active = masks.any(axis=1)
    if not active.any():
        return "S_H"
    if params.N != 2:
        return "patterned"
    if active.sum() == 1:
        return "S_S1Inf" if ratios[active.argmax()] > SPIKE_RATIO else "patterned"
    if np.logical_and(masks[0], masks[1]).any():
        return "S_AInf"
    if (ratios > SPIKE_RATIO).all():
        return "S_SInfInf"
    if (ratios > SPIKE_RATIO).any():
        return "S_S1Inf"
    return "S_S22"


def run_sweep(plan: SweepPlan) -> list[BranchPoint]:
    """Continuation sweep; stops early once the branch collapses to homogeneous."""
    points: list[BranchPoint] = []
    state = plan.initial_state
    grid = Grid(state.u.shape[1], plan.params.L)
    for idx, g12 in enumerate(plan.gamma12_values()):
        params = _with_gamma12(plan.params, float(g12))
        ic = perturbed_state(state, params, grid, plan.perturb_amplitude,
                             plan.seed + idx)
        try:
            traj = run_to_steady(ic, params, grid, plan.solver)
        except SolverError as err:
            points.append(BranchPoint(float(g12), float("nan"), float("nan"),
                                      False, "error", str(err)))
            if not plan.restart_from_homogeneous:
                break
            state = plan.initial_state
            continue
        final = traj.final_state
        amplitude = float(final.u.max())
        e = energy_functional(final, params, grid) if params.symmetric else float("nan")
        points.append(BranchPoint(float(g12), amplitude, e, traj.converged,
                                  classify_state(final, params)))
        collapsed = np.all(np.abs(final.u.max(axis=1) - params.ubar)
                           <= COLLAPSE_TOL)
        if collapsed:
            break
        state = final
    return points


def branch_compare(points: list[BranchPoint], analytic: str,
                   ubar_max: float = 1.0, plateau_height: float = 2.0) -> float:
    """Sup-norm deviation of branch amplitudes from an analytic reference line.

    analytic is 'height-2' (the segregated-territory plateau) or 'homogeneous'.
    """
    if not points:
        raise ValueError("empty branch")
    if analytic == "height-2":
        ref = plateau_height
    elif analytic == "homogeneous":
        ref = ubar_max
    else:
        raise ValueError(f"unknown analytic reference {analytic!r}")
    return float(max(abs(p.amplitude - ref) for p in points))


def branch_to_csv(points: list[BranchPoint], header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["gamma12", "amplitude", "energy", "converged", "class_guess"])
    for p in points:
        w.writerow([repr(p.gamma12), repr(p.amplitude), repr(p.energy),
                    int(p.converged), p.class_guess])
    return buf.getvalue()
