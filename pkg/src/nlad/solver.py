"""Time integration of the nonlocal advection-diffusion system in 1-D.

One step is an IMEX update: the advective flux is advanced explicitly in
conservative finite-volume form (first-order upwind by default), then diffusion
is advanced exactly in transform space by the integrating factor
exp(-D_i kappa^2 dt).  This conserves mass to round-off, is unconditionally
stable for diffusion, and keeps densities nonnegative under the advective CFL
condition.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .energy import dissipation as energy_dissipation
from .energy import energy as energy_functional
from .kernels import kernel_fourier
from .model import Grid, ModelParams, State

CFL_GUARD = 1e-12
CLIP_TOL = 1e-10
STEADY_CHECK_INTERVAL = 0.25  # time units between steady-state rate checks


class SolverError(RuntimeError):
    """Scheme failure: CFL violation, positivity loss, or non-finite fields."""


@dataclass
class SolverConfig:
    dt_init: float = 1e-3
    cfl: float = 0.5
    t_max: float = 200.0
    steady_tol: float = 1e-6
    scheme: str = "upwind-fv"
    record_every: int = 200

    def __post_init__(self):
        if not self.dt_init > 0:
            raise ValueError("dt_init must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if not self.steady_tol > 0:
            raise ValueError("steady_tol must be positive")
        if self.scheme not in ("upwind-fv", "central-fv"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass
class TrajectoryRecord:
    t: float
    energy: float
    dissipation: float
    masses: np.ndarray
    min_u: float
    max_u: float


@dataclass
class Trajectory:
    records: list[TrajectoryRecord] = field(default_factory=list)
    final_state: State | None = None
    converged: bool = False

    def to_csv(self, header_comment: str | None = None) -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        n = len(self.records[0].masses)
        w.writerow(["t", "E", "dissipation"]
                   + [f"mass_{i + 1}" for i in range(n)] + ["min_u", "max_u"])
        for r in self.records:
            w.writerow([repr(float(r.t)), repr(float(r.energy)), repr(float(r.dissipation))]
                       + [repr(float(m)) for m in r.masses]
                       + [repr(r.min_u), repr(r.max_u)])
        return buf.getvalue()


def advect_velocity(state: State, params: ModelParams, grid: Grid) -> np.ndarray:
    """Face-centered advection velocities v_i = -sum_j gamma_ij d/dx (K*u_j).

    The derivative of each convolved field is computed spectrally (multiplication
    by i kappa K_hat) at cell centers, then averaged onto faces; entry (i, k) is
    the velocity at the face between cells k and k+1.
    """
    khat = kernel_fourier(params.kernel, grid.kappa_r)
    return _face_velocity(state.u, params.gamma, grid.kappa_r * khat)


def _face_velocity(u: np.ndarray, gamma: np.ndarray, dsym: np.ndarray) -> np.ndarray:
    """Shared kernel for the face velocity; dsym = kappa_r * K_hat(kappa_r)."""
    uhat = np.fft.rfft(u, axis=-1)
    dconv = np.fft.irfft(1j * dsym * uhat, axis=-1)
    v_center = -(gamma @ dconv)
    return 0.5 * (v_center + np.roll(v_center, -1, axis=-1))


def _advective_flux(u: np.ndarray, v: np.ndarray, scheme: str) -> np.ndarray:
    """Conservative flux at faces; F[i, k] sits between cells k and k+1."""
    u_right = np.roll(u, -1, axis=-1)
    if scheme == "upwind-fv":
        return v * np.where(v > 0, u, u_right)
    return v * 0.5 * (u + u_right)


def step(state: State, params: ModelParams, grid: Grid, config: SolverConfig,
         dt: float) -> State:
    """Advance one time step of size dt; dt must satisfy the advective CFL bound."""
    v = advect_velocity(state, params, grid)
    vmax = np.max(np.abs(v))
    if dt > config.cfl * grid.h / (vmax + CFL_GUARD) * (1 + 1e-9):
        raise SolverError(f"dt={dt:.3e} violates CFL bound "
                          f"{config.cfl * grid.h / (vmax + CFL_GUARD):.3e}")
    flux = _advective_flux(state.u, v, config.scheme)
    u = state.u - dt / grid.h * (flux - np.roll(flux, 1, axis=-1))
    # exact diffusion in transform space
    factor = np.exp(-params.D[:, None] * grid.kappa_r ** 2 * dt)
    u = np.fft.irfft(np.fft.rfft(u, axis=-1) * factor, axis=-1)
    u = _clip_negatives(u, params, grid)
    return State(u, state.t + dt)


def _clip_negatives(u: np.ndarray, params: ModelParams, grid: Grid) -> np.ndarray:
    if np.min(u) >= 0:
        return u
    neg_mass = -np.clip(u, None, 0).sum(axis=-1) * grid.h
    if np.any(neg_mass > CLIP_TOL * params.p):
        raise SolverError(f"negative mass {neg_mass.max():.3e} beyond round-off "
                          "tolerance: advective step lost positivity")
    u = np.clip(u, 0.0, None)
    mass = u.sum(axis=-1) * grid.h
    return u * (params.p / mass)[:, None]


def _record(traj: Trajectory, state: State, params: ModelParams, grid: Grid):
    if params.symmetric:
        e = energy_functional(state, params, grid)
        d = energy_dissipation(state, params, grid)
    else:
        e = d = float("nan")
    traj.records.append(TrajectoryRecord(
        t=float(state.t), energy=e, dissipation=d, masses=state.mass(grid),
        min_u=float(np.min(state.u)), max_u=float(np.max(state.u))))


def run_to_steady(state: State, params: ModelParams, grid: Grid,
                  config: SolverConfig) -> Trajectory:
    """Integrate until the relative rate of change stays below steady_tol for
    three consecutive checks, or until t_max.

    The time step adapts to the advective CFL bound each step, capped at dt_init.
    """
    traj = Trajectory()
    state = state.copy()
    _record(traj, state, params, grid)
    checkpoint = state.copy()
    next_check = state.t + STEADY_CHECK_INTERVAL
    quiet_checks = 0
    steps = 0
    kappa_r = grid.kappa_r
    dsym = kappa_r * kernel_fourier(params.kernel, kappa_r)
    diff_base = -params.D[:, None] * kappa_r ** 2
    gamma = params.gamma
    upwind = config.scheme == "upwind-fv"
    last_dt, factor = None, None
    u, t = state.u, state.t
    while t < config.t_max:
        v = _face_velocity(u, gamma, dsym)
        vmax = np.max(np.abs(v))
        dt = min(config.dt_init, config.cfl * grid.h / (vmax + CFL_GUARD))
        dt = min(dt, config.t_max - t, next_check - t)
        u_right = np.roll(u, -1, axis=-1)
        if upwind:
            flux = v * np.where(v > 0, u, u_right)
        else:
            flux = v * 0.5 * (u + u_right)
        u = u - dt / grid.h * (flux - np.roll(flux, 1, axis=-1))
        if dt != last_dt:
            factor = np.exp(diff_base * dt)
            last_dt = dt
        u = np.fft.irfft(np.fft.rfft(u, axis=-1) * factor, axis=-1)
        u = _clip_negatives(u, params, grid)
        t += dt
        steps += 1
        if steps % config.record_every == 0:
            if not np.all(np.isfinite(u)):
                raise SolverError(f"non-finite field at t={t:.4g}")
            state = State(u, t)
            _record(traj, state, params, grid)
        if t >= next_check - 1e-12:
            if not np.all(np.isfinite(u)):
                raise SolverError(f"non-finite field at t={t:.4g}")
            state = State(u, t)
            interval = state.t - checkpoint.t
            umax = np.max(np.abs(state.u), axis=-1)
            rate = np.max(np.max(np.abs(state.u - checkpoint.u), axis=-1)
                          / (interval * np.maximum(umax, 1e-300)))
            checkpoint = state.copy()
            next_check = state.t + STEADY_CHECK_INTERVAL
            if rate < config.steady_tol:
                quiet_checks += 1
                if quiet_checks >= 3:
                    traj.converged = True
                    break
            else:
                quiet_checks = 0
    if t > state.t:
        if not np.all(np.isfinite(u)):
            raise SolverError(f"non-finite field at t={t:.4g}")
        state = State(u, t)
    if traj.records[-1].t < state.t:
        _record(traj, state, params, grid)
    traj.final_state = state
    return traj
