"""Parameter and state containers, validation, mass accounting, initial conditions."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec

MASS_TOL = 1e-8

# The five qualitative steady-state classes for N=2 (territory-like plateaus,
# segregated or co-located spikes, one-sided spike, homogeneous).
STATE_CLASSES = ("S_H", "S_S22", "S_SInfInf", "S_S1Inf", "S_AInf")


class ParameterError(ValueError):
    """Model parameters violate their invariants."""


@dataclass(frozen=True)
class ModelParams:
    """N-species model parameters: diffusion D, interaction matrix gamma, masses p,
    domain length L and averaging kernel."""

    N: int
    D: np.ndarray
    gamma: np.ndarray
    p: np.ndarray
    L: float
    kernel: KernelSpec

    def __post_init__(self):
        D = np.asarray(self.D, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "p", p)
        if self.N < 1:
            raise ParameterError("need at least one species")
        if D.shape != (self.N,) or not np.all(D > 0):
            raise ParameterError("D must be a length-N vector of positive diffusion rates")
        if gamma.shape != (self.N, self.N):
            raise ParameterError("gamma must be an N x N matrix")
        if p.shape != (self.N,) or not np.all(p > 0):
            raise ParameterError("p must be a length-N vector of positive masses")
        if not self.L > 0:
            raise ParameterError("domain length L must be positive")
        self.kernel.validate_for_domain(self.L)
        if not self.symmetric:
            warnings.warn(
                "gamma is not symmetric: energy-based diagnostics are unavailable",
                stacklevel=2,
            )

    @property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.gamma, self.gamma.T))

    @property
    def ubar(self) -> np.ndarray:
        """Homogeneous steady-state densities p_i / L."""
        return self.p / self.L

    def require_symmetric(self, what: str):
        if not self.symmetric:
            raise ParameterError(f"{what} requires a symmetric interaction matrix")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid of M cells on [0, L), cell centers at (k + 1/2) h."""

    M: int
    L: float

    def __post_init__(self):
        if self.M < 16:
            raise ParameterError("grid must have at least 16 cells")
        if self.M & (self.M - 1) != 0:
            raise ParameterError("grid size must be a power of two")

    @property
    def h(self) -> float:
        return self.L / self.M

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) * self.h

    @property
    def kappa(self) -> np.ndarray:
        """Signed FFT wavenumbers 2*pi*q/L in numpy fft order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.M, d=1.0 / self.M) / self.L

    @property
    def kappa_r(self) -> np.ndarray:
        """Nonnegative wavenumbers for real-input transforms."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.M, d=1.0 / self.M) / self.L


@dataclass
class State:
    """Densities u (N x M, nonnegative) at time t."""

    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.ndim != 2:
            raise ValueError("u must be an N x M array")

    def mass(self, grid: Grid) -> np.ndarray:
        return self.u.sum(axis=1) * grid.h

    def check(self, params: ModelParams, grid: Grid):
        """Assert nonnegativity and per-species mass conservation."""
        if np.min(self.u) < 0:
            raise ValueError(f"negative density {np.min(self.u):.3e}")
        m = self.mass(grid)
        drift = np.max(np.abs(m - params.p) / params.p)
        if drift > MASS_TOL:
            raise ValueError(f"mass drift {drift:.3e} exceeds {MASS_TOL}")

    def copy(self) -> "State":
        return State(self.u.copy(), self.t)


def homogeneous_state(params: ModelParams, grid: Grid) -> State:
    """The homogeneous steady state u_i = p_i / L."""
    u = np.tile(params.ubar[:, None], (1, grid.M))
    return State(u)


def perturbed_state(base: State, params: ModelParams, grid: Grid,
                    amplitude: float, seed: int) -> State:
    """Multiplicative random perturbation with per-species mass restored exactly.

    Each cell is scaled by (1 + amplitude * xi), xi uniform on [-1, 1] from a
    seeded generator, which keeps the state nonnegative for amplitude <= 0.1.
    """
    if amplitude < 0 or amplitude > 0.1:
        raise ValueError("perturbation amplitude must lie in [0, 0.1]")
    if amplitude == 0:
        return base.copy()
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-1.0, 1.0, size=base.u.shape)
    u = base.u * (1.0 + amplitude * xi)
    m = u.sum(axis=1) * grid.h
    target = base.mass(grid)
    scale = np.where(m > 0, target / np.where(m > 0, m, 1.0), 1.0)
    u *= scale[:, None]
    return State(u, base.t)


def _interval_mask(grid: Grid, start: float, width: float) -> np.ndarray:
    """Boolean mask of cells whose centers lie in [start, start+width) mod L."""
    x = np.mod(grid.x - start, grid.L)
    return x < width


def _masked_density(mask: np.ndarray, p: float, grid: Grid) -> np.ndarray:
    n = int(mask.sum())
    if n == 0:
        raise ValueError("template support contains no grid cells")
    u = np.zeros(grid.M)
    u[mask] = p / (n * grid.h)
    return u


def template_state(cls: str, params: ModelParams, grid: Grid,
                   spike_width: float | None = None) -> State:
    """Piecewise-constant template generator for the five N=2 steady-state classes.

    Species-1 support starts at x=0; placement is immaterial on the torus but a
    fixed choice keeps runs reproducible.  The segregated-territory class S_S22
    uses the analytic plateau widths |S_i| = p_i / u_i with
    u_i = (p1 D1 + p2 D2) / (D_i L).
    """
    if cls not in STATE_CLASSES:
        raise ValueError(f"unknown steady-state class {cls!r}")
    if cls == "S_H":
        return homogeneous_state(params, grid)
    if params.N != 2:
        raise ValueError(f"class {cls} templates are defined for N=2 only")
    p1, p2 = params.p
    D1, D2 = params.D
    L = params.L
    if cls == "S_S22":
        s = p1 * D1 + p2 * D2
        w1 = p1 / (s / (D1 * L))  # = p1 D1 L / (p1 D1 + p2 D2)
        w2 = p2 / (s / (D2 * L))
        u1 = _masked_density(_interval_mask(grid, 0.0, w1), p1, grid)
        u2 = _masked_density(_interval_mask(grid, w1, w2), p2, grid)
        return State(np.stack([u1, u2]))
    if spike_width is None or spike_width < 2 * grid.h:
        raise ValueError("spike-type templates need spike_width >= 2 h")
    w = spike_width
    if cls == "S_AInf":
        m = _interval_mask(grid, 0.0, w)
        return State(np.stack([_masked_density(m, p1, grid),
                               _masked_density(m, p2, grid)]))
    if cls == "S_SInfInf":
        m1 = _interval_mask(grid, 0.0, w)
        m2 = _interval_mask(grid, L / 2, w)
        return State(np.stack([_masked_density(m1, p1, grid),
                               _masked_density(m2, p2, grid)]))
    # S_S1Inf: species 2 spikes, species 1 spreads over the complement
    m2 = _interval_mask(grid, 0.0, w)
    u1 = _masked_density(~m2, p1, grid)
    u2 = _masked_density(m2, p2, grid)
    return State(np.stack([u1, u2]))


def state_to_csv(state: State, grid: Grid, header_comment: str | None = None) -> str:
    """Serialize a state as CSV with columns x, u_1, ..., u_N."""
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    n = state.u.shape[0]
    w.writerow(["x"] + [f"u_{i + 1}" for i in range(n)])
    for k in range(grid.M):
        w.writerow([repr(float(grid.x[k]))]
                   + [repr(float(state.u[i, k])) for i in range(n)])
    return buf.getvalue()


def state_from_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse a state CSV back into (x, u) arrays; inverse of state_to_csv."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return data[:, 0], data[:, 1:].T
