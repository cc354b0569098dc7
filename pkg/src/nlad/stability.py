"""Linear stability of the homogeneous state: pattern-formation matrix, spectrum,
dispersion relation and instability criteria.

Perturbations w ~ exp(lambda t + i kappa x) of the homogeneous state satisfy the
eigenvalue problem lambda(kappa) w = kappa^2 L(kappa) w, where L(kappa) has
entries -gamma_ij ubar_i K_hat(kappa) - D_i delta_ij.  The growth rate reported
per mode is kappa^2 times the largest real part, directly comparable to measured
exponential growth in simulations.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .kernels import kernel_fourier
from .model import ModelParams

REAL_SPECTRUM_TOL = 1e-10


def stability_matrix(params: ModelParams, kappa: float) -> np.ndarray:
    """The N x N matrix L(kappa) whose spectrum controls mode growth."""
    khat = float(kernel_fourier(params.kernel, kappa))
    ubar = params.ubar
    m = -params.gamma * ubar[:, None] * khat
    m[np.diag_indices(params.N)] -= params.D
    return m


def eigenvalues_n2(params: ModelParams, kappa: float):
    """Closed-form eigenvalue pair (lambda_plus, lambda_minus) of L(kappa) for N=2.

    With gamma_12 = gamma_21 the discriminant is a sum of squares, so the pair is
    real.  A negative discriminant (possible only for non-symmetric coupling)
    falls back to the generic eigensolver and flags the pair as complex.
    """
    if params.N != 2:
        raise ValueError("closed form defined for N=2 only")
    khat = float(kernel_fourier(params.kernel, kappa))
    u1, u2 = params.ubar
    D1, D2 = params.D
    g11, g22 = params.gamma[0, 0], params.gamma[1, 1]
    g12, g21 = params.gamma[0, 1], params.gamma[1, 0]
    a = -(g11 * u1 + g22 * u2) * khat - (D1 + D2)
    disc = (((g11 * u1 - g22 * u2) ** 2 + 4 * g12 * g21 * u1 * u2) * khat ** 2
            + 2 * (D1 - D2) * (g11 * u1 - g22 * u2) * khat + (D1 - D2) ** 2)
    if disc < 0:
        lam = np.linalg.eigvals(stability_matrix(params, kappa))
        lam = sorted(lam, key=lambda z: -z.real)
        return lam[0], lam[1], True
    r = np.sqrt(disc)
    return 0.5 * (a + r), 0.5 * (a - r), False


@dataclass
class DispersionRow:
    q: int
    kappa: float
    eigenvalues: np.ndarray  # complex, sorted by descending real part
    growth_rate: float       # kappa^2 * max Re(lambda)


@dataclass
class DispersionTable:
    rows: list[DispersionRow]
    complex_flag: bool  # True if any mode has a non-negligible imaginary part

    def growth_rates(self) -> np.ndarray:
        return np.array([r.growth_rate for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = len(self.rows[0].eigenvalues)
        w.writerow(["q", "kappa"]
                   + [f"re_lambda_{i + 1}" for i in range(n)]
                   + [f"im_lambda_{i + 1}" for i in range(n)]
                   + ["growth_rate"])
        for r in self.rows:
            w.writerow([r.q, repr(float(r.kappa))]
                       + [repr(float(z.real)) for z in r.eigenvalues]
                       + [repr(float(z.imag)) for z in r.eigenvalues]
                       + [repr(r.growth_rate)])
        return buf.getvalue()


def dispersion(params: ModelParams, q_max: int) -> DispersionTable:
    """Eigenvalues of L(kappa) and growth rates for modes q = 0 .. q_max."""
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    rows = []
    complex_flag = False
    for q in range(q_max + 1):
        kappa = 2.0 * np.pi * q / params.L
        lam = np.linalg.eigvals(stability_matrix(params, kappa))
        lam = np.array(sorted(lam, key=lambda z: -z.real))
        scale = max(np.max(np.abs(lam)), 1.0)
        if np.max(np.abs(lam.imag)) > REAL_SPECTRUM_TOL * scale:
            complex_flag = True
        growth = 0.0 if q == 0 else kappa ** 2 * float(lam[0].real)
        rows.append(DispersionRow(q, kappa, lam, growth))
    return DispersionTable(rows, complex_flag)


def is_unstable(params: ModelParams, q_max: int):
    """Whether any mode 1 <= q <= q_max grows; returns (verdict, unstable modes)."""
    table = dispersion(params, q_max)
    unstable = [r.q for r in table.rows if r.q >= 1 and r.growth_rate > 0]
    return bool(unstable), unstable
