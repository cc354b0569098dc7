"""Analytic minimization of the plateau-height energy for N=2 and regime
classification of the (gamma12, gamma11) plane.

For two species restricted to single-plateau piecewise-constant profiles with
heights (u1c, u2c) and supports |S_i| = p_i / u_ic, the local-limit energy
reduces to a two-variable function with at most two interior candidate minima:
the homogeneous point M_H = (p1/L, p2/L) and the segregated-territory point
M_S = ((p1 D1 + p2 D2)/(D1 L), (p1 D1 + p2 D2)/(D2 L)).  The unbounded spike
classes (S_SInfInf, S_S1Inf, S_AInf) appear only as descent directions.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .model import STATE_CLASSES, ModelParams

# bit positions for the regime-map export, in STATE_CLASSES order
CLASS_BITS = {name: 1 << i for i, name in enumerate(STATE_CLASSES)}


@dataclass
class ScriptEnergyPoint:
    u1c: float
    u2c: float
    value: float
    state_class: str
    is_minimum: bool | None  # None when no analytic verdict applies

    @property
    def supports(self) -> tuple[float, float]:
        return self.u1c, self.u2c


def script_energy(u1c: float, u2c: float, params: ModelParams) -> float:
    """Plateau-height energy with the overlap-minimizing support construction.

    Overlap |S1 cap S2| = max(|S1| + |S2| - L, 0); the general form includes the
    self-interaction terms gamma_ii and reduces to the gamma_ii = 0 expression.
    """
    if params.N != 2:
        raise ValueError("script energy is defined for N=2")
    p1, p2 = params.p
    D1, D2 = params.D
    g11, g22 = params.gamma[0, 0], params.gamma[1, 1]
    g12 = params.gamma[0, 1]
    if u1c < p1 / params.L - 1e-12 or u2c < p2 / params.L - 1e-12:
        raise ValueError("plateau heights must satisfy u_ic >= p_i / L")
    overlap = max(p1 / u1c + p2 / u2c - params.L, 0.0)
    return (p1 * (D1 * np.log(u1c) + 0.5 * g11 * u1c)
            + p2 * (D2 * np.log(u2c) + 0.5 * g22 * u2c)
            + g12 * u1c * u2c * overlap)


def _is_unit_equal_diag(params: ModelParams) -> bool:
    return (np.allclose(params.p, 1) and np.allclose(params.D, 1)
            and np.isclose(params.L, 1.0)
            and np.isclose(params.gamma[0, 0], params.gamma[1, 1]))


def candidate_minima(params: ModelParams) -> list[ScriptEnergyPoint]:
    """The two finite-height candidates M_S and M_H with local-minimum verdicts.

    Verdicts come from the boundary Taylor-sign analysis: with gamma_ii = 0,
    M_S is a minimum iff gamma_12 > D1 D2 L / (p1 D1 + p2 D2) and M_H iff
    gamma_12 > -L (p1 D1 + p2 D2) / (p1 p2).  For unit parameters with equal
    self-interaction the verdicts use the full case analysis instead.
    """
    if params.N != 2:
        raise ValueError("candidate minima are defined for N=2")
    p1, p2 = params.p
    D1, D2 = params.D
    L = params.L
    g11 = params.gamma[0, 0]
    g12 = params.gamma[0, 1]
    s = p1 * D1 + p2 * D2
    ms = (s / (D1 * L), s / (D2 * L))
    mh = (p1 / L, p2 / L)
    if _is_unit_equal_diag(params):
        ms_min = bool(-1 < g11 < 2 * g12 - 1)
        mh_min = bool(g11 > -g12 - 2) if g12 < 0 else True
    elif np.isclose(g11, 0) and np.isclose(params.gamma[1, 1], 0):
        ms_min = bool(g12 > D1 * D2 * L / s)
        mh_min = bool(g12 > -L * s / (p1 * p2))
    else:
        ms_min = mh_min = None
    return [
        ScriptEnergyPoint(ms[0], ms[1], script_energy(*ms, params), "S_S22", ms_min),
        ScriptEnergyPoint(mh[0], mh[1], script_energy(*mh, params), "S_H", mh_min),
    ]


def classify_regime(g11: float, g12: float) -> tuple[set[str], str]:
    """Local-minimum-energy class set at (gamma11, gamma12) for unit parameters
    with gamma22 = gamma11 and gamma21 = gamma12.

    Returns (classes, case label).  Equalities on case boundaries are assigned
    to the lower-numbered case of the table (tie-break flagged by a trailing
    '*' on the label).
    """
    boundary = "*" if _on_case_boundary(g11, g12) else ""
    if g12 < 0:
        # mutual attraction: aggregation spike always descends; S_H survives
        # while self-avoidance outweighs attraction
        if g11 >= -g12 - 1:
            return {"S_H", "S_AInf"}, "B1" + boundary
        return {"S_AInf"}, "B2" + boundary
    if g11 >= 0:
        # self and mutual avoidance
        if g11 >= 2 * g12 - 1:
            return {"S_H"}, "A1" + boundary
        return {"S_H", "S_S22"}, "A2" + boundary
    # self attraction with mutual avoidance
    if g11 >= 2 * g12 - 1:
        return {"S_H", "S_SInfInf", "S_S1Inf"}, "C1" + boundary
    if g11 >= g12 - 1:
        return {"S_H", "S_SInfInf", "S_S1Inf", "S_S22"}, "C2" + boundary
    if g11 >= -1:
        return {"S_SInfInf", "S_S1Inf", "S_S22"}, "C3" + boundary
    return {"S_SInfInf", "S_S1Inf"}, "C4" + boundary


def _on_case_boundary(g11: float, g12: float) -> bool:
    lines = [g12, g11, g11 - (2 * g12 - 1)]
    if g12 < 0:
        lines.append(g11 - (-g12 - 1))
    else:
        lines.append(g11 - (g12 - 1))
        lines.append(g11 + 1)
    return any(abs(v) < 1e-12 for v in lines)


def unbounded_descent_check(params: ModelParams) -> bool:
    """True iff the local energy is unbounded below along the co-located spike
    family (which happens exactly when gamma_12 < 0).

    The verdict is cross-checked numerically by evaluating the overlapping-
    support energy along u1c = u2c = s for growing s and requiring strict
    descent.
    """
    if params.N != 2:
        raise ValueError("descent check is defined for N=2")
    p1, p2 = params.p
    D1, D2 = params.D
    g12 = params.gamma[0, 1]
    def overlap_energy(s):
        return (p1 * D1 + p2 * D2) * np.log(s) + g12 * min(p1 * s, p2 * s)
    values = [overlap_energy(s) for s in (10.0, 100.0, 1000.0)]
    descending = values[0] > values[1] > values[2]
    verdict = g12 < 0
    if verdict != descending:
        raise RuntimeError("analytic descent verdict disagrees with numerical scan")
    return verdict


def regime_map_csv(g12_values, g11_values) -> str:
    """CSV grid of (gamma12, gamma11, class-set bitmask) for regime plotting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["gamma12", "gamma11", "bitmask", "case"])
    for g11 in g11_values:
        for g12 in g12_values:
            classes, case = classify_regime(g11, g12)
            mask = sum(CLASS_BITS[c] for c in classes)
            w.writerow([repr(float(g12)), repr(float(g11)), mask, case])
    return buf.getvalue()
