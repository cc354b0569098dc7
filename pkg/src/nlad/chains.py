"""Determinant chains for steady states of the local-limit system, finiteness
verdicts via Groebner bases, and the N=2 closed-form solver.

On any interval where a differentiable local-limit steady state is nonzero, the
density gradient is annihilated by the matrix A_1 with entries
gamma_ij u_i + D_i delta_ij, so det(A_1) = 0 on nonconstant stretches.
Differentiating that determinant and stacking the gradient on top of selected
rows of the previous matrix yields further determinant equations; if the ideal
they generate is zero-dimensional, nonconstant differentiable steady states are
ruled out.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .groebner import GroebnerResult, ResourceCapExceeded, buchberger
from .poly import Polynomial, PolyMatrix, determinant

RESIDUAL_TOL = 1e-10

# chain recipes: each entry is (index of source matrix, rows of it to keep
# under the fresh gradient row); matrix 0 is always A_1
DEFAULT_CHAIN_N3 = ((0, (0, 1)), (1, (0, 1)))
EXTENDED_CHAIN_N3 = ((0, (0, 1)), (1, (0, 1)), (0, (0, 2)), (3, (1, 2)))
DEFAULT_CHAIN_N2 = ((0, (0,)),)


def _as_fraction_matrix(values) -> list[list[Fraction]]:
    return [[Fraction(v).limit_denominator(10 ** 12) if isinstance(v, float)
             else Fraction(v) for v in row] for row in values]


def steady_matrix(D, gamma, n: int | None = None) -> PolyMatrix:
    """The matrix A_1 with polynomial entries gamma_ij u_i + D_i delta_ij.

    D and gamma must be exactly representable as rationals.
    """
    gamma = _as_fraction_matrix(gamma)
    D = [Fraction(d).limit_denominator(10 ** 12) if isinstance(d, float) else Fraction(d)
         for d in D]
    n = n or len(D)
    entries = []
    for i in range(n):
        row = []
        for j in range(n):
            e = Polynomial.variable(n, i) * gamma[i][j]
            if i == j:
                e = e + D[i]
            row.append(e)
        entries.append(row)
    return PolyMatrix(entries)


def augment_chain(m: PolyMatrix, keep_rows) -> PolyMatrix:
    """Next chain matrix: gradient of det(m) on top, selected rows of m below."""
    keep_rows = tuple(keep_rows)
    if len(keep_rows) != m.n - 1 or any(not 0 <= r < m.n for r in keep_rows):
        raise ValueError(f"need {m.n - 1} valid row indices, got {keep_rows}")
    det = determinant(m)
    grad = [det.partial_derivative(v) for v in range(m.nvars)]
    return PolyMatrix([grad] + [m.row(r) for r in keep_rows])


def build_chain(a1: PolyMatrix, chain_spec) -> list[PolyMatrix]:
    """Materialize a chain recipe into the full matrix list, A_1 first."""
    mats = [a1]
    for source, rows in chain_spec:
        mats.append(augment_chain(mats[source], rows))
    return mats


@dataclass
class FinitenessReport:
    zero_dimensional: bool
    groebner: GroebnerResult
    determinants: list[Polynomial]
    n2_solutions: list[tuple[float, float]] | None = None

    def to_json(self) -> str:
        data = json.loads(self.groebner.to_json())
        data["finite"] = self.zero_dimensional
        data["chain_determinants"] = [p.to_text() for p in self.determinants]
        if self.n2_solutions is not None:
            data["n2_solutions"] = [list(s) for s in self.n2_solutions]
        return json.dumps(data, indent=2)


def finiteness_verdict(D, gamma, chain_spec=None, ranking=None) -> FinitenessReport:
    """Build the determinant chain, run Buchberger, and report whether the
    steady-state variety is finite.  For N=2 the closed-form roots are attached."""
    n = len(D)
    if n not in (2, 3):
        raise ValueError("finiteness chains implemented for N in {2, 3}")
    if chain_spec is None:
        chain_spec = DEFAULT_CHAIN_N2 if n == 2 else DEFAULT_CHAIN_N3
    a1 = steady_matrix(D, gamma, n)
    mats = build_chain(a1, chain_spec)
    dets = [determinant(m) for m in mats]
    result = buchberger([d for d in dets if d], ranking=ranking)
    sols = solve_n2(D, gamma) if n == 2 else None
    return FinitenessReport(result.zero_dimensional, result, dets, sols)


def _real_roots(coeffs: list[Fraction]) -> list[float]:
    """Real roots of a univariate polynomial given by exact coefficients
    (ascending powers), refined by Newton iteration on the exact polynomial."""
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) <= 1:
        return []
    fl = np.array([float(c) for c in coeffs[::-1]])
    roots = np.roots(fl)
    scale = max(1.0, np.max(np.abs(roots)))
    out = []
    dcoeffs = [k * c for k, c in enumerate(coeffs)][1:]
    for r in roots:
        if abs(r.imag) > 1e-8 * scale:
            continue
        x = float(r.real)
        for _ in range(60):
            fx = sum(float(c) * x ** k for k, c in enumerate(coeffs))
            dfx = sum(float(c) * x ** k for k, c in enumerate(dcoeffs))
            if dfx == 0:
                break
            step = fx / dfx
            x -= step
            if abs(step) < 1e-15 * max(1.0, abs(x)):
                break
        if not any(abs(x - y) < 1e-9 * max(1.0, abs(x)) for y in out):
            out.append(x)
    return sorted(out)


@dataclass
class N2Solution:
    u1: float
    u2: float
    residuals: tuple[float, float]
    degenerate: bool = False  # elimination broke down; pair needs a direct solve


def solve_n2(D, gamma) -> list[tuple[float, float]]:
    """All real solutions of {det A_1 = 0, det A_2 = 0} for two species.

    det A_1 - det A_2 is linear in u2; eliminating u2 leaves a polynomial of
    degree at most three in u1, so there are at most three solutions.  Each
    returned pair is verified against both determinant equations.
    """
    details = solve_n2_detailed(D, gamma)
    return [(s.u1, s.u2) for s in details]


def solve_n2_detailed(D, gamma) -> list[N2Solution]:
    a1 = steady_matrix(D, gamma, 2)
    a2 = augment_chain(a1, (0,))
    p1 = determinant(a1)
    p2 = determinant(a2)
    q = p1 - p2
    # q = a(u1) u2 + b(u1); p1 = c(u1) u2 + d(u1)
    qa, qb = _linear_in_u2(q)
    pa, pb = _linear_in_u2(p1)
    sols: list[N2Solution] = []
    if qa:
        # resultant-style elimination: substitute u2 = -qb/qa into p1
        elim = pb * qa - pa * qb
        for u1 in _real_roots(_univariate_coeffs(elim)):
            av = qa.evaluate_float((u1, 0.0))
            if abs(av) < 1e-12:
                sols.extend(_solve_at_u1(u1, p1, p2))
                continue
            u2 = -qb.evaluate_float((u1, 0.0)) / av
            sols.append(_verified(u1, u2, p1, p2))
    else:
        # q has no u2 dependence: its u1-roots combined with p1 (linear in u2)
        for u1 in _real_roots(_univariate_coeffs(qb)):
            cv = pa.evaluate_float((u1, 0.0))
            if abs(cv) < 1e-12:
                sols.extend(_solve_at_u1(u1, p1, p2, degenerate=True))
                continue
            u2 = -pb.evaluate_float((u1, 0.0)) / cv
            sols.append(_verified(u1, u2, p1, p2))
    good = [s for s in sols
            if s.degenerate or max(s.residuals) < RESIDUAL_TOL]
    good.sort(key=lambda s: (s.u1, s.u2))
    return good[:3]


def _linear_in_u2(p: Polynomial):
    if p.degree_in(1) > 1:
        raise ValueError("expected a polynomial of degree <= 1 in u2")
    cs = p.coefficients_in(1)
    zero = Polynomial(p.nvars)
    b = cs[0] if cs else zero
    a = cs[1] if len(cs) > 1 else zero
    return a, b


def _univariate_coeffs(p: Polynomial) -> list[Fraction]:
    if p.degree_in(1) > 0:
        raise ValueError("polynomial still depends on u2")
    out = [Fraction(0)] * (p.degree_in(0) + 1)
    for e, c in p.terms.items():
        out[e[0]] = c
    return out


def _verified(u1: float, u2: float, p1: Polynomial, p2: Polynomial) -> N2Solution:
    r1 = abs(p1.evaluate_float((u1, u2)))
    r2 = abs(p2.evaluate_float((u1, u2)))
    return N2Solution(u1, u2, (r1, r2))


def _solve_at_u1(u1: float, p1: Polynomial, p2: Polynomial,
                 degenerate: bool = True) -> list[N2Solution]:
    """Fallback when the u2 elimination is singular at a root: solve p1 for u2
    directly and flag the pair."""
    pa, pb = _linear_in_u2(p1)
    av = pa.evaluate_float((u1, 0.0))
    if abs(av) < 1e-12:
        bv = abs(pb.evaluate_float((u1, 0.0)))
        if bv > RESIDUAL_TOL:
            # p1 reduces to a nonzero constant at this u1: no solution here
            return []
        # u2 genuinely unconstrained by p1; report the flagged pair at u2 = 0
        return [N2Solution(u1, 0.0, (bv, abs(p2.evaluate_float((u1, 0.0)))),
                           degenerate=True)]
    u2 = -pb.evaluate_float((u1, 0.0)) / av
    s = _verified(u1, u2, p1, p2)
    s.degenerate = degenerate
    return [s]


def all_rankings(nvars: int):
    return list(itertools.permutations(range(nvars)))


def verdict_over_orderings(polys: list[Polynomial]):
    """zero_dimensional verdict and results for all lex variable rankings."""
    results = {}
    for ranking in all_rankings(polys[0].nvars):
        try:
            results[ranking] = buchberger(polys, ranking=ranking)
        except ResourceCapExceeded as err:
            results[ranking] = err
    return results
