"""End-to-end acceptance criteria.

Each test prints exactly one summary line "CRITERION n: PASS/FAIL - ..." before
asserting, so the suite output doubles as a checklist.  Tolerances are stated
inline.  Criteria whose numeric targets the computed physics does not reach are
kept as faithful failing assertions with the achieved values in the summary
line (see the repository notes for the analysis).
"""

import json
import random
from fractions import Fraction
from itertools import permutations

import numpy as np

from nlad.chains import (DEFAULT_CHAIN_N3, EXTENDED_CHAIN_N3, build_chain,
                         solve_n2_detailed, steady_matrix)
from nlad.energy import dissipation as energy_dissipation
from nlad.energy import lower_bound
from nlad.groebner import buchberger
from nlad.kernels import periodic_convolve, tophat
from nlad.minimizers import classify_regime
from nlad.model import (Grid, ModelParams, State, homogeneous_state,
                        perturbed_state, template_state)
from nlad.poly import determinant
from nlad.solver import SolverConfig, run_to_steady, step
from nlad.stability import eigenvalues_n2, stability_matrix
from nlad.sweep import SweepPlan, classify_state, run_sweep


def report(n, ok, detail):
    print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def two_species(g12, g11=0.0, alpha=0.05, D=(1.0, 1.0)):
    g = np.array([[g11, g12], [g12, g11]])
    return ModelParams(2, np.asarray(D, dtype=float), g, np.ones(2), 1.0,
                       tophat(alpha))


def smoothed_template(cls, params, grid, width):
    """Template profile mollified enough to survive the spectral diffusion
    substep without round-off-level negative overshoot."""
    u = template_state(cls, params, grid, width).u
    for _ in range(3):
        u = periodic_convolve(u, tophat(4 * grid.h), grid)
    u = 0.98 * u + 0.02 * homogeneous_state(params, grid).u
    return State(u)


# -- criterion 1: conservation and positivity ------------------------------

def test_criterion_1_conservation_and_positivity():
    """Mass drift < 1e-8 relative and min u >= 0 at every record, across
    avoidance, attraction, and asymmetric-diffusion runs."""
    grid = Grid(256, 1.0)
    configs = [two_species(1.1, alpha=0.025),
               two_species(0.5, alpha=0.05),
               two_species(-1.2, alpha=0.1),
               two_species(1.2, alpha=0.05, D=(1.5, 0.7))]
    worst_drift, worst_min = 0.0, 0.0
    for i, params in enumerate(configs):
        ic = perturbed_state(homogeneous_state(params, grid), params, grid,
                             0.05, 100 + i)
        traj = run_to_steady(ic, params, grid,
                             SolverConfig(t_max=20.0, record_every=100))
        for r in traj.records:
            worst_drift = max(worst_drift,
                              float(np.max(np.abs(r.masses - params.p) / params.p)))
            worst_min = min(worst_min, r.min_u)
    ok = worst_drift < 1e-8 and worst_min >= 0.0
    report(1, ok, f"max relative mass drift {worst_drift:.2e} (tol 1e-8), "
                  f"min density {worst_min:.2e} (>= 0)")
    assert worst_drift < 1e-8
    assert worst_min >= 0.0


# -- criterion 2: energy monotonicity, dissipation, lower bound ------------

def test_criterion_2_energy_monotonicity():
    """10 randomized symmetric interaction matrices: energy non-increasing
    within 1e-8 relative slack, |dissipation| <= 1e-10 at steady state, and
    E >= analytic lower bound at every record."""
    rng = np.random.default_rng(7)
    grid = Grid(256, 1.0)
    worst_rise, worst_diss = 0.0, 0.0
    bound_ok = True
    for case in range(10):
        n = 2 if case < 7 else 3
        # sub-threshold coupling keeps the homogeneous state attracting, where
        # the steady dissipation target is meaningful
        limit = 0.42 if n == 2 else 0.28
        a = rng.uniform(-limit, limit, (n, n))
        gamma = (a + a.T) / 2
        params = ModelParams(n, np.ones(n), gamma, np.ones(n), 1.0,
                             tophat(0.05))
        ic = perturbed_state(homogeneous_state(params, grid), params, grid,
                             0.05, 200 + case)
        traj = run_to_steady(ic, params, grid,
                             SolverConfig(t_max=60.0, record_every=100))
        assert traj.converged
        e = np.array([r.energy for r in traj.records])
        scale = max(1.0, float(np.max(np.abs(e))))
        worst_rise = max(worst_rise, float(np.max(np.diff(e))) / scale)
        d = energy_dissipation(traj.final_state, params, grid)
        worst_diss = max(worst_diss, abs(d))
        lb = lower_bound(params)
        bound_ok = bound_ok and bool(np.all(e >= lb))
    ok = worst_rise <= 1e-8 and worst_diss <= 1e-10 and bound_ok
    report(2, ok, f"max energy rise {worst_rise:.2e} (slack 1e-8), "
                  f"max steady |dissipation| {worst_diss:.2e} (tol 1e-10), "
                  f"lower bound held: {bound_ok}")
    assert worst_rise <= 1e-8
    assert worst_diss <= 1e-10
    assert bound_ok


# -- criterion 3: dispersion oracle ----------------------------------------

def measured_growth_rate(params, grid, q, t_end, dt):
    """Seed the homogeneous state with the dominant eigenvector at mode q and
    fit the exponential rate of that Fourier amplitude."""
    kappa = 2 * np.pi * q / params.L
    lam, vecs = np.linalg.eig(stability_matrix(params, kappa))
    k = int(np.argmax(lam.real))
    w = np.real(vecs[:, k])
    w /= np.max(np.abs(w))
    eps = 1e-4
    u = params.ubar[:, None] + eps * w[:, None] * np.cos(kappa * grid.x)
    state = State(u)
    cfg = SolverConfig(dt_init=dt, scheme="central-fv")
    times, amps = [], []
    nsteps = int(round(t_end / dt))
    sample = max(1, nsteps // 60)
    for i in range(nsteps):
        state = step(state, params, grid, cfg, dt)
        if i % sample == 0:
            coef = np.fft.rfft(state.u, axis=-1)[:, q]
            times.append(state.t)
            amps.append(np.max(np.abs(coef)) * 2 / grid.M)
    times, amps = np.array(times), np.array(amps)
    keep = (amps > 1e-7) & (amps < 2e-3)
    slope = np.polyfit(times[keep], np.log(amps[keep]), 1)[0]
    return slope


def test_criterion_3_dispersion_oracle():
    """Measured mode growth/decay rates match kappa^2 lambda_plus within 5%."""
    grid = Grid(256, 1.0)
    rows = []
    ok = True
    for g12, g11 in [(1.05, 0.0), (-1.05, 0.0), (0.4, -0.15)]:
        params = two_species(g12, g11, alpha=0.05)
        for q in (1, 2):
            kappa = 2 * np.pi * q
            lp, _, _ = eigenvalues_n2(params, kappa)
            predicted = kappa ** 2 * lp
            t_end = min(2.5, max(0.05, 3.0 / abs(predicted)))
            # step-size extrapolation removes the O(dt) splitting bias, which
            # dominates when large advective and diffusive sub-rates nearly
            # cancel in the net rate
            r1 = measured_growth_rate(params, grid, q, t_end, 1e-4)
            r2 = measured_growth_rate(params, grid, q, t_end, 5e-5)
            measured = 2 * r2 - r1
            rel = abs(measured - predicted) / abs(predicted)
            rows.append(f"(g12={g12},g11={g11},q={q}): "
                        f"{measured:+.3f} vs {predicted:+.3f} ({rel:.1%})")
            ok = ok and rel < 0.05
    report(3, ok, "; ".join(rows) + " [tol 5%]")
    assert ok


# -- criteria 4 and 5: hysteresis sweeps -----------------------------------

def test_criterion_4_avoidance_hysteresis():
    """Down-sweep in gamma12 for alpha in {0.1, 0.05, 0.025}: branch collapse
    point gamma* in (0.5, 0.9], and |amplitude - 2| at gamma12 = 1.05 below
    0.4 at alpha = 0.025, decreasing monotonically in alpha.

    The computed steady states are finite-amplitude two-plateau profiles whose
    heights solve D ln(u_hi/u_lo) = gamma12 (u_hi - u_lo) with
    u_hi + u_lo = 2; they collapse at the linear-stability threshold
    (gamma* = 1.0), so the claimed targets are not reached and the assertions
    below fail by design, with achieved values reported."""
    grid = Grid(256, 1.0)
    gaps, stars = {}, {}
    for alpha in (0.1, 0.05, 0.025):
        params = two_species(1.2, alpha=alpha)
        ic = perturbed_state(homogeneous_state(params, grid), params, grid,
                             0.05, 7)
        plan = SweepPlan(params, start=1.2, stop=0.5, step=0.05,
                         initial_state=ic,
                         solver=SolverConfig(t_max=80.0), seed=7)
        points = run_sweep(plan)
        collapsed = [p.gamma12 for p in points
                     if abs(p.amplitude - 1.0) <= 1e-2]
        stars[alpha] = max(collapsed) if collapsed else float("nan")
        at105 = [p.amplitude for p in points if abs(p.gamma12 - 1.05) < 1e-9]
        gaps[alpha] = abs(at105[0] - 2.0) if at105 else float("nan")
    monotone = gaps[0.1] >= gaps[0.05] >= gaps[0.025]
    star_ok = all(0.5 < stars[a] <= 0.9 for a in stars)
    gap_ok = gaps[0.025] < 0.4
    ok = star_ok and gap_ok and monotone
    report(4, ok,
           f"collapse gamma* per alpha {dict((a, round(s, 3)) for a, s in stars.items())} "
           f"(target (0.5, 0.9]); |amp-2| at 1.05 "
           f"{dict((a, round(g, 3)) for a, g in gaps.items())} "
           f"(monotone: {monotone}, target < 0.4 at alpha=0.025)")
    assert monotone
    assert star_ok, f"branch collapses at the linear threshold: {stars}"
    assert gap_ok, f"achieved |amp - 2| = {gaps[0.025]:.3f}"


def test_criterion_5_attraction_hysteresis():
    """Up-sweep from gamma12 = -1.2: the aggregation branch persists at some
    gamma12 > -1, and the amplitude at gamma12 = -1.05 increases monotonically
    as alpha decreases over {0.1, 0.05, 0.025}."""
    amps, persist = {}, {}
    # The narrowest kernel needs the fine grid to resolve the aggregate's edge
    # within the positivity tolerance; its spike forms within one time unit,
    # so that leg runs short per-point windows and stops at -1.05 (the
    # persistence-past--1 check is carried by the two wider kernels).
    legs = {0.1: (256, -0.8, SolverConfig(t_max=15.0, steady_tol=1e-5)),
            0.05: (256, -0.8, SolverConfig(t_max=15.0, steady_tol=1e-5)),
            0.025: (512, -1.05, SolverConfig(t_max=1.0, steady_tol=1e-4,
                                             record_every=5000))}
    for alpha, (m, stop, solver) in legs.items():
        grid = Grid(m, 1.0)
        params = two_species(-1.2, alpha=alpha)
        # seed directly with a shared aggregate so each continuation point
        # relaxes on the branch instead of slowly coarsening from noise
        ic = perturbed_state(smoothed_template("S_AInf", params, grid, 0.1),
                             params, grid, 0.02, 11)
        plan = SweepPlan(params, start=-1.2, stop=stop, step=0.05,
                         initial_state=ic, solver=solver, seed=11)
        points = run_sweep(plan)
        on_branch = [p for p in points if abs(p.amplitude - 1.0) > 1e-2]
        persist[alpha] = max(p.gamma12 for p in on_branch) if on_branch else None
        at105 = [p.amplitude for p in points if abs(p.gamma12 + 1.05) < 1e-9]
        amps[alpha] = at105[0] if at105 else float("nan")
    persist_ok = any(v is not None and v > -1.0 for v in persist.values())
    monotone = amps[0.1] < amps[0.05] < amps[0.025]
    ok = persist_ok and monotone
    report(5, ok,
           f"branch last survives at {dict((a, p) for a, p in persist.items())} "
           f"(need some > -1); amplitude at -1.05 "
           f"{dict((a, round(v, 2)) for a, v in amps.items())} "
           f"(monotone increasing as alpha decreases: {monotone})")
    assert persist_ok
    assert monotone


# -- criterion 6: regime table and stay-in-class ---------------------------

def test_criterion_6_regime_table_and_templates():
    """classify_regime reproduces the 8-case table; the four reference
    parameter points return their expected class sets; template-seeded solver
    runs keep their class under the plateau-signature test.

    The plateau and segregated-spike templates at these parameter values decay
    to the homogeneous state under the dynamics (the effective segregation
    drive gamma12 - gamma11 = 0.85 is below the threshold 1, and at kernel
    half-width 0.025 the kernel caps spike heights where the entropy cost
    outweighs the weak self-attraction), so three of the five stay-in-class
    runs fail; the assertions keep the original targets."""
    eight = {
        (0.5, 0.6): ({"S_H"}, "A1"),
        (0.2, 1.05): ({"S_H", "S_S22"}, "A2"),
        (0.2, -0.5): ({"S_H", "S_AInf"}, "B1"),
        (0.2, -1.5): ({"S_AInf"}, "B2"),
        (-0.15, 0.4): ({"S_H", "S_SInfInf", "S_S1Inf"}, "C1"),
        (-0.2, 0.6): ({"S_H", "S_SInfInf", "S_S1Inf", "S_S22"}, "C2"),
        (-0.6, 0.5): ({"S_SInfInf", "S_S1Inf", "S_S22"}, "C3"),
        (-1.2, 0.05): ({"S_SInfInf", "S_S1Inf"}, "C4"),
    }
    table_ok = True
    for (g11, g12), (classes, case) in eight.items():
        got_classes, got_case = classify_regime(g11, g12)
        table_ok = table_ok and got_classes == classes \
            and got_case.rstrip("*") == case

    fig_points = {(0.2, 0.2): {"S_H"},
                  (0.2, 1.05): {"S_H", "S_S22"},
                  (0.2, -1.05): {"S_H", "S_AInf"},
                  (-0.15, 0.4): {"S_H", "S_SInfInf", "S_S1Inf"}}
    points_ok = all(classify_regime(g11, g12)[0] == cls
                    for (g11, g12), cls in fig_points.items())

    grid = Grid(256, 1.0)
    runs = [(0.2, 0.2, "S_H", None), (0.2, 1.05, "S_S22", None),
            (0.2, -1.05, "S_AInf", 0.05), (-0.15, 0.4, "S_SInfInf", 0.05),
            (-0.15, 0.4, "S_S1Inf", 0.05)]
    outcomes = {}
    for g11, g12, cls, w in runs:
        params = two_species(g12, g11, alpha=0.025)
        if w is None:
            ic = perturbed_state(template_state(cls, params, grid), params,
                                 grid, 0.02, 11)
        else:
            ic = perturbed_state(smoothed_template(cls, params, grid, w),
                                 params, grid, 0.02, 11)
        traj = run_to_steady(ic, params, grid, SolverConfig(t_max=5.0))
        outcomes[cls] = classify_state(traj.final_state, params)
    stay_ok = all(outcomes[c] == c for c in outcomes)
    ok = table_ok and points_ok and stay_ok
    report(6, ok, f"8-case table: {table_ok}; reference class sets: "
                  f"{points_ok}; template runs seeded->final {outcomes}")
    assert table_ok
    assert points_ok
    assert stay_ok, f"classes not retained: {outcomes}"


# -- criterion 7: exact two-species steady solver --------------------------

def test_criterion_7_exact_n2_solver():
    """100 random rational symmetric draws: <= 3 solutions, determinant
    residuals < 1e-10; zero-diagonal closed form (D2/g21, D1/g12) to 1e-12."""
    rng = random.Random(99)
    count_ok = True
    worst_res = 0.0
    for _ in range(100):
        D = [Fraction(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(2)]
        g12 = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        gii = [Fraction(rng.randint(-4, 4), rng.randint(1, 9)) for _ in range(2)]
        sols = solve_n2_detailed(D, [[gii[0], g12], [g12, gii[1]]])
        count_ok = count_ok and len(sols) <= 3
        for s in sols:
            if not s.degenerate:
                worst_res = max(worst_res, max(s.residuals))
    res_ok = worst_res < 1e-10
    closed_ok = True
    for (D1, D2), (g12, g21) in [((1, 2), (3, 5)), ((7, 1), (2, 11))]:
        sols = solve_n2_detailed([D1, D2], [[0, g12], [g21, 0]])
        target = (Fraction(D2, g21), Fraction(D1, g12))
        hit = [s for s in sols if abs(s.u1 - target[0]) < 1e-12
               and abs(s.u2 - target[1]) < 1e-12]
        closed_ok = closed_ok and len(hit) == 1
    ok = count_ok and res_ok and closed_ok
    report(7, ok, f"solution counts <= 3: {count_ok}; worst residual "
                  f"{worst_res:.2e} (tol 1e-10); closed form to 1e-12: {closed_ok}")
    assert count_ok and res_ok and closed_ok


# -- criteria 8 and 9: finiteness certificates -----------------------------

def chain_determinants(gamma, chain):
    a1 = steady_matrix([1, 1, 1], gamma, 3)
    return [determinant(m) for m in build_chain(a1, chain)]


def scan_orderings(polys):
    return {ranking: buchberger(polys, ranking=ranking)
            for ranking in permutations(range(3))}


def test_criterion_8_finiteness_example_one():
    """Mixed-strength interaction chain (3 polynomials): zero-dimensional
    under every lex ordering; claimed pure-power exponents {1, 4, 19} under
    some ordering, with documented-discrepancy reporting if none matches."""
    gamma = [[0, 2, 1], [2, 0, 2], [1, 2, 0]]
    dets = chain_determinants(gamma, DEFAULT_CHAIN_N3)
    results = scan_orderings(dets)
    verdict_ok = all(r.zero_dimensional for r in results.values())
    claimed = {1, 4, 19}
    achieved = {rk: sorted(r.pure_power_exponents.values())
                for rk, r in results.items()}
    match = [rk for rk, exps in achieved.items() if set(exps) == claimed]
    ok = verdict_ok and bool(match)
    report(8, ok, f"zero-dimensional under all 6 orderings: {verdict_ok}; "
                  f"claimed exponents {sorted(claimed)} matched by orderings "
                  f"{match or 'none'}; achieved under u1>u2>u3: "
                  f"{achieved[(0, 1, 2)]} (documented discrepancy)")
    assert verdict_ok  # the finiteness verdict itself must hold
    # documented-discrepancy mode: achieved exponents are reported above; the
    # faithful check on the claimed exponents is kept
    assert match, f"achieved exponent sets: {achieved}"


def test_criterion_9_finiteness_example_two():
    """Uniform-strength interaction: the 3-polynomial chain is not
    zero-dimensional, the extended 5-polynomial chain is, both under every
    ordering; claimed exponents {2, 3, 9} with discrepancy reporting."""
    gamma = [[0, 2, 2], [2, 0, 2], [2, 2, 0]]
    short = scan_orderings(chain_determinants(gamma, DEFAULT_CHAIN_N3))
    long_ = scan_orderings(chain_determinants(gamma, EXTENDED_CHAIN_N3))
    short_ok = all(not r.zero_dimensional for r in short.values())
    long_ok = all(r.zero_dimensional for r in long_.values())
    claimed = {2, 3, 9}
    achieved = {rk: sorted(r.pure_power_exponents.values())
                for rk, r in long_.items()}
    match = [rk for rk, exps in achieved.items() if set(exps) == claimed]
    ok = short_ok and long_ok and bool(match)
    report(9, ok, f"3-poly infinite under all orderings: {short_ok}; 5-poly "
                  f"finite under all orderings: {long_ok}; claimed exponents "
                  f"{sorted(claimed)} matched by {match or 'none'}; achieved "
                  f"under u1>u2>u3: {achieved[(0, 1, 2)]} (documented discrepancy)")
    assert short_ok and long_ok  # ordering-invariant verdicts must hold
    assert match, f"achieved exponent sets: {achieved}"


# -- criterion 10: determinism ---------------------------------------------

def test_criterion_10_determinism(tmp_path):
    """Byte-identical outputs across two consecutive CLI runs."""
    from nlad.cli import main
    cfg = {
        "model": {"D": [1.0, 1.0], "gamma": [[0.0, 1.05], [1.05, 0.0]],
                  "p": [1.0, 1.0], "L": 1.0,
                  "kernel": {"kind": "tophat", "alpha": 0.025}},
        "grid": {"M": 128},
        "solver": {"t_max": 60.0},
        "ic": {"kind": "perturbed-homogeneous", "amplitude": 0.05, "seed": 3},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    grb = {"symbolic": {"polys": ["u1^2 - 2 u2", "u1 u2 - 1"]}}
    grb_path = tmp_path / "grb.json"
    grb_path.write_text(json.dumps(grb))
    files = {}
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["simulate", "--config", str(cfg_path), "--out",
                     str(out), "--quiet"]) == 0
        assert main(["groebner", "--config", str(grb_path), "--out",
                     str(out), "--quiet"]) == 0
        files[run] = {f.name: f.read_bytes() for f in out.iterdir()}
    same = files["a"] == files["b"]
    names = sorted(files["a"])
    ok = same and len(names) == 4
    report(10, ok, f"artifacts {names} byte-identical across reruns: {same}")
    assert same
    assert len(names) == 4
