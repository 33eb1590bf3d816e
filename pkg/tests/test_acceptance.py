"""Acceptance criteria AC1-AC12, each reported as one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from _acceptance_log import report
from mnlab.continuation import blowup_study, metasolution_sequence
from mnlab.core import PI2, ProblemParams, Symmetry
from mnlab.solvers import (FIXED_POINT_TOL, SHOOT_TOL, connection_data, find_all_positive,
                           matching_to_solution, reflection_pairs, residual_scale, solve_matching,
                           solve_symmetric, symmetric_data)
from mnlab.timemaps import (phi, phi_dtheta, time_L_hyperbolic, time_L_hyperbolic_quadrature,
                            time_N_from_line, time_N_full)

GRID_LAM = [-5.0, -1.0, 0.0, 3.0, 9.0]
GRID_H = [0.2, 0.5, 0.8]
LADDER = [-1.0, -2.0, -5.0, -10.0, -20.0, -50.0]

def verified(sol) -> bool:
    sc = residual_scale(sol.r_max)
    return sol.shoot_residual < SHOOT_TOL * sc and sol.fixed_point_residual < FIXED_POINT_TOL * sc


def test_ac01_phi_anchor():
    t = time.perf_counter()
    vals = np.array([phi(300.0, float(th), 6.0, 3.0) for th in np.linspace(0.0, 0.05, 501)])
    dt = time.perf_counter() - t
    lo, hi = float(vals.min()), float(vals.max())
    ok = 0.15106 <= lo and hi <= 0.15132 and dt < 10.0
    report("AC1", ok, f"phi(300, [0, 0.05]) in [{lo:.6f}, {hi:.6f}], target [0.15106, 0.15132], {dt:.2f}s")
    assert ok


def test_ac02_small_amplitude_limits():
    errs = [abs(phi(1e-10, th, 6.0, 3.0) - (math.pi - 2 * th)) for th in (0.0, 0.3, 1.0)]
    errs_t = [abs(time_N_full(lam, 3.0, 1e-8) - math.pi / (2 * math.sqrt(lam))) for lam in (1.0, 4.0)]
    lam, h = 4.0, 0.3
    theta = 0.5 * h * math.sqrt(lam)
    err_l = abs(time_N_from_line(lam, 3.0, 1e-9, theta) - 0.5 * (math.pi / math.sqrt(lam) - h))
    ok = max(errs) < 1e-4 and max(errs_t) < 1e-4 and err_l < 1e-5
    report("AC2", ok, f"phi err {max(errs):.1e}, T_N err {max(errs_t):.1e}, gate-limit err {err_l:.1e}")
    assert ok


def test_ac03_derivative_anchor():
    worst, exact = 0.0, True
    for R in (20.0, 300.0):
        exact &= phi_dtheta(R, math.pi / 2, 6.0, 3.0) == -2.0
        th, d = math.pi / 2 - 1e-4, 1e-6
        fd = (phi(R, th + d, 6.0, 3.0) - phi(R, th - d, 6.0, 3.0)) / (2 * d)
        worst = max(worst, abs(fd - phi_dtheta(R, th, 6.0, 3.0)))
    ok = exact and worst < 1e-3
    report("AC3", ok, f"exact -2 at pi/2: {exact}; finite-difference gap {worst:.1e}")
    assert ok


def test_ac04_linear_duality():
    rng = np.random.default_rng(20240604)
    worst = 0.0
    for _ in range(20):
        lam = -rng.uniform(0.01, 30.0)
        u_plus = rng.uniform(0.01, 10.0)
        u_l = u_plus * rng.uniform(1.0001, 20.0)
        worst = max(worst, abs(time_L_hyperbolic(lam, u_plus, u_l)
                               - time_L_hyperbolic_quadrature(lam, u_plus, u_l)))
    ok = worst < 1e-10
    report("AC4", ok, f"max |closed form - quadrature| over 20 triples = {worst:.1e}")
    assert ok


@pytest.fixture(scope="module")
def grid_results():
    t = time.perf_counter()
    out = {}
    for lam in GRID_LAM:
        for h in GRID_H:
            pr = ProblemParams(lam, 3.0, h)
            out[(lam, h)] = (solve_symmetric(pr), find_all_positive(pr))
    return out, time.perf_counter() - t


def test_ac05_dual_method(grid_results):
    res, dt = grid_results
    gap, rs, rf, ok = 0.0, 0.0, 0.0, dt < 60.0
    for (lam, h), (sym, scan) in res.items():
        ss = [s for s in scan if s.symmetry is Symmetry.SYMMETRIC]
        if not ss:
            ok = False
            continue
        gap = max(gap, abs(sym.v0 - ss[0].v0))
        rs = max(rs, sym.shoot_residual, ss[0].shoot_residual)
        rf = max(rf, sym.fixed_point_residual, ss[0].fixed_point_residual)
    ok = ok and gap < 1e-7 and rs < 1e-7 and rf < 1e-6
    report("AC5", ok, f"15 points: v0 gap {gap:.1e}, shoot {rs:.1e}, fixed point {rf:.1e}, {dt:.1f}s")
    assert ok


def test_ac06_uniqueness(grid_results):
    res, _ = grid_results
    counts = {k: sum(s.symmetry is Symmetry.SYMMETRIC for s in scan) for k, (_, scan) in res.items()}
    bad = {k: c for k, c in counts.items() if c != 1}
    ok = not bad
    report("AC6", ok, "one symmetric solution at every grid point" if ok else f"violations {bad}")
    assert ok


@pytest.fixture(scope="module")
def ladder_results():
    return {lam: find_all_positive(ProblemParams(lam, 3.0, 0.5)) for lam in LADDER}


@pytest.fixture(scope="module")
def matching_results():
    m = solve_matching(6.0, 3.0, 300.0)
    return m, matching_to_solution(m)


@pytest.fixture(scope="module")
def population(grid_results, ladder_results, matching_results):
    """Every solution produced by the criteria, for the global checks."""
    out = []
    for sym, scan in grid_results[0].values():
        out.append(sym)
        out.extend(scan)
    for sols in ladder_results.values():
        out.extend(sols)
    out.append(matching_results[1])
    return out


def test_ac07_multiplicity_negative(ladder_results):
    good = {}
    for lam, sols in ladder_results.items():
        asym = [i for i, s in enumerate(sols) if s.symmetry is not Symmetry.SYMMETRIC]
        paired = {i for pair in reflection_pairs(sols, 1e-7) for i in pair}
        good[lam] = len(sols) >= 3 and all(verified(s) for s in sols) and set(asym) <= paired
    # largest ladder value below which (inclusive) every rung has the pair
    star = None
    for lam in sorted(LADDER, reverse=True):
        if all(good[m] for m in LADDER if m <= lam):
            star = lam
            break
    ok = star is not None
    report("AC7", ok, f"lambda* = {star} on ladder {LADDER} (rungs: {good})")
    assert ok


def test_ac08_multiplicity_positive(matching_results):
    m, sol = matching_results
    hs = [m.h] + [solve_matching(6.0, 3.0, R, reconstruct=False).h for R in (3000.0, 30000.0)]
    ok = (abs(m.theta0 - m.theta1) > 1e-3 and m.matching_residual < 1e-9
          and sol.shoot_residual < 1e-6 and 0.9 < m.h < 1.0
          and hs[0] < hs[1] < hs[2] < 1.0)
    report("AC8", ok, f"theta=({m.theta0:.6f}, {m.theta1:.6f}), matching {m.matching_residual:.1e}, "
                      f"shoot {sol.shoot_residual:.1e}, h(R)={[round(h, 6) for h in hs]}")
    assert ok


def test_ac09_blowup():
    parts, ok = [], True
    for lam in (0.0, -5.0):
        t = blowup_study(lam, 3.0, [0.5, 0.9, 0.99, 0.999], [0.5])
        col = t.column(0.5)
        good = t.failure is None and len(col) == 4 and bool(np.all(np.diff(col) > 0)) and col[-1] > 10 * col[0]
        ok &= good
        parts.append(f"lambda={lam:g}: u(0.5)={[float(f'{c:.5g}') for c in col]}")
    report("AC9", ok, "; ".join(parts))
    assert ok


def test_ac10_metasolution():
    rows = metasolution_sequence(1.0, 3.0, 8)
    lam = [r.lam for r in rows]
    h = [r.h for r in rows]
    err = [r.sup_error for r in rows]
    ok = (len(rows) == 8
          and all(a < b for a, b in zip(lam, lam[1:])) and lam[-1] < PI2
          and all(a < b for a, b in zip(h, h[1:])) and h[-1] < 1.0
          and all(abs(r.r_max - 1.0) < 1e-8 for r in rows)
          and all(a > b for a, b in zip(err, err[1:])) and err[-1] < 0.05)
    report("AC10", ok, f"{len(rows)} rows, pi^2 - lambda_8 = {PI2 - lam[-1]:.2e}, "
                       f"1 - h_8 = {1 - h[-1]:.3g}, final sup error {err[-1]:.2e}")
    assert ok


def test_ac11_lower_bounds(population):
    worst, ok, p = math.inf, True, 3.0
    e = 1.0 / (p - 1.0)
    for lam in LADDER:
        for h in GRID_H:
            c = connection_data(lam, p, h)
            bound = (0.5 * (p + 1.0)) ** e * (-lam) ** e
            ok &= c.u0 > c.u1 >= bound
            worst = min(worst, c.u1 / bound)
            ok &= symmetric_data(ProblemParams(lam, p, h)).amplitude >= (-lam) ** e
    neg = [s for s in population if s.params.lam < 0]
    ok &= bool(neg) and all(s.r_max >= (-s.params.lam) ** (1.0 / (s.params.p - 1.0)) for s in neg)
    report("AC11", ok, f"{len(neg)} computed solutions with lambda<0 above the sup-norm bound; "
                       f"min u1/bound over constructions {worst:.4f}")
    assert ok


def _sampled_drift(sol) -> float:
    """Relative energy drift recomputed from the stored samples of each arc."""
    lam, p = sol.params.lam, sol.params.p
    worst = 0.0
    for arc in sol.arcs:
        kin, pot = 0.5 * arc.v ** 2, 0.5 * lam * arc.u ** 2
        if arc.regime.value == "nonlinear":
            pot = pot + np.abs(arc.u) ** (p + 1) / (p + 1)
        e = kin + pot
        scale = max(float(np.max(np.abs(kin))), float(np.max(np.abs(pot))), 1e-300)
        worst = max(worst, float(np.max(np.abs(e - e[0]))) / scale)
    return worst


def test_ac12_energy(population):
    drift = max(s.energy_drift for s in population)
    sampled = max(_sampled_drift(s) for s in population)
    ok = drift < 1e-9 and sampled < 1e-9
    report("AC12", ok, f"max relative energy drift over {len(population)} trajectories = {drift:.1e} "
                       f"(recomputed from samples: {sampled:.1e})")
    assert ok
