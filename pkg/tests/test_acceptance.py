"""Acceptance criteria, one test each; results are echoed in the terminal summary."""
import math

import numpy as np
import pytest

from conftest import ACCEPTANCE
from singshock.flux import SAMPLE_DATA, analyze
from singshock.inner import RHO, RHO3
from singshock.outer import closed_form_eigenvalues_PL, compactify, compute_gamma1, compute_gamma2, jacobian_at_P
from singshock.outer import transversality_frames
from singshock.pde import GridConfig, fit_spike_growth, run_lf, waves_reach_boundary
from singshock.profile import log_fit, width_halving_factors
from singshock.weak import bump, layer_integrals, pair_1d, pair_2d, separable

import oracles

# C in the eps log(1/eps) bounds: int |u1| dxi = eps int |beta| dsigma <= eps rho3 (T1 + T2)
# and T1 + T2 ~ (12 / rho3^3) log(1/eps)
WEAK_C = 12.0 / RHO3**2
# absolute floor of the sigma-trapezoid pairing quadrature on the native grid
PAIRING_FLOOR = 1e-6


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    assert ok, detail


def test_criterion_01_sample_constants():
    a = analyze(SAMPLE_DATA)
    ok = a.s == 0.0 and abs(a.e0 - 0.432) < 1e-12
    record(1, ok, f"s={a.s!r} e0={a.e0!r}")


def test_criterion_02_iota_suite(table):
    i1_0, i2_0 = table.iota1_at(0.0), table.iota2_at(0.0)
    tail = abs(table.iota1_at(-25.0) - RHO3)
    odd = np.max(np.abs(table.iota1 + table.iota1[::-1]))
    even = np.max(np.abs(table.iota2 - table.iota2[::-1]))
    q = abs(table.iota3_at_0 - oracles.iota3_at_0())
    ok = i1_0 == 0.0 and i2_0 == 1.0 and tail < 1e-8 and odd < 1e-8 and even < 1e-8 and q < 1e-9
    record(2, ok, f"|i1(-25)-rho3|={tail:.1e} odd={odd:.1e} even={even:.1e} |i3(0)-quad|={q:.1e}")


def test_criterion_03_gamma0(analysis, constants, gamma0):
    drop = abs(gamma0.total_w2_drop - analysis.e0)
    bk = gamma0.beta * gamma0.kappa
    k = int(np.argmax(bk))
    peak = abs(bk[k] - constants.omega0)
    where = abs(gamma0.beta[k] - 1.0)
    ok = drop < 1e-8 and peak < 1e-6 and where < 1e-4
    record(3, ok, f"|drop-e0|={drop:.1e} |max bk-omega0|={peak:.1e} |iota1-1| at max={where:.1e}")


def test_criterion_04_linearisation():
    lin = jacobian_at_P("P_L", 0.0)
    err = np.max(np.abs(lin.eigenvalues - np.sort(closed_form_eigenvalues_PL())[::-1]))
    record(4, err < 1e-8, f"eigenvalues {np.round(lin.eigenvalues, 5)} max err={err:.1e}")


def test_criterion_05_heteroclinics(analysis):
    g1, g2 = compute_gamma1(analysis), compute_gamma2(analysis)
    e1 = np.hypot(*(g1.trajectory.y_final[:2] - np.array(compactify(analysis.uL))))
    e2 = np.hypot(*(g2.trajectory.y_final[:2] - np.array(compactify(analysis.uR))))
    h1 = compute_gamma1(analysis, delta_launch=0.5e-7)
    h2 = compute_gamma2(analysis, delta_launch=0.5e-7)
    moved = max(np.max(np.abs(h1.trajectory.y_final - g1.trajectory.y_final)),
                np.max(np.abs(h2.trajectory.y_final - g2.trajectory.y_final)),
                np.max(np.abs(h1.section_point.as_array() - g1.section_point.as_array())),
                np.max(np.abs(h2.section_point.as_array() - g2.section_point.as_array())))
    ok = e1 < 1e-6 and e2 < 1e-6 and moved < 1e-7
    record(5, ok, f"endpoint errors {e1:.1e}, {e2:.1e}; offset halving moves {moved:.1e}")


def test_criterion_06_transversality(analysis, constants, table):
    rep = transversality_frames(analysis, constants, table)
    ok = rep.combined_rank == 5 and rep.intersection_dim == 1
    record(6, ok, f"rank={rep.combined_rank} intersection dim={rep.intersection_dim} "
                  f"min singular value={rep.singular_values.min():.3g}")


def test_criterion_07_profile_scaling(constants, sweep):
    res = max(p.match_residual for p in sweep)
    q2 = np.array([p.epsilon**2 * p.maxima.max_u2 / constants.kappa0**2 for p in sweep])
    q1p = np.array([p.epsilon * p.maxima.max_u1 / constants.omega0 for p in sweep])
    q1m = np.array([-p.epsilon * p.maxima.min_u1 / constants.omega0 for p in sweep])
    final = max(abs(q2[-1] - 1), abs(q1p[-1] - 1), abs(q1m[-1] - 1))
    mono = all(np.all(np.diff(np.abs(q[-5:] - 1)) < 0) for q in (q2, q1p, q1m))
    ok = res < 1e-8 and final < 0.1 and mono
    record(7, ok, f"eps={sweep[-1].epsilon:.3g} max residual={res:.1e} eps^2 max u2/k0^2={q2[-1]:.5f} "
                  f"eps max u1/w0={q1p[-1]:.5f} -eps min u1/w0={q1m[-1]:.5f} monotone={mono}")


def test_criterion_08_widths_and_times(sweep):
    eps = np.array([p.epsilon for p in sweep])
    T = np.array([p.T_layer for p in sweep])
    L = np.log(1.0 / eps)
    ratio = T / L
    c, C = ratio.min(), ratio.max()
    bound = 12.0 / RHO3**3
    half = len(eps) // 2
    m1, _ = log_fit(L[1:half + 1], T[1:half + 1])
    m2, _ = log_fit(L[half:], T[half:])
    stable = abs(m1 / m2 - 1.0) < 0.1
    f = width_halving_factors(eps, np.array([p.xi_width for p in sweep]))
    widths_ok = len(f) > 0 and bool(np.all(np.abs(f - 4.0) <= 0.8))
    ok = c > 0 and C <= bound and stable and widths_ok
    record(8, ok, f"T/log(1/eps) in [{c:.3f}, {C:.3f}] (<= {bound:.3f}); fitted slopes {m1:.3f}, {m2:.3f}; "
                  f"width halving factors {f.min():.3f}..{f.max():.3f}")


def _nonincreasing(d, floor=PAIRING_FLOOR, jitter=0.2):
    return all(b <= a * (1 + jitter) or b < floor for a, b in zip(d, d[1:]))


def test_criterion_09_weak_limits(analysis, sweep):
    sols = [p for p in sweep if all(math.isfinite(v) for v in p.layer)]
    e0 = analysis.e0
    r2, r1 = [], []
    for p in sols:
        li = layer_integrals(p, analysis)
        L = p.epsilon * math.log(1 / p.epsilon)
        r2.append(abs(li.I_u2 - e0) / L)
        r1.append(li.I_abs_u1 / L)
    trend = max(r2) <= WEAK_C and max(r1) <= WEAK_C
    psis = [bump(analysis.s, 0.5), bump(analysis.s + 0.1, 1.0), bump(analysis.s - 0.2, 0.7, 2.0)]
    d1 = [[pair_1d(p, psi, analysis).discrepancy for p in sols] for psi in psis]
    phi = separable(bump(0.0, 1.5), bump(1.5, 0.5))
    d2 = [pair_2d(p, phi, analysis).discrepancy for p in sols]
    dec = all(_nonincreasing(d) for d in d1) and _nonincreasing(d2)
    small = all(d[-1] < 0.02 * e0 for d in d1) and d2[-1] < 0.02 * e0
    ok = trend and dec and small
    record(9, ok, f"|I_u2-e0|/(eps log) max={max(r2):.2f}, int|u1|/(eps log) max={max(r1):.2f} (C={WEAK_C:.2f}); "
                  f"final pair_1d {[f'{d[-1]:.1e}' for d in d1]} pair_2d {d2[-1]:.1e}; decreasing={dec}")


def test_criterion_10_surface_invariance(sweep):
    worst = max(p.surface_deviation for p in sweep)
    record(10, worst < 1e-6, f"max |r kappa/eps - 1| over accepted steps = {worst:.1e}")


@pytest.mark.slow
def test_criterion_11_lax_friedrichs():
    cfg = GridConfig(cfl=0.05, steps=50_000, snapshot_every=500, dt_mode="fixed")
    snaps = run_lf(SAMPLE_DATA, cfg)
    at5k = next(sn for sn in snaps if sn.step == 5000)
    growth = snaps[-1].max_u2 / at5k.max_u2
    slope, r2 = fit_spike_growth(snaps)
    inside = not waves_reach_boundary(snaps, SAMPLE_DATA)
    ok = growth > 5 and abs(slope / 0.432 - 1) < 0.2 and r2 > 0.98
    record(11, ok, f"max u2 growth 5k->50k = {growth:.2f}x, mass slope={slope:.5f}, r^2={r2:.6f}, "
                   f"boundary untouched={inside}")
