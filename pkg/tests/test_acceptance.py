"""End-to-end acceptance battery.

Each test covers one numbered acceptance check and prints a single
PASS/FAIL line with the measured quantities before asserting, so a red
run still reports every measurement.  Expensive flow runs are shared
through module-scoped fixtures; wall-clock budgets are asserted only on
the jitted backend, the pure-numpy fallback is correctness-only.
"""

import time

import numpy as np
import pytest

import orlicz_flow.kernels as kernels
from orlicz_flow import (
    FlowConfig,
    ball_body,
    build_grid,
    dissipation,
    dual_flow_residual,
    ellipse_body,
    euler_pair,
    jac_normal_to_ray,
    jac_ray_to_normal,
    offset_ball_body,
    orlicz_density,
    polar_body,
    power_phi,
    principal_radii,
    radial_norm_field,
    radial_speed_check,
    reciprocal_phi,
    run,
    step,
    support_bounds_from_phi,
    total_integral_curvature,
)

REC = reciprocal_phi()
TIMED = kernels.BACKEND == "numba"


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {num:02d}: {detail}")


def _logistic_radius(t: float) -> float:
    # radius ODE c' = c - c^2 from c(0) = 2 has the closed form below,
    # cross-checked against an adaptive integrator in tests/_oracles.py
    return 1.0 / (1.0 - 0.5 * np.exp(-t))


@pytest.fixture(scope="module")
def g_harmonic(grid256):
    return 1.0 + 0.2 * np.cos(grid256.theta)


@pytest.fixture(scope="module")
def ball2_run(grid256, warm_kernels):
    cfg = FlowConfig(dt_init=1e-4, tol_speed=1e-9, tol_residual=1e-9, max_steps=300_000)
    ones = np.ones(grid256.num_nodes)
    t0 = time.perf_counter()
    trace = run(ball_body(grid256, 2.0), ones, REC, cfg)
    return trace, time.perf_counter() - t0


@pytest.fixture(scope="module")
def ellipse256_run(grid256, g_harmonic, warm_kernels):
    cfg = FlowConfig(dt_init=2e-4, tol_speed=1e-4, tol_residual=1e-4, max_steps=300_000)
    t0 = time.perf_counter()
    trace = run(ellipse_body(grid256, 1.5, 0.7), g_harmonic, REC, cfg)
    return trace, time.perf_counter() - t0


@pytest.fixture(scope="module")
def ellipse512_run(warm_kernels):
    grid = build_grid(2, 512)
    g = 1.0 + 0.2 * np.cos(grid.theta)
    cfg = FlowConfig(dt_init=6e-5, tol_speed=1e-5, tol_residual=1e-5, max_steps=600_000)
    t0 = time.perf_counter()
    trace = run(ellipse_body(grid, 1.5, 0.7), g, REC, cfg)
    return trace, time.perf_counter() - t0


@pytest.fixture(scope="module")
def offset256_run(grid256, g_harmonic, warm_kernels):
    cfg = FlowConfig(dt_init=2e-4, tol_speed=1e-4, tol_residual=1e-4, max_steps=300_000)
    body = offset_ball_body(grid256, 1.0, (0.2, 0.1))
    return run(body, g_harmonic, REC, cfg)


def test_criterion_01_stationary_ball(grid256, warm_kernels):
    ones = np.ones(grid256.num_nodes)
    worst = 0.0
    t0 = time.perf_counter()
    for mode in ("radial", "reciprocal_support"):
        cfg = FlowConfig(
            mode=mode, dt_init=1e-3, tol_speed=1e-30, tol_residual=1e-30, max_steps=200
        )
        state = euler_pair(ball_body(grid256, 1.0), ones, REC, mode=mode, dt=1e-6)[0]
        for _ in range(100):
            state = step(state, ones, REC, cfg)
        worst = max(worst, float(np.abs(state.body.h.values - 1.0).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and (not TIMED or elapsed < 1.0)
    _report(1, ok, f"unit ball drift {worst:.3e} after 100 steps, {elapsed:.2f}s")
    assert worst <= 1e-12
    if TIMED:
        assert elapsed < 1.0


def test_criterion_02_ball_radius_ode(ball2_run):
    trace, elapsed = ball2_run
    ts = np.array([s.t for s in trace.states])
    worst_mid = 0.0
    for target in (1.0, 2.0, 5.0):
        k = int(np.argmin(np.abs(ts - target)))
        err = float(np.abs(trace.states[k].body.h.values - _logistic_radius(ts[k])).max())
        worst_mid = max(worst_mid, err)
    k20 = int(np.argmin(np.abs(ts - 20.0)))
    end_err = float(np.abs(trace.states[k20].body.h.values - 1.0).max())
    ok = (
        trace.termination == "converged"
        and ts[k20] >= 19.99
        and worst_mid <= 1e-4
        and end_err <= 1e-6
        and (not TIMED or elapsed < 5.0)
    )
    _report(
        2,
        ok,
        f"radius vs ODE {worst_mid:.3e} (t=1,2,5), |h-1|={end_err:.3e} at t=20, "
        f"{elapsed:.2f}s",
    )
    assert trace.termination == "converged"
    assert ts[k20] >= 19.99
    assert worst_mid <= 1e-4
    assert end_err <= 1e-6
    if TIMED:
        assert elapsed < 5.0


def test_criterion_03_lyapunov(grid256, ellipse256_run, warm_kernels):
    trace, _ = ellipse256_run
    df = np.diff(trace.f_history)
    violations = int(np.sum(df > 1e-9 * (1.0 + np.abs(trace.f_history[:-1]))))

    ones = np.ones(grid256.num_nodes)
    cfg = FlowConfig(dt_init=1e-4, tol_speed=1e-12, tol_residual=1e-12, max_steps=2000)
    short = run(ball_body(grid256, 2.0), ones, REC, cfg, trace_stride=1)
    d0 = short.states[0].dissipation
    closed_err = abs(d0 + np.pi)
    f = short.f_history
    t = short.t_history
    worst_id = 0.0
    for k in range(short.accepted_steps):
        dt = t[k + 1] - t[k]
        gap = abs((f[k + 1] - f[k]) / dt - short.states[k].dissipation)
        worst_id = max(worst_id, gap - max(1e-3, 10.0 * dt))
    ok = violations == 0 and closed_err <= 1e-12 and worst_id <= 0.0
    _report(
        3,
        ok,
        f"{violations} monotonicity violations, dissipation at t=0 off closed "
        f"form by {closed_err:.3e}, identity margin {worst_id:.3e}",
    )
    assert violations == 0
    assert closed_err <= 1e-12
    assert worst_id <= 0.0


def test_criterion_04_residual_refinement(ellipse256_run, ellipse512_run):
    trace256, secs256 = ellipse256_run
    trace512, secs512 = ellipse512_run
    r256 = trace256.states[-1].residual_max
    r512 = trace512.states[-1].residual_max
    ratio = r256 / r512
    ok = (
        trace256.termination == "converged"
        and trace512.termination == "converged"
        and r256 <= 1e-4
        and ratio >= 3.0
        and (not TIMED or (secs256 < 60.0 and secs512 < 60.0))
    )
    _report(
        4,
        ok,
        f"residual {r256:.3e} at 256 ({secs256:.2f}s), {r512:.3e} at 512 "
        f"({secs512:.2f}s), ratio {ratio:.1f}",
    )
    assert trace256.termination == "converged"
    assert trace512.termination == "converged"
    assert r256 <= 1e-4
    assert ratio >= 3.0
    if TIMED:
        assert secs256 < 60.0
        assert secs512 < 60.0


def test_criterion_05_a_priori_bounds(ball2_run, ellipse256_run, g_harmonic):
    lo_b, hi_b = support_bounds_from_phi(REC, 1.0, 1.0)
    lo_e, hi_e = support_bounds_from_phi(REC, float(g_harmonic.min()), float(g_harmonic.max()))
    checks = []
    for (trace, _), (lo, hi), h0 in (
        (ball2_run, (lo_b, hi_b), (2.0, 2.0)),
        (ellipse256_run, (lo_e, hi_e), (0.7, 1.5)),
    ):
        ex = trace.extrema
        checks.append(ex.min_h >= min(lo, h0[0]) - 1e-6)
        checks.append(ex.max_h <= max(hi, h0[1]) + 1e-6)
        checks.append(ex.max_grad_h <= ex.max_r + 1e-6)
    ok = all(checks)
    be = ball2_run[0].extrema
    ee = ellipse256_run[0].extrema
    _report(
        5,
        ok,
        f"ball h in [{be.min_h:.4f},{be.max_h:.4f}] vs [{min(lo_b, 2.0):.4f},"
        f"{max(hi_b, 2.0):.4f}]; ellipse h in [{ee.min_h:.4f},{ee.max_h:.4f}] vs "
        f"[{min(lo_e, 0.7):.4f},{max(hi_e, 1.5):.4f}]; gradient bounded",
    )
    assert all(checks)


def test_criterion_06_measure_identities(grid256):
    body = ellipse_body(grid256, 1.5, 0.7)
    recip = float(
        np.abs(jac_ray_to_normal(body).values * jac_normal_to_ray(body).values - 1.0).max()
    )
    total_err = abs(total_integral_curvature(body) - 2.0 * np.pi)
    bip = float(np.abs(polar_body(polar_body(body)).h.values - body.h.values).max())
    ok = recip <= 1e-10 and total_err <= 1e-3 and bip <= 1e-3
    _report(
        6,
        ok,
        f"jacobian reciprocity {recip:.3e}, total curvature defect {total_err:.4e}, "
        f"bipolar gap {bip:.3e}",
    )
    assert recip <= 1e-10
    assert bip <= 1e-3
    assert total_err <= 1e-3


def test_criterion_07_kinematic_checks(grid256, warm_kernels):
    ones = np.ones(grid256.num_nodes)
    state_a, state_b = euler_pair(ellipse_body(grid256, 1.5, 0.7), ones, REC, dt=1e-4)
    speed_gap = radial_speed_check(state_a, state_b)
    dual_gap = dual_flow_residual(state_a, state_b, ones, REC)
    ok = speed_gap <= 5e-3 and dual_gap <= 1e-2
    _report(7, ok, f"radial speed gap {speed_gap:.3e}, dual residual {dual_gap:.3e}")
    assert speed_gap <= 5e-3
    assert dual_gap <= 1e-2


def test_criterion_08_uniqueness(ellipse256_run, offset256_run):
    trace_e, _ = ellipse256_run
    dist = float(
        np.abs(
            trace_e.states[-1].body.h.values - offset256_run.states[-1].body.h.values
        ).max()
    )
    ok = offset256_run.termination == "converged" and dist <= 1e-3
    _report(8, ok, f"sup distance between flow limits {dist:.3e}")
    assert offset256_run.termination == "converged"
    assert dist <= 1e-3


def test_criterion_09_power_density_identity(grid256):
    body = ellipse_body(grid256, 1.5, 0.7)
    radii = principal_radii(body)
    r = radial_norm_field(body).values
    h = body.h.values
    worst = 0.0
    for p in (-1.0, -2.0):
        lhs = orlicz_density(body, power_phi(p)).values
        rhs = h ** (1.0 - p) * radii[:, 0] / r**2
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    ok = worst <= 1e-12
    _report(9, ok, f"density identity residual {worst:.3e} for p=-1,-2")
    assert worst <= 1e-12


def test_criterion_10_rotation_equivariance(grid256, g_harmonic, warm_kernels):
    shift = 16
    g_rolled = np.roll(g_harmonic, shift)
    cfg = FlowConfig(dt_init=2e-4, tol_speed=1e-4, tol_residual=1e-4, max_steps=300_000)
    trace_a = run(ball_body(grid256, 1.0), g_harmonic, REC, cfg)
    trace_b = run(ball_body(grid256, 1.0), g_rolled, REC, cfg)
    gap = float(
        np.abs(
            np.roll(trace_a.states[-1].body.h.values, shift)
            - trace_b.states[-1].body.h.values
        ).max()
    )
    ok = trace_a.termination == "converged" and gap <= 1e-6
    _report(10, ok, f"rolled-density limit differs by {gap:.3e}")
    assert trace_a.termination == "converged"
    assert trace_b.termination == "converged"
    assert gap <= 1e-6


def test_criterion_11_sphere_flow(grid3_64, warm_kernels):
    ones = np.ones(grid3_64.num_nodes)
    cfg = FlowConfig(dt_init=1e-3, tol_speed=1e-3, tol_residual=1e-3, max_steps=20_000)
    t0 = time.perf_counter()
    trace = run(ball_body(grid3_64, 2.0), ones, REC, cfg)
    elapsed = time.perf_counter() - t0
    gap = float(np.abs(trace.states[-1].body.h.values - 1.0).max())

    state = euler_pair(ball_body(grid3_64, 1.0), ones, REC, dt=1e-6)[0]
    cfg_stat = FlowConfig(dt_init=1e-3, tol_speed=1e-30, tol_residual=1e-30, max_steps=200)
    for _ in range(100):
        state = step(state, ones, REC, cfg_stat)
    drift = float(np.abs(state.body.h.values - 1.0).max())
    ok = (
        trace.termination == "converged"
        and gap <= 1e-2
        and drift <= 1e-10
        and (not TIMED or elapsed < 600.0)
    )
    _report(
        11,
        ok,
        f"sphere ball(2) gap {gap:.3e} in {elapsed:.1f}s, stationary drift {drift:.3e}",
    )
    assert trace.termination == "converged"
    assert gap <= 1e-2
    assert drift <= 1e-10
    if TIMED:
        assert elapsed < 600.0
