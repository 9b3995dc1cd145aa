"""Explicit time integration of the support-function curvature flow.

The flow moves a convex body by dh/dt = h - g r^n K / phi(a), where K is
the Gauss curvature, r the boundary distance from the origin, and a is
either r (mode ``radial``) or 1/h (mode ``reciprocal_support``).  Its
stationary points solve the prescribed-density equation
h phi(a) det(b) / r^n = g pointwise on the grid.

The integrator is explicit Euler with two safeguards: the per-step
change is capped at a fraction of min h, and a step is rolled back and
retried with a smaller dt whenever it loses discrete convexity or
increases the functional

    F = integral [ log h - varphi(r) h det(b) / (r^n g) ] dx

by more than 1e-9 (1 + |F|).  F decreases along the exact flow, so the
rollback keeps the discrete trajectory on the same monotone track and
doubles as a stability guard for the explicit scheme.

Hot loops run through the backend kernels for power-family weights; any
other weight takes a pure-numpy reference path.  The reference evaluator
is also the implementation behind the public pointwise operations, which
keeps them backend-independent and lets tests compare the two routes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .convex_geometry import (
    ConvexBody,
    polar_body,
    radial_eval,
    radial_gauss_map,
    radial_norm_field,
    reverse_radial_gauss,
)
from .errors import (
    ConfigError,
    FlowFailure,
    GridMismatchError,
    InvalidBodyError,
    PhiModelError,
    UnsupportedDimensionError,
)
from .orlicz_model import PhiModel, check_solvability, varphi
from .sphere_grid import (
    DensityField,
    ScalarField,
    SphereGrid,
    gradient_components,
    hessian_components,
    integrate,
)

__all__ = [
    "FlowConfig",
    "StateBounds",
    "FlowState",
    "TraceExtrema",
    "FlowTrace",
    "flow_speed",
    "ma_residual",
    "functional_F",
    "functional_F_direct",
    "dissipation",
    "euler_pair",
    "step",
    "run",
    "radial_speed_check",
    "dual_flow_residual",
    "support_bounds_from_phi",
    "write_trace_csv",
    "write_plot_series",
]

_MODES = ("radial", "reciprocal_support")
_LYAPUNOV_SLACK = 1e-9


@dataclass(frozen=True)
class FlowConfig:
    mode: str = "radial"
    dt_init: float = 1e-4
    dt_min: float = 1e-12
    shrink_factor: float = 0.5
    step_cap: float = 0.05
    tol_speed: float = 1e-6
    tol_residual: float = 1e-6
    max_steps: int = 500_000

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if not 0.0 < self.dt_min < self.dt_init:
            raise ConfigError("need 0 < dt_min < dt_init")
        if not 0.0 < self.shrink_factor < 1.0:
            raise ConfigError("shrink_factor must lie in (0, 1)")
        if not 0.0 < self.step_cap < 0.5:
            raise ConfigError("step_cap must lie in (0, 0.5)")
        if self.tol_speed <= 0.0 or self.tol_residual <= 0.0:
            raise ConfigError("tolerances must be positive")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")


@dataclass(frozen=True)
class StateBounds:
    min_h: float
    max_h: float
    max_grad_h: float
    min_K: float
    max_K: float
    min_radius: float
    max_radius: float


@dataclass(frozen=True)
class FlowState:
    t: float
    body: ConvexBody
    F: float
    dissipation: float
    residual_max: float
    bounds: StateBounds
    step_index: int = 0
    dt: float = 0.0


@dataclass
class TraceExtrema:
    """Running extrema over every accepted step of a run."""

    min_h: float = math.inf
    max_h: float = -math.inf
    max_grad_h: float = 0.0
    min_K: float = math.inf
    max_K: float = -math.inf
    min_radius: float = math.inf
    max_radius: float = -math.inf
    min_r: float = math.inf
    max_r: float = -math.inf

    @staticmethod
    def from_stats_rows(rows: np.ndarray) -> "TraceExtrema":
        lo = rows.min(axis=0)
        hi = rows.max(axis=0)
        return TraceExtrema(
            min_h=lo[kernels.STAT_MIN_H],
            max_h=hi[kernels.STAT_MAX_H],
            max_grad_h=hi[kernels.STAT_MAX_GRAD],
            min_K=lo[kernels.STAT_MIN_K],
            max_K=hi[kernels.STAT_MAX_K],
            min_radius=lo[kernels.STAT_MIN_RADIUS],
            max_radius=hi[kernels.STAT_MAX_RADIUS],
            min_r=lo[kernels.STAT_MIN_R],
            max_r=hi[kernels.STAT_MAX_R],
        )


@dataclass(frozen=True)
class FlowTrace:
    states: list
    termination: str
    t_history: np.ndarray
    f_history: np.ndarray
    residual_history: np.ndarray
    extrema: TraceExtrema
    accepted_steps: int
    rejected_steps: int


def _g_values(grid: SphereGrid, g) -> np.ndarray:
    if isinstance(g, ScalarField):
        if g.grid != grid:
            raise GridMismatchError("density g lives on a different grid")
        field = g if isinstance(g, DensityField) else DensityField(grid, g.values)
    else:
        field = DensityField(grid, np.asarray(g, dtype=float))
    return np.ascontiguousarray(field.values)


# ---------------------------------------------------------------------------
# evaluation: one (grid, g, phi, mode) problem
# ---------------------------------------------------------------------------


class _Evaluator:
    def __init__(self, grid: SphereGrid, g_vals: np.ndarray, phi: PhiModel, mode: str):
        if mode not in _MODES:
            raise ConfigError(f"mode must be one of {_MODES}, got {mode!r}")
        self.grid = grid
        self.g = g_vals
        self.phi = phi
        self.reciprocal = mode == "reciprocal_support"
        # the kernels hard-code the power family with base point 1
        use_kernels = phi.power_exponent is not None and phi.primitive_base == 1.0
        self.p = float(phi.power_exponent) if use_kernels else None

    def eval(self, h: np.ndarray):
        """Hot path: jitted kernels for power weights, reference otherwise."""
        if self.p is None:
            return _pack_reference(self.grid, h, self.g, self.phi, self.reciprocal)
        grid = self.grid
        if grid.dim == 2:
            return kernels.step_eval_n2(
                h, self.g, grid.weights, grid.spacing[0], self.p, self.reciprocal
            )
        m, l = grid.shape
        return kernels.step_eval_n3(
            h, self.g, grid.weights, m, l, grid.lat,
            grid.spacing[0], grid.spacing[1], self.p, self.reciprocal,
        )


def _reference_fields(grid: SphereGrid, h: np.ndarray):
    """Geometry fields (grad_sq, r, det, eig_lo, eig_hi) via the grid ops."""
    comps = gradient_components(grid, h)
    hess = hessian_components(grid, h)
    grad_sq = np.zeros_like(h)
    for c in comps:
        grad_sq += c * c
    r = np.sqrt(h * h + grad_sq)
    if grid.dim == 2:
        b = hess[0] + h
        return grad_sq, r, b, b, b
    b11 = hess[0] + h
    b12 = hess[1]
    b22 = hess[2] + h
    mid = 0.5 * (b11 + b22)
    disc = np.sqrt(np.maximum(0.25 * (b11 - b22) ** 2 + b12 * b12, 0.0))
    return grad_sq, r, b11 * b22 - b12 * b12, mid - disc, mid + disc


@dataclass(frozen=True)
class _ReferenceEval:
    ok: bool
    speed: np.ndarray
    residual: np.ndarray | None
    F: float
    dissipation: float
    grad_sq: np.ndarray | None
    r: np.ndarray | None
    det: np.ndarray | None
    eig_lo: np.ndarray | None
    eig_hi: np.ndarray | None
    min_h: float
    min_eig: float


def _reference_eval(grid, h, g_vals, phi, reciprocal: bool) -> _ReferenceEval:
    min_h = float(h.min())
    bad = _ReferenceEval(
        ok=False, speed=np.zeros_like(h), residual=None, F=math.nan,
        dissipation=math.nan, grad_sq=None, r=None, det=None, eig_lo=None,
        eig_hi=None, min_h=min_h, min_eig=math.nan,
    )
    if not np.all(np.isfinite(h)) or min_h <= 0.0:
        return bad
    grad_sq, r, det, eig_lo, eig_hi = _reference_fields(grid, h)
    min_eig = float(eig_lo.min())
    if min_eig <= 0.0:
        return _ReferenceEval(
            ok=False, speed=np.zeros_like(h), residual=None, F=math.nan,
            dissipation=math.nan, grad_sq=None, r=None, det=None, eig_lo=None,
            eig_hi=None, min_h=min_h, min_eig=min_eig,
        )
    n = grid.dim
    rn = r**n
    phi_a = np.asarray(phi.eval(1.0 / h if reciprocal else r), dtype=float)
    with np.errstate(all="ignore"):
        speed = h - g_vals * rn / (det * phi_a)
        residual = h * phi_a * det / rn - g_vals
        vphi = varphi(phi, r)
        f_integrand = np.log(h) - vphi * h * det / (rn * g_vals)
        f_val = integrate(grid, f_integrand)
        d_integrand = speed * speed * phi_a * det / (g_vals * h * rn)
        d_val = -integrate(grid, d_integrand)
    return _ReferenceEval(
        ok=True, speed=speed, residual=residual, F=f_val, dissipation=d_val,
        grad_sq=grad_sq, r=r, det=det, eig_lo=eig_lo, eig_hi=eig_hi,
        min_h=min_h, min_eig=min_eig,
    )


def _pack_reference(grid, h, g_vals, phi, reciprocal: bool):
    """Reference eval shaped like the kernels' (speed, stats) contract."""
    fe = _reference_eval(grid, h, g_vals, phi, reciprocal)
    stats = np.full(kernels.STAT_LEN, math.nan)
    stats[kernels.STAT_MIN_H] = fe.min_h
    stats[kernels.STAT_MIN_RADIUS] = fe.min_eig
    if not fe.ok:
        return fe.speed, stats
    stats[kernels.STAT_F] = fe.F
    stats[kernels.STAT_MAX_SPEED] = float(np.abs(fe.speed).max())
    stats[kernels.STAT_MAX_RESID] = float(np.abs(fe.residual).max())
    stats[kernels.STAT_MAX_H] = float(h.max())
    stats[kernels.STAT_MAX_GRAD] = float(np.sqrt(fe.grad_sq.max()))
    stats[kernels.STAT_MIN_K] = float(1.0 / fe.det.max())
    stats[kernels.STAT_MAX_K] = float(1.0 / fe.det.min())
    stats[kernels.STAT_MAX_RADIUS] = float(fe.eig_hi.max())
    stats[kernels.STAT_MIN_R] = float(fe.r.min())
    stats[kernels.STAT_MAX_R] = float(fe.r.max())
    stats[kernels.STAT_DISSIPATION] = fe.dissipation
    return fe.speed, stats


def _checked_reference(body: ConvexBody, g, phi: PhiModel, mode: str):
    if mode not in _MODES:
        raise ConfigError(f"mode must be one of {_MODES}, got {mode!r}")
    g_vals = _g_values(body.grid, g)
    fe = _reference_eval(
        body.grid, body.h.values, g_vals, phi, mode == "reciprocal_support"
    )
    if not fe.ok:
        raise InvalidBodyError("body lost positivity or convexity")
    return fe


# ---------------------------------------------------------------------------
# public pointwise operations (reference path, backend independent)
# ---------------------------------------------------------------------------


def flow_speed(body: ConvexBody, g, phi: PhiModel, mode: str = "radial") -> ScalarField:
    """Speed field dh/dt = h - g r^n K / phi(a)."""
    return ScalarField(body.grid, _checked_reference(body, g, phi, mode).speed)


def ma_residual(body: ConvexBody, g, phi: PhiModel, mode: str = "radial") -> ScalarField:
    """Pointwise defect h phi(a) det(b)/r^n - g; zero exactly at steady state."""
    return ScalarField(body.grid, _checked_reference(body, g, phi, mode).residual)


def functional_F(body: ConvexBody, g, phi: PhiModel) -> float:
    """Monotone functional integral[log h - varphi(r) h det(b)/(r^n g)] dx."""
    return _checked_reference(body, g, phi, "radial").F


def dissipation(body: ConvexBody, g, phi: PhiModel, mode: str = "radial") -> float:
    """Instantaneous dF/dt along the flow: minus a weighted square, <= 0."""
    return _checked_reference(body, g, phi, mode).dissipation


def _interp_periodic(theta_nodes, values, query, logarithmic: bool):
    d = theta_nodes[1] - theta_nodes[0]
    pos = (query - theta_nodes[0]) / d
    idx = np.floor(pos).astype(int)
    frac = pos - idx
    n = values.size
    left = values[idx % n]
    right = values[(idx + 1) % n]
    if logarithmic:
        return np.exp((1.0 - frac) * np.log(left) + frac * np.log(right))
    return (1.0 - frac) * left + frac * right


def functional_F_direct(body: ConvexBody, g, phi: PhiModel) -> float:
    """Second term of F evaluated on a ray grid instead of the node grid.

    Independent route for cross-checking functional_F: the weighted term
    is quadratured over ray directions, with the boundary distance from
    the radial lookup and g log-interpolated at the mapped normal angle.
    """
    grid = body.grid
    if grid.dim != 2:
        raise UnsupportedDimensionError("the direct functional is planar only")
    g_vals = _g_values(grid, g)
    d = grid.spacing[0]
    rays = grid.theta + 0.5 * d
    dirs = np.column_stack([np.cos(rays), np.sin(rays)])
    rho = radial_eval(body, dirs)
    normals = reverse_radial_gauss(body, dirs)
    normal_angles = np.arctan2(normals[:, 1], normals[:, 0])
    g_at = _interp_periodic(grid.theta, g_vals, normal_angles, logarithmic=True)
    second = float(np.sum(varphi(phi, rho) / g_at) * d)
    first = integrate(grid, np.log(body.h.values))
    return first - second


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------


def _advance_once(ev: _Evaluator, h, speed, stats, dt_try, config: FlowConfig):
    """One accepted Euler update with rollback.

    Returns (h2, speed2, stats2, dt_used, rejects) or raises FlowFailure
    when dt underflows; the failure code tells whether the last obstacle
    was lost convexity or the functional gate.
    """
    f0 = stats[kernels.STAT_F]
    gate = f0 + _LYAPUNOV_SLACK * (1.0 + abs(f0))
    cap = config.step_cap * stats[kernels.STAT_MIN_H] / max(
        stats[kernels.STAT_MAX_SPEED], 1e-300
    )
    dt = min(dt_try, cap)
    rejects = 0
    reason = "dt_underflow"
    while True:
        h2 = kernels.euler_update(h, speed, dt)
        speed2, stats2 = ev.eval(h2)
        f2 = stats2[kernels.STAT_F]
        valid = (
            stats2[kernels.STAT_MIN_H] > 0.0
            and stats2[kernels.STAT_MIN_RADIUS] > 0.0
            and math.isfinite(f2)
        )
        if valid and f2 <= gate:
            return h2, speed2, stats2, dt, rejects
        reason = "dt_underflow" if valid else "convexity_lost"
        rejects += 1
        dt *= config.shrink_factor
        if dt < config.dt_min:
            raise FlowFailure(reason, f"dt underflow at dt={dt:.3e} ({reason})")


def _make_state(grid, h, stats, t, step_index, dt) -> FlowState:
    bounds = StateBounds(
        min_h=stats[kernels.STAT_MIN_H],
        max_h=stats[kernels.STAT_MAX_H],
        max_grad_h=stats[kernels.STAT_MAX_GRAD],
        min_K=stats[kernels.STAT_MIN_K],
        max_K=stats[kernels.STAT_MAX_K],
        min_radius=stats[kernels.STAT_MIN_RADIUS],
        max_radius=stats[kernels.STAT_MAX_RADIUS],
    )
    return FlowState(
        t=t,
        body=ConvexBody(grid, h.copy()),
        F=stats[kernels.STAT_F],
        dissipation=stats[kernels.STAT_DISSIPATION],
        residual_max=stats[kernels.STAT_MAX_RESID],
        bounds=bounds,
        step_index=step_index,
        dt=dt,
    )


def euler_pair(body: ConvexBody, g, phi: PhiModel, mode: str = "radial", dt: float = 1e-4):
    """A raw Euler update (no gates) as a time-ordered state pair.

    Feeds the kinematic consistency checks, which need two nearby states
    a known dt apart.  Raises InvalidBodyError if the update leaves the
    admissible cone.
    """
    grid = body.grid
    g_vals = _g_values(grid, g)
    reciprocal = mode == "reciprocal_support"
    h = body.h.values
    speed, stats = _pack_reference(grid, h, g_vals, phi, reciprocal)
    h2 = h + dt * speed
    _, stats2 = _pack_reference(grid, h2, g_vals, phi, reciprocal)
    if not math.isfinite(stats2[kernels.STAT_F]):
        raise InvalidBodyError("Euler update left the admissible cone")
    state_a = _make_state(grid, h, stats, 0.0, 0, 0.0)
    state_b = _make_state(grid, h2, stats2, dt, 1, dt)
    return state_a, state_b


def step(state: FlowState, g, phi: PhiModel, config: FlowConfig) -> FlowState:
    """One accepted step from a state; dt starts at config.dt_init."""
    grid = state.body.grid
    ev = _Evaluator(grid, _g_values(grid, g), phi, config.mode)
    h = state.body.h.values
    speed, stats = ev.eval(h)
    if not math.isfinite(stats[kernels.STAT_F]):
        raise InvalidBodyError("state is not evaluable")
    h2, _, stats2, dt, _ = _advance_once(ev, h, speed, stats, config.dt_init, config)
    return _make_state(grid, h2, stats2, state.t + dt, state.step_index + 1, dt)


def run(
    initial: ConvexBody,
    g,
    phi: PhiModel,
    config: FlowConfig,
    trace_stride: int = 100,
) -> FlowTrace:
    """Iterate the flow until both the speed and the residual tolerances
    hold, or a termination condition fires.

    The trace keeps every accepted step's (t, F, max residual) series,
    running extrema for the a-priori bound checks, and full states
    subsampled by ``trace_stride``.
    """
    if trace_stride < 1:
        raise ConfigError("trace_stride must be at least 1")
    grid = initial.grid
    g_vals = _g_values(grid, g)
    solv = check_solvability(phi, g_vals)
    if not solv.passed:
        warnings.warn(
            "solvability tail test failed (margins "
            f"{solv.margin_at_infinity:.3g}, {solv.margin_at_zero:.3g}); "
            "the flow may not converge",
            RuntimeWarning,
            stacklevel=2,
        )
    ev = _Evaluator(grid, g_vals, phi, config.mode)
    h = np.array(initial.h.values, dtype=float)
    speed, stats = ev.eval(h)
    if not math.isfinite(stats[kernels.STAT_F]):
        raise InvalidBodyError("initial body is not evaluable")

    t = 0.0
    states = [_make_state(grid, h, stats, t, 0, 0.0)]
    t_hist = [0.0]
    stat_rows = [stats.copy()]
    accepted = 0
    rejected = 0
    termination = "max_steps"
    dt_next = config.dt_init
    tol_speed = config.tol_speed
    tol_residual = config.tol_residual

    while accepted < config.max_steps:
        try:
            h, speed, stats, dt_used, rejects = _advance_once(
                ev, h, speed, stats, dt_next, config
            )
        except FlowFailure as failure:
            termination = failure.termination
            break
        accepted += 1
        rejected += rejects
        t += dt_used
        t_hist.append(t)
        stat_rows.append(stats.copy())
        converged = (
            stats[kernels.STAT_MAX_SPEED] <= tol_speed
            and stats[kernels.STAT_MAX_RESID] <= tol_residual
        )
        if converged or accepted % trace_stride == 0:
            states.append(_make_state(grid, h, stats, t, accepted, dt_used))
        if converged:
            termination = "converged"
            break
        # grow dt back after clean steps; rejections keep the shrunk value
        if rejects == 0:
            dt_next = min(config.dt_init, dt_used / config.shrink_factor)
        else:
            dt_next = dt_used
    if states[-1].step_index != accepted:
        states.append(_make_state(grid, h, stats, t, accepted, dt_next))
    rows = np.vstack(stat_rows)
    return FlowTrace(
        states=states,
        termination=termination,
        t_history=np.asarray(t_hist),
        f_history=rows[:, kernels.STAT_F].copy(),
        residual_history=rows[:, kernels.STAT_MAX_RESID].copy(),
        extrema=TraceExtrema.from_stats_rows(rows),
        accepted_steps=accepted,
        rejected_steps=rejected,
    )


# ---------------------------------------------------------------------------
# consistency oracles on state pairs
# ---------------------------------------------------------------------------


def radial_speed_check(state_a: FlowState, state_b: FlowState, num_rays: int = 128) -> float:
    """Kinematic consistency of the two parametrizations.

    Along the flow, d(log rho)/dt at a fixed ray equals (dh/dt)/h at the
    normal direction of the ray's boundary point.  Returns the max over
    sampled rays of the finite-difference mismatch; O(dt) + O(grid^2).
    """
    body_a, body_b = state_a.body, state_b.body
    grid = body_a.grid
    if grid.dim != 2:
        raise UnsupportedDimensionError("the radial speed check is planar only")
    dt = state_b.t - state_a.t
    if dt <= 0.0:
        raise ValueError("states must be time-ordered")
    # compare at the time midpoint (kills the O(dt) leading term) and
    # sample at the ray images of the midpoint body's grid normals, where
    # the mapped direction x(xi) is a node by construction and the right
    # side needs no interpolation
    mid = ConvexBody(grid, 0.5 * (body_a.h.values + body_b.h.values))
    stride = max(1, grid.num_nodes // num_rays)
    nodes = np.arange(0, grid.num_nodes, stride)
    dirs = radial_gauss_map(mid)[nodes]
    rho_a = radial_eval(body_a, dirs)
    rho_b = radial_eval(body_b, dirs)
    lhs = (np.log(rho_b) - np.log(rho_a)) / dt
    u = (body_b.h.values - body_a.h.values) / (dt * mid.h.values)
    rhs = u[nodes]
    return float(np.abs(lhs - rhs).max())


def dual_flow_residual(state_a: FlowState, state_b: FlowState, g, phi: PhiModel) -> float:
    """Consistency of the induced motion of the polar body.

    The polar support h* = 1/rho obeys
    dh*/dt = g (h*)^2 / (phi(1/h*) r*^n K*) - h* with the starred fields
    on the polar body; returns the max finite-difference defect.
    """
    body_a, body_b = state_a.body, state_b.body
    grid = body_a.grid
    if grid.dim != 2:
        raise UnsupportedDimensionError("the dual flow check is planar only")
    dt = state_b.t - state_a.t
    if dt <= 0.0:
        raise ValueError("states must be time-ordered")
    g_vals = _g_values(grid, g)
    pol_a = polar_body(body_a)
    pol_b = polar_body(body_b)
    lhs = (pol_b.h.values - pol_a.h.values) / dt
    # the right side substitutes the flow speed, which matches the frozen
    # Euler-segment velocity only at the earlier state, so evaluate there
    hs = pol_a.h.values
    _, r_s, det_s, _, _ = _reference_fields(grid, hs)
    phi_arg = np.asarray(phi.eval(1.0 / hs), dtype=float)
    # g is data at normal directions of the original body, so at dual node
    # u it enters through the mapped direction x(u)
    normals = reverse_radial_gauss(body_a, grid.nodes)
    angles = np.arctan2(normals[:, 1], normals[:, 0])
    g_mapped = _interp_periodic(grid.theta, g_vals, angles, logarithmic=True)
    rhs = g_mapped * hs * hs * det_s / (phi_arg * r_s**grid.dim) - hs
    return float(np.abs(lhs - rhs).max())


def support_bounds_from_phi(phi: PhiModel, g_min: float, g_max: float):
    """Radii (C_low, C_high) with phi(C) = {max g, min g} for monotone phi.

    Along the flow the support stays within [min(C_low, min h0),
    max(C_high, max h0)].  Requires a strictly monotone weight on the
    sampled range; raises PhiModelError otherwise.
    """
    if not 0.0 < g_min <= g_max:
        raise ValueError("need 0 < g_min <= g_max")
    ts = np.logspace(-8.0, 8.0, 129)
    vals = np.asarray(phi.eval(ts), dtype=float)
    diffs = np.diff(vals)
    if not (np.all(diffs < 0.0) or np.all(diffs > 0.0)):
        raise PhiModelError("support bounds require a strictly monotone weight")

    def root_for(target: float) -> float:
        signs = vals - target
        idx = np.nonzero(signs[:-1] * signs[1:] <= 0.0)[0]
        if idx.size == 0:
            raise PhiModelError(
                f"phi never crosses {target:.6g} on the sampled range"
            )
        lo, hi = ts[idx[0]], ts[idx[0] + 1]
        return float(
            np.exp(
                brentq(
                    lambda u: float(phi.eval(math.exp(u))) - target,
                    math.log(lo),
                    math.log(hi),
                    xtol=1e-14,
                )
            )
        )

    roots = sorted([root_for(g_max), root_for(g_min)])
    return roots[0], roots[1]


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

_TRACE_COLUMNS = (
    "step,t,dt,F,dissipation,residual_max,min_h,max_h,max_grad_h,"
    "min_K,max_K,min_principal_curv,max_principal_curv"
)


def write_trace_csv(trace: FlowTrace, path) -> None:
    with open(path, "w") as fh:
        fh.write(_TRACE_COLUMNS + "\n")
        for s in trace.states:
            b = s.bounds
            row = (
                s.step_index, s.t, s.dt, s.F, s.dissipation, s.residual_max,
                b.min_h, b.max_h, b.max_grad_h, b.min_K, b.max_K,
                1.0 / b.max_radius, 1.0 / b.min_radius,
            )
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_plot_series(trace: FlowTrace, f_path, residual_path) -> None:
    """Two-column text series (t, F) and (t, max residual), full step rate."""
    with open(f_path, "w") as fh:
        for t, f in zip(trace.t_history, trace.f_history):
            fh.write(f"{t:.17g} {f:.17g}\n")
    with open(residual_path, "w") as fh:
        for t, r in zip(trace.t_history, trace.residual_history):
            fh.write(f"{t:.17g} {r:.17g}\n")
