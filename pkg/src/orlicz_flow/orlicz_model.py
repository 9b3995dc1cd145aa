"""Weight functions for the prescribed-curvature problem.

A weight is a continuous positive function phi on (0, inf).  Its
log-weighted primitive varphi(t) = integral from 1 to t of phi(s)/s ds
drives the Lyapunov functional of the flow.  The base point is 1: with a
base at 0 the integral diverges for every weight that satisfies the
solvability condition, and only the derivative of varphi matters, so the
additive shift is harmless.

Solvability of the prescribed-density problem requires
limsup_{s->inf} phi(s) < min g and max g < liminf_{s->0+} phi(s).  The
limits are estimated by sampling phi on a log grid and extrapolating
monotone tails; the estimates are reported with margins, never silently
assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import PhiModelError

__all__ = [
    "PhiModel",
    "power_phi",
    "reciprocal_phi",
    "custom_phi",
    "tabulated_phi",
    "varphi",
    "SolvabilityReport",
    "check_solvability",
    "UniquenessReport",
    "check_uniqueness_condition",
]

_SAMPLE_GRID = np.logspace(-6.0, 6.0, 49)


@dataclass(frozen=True)
class PhiModel:
    """A positive weight phi with tail-limit estimates.

    ``power_exponent`` is set for the power family (phi(t) = t^p); the
    flow engine uses it to route the hot loop through the jitted kernels.
    """

    kind: str
    eval: Callable[[np.ndarray], np.ndarray]
    primitive_base: float = 1.0
    limit_at_zero: float = math.nan
    limit_at_infinity: float = math.nan
    power_exponent: float | None = None

    def __call__(self, t):
        return self.eval(t)


def _aitken_limit(a0: float, a1: float, a2: float) -> float:
    """Geometric-tail extrapolation of a monotone sequence a0, a1, a2."""
    d0, d1 = a1 - a0, a2 - a1
    if d0 == 0.0:
        return a2
    q = d1 / d0
    if 0.0 < q < 1.0:
        return a2 + d1 * q / (1.0 - q)
    return a2


def _estimate_limits(fn) -> tuple[float, float]:
    vals = np.asarray(fn(_SAMPLE_GRID), dtype=float)
    if vals.shape != _SAMPLE_GRID.shape:
        raise PhiModelError("phi must evaluate elementwise on arrays")
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
        raise PhiModelError("phi must be positive and finite on [1e-6, 1e6]")
    # toward zero the sample order is reversed: vals[2], vals[1], vals[0]
    v0, v1, v2 = vals[0], vals[1], vals[2]
    if v0 > v1 > v2:
        at_zero = math.inf
    elif v0 < v1 < v2:
        at_zero = max(_aitken_limit(v2, v1, v0), 0.0)
    else:
        at_zero = float(min(v0, v1, v2))
    u0, u1, u2 = vals[-3], vals[-2], vals[-1]
    if u0 < u1 < u2:
        at_inf = math.inf
    elif u0 > u1 > u2:
        at_inf = max(_aitken_limit(u0, u1, u2), 0.0)
    else:
        at_inf = float(max(u0, u1, u2))
    return at_zero, at_inf


def _wrap_positive(fn, label: str):
    def eval_fn(t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(fn(t), dtype=float)
        if np.any(~np.isfinite(out)) or np.any(out <= 0.0):
            raise PhiModelError(f"{label} produced a non-positive value")
        return out

    return eval_fn


def power_phi(p: float) -> PhiModel:
    """phi(t) = t^p.  p = 0 is the constant weight."""
    p = float(p)

    def raw(t):
        # mirrors the kernel fast paths so both routes agree bitwise
        if p == -1.0:
            return 1.0 / t
        if p == 0.0:
            return np.ones_like(t)
        if p == 2.0:
            return t * t
        return t**p

    fn = _wrap_positive(raw, f"power weight t^{p}")
    zero, inf = _estimate_limits(fn)
    return PhiModel(
        kind="power",
        eval=fn,
        limit_at_zero=zero,
        limit_at_infinity=inf,
        power_exponent=p,
    )


def reciprocal_phi() -> PhiModel:
    """phi(t) = 1/t, the weight of the classical prescribed-curvature case."""
    fn = _wrap_positive(lambda t: 1.0 / t, "reciprocal weight")
    zero, inf = _estimate_limits(fn)
    return PhiModel(
        kind="reciprocal",
        eval=fn,
        limit_at_zero=zero,
        limit_at_infinity=inf,
        power_exponent=-1.0,
    )


def custom_phi(fn: Callable, kind: str = "custom") -> PhiModel:
    wrapped = _wrap_positive(fn, "custom weight")
    zero, inf = _estimate_limits(wrapped)
    return PhiModel(kind=kind, eval=wrapped, limit_at_zero=zero, limit_at_infinity=inf)


def tabulated_phi(t_values, phi_values) -> PhiModel:
    """Table-backed weight, linear in log t, clamped outside the table."""
    t = np.asarray(t_values, dtype=float)
    v = np.asarray(phi_values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape or t.size < 2:
        raise PhiModelError("weight table needs two equal-length columns, >= 2 rows")
    order = np.argsort(t)
    t, v = t[order], v[order]
    if np.any(t <= 0.0) or np.any(np.diff(t) <= 0.0):
        raise PhiModelError("table abscissae must be positive and distinct")
    if np.any(v <= 0.0) or not np.all(np.isfinite(v)):
        raise PhiModelError("table values must be positive and finite")
    log_t = np.log(t)

    def fn(s):
        s = np.asarray(s, dtype=float)
        return np.interp(np.log(np.maximum(s, 1e-300)), log_t, v)

    return custom_phi(fn, kind="tabulated")


# ---------------------------------------------------------------------------
# primitive
# ---------------------------------------------------------------------------


def _varphi_power(t: np.ndarray, p: float) -> np.ndarray:
    # same special cases as the flow kernels so both routes agree exactly
    if p == -1.0:
        return 1.0 - 1.0 / t
    if p == 0.0:
        return np.log(t)
    if p == 1.0:
        return t - 1.0
    if p == 2.0:
        return 0.5 * (t * t - 1.0)
    return (t**p - 1.0) / p


def _adaptive_simpson(fn, a: float, b: float, tol: float) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    if a == b:
        return 0.0
    fa, fb = fn(a), fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # stack entries: (a, m, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, m, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    while stack:
        a0, m0, b0, f0, f1, f2, s0, tol0, depth = stack.pop()
        lm, rm = 0.5 * (a0 + m0), 0.5 * (m0 + b0)
        flm, frm = fn(lm), fn(rm)
        left = (m0 - a0) / 6.0 * (f0 + 4.0 * flm + f1)
        right = (b0 - m0) / 6.0 * (f1 + 4.0 * frm + f2)
        err = left + right - s0
        if abs(err) <= 15.0 * tol0:
            total += left + right + err / 15.0
        elif depth >= 60:
            raise PhiModelError("primitive quadrature did not converge")
        else:
            half = 0.5 * tol0
            stack.append((a0, lm, m0, f0, flm, f1, left, half, depth + 1))
            stack.append((m0, rm, b0, f1, frm, f2, right, half, depth + 1))
    return total


def _varphi_quad(model: PhiModel, targets: np.ndarray) -> np.ndarray:
    """Primitive at many points: one quadrature per segment, accumulated."""

    def integrand(s):
        return float(model.eval(s)) / s

    flat = np.asarray(targets, dtype=float).ravel()
    uniq, inverse = np.unique(flat, return_inverse=True)
    points = np.concatenate([[model.primitive_base], uniq])
    order = np.argsort(points, kind="stable")
    sorted_pts = points[order]
    base_pos = int(np.nonzero(order == 0)[0][0])
    seg = np.zeros(sorted_pts.size)
    for i in range(base_pos + 1, sorted_pts.size):
        seg[i] = seg[i - 1] + _adaptive_simpson(
            integrand, sorted_pts[i - 1], sorted_pts[i], 1e-10
        )
    for i in range(base_pos - 1, -1, -1):
        seg[i] = seg[i + 1] - _adaptive_simpson(
            integrand, sorted_pts[i], sorted_pts[i + 1], 1e-10
        )
    values = np.empty(points.size)
    values[order] = seg
    return values[1:][inverse].reshape(np.asarray(targets).shape)


def varphi(model: PhiModel, t):
    """Primitive varphi(t) = integral_base^t phi(s)/s ds.

    Closed form for the power family, adaptive Simpson (abs tol 1e-10)
    otherwise.  Accepts scalars or arrays.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0.0):
        raise PhiModelError("varphi argument must be positive")
    if model.power_exponent is not None and model.primitive_base == 1.0:
        out = _varphi_power(arr, model.power_exponent)
    else:
        out = _varphi_quad(model, arr)
    return float(out) if np.isscalar(t) or arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# solvability and uniqueness checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolvabilityReport:
    passed: bool
    limit_at_zero: float
    limit_at_infinity: float
    margin_at_zero: float
    margin_at_infinity: float
    g_min: float
    g_max: float


def check_solvability(model: PhiModel, g) -> SolvabilityReport:
    """Tail test: limsup_inf phi < min g and max g < liminf_0 phi."""
    g_vals = np.asarray(getattr(g, "values", g), dtype=float)
    g_min = float(g_vals.min())
    g_max = float(g_vals.max())
    if g_min <= 0.0:
        raise PhiModelError("density g must be positive")
    margin_inf = g_min - model.limit_at_infinity
    margin_zero = model.limit_at_zero - g_max
    return SolvabilityReport(
        passed=bool(margin_inf > 0.0 and margin_zero > 0.0),
        limit_at_zero=model.limit_at_zero,
        limit_at_infinity=model.limit_at_infinity,
        margin_at_zero=margin_zero,
        margin_at_infinity=margin_inf,
        g_min=g_min,
        g_max=g_max,
    )


@dataclass(frozen=True)
class UniquenessReport:
    holds: bool
    witness: tuple[float, float] | None


def check_uniqueness_condition(model: PhiModel) -> UniquenessReport:
    """Sweep for a witness pair (c, s) with c < 1 and phi(c/s) <= phi(1/s).

    No witness on the sample grid means the uniqueness condition holds
    (shrinking the argument must strictly raise the weight).
    """
    c_grid = np.concatenate([np.geomspace(1e-3, 0.9, 25), [0.5, 0.99, 0.999]])
    s_grid = np.concatenate([np.geomspace(1e-3, 1e3, 25), [1.0]])
    for s in s_grid:
        ref = float(model.eval(1.0 / s))
        for c in c_grid:
            if float(model.eval(c / s)) <= ref:
                return UniquenessReport(holds=False, witness=(float(c), float(s)))
    return UniquenessReport(holds=True, witness=None)
