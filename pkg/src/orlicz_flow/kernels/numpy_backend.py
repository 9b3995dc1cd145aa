"""Pure-numpy implementations of the hot kernels.

This is the reference backend: every kernel here is plain vectorized numpy
and is what the numba backend is checked against.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

# targets per block when forming the (targets x nodes) support matrix,
# keeps peak memory around a few tens of MB at sphere resolutions
_BLOCK = 512


def _refine_1d(qm, q0, qp):
    """Vertex offset and value gain of the parabola through three samples.

    q0 is a discrete maximum, so qp + qm - 2*q0 <= 0.  Returns (delta, gain)
    with delta in units of the grid step, clipped to [-0.5, 0.5].
    """
    den = qp + qm - 2.0 * q0
    safe = den < -1e-300
    delta = np.where(safe, (qm - qp) / np.where(safe, 2.0 * den, 1.0), 0.0)
    delta = np.clip(delta, -0.5, 0.5)
    gain = np.where(safe, -((qp - qm) ** 2) / np.where(safe, 8.0 * den, 1.0), 0.0)
    return delta, gain


def support_max_n2(h, cos_t, sin_t, dirs, dtheta, theta0=0.0):
    """Refined maximum of (xi . v)/h(v) over circle nodes, per direction.

    Returns (value, angle) arrays of length len(dirs).  The discrete argmax
    (lowest index on ties) is refined by a quadratic fit through the
    maximizer and its two neighbors; the value is the objective re-evaluated
    at the refined angle.
    """
    n = h.shape[0]
    k = dirs.shape[0]
    values = np.empty(k)
    angles = np.empty(k)
    for start in range(0, k, _BLOCK):
        sl = slice(start, min(start + _BLOCK, k))
        q = (dirs[sl, 0:1] * cos_t[None, :] + dirs[sl, 1:2] * sin_t[None, :]) / h[None, :]
        j = np.argmax(q, axis=1)
        rows = np.arange(q.shape[0])
        q0 = q[rows, j]
        qm = q[rows, (j - 1) % n]
        qp = q[rows, (j + 1) % n]
        delta, _ = _refine_1d(qm, q0, qp)
        # mirror the jitted backend: evaluate the objective at the refined
        # angle with 1/h interpolated through the five surrounding nodes,
        # because the quadratic vertex value has a cell-phase oscillating
        # error that wrecks later differentiation of polar-body fields
        s = delta
        w = (
            (1.0 / h[(j - 2) % n]) * ((s + 1.0) * s * (s - 1.0) * (s - 2.0) / 24.0)
            + (1.0 / h[(j - 1) % n]) * ((s + 2.0) * s * (s - 1.0) * (s - 2.0) / -6.0)
            + (1.0 / h[j]) * ((s + 2.0) * (s + 1.0) * (s - 1.0) * (s - 2.0) / 4.0)
            + (1.0 / h[(j + 1) % n]) * ((s + 2.0) * (s + 1.0) * s * (s - 2.0) / -6.0)
            + (1.0 / h[(j + 2) % n]) * ((s + 2.0) * (s + 1.0) * s * (s - 1.0) / 24.0)
        )
        ang = theta0 + dtheta * (j + delta)
        values[sl] = (dirs[sl, 0] * np.cos(ang) + dirs[sl, 1] * np.sin(ang)) * w
        angles[sl] = ang
    return values, angles


def support_max_n3(h2d, nodes3, dirs, dtheta, dphi):
    """Refined maximum of (xi . v)/h(v) over sphere nodes, per direction.

    h2d has shape (M, L) in latitude-major order and nodes3 is the matching
    flat (M*L, 3) node array.  Returns (value, theta, phi) arrays.  The
    refinement fits one parabola per angular axis; latitude neighbors across
    a pole use the antipodal-in-longitude column.
    """
    m, l = h2d.shape
    half = l // 2
    hflat = h2d.ravel()
    k = dirs.shape[0]
    values = np.empty(k)
    thetas = np.empty(k)
    phis = np.empty(k)

    for start in range(0, k, _BLOCK):
        sl = slice(start, min(start + _BLOCK, k))
        q = (dirs[sl] @ nodes3.T) / hflat[None, :]
        flat = np.argmax(q, axis=1)
        rows = np.arange(q.shape[0])
        j, i = np.divmod(flat, l)
        q0 = q[rows, flat]

        # latitude neighbors, reflecting through the poles
        jm_idx = np.where(j > 0, (j - 1) * l + i, (i + half) % l)
        jp_idx = np.where(j < m - 1, (j + 1) * l + i, (m - 1) * l + (i + half) % l)
        qm_t = q[rows, jm_idx]
        qp_t = q[rows, jp_idx]
        d_t, gain_t = _refine_1d(qm_t, q0, qp_t)

        # longitude neighbors, periodic
        qm_p = q[rows, j * l + (i - 1) % l]
        qp_p = q[rows, j * l + (i + 1) % l]
        d_p, gain_p = _refine_1d(qm_p, q0, qp_p)

        th = (j + 0.5 + d_t) * dtheta
        ph = (i + d_p) * dphi
        # reflect a refined colatitude that crossed a pole
        crossed_n = th < 0.0
        crossed_s = th > np.pi
        th = np.where(crossed_n, -th, th)
        th = np.where(crossed_s, 2.0 * np.pi - th, th)
        ph = np.where(crossed_n | crossed_s, ph + np.pi, ph) % (2.0 * np.pi)

        values[sl] = q0 + gain_t + gain_p
        thetas[sl] = th
        phis[sl] = ph
    return values, thetas, phis


# ---------------------------------------------------------------------------
# fused flow-step evaluation
# ---------------------------------------------------------------------------

# stats vector layout shared by both backends
STAT_F = 0
STAT_MAX_SPEED = 1
STAT_MAX_RESID = 2
STAT_MIN_H = 3
STAT_MAX_H = 4
STAT_MAX_GRAD = 5
STAT_MIN_K = 6
STAT_MAX_K = 7
STAT_MIN_RADIUS = 8
STAT_MAX_RADIUS = 9
STAT_MIN_R = 10
STAT_MAX_R = 11
STAT_DISSIPATION = 12
STAT_LEN = 13


def _phi_power(t, p):
    # the special cases mirror the jitted backend's fast paths exactly
    if p == -1.0:
        return 1.0 / t
    if p == 0.0:
        return np.ones_like(t)
    if p == 1.0:
        return t.copy()
    if p == 2.0:
        return t * t
    return t**p


def _varphi_power(t, p):
    if p == -1.0:
        return 1.0 - 1.0 / t
    if p == 0.0:
        return np.log(t)
    if p == 1.0:
        return t - 1.0
    if p == 2.0:
        return 0.5 * (t * t - 1.0)
    return (t**p - 1.0) / p


def _finish_stats(h, g, w, speed, resid, grad_norm, r, det, radii_min, radii_max, phi_a, varphi_r, n):
    stats = np.empty(STAT_LEN)
    min_h = h.min()
    if min_h <= 0.0 or det.min() <= 0.0:
        # degenerate candidate: report enough for the caller to reject it
        stats[:] = np.nan
        stats[STAT_MIN_H] = min_h
        stats[STAT_MIN_RADIUS] = radii_min.min() if min_h > 0 else -np.inf
        return stats
    kappa = 1.0 / det
    rn = r**n
    f_term = np.log(h) - varphi_r * h * det / (rn * g)
    diss_term = speed * speed * phi_a * det / (g * h * rn)
    stats[STAT_F] = np.sum(w * f_term)
    stats[STAT_MAX_SPEED] = np.abs(speed).max()
    stats[STAT_MAX_RESID] = np.abs(resid).max()
    stats[STAT_MIN_H] = min_h
    stats[STAT_MAX_H] = h.max()
    stats[STAT_MAX_GRAD] = grad_norm.max()
    stats[STAT_MIN_K] = kappa.min()
    stats[STAT_MAX_K] = kappa.max()
    stats[STAT_MIN_RADIUS] = radii_min.min()
    stats[STAT_MAX_RADIUS] = radii_max.max()
    stats[STAT_MIN_R] = r.min()
    stats[STAT_MAX_R] = r.max()
    stats[STAT_DISSIPATION] = -np.sum(w * diss_term)
    return stats


def step_eval_n2(h, g, w, dtheta, p, mode_reciprocal):
    """Speed field and diagnostics for one circle flow state (power-law phi).

    mode_reciprocal selects the argument fed to phi: the radial norm r when
    false, 1/h when true.  Returns (speed, stats).
    """
    inv2s = 1.0 / (2.0 * np.sin(dtheta))
    inv4s2 = 1.0 / (4.0 * np.sin(0.5 * dtheta) ** 2)
    ht = (np.roll(h, -1) - np.roll(h, 1)) * inv2s
    htt = (np.roll(h, -1) - 2.0 * h + np.roll(h, 1)) * inv4s2
    b = htt + h
    r = np.sqrt(h * h + ht * ht)
    det = b
    a = (1.0 / h) if mode_reciprocal else r
    with np.errstate(all="ignore"):
        phi_a = _phi_power(a, p)
        varphi_r = _varphi_power(r, p)
        speed = h - g * r**2 / (det * phi_a)
        resid = h * phi_a * det / r**2 - g
        stats = _finish_stats(
            h, g, w, speed, resid, np.abs(ht), r, det, b, b, phi_a, varphi_r, 2
        )
    return speed, stats


def step_eval_n3(h, g, w, m, l, lat, dtheta, dphi, p, mode_reciprocal):
    """Speed field and diagnostics for one sphere flow state (power-law phi)."""
    f = h.reshape(m, l)
    half = l // 2
    pad = np.vstack([np.roll(f[0], half)[None, :], f, np.roll(f[-1], half)[None, :]])
    inv2st = 1.0 / (2.0 * np.sin(dtheta))
    inv2sp = 1.0 / (2.0 * np.sin(dphi))
    inv4s2t = 1.0 / (4.0 * np.sin(0.5 * dtheta) ** 2)
    inv4s2p = 1.0 / (4.0 * np.sin(0.5 * dphi) ** 2)
    f_t = (pad[2:] - pad[:-2]) * inv2st
    f_p = (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) * inv2sp
    f_tt = (pad[2:] - 2.0 * f + pad[:-2]) * inv4s2t
    f_pp = (np.roll(f, -1, axis=1) - 2.0 * f + np.roll(f, 1, axis=1)) * inv4s2p
    f_tp = (np.roll(f_t, -1, axis=1) - np.roll(f_t, 1, axis=1)) * inv2sp

    sin_t = np.sin(lat)[:, None]
    cot_t = (np.cos(lat) / np.sin(lat))[:, None]
    b11 = f_tt + f
    b12 = (f_tp - cot_t * f_p) / sin_t
    b22 = f_pp / sin_t**2 + cot_t * f_t + f
    det = (b11 * b22 - b12 * b12).ravel()
    mid = 0.5 * (b11 + b22).ravel()
    disc = np.sqrt(np.maximum(0.25 * (b11 - b22) ** 2 + b12 * b12, 0.0)).ravel()
    radii_min = mid - disc
    radii_max = mid + disc

    g1 = f_t.ravel()
    g2 = (f_p / sin_t).ravel()
    grad_sq = g1 * g1 + g2 * g2
    hf = h
    r = np.sqrt(hf * hf + grad_sq)
    a = (1.0 / hf) if mode_reciprocal else r
    with np.errstate(all="ignore"):
        phi_a = _phi_power(a, p)
        varphi_r = _varphi_power(r, p)
        speed = hf - g * r**3 / (det * phi_a)
        resid = hf * phi_a * det / r**3 - g
        stats = _finish_stats(
            hf, g, w, speed, resid, np.sqrt(grad_sq), r, det,
            radii_min, radii_max, phi_a, varphi_r, 3,
        )
    return speed, stats


def euler_update(h, speed, dt):
    return h + dt * speed
