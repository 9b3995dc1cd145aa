"""Numba-jitted implementations of the hot kernels.

Same contracts as ``numpy_backend``; bitwise agreement is not guaranteed
(summation order differs) but results match to ~1e-13 relative.  Importing
this module raises ImportError when numba is unavailable, which the
dispatcher in ``kernels.__init__`` turns into a numpy fallback.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .numpy_backend import (
    STAT_DISSIPATION,
    STAT_F,
    STAT_LEN,
    STAT_MAX_GRAD,
    STAT_MAX_H,
    STAT_MAX_K,
    STAT_MAX_R,
    STAT_MAX_RADIUS,
    STAT_MAX_RESID,
    STAT_MAX_SPEED,
    STAT_MIN_H,
    STAT_MIN_K,
    STAT_MIN_R,
    STAT_MIN_RADIUS,
)

NAME = "numba"


@njit(cache=True, inline="always")
def _phi_pow(a, p):
    # libm pow is the dominant cost of the step kernel; the power family
    # used by the acceptance problems gets exact fast paths
    if p == -1.0:
        return 1.0 / a
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return a
    if p == 2.0:
        return a * a
    return a**p


@njit(cache=True, inline="always")
def _varphi_pow(r, p):
    if p == -1.0:
        return 1.0 - 1.0 / r
    if p == 0.0:
        return math.log(r)
    if p == 1.0:
        return r - 1.0
    if p == 2.0:
        return 0.5 * (r * r - 1.0)
    return (r**p - 1.0) / p


@njit(cache=True, inline="always")
def _refine(qm, q0, qp):
    den = qp + qm - 2.0 * q0
    if den < -1e-300:
        delta = (qm - qp) / (2.0 * den)
        if delta > 0.5:
            delta = 0.5
        elif delta < -0.5:
            delta = -0.5
        gain = -((qp - qm) ** 2) / (8.0 * den)
        return delta, gain
    return 0.0, 0.0


@njit(cache=True)
def support_max_n2(h, cos_t, sin_t, dirs, dtheta, theta0=0.0):
    n = h.shape[0]
    k = dirs.shape[0]
    values = np.empty(k)
    angles = np.empty(k)
    for t in range(k):
        dx = dirs[t, 0]
        dy = dirs[t, 1]
        best = -np.inf
        jbest = 0
        for j in range(n):
            q = (dx * cos_t[j] + dy * sin_t[j]) / h[j]
            if q > best:
                best = q
                jbest = j
        jm = (jbest - 1) % n
        jp = (jbest + 1) % n
        qm = (dx * cos_t[jm] + dy * sin_t[jm]) / h[jm]
        qp = (dx * cos_t[jp] + dy * sin_t[jp]) / h[jp]
        delta, _ = _refine(qm, best, qp)
        # The quadratic vertex VALUE is only O(dtheta^3) accurate and its
        # error oscillates from cell to cell, which wrecks any later
        # differentiation of polar-body fields.  Re-evaluating the
        # objective at the refined angle with 1/h interpolated through the
        # five surrounding nodes keeps the error smooth and higher order.
        s = delta
        w = (
            (1.0 / h[(jbest - 2) % n]) * ((s + 1.0) * s * (s - 1.0) * (s - 2.0) / 24.0)
            + (1.0 / h[jm]) * ((s + 2.0) * s * (s - 1.0) * (s - 2.0) / -6.0)
            + (1.0 / h[jbest]) * ((s + 2.0) * (s + 1.0) * (s - 1.0) * (s - 2.0) / 4.0)
            + (1.0 / h[jp]) * ((s + 2.0) * (s + 1.0) * s * (s - 2.0) / -6.0)
            + (1.0 / h[(jbest + 2) % n]) * ((s + 2.0) * (s + 1.0) * s * (s - 1.0) / 24.0)
        )
        ang = theta0 + dtheta * (jbest + delta)
        values[t] = (dx * np.cos(ang) + dy * np.sin(ang)) * w
        angles[t] = ang
    return values, angles


@njit(cache=True, parallel=True)
def support_max_n3(h2d, nodes3, dirs, dtheta, dphi):
    m, l = h2d.shape
    half = l // 2
    k = dirs.shape[0]
    values = np.empty(k)
    thetas = np.empty(k)
    phis = np.empty(k)
    for t in prange(k):
        dx = dirs[t, 0]
        dy = dirs[t, 1]
        dz = dirs[t, 2]
        best = -np.inf
        fbest = 0
        for f in range(m * l):
            q = (dx * nodes3[f, 0] + dy * nodes3[f, 1] + dz * nodes3[f, 2]) / h2d[
                f // l, f % l
            ]
            if q > best:
                best = q
                fbest = f
        j = fbest // l
        i = fbest % l

        if j > 0:
            fm = (j - 1) * l + i
        else:
            fm = (i + half) % l
        if j < m - 1:
            fp = (j + 1) * l + i
        else:
            fp = (m - 1) * l + (i + half) % l
        qm = (dx * nodes3[fm, 0] + dy * nodes3[fm, 1] + dz * nodes3[fm, 2]) / h2d[
            fm // l, fm % l
        ]
        qp = (dx * nodes3[fp, 0] + dy * nodes3[fp, 1] + dz * nodes3[fp, 2]) / h2d[
            fp // l, fp % l
        ]
        d_t, gain_t = _refine(qm, best, qp)

        im = j * l + (i - 1) % l
        ip = j * l + (i + 1) % l
        qm = (dx * nodes3[im, 0] + dy * nodes3[im, 1] + dz * nodes3[im, 2]) / h2d[
            im // l, im % l
        ]
        qp = (dx * nodes3[ip, 0] + dy * nodes3[ip, 1] + dz * nodes3[ip, 2]) / h2d[
            ip // l, ip % l
        ]
        d_p, gain_p = _refine(qm, best, qp)

        th = (j + 0.5 + d_t) * dtheta
        ph = (i + d_p) * dphi
        if th < 0.0:
            th = -th
            ph += np.pi
        elif th > np.pi:
            th = 2.0 * np.pi - th
            ph += np.pi
        ph = ph % (2.0 * np.pi)

        values[t] = best + gain_t + gain_p
        thetas[t] = th
        phis[t] = ph
    return values, thetas, phis


@njit(cache=True)
def step_eval_n2(h, g, w, dtheta, p, mode_reciprocal):
    n = h.shape[0]
    inv2s = 1.0 / (2.0 * math.sin(dtheta))
    inv4s2 = 1.0 / (4.0 * math.sin(0.5 * dtheta) ** 2)
    speed = np.empty(n)
    stats = np.full(STAT_LEN, np.nan)
    ok = True
    f_acc = 0.0
    diss_acc = 0.0
    max_speed = 0.0
    max_resid = 0.0
    min_h = np.inf
    max_h = -np.inf
    max_grad = 0.0
    min_k = np.inf
    max_k = -np.inf
    min_rad = np.inf
    max_rad = -np.inf
    min_r = np.inf
    max_r = -np.inf
    for k in range(n):
        hk = h[k]
        hp = h[(k + 1) % n]
        hm = h[(k - 1) % n]
        if hk < min_h:
            min_h = hk
        if hk > max_h:
            max_h = hk
        ht = (hp - hm) * inv2s
        b = (hp - 2.0 * hk + hm) * inv4s2 + hk
        if b < min_rad:
            min_rad = b
        if b > max_rad:
            max_rad = b
        if not (hk > 0.0 and b > 0.0):
            ok = False
            speed[k] = 0.0
            continue
        r = math.sqrt(hk * hk + ht * ht)
        a = 1.0 / hk if mode_reciprocal else r
        phi_a = _phi_pow(a, p)
        varphi_r = _varphi_pow(r, p)
        r2 = r * r
        gk = g[k]
        s = hk - gk * r2 / (b * phi_a)
        resid = hk * phi_a * b / r2 - gk
        speed[k] = s
        wk = w[k]
        f_acc += wk * (math.log(hk) - varphi_r * hk * b / (r2 * gk))
        diss_acc -= wk * (s * s * phi_a * b / (gk * hk * r2))
        kappa = 1.0 / b
        agrad = abs(ht)
        aspeed = abs(s)
        aresid = abs(resid)
        if aspeed > max_speed:
            max_speed = aspeed
        if aresid > max_resid:
            max_resid = aresid
        if agrad > max_grad:
            max_grad = agrad
        if kappa < min_k:
            min_k = kappa
        if kappa > max_k:
            max_k = kappa
        if r < min_r:
            min_r = r
        if r > max_r:
            max_r = r
    stats[STAT_MIN_H] = min_h
    stats[STAT_MIN_RADIUS] = min_rad
    if ok:
        stats[STAT_F] = f_acc
        stats[STAT_MAX_SPEED] = max_speed
        stats[STAT_MAX_RESID] = max_resid
        stats[STAT_MAX_H] = max_h
        stats[STAT_MAX_GRAD] = max_grad
        stats[STAT_MIN_K] = min_k
        stats[STAT_MAX_K] = max_k
        stats[STAT_MAX_RADIUS] = max_rad
        stats[STAT_MIN_R] = min_r
        stats[STAT_MAX_R] = max_r
        stats[STAT_DISSIPATION] = diss_acc
    return speed, stats


@njit(cache=True)
def step_eval_n3(h, g, w, m, l, lat, dtheta, dphi, p, mode_reciprocal):
    half = l // 2
    inv2st = 1.0 / (2.0 * math.sin(dtheta))
    inv2sp = 1.0 / (2.0 * math.sin(dphi))
    inv4s2t = 1.0 / (4.0 * math.sin(0.5 * dtheta) ** 2)
    inv4s2p = 1.0 / (4.0 * math.sin(0.5 * dphi) ** 2)

    # first pass: colatitude derivative (needed at longitude neighbors below)
    f_t = np.empty((m, l))
    for j in range(m):
        for i in range(l):
            if j > 0:
                hm = h[(j - 1) * l + i]
            else:
                hm = h[(i + half) % l]
            if j < m - 1:
                hp = h[(j + 1) * l + i]
            else:
                hp = h[(m - 1) * l + (i + half) % l]
            f_t[j, i] = (hp - hm) * inv2st

    speed = np.empty(m * l)
    stats = np.full(STAT_LEN, np.nan)
    ok = True
    f_acc = 0.0
    diss_acc = 0.0
    max_speed = 0.0
    max_resid = 0.0
    min_h = np.inf
    max_h = -np.inf
    max_grad = 0.0
    min_k = np.inf
    max_k = -np.inf
    min_rad = np.inf
    max_rad = -np.inf
    min_r = np.inf
    max_r = -np.inf
    for j in range(m):
        sin_t = math.sin(lat[j])
        cot_t = math.cos(lat[j]) / sin_t
        for i in range(l):
            k = j * l + i
            hk = h[k]
            if hk < min_h:
                min_h = hk
            if hk > max_h:
                max_h = hk
            if j > 0:
                hm_t = h[(j - 1) * l + i]
            else:
                hm_t = h[(i + half) % l]
            if j < m - 1:
                hp_t = h[(j + 1) * l + i]
            else:
                hp_t = h[(m - 1) * l + (i + half) % l]
            ip = j * l + (i + 1) % l
            im = j * l + (i - 1) % l
            ft = f_t[j, i]
            fp = (h[ip] - h[im]) * inv2sp
            ftt = (hp_t - 2.0 * hk + hm_t) * inv4s2t
            fpp = (h[ip] - 2.0 * hk + h[im]) * inv4s2p
            ftp = (f_t[j, (i + 1) % l] - f_t[j, (i - 1) % l]) * inv2sp

            b11 = ftt + hk
            b12 = (ftp - cot_t * fp) / sin_t
            b22 = fpp / (sin_t * sin_t) + cot_t * ft + hk
            det = b11 * b22 - b12 * b12
            mid = 0.5 * (b11 + b22)
            disc2 = 0.25 * (b11 - b22) ** 2 + b12 * b12
            disc = math.sqrt(disc2) if disc2 > 0.0 else 0.0
            rad_lo = mid - disc
            rad_hi = mid + disc
            if rad_lo < min_rad:
                min_rad = rad_lo
            if rad_hi > max_rad:
                max_rad = rad_hi
            if not (hk > 0.0 and det > 0.0):
                ok = False
                speed[k] = 0.0
                continue
            g2 = fp / sin_t
            grad_sq = ft * ft + g2 * g2
            r = math.sqrt(hk * hk + grad_sq)
            a = 1.0 / hk if mode_reciprocal else r
            phi_a = _phi_pow(a, p)
            varphi_r = _varphi_pow(r, p)
            r3 = r * r * r
            gk = g[k]
            s = hk - gk * r3 / (det * phi_a)
            resid = hk * phi_a * det / r3 - gk
            speed[k] = s
            wk = w[k]
            f_acc += wk * (math.log(hk) - varphi_r * hk * det / (r3 * gk))
            diss_acc -= wk * (s * s * phi_a * det / (gk * hk * r3))
            kappa = 1.0 / det
            agrad = math.sqrt(grad_sq)
            aspeed = abs(s)
            aresid = abs(resid)
            if aspeed > max_speed:
                max_speed = aspeed
            if aresid > max_resid:
                max_resid = aresid
            if agrad > max_grad:
                max_grad = agrad
            if kappa < min_k:
                min_k = kappa
            if kappa > max_k:
                max_k = kappa
            if r < min_r:
                min_r = r
            if r > max_r:
                max_r = r
    stats[STAT_MIN_H] = min_h
    stats[STAT_MIN_RADIUS] = min_rad
    if ok:
        stats[STAT_F] = f_acc
        stats[STAT_MAX_SPEED] = max_speed
        stats[STAT_MAX_RESID] = max_resid
        stats[STAT_MAX_H] = max_h
        stats[STAT_MAX_GRAD] = max_grad
        stats[STAT_MIN_K] = min_k
        stats[STAT_MAX_K] = max_k
        stats[STAT_MAX_RADIUS] = max_rad
        stats[STAT_MIN_R] = min_r
        stats[STAT_MAX_R] = max_r
        stats[STAT_DISSIPATION] = diss_acc
    return speed, stats


@njit(cache=True)
def euler_update(h, speed, dt):
    return h + dt * speed
