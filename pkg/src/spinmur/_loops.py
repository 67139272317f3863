"""Scalar-loop kernels for the binary error function on the Bloch sphere.

Written in the numba nopython subset. ``kernels`` compiles them with ``njit``
unless the numpy backend is selected, in which case the grid scan is replaced
by a vectorized numpy version and these run as plain Python.

Arrays: ``tt, tv`` are the +1 effects of the targets (shape (k,), (k, 3)),
``mt, mv`` those of the approximating marginals; the -1 effects are the
complements.
"""
import math

import numpy as np

FLOOR = 1e-15
LOG2E = 1.0 / math.log(2.0)


def error_at(tt, tv, mt, mv, r0, r1, r2):
    total = 0.0
    for k in range(tt.shape[0]):
        dp = tv[k, 0] * r0 + tv[k, 1] * r1 + tv[k, 2] * r2
        dq = mv[k, 0] * r0 + mv[k, 1] * r1 + mv[k, 2] * r2
        for s in (1.0, -1.0):
            if s > 0:
                p = tt[k] + dp
                q = mt[k] + dq
            else:
                p = (1.0 - tt[k]) - dp
                q = (1.0 - mt[k]) - dq
            if p < FLOOR:
                continue
            if p > 1.0:
                p = 1.0
            if q < FLOOR:
                return np.inf
            total += p * (math.log(p) - math.log(q))
    if total < 0.0:
        total = 0.0
    return total * LOG2E


def grad_at(tt, tv, mt, mv, r0, r1, r2, g):
    g[0] = 0.0
    g[1] = 0.0
    g[2] = 0.0
    for k in range(tt.shape[0]):
        dp = tv[k, 0] * r0 + tv[k, 1] * r1 + tv[k, 2] * r2
        dq = mv[k, 0] * r0 + mv[k, 1] * r1 + mv[k, 2] * r2
        for s in (1.0, -1.0):
            if s > 0:
                p = tt[k] + dp
                q = mt[k] + dq
            else:
                p = (1.0 - tt[k]) - dp
                q = (1.0 - mt[k]) - dq
            if p < FLOOR or q < FLOOR:
                continue
            cp = s * (math.log(p) - math.log(q) + 1.0)
            cq = -s * p / q
            for i in range(3):
                g[i] += cp * tv[k, i] + cq * mv[k, i]
    for i in range(3):
        g[i] *= LOG2E


def sphere_grid(n_theta, n_phi):
    pts = np.empty((n_theta * n_phi + 2, 3))
    pts[0, 0] = 0.0
    pts[0, 1] = 0.0
    pts[0, 2] = 1.0
    pts[1, 0] = 0.0
    pts[1, 1] = 0.0
    pts[1, 2] = -1.0
    idx = 2
    for i in range(n_theta):
        th = math.pi * (i + 0.5) / n_theta
        st = math.sin(th)
        ct = math.cos(th)
        for j in range(n_phi):
            ph = 2.0 * math.pi * j / n_phi
            pts[idx, 0] = st * math.cos(ph)
            pts[idx, 1] = st * math.sin(ph)
            pts[idx, 2] = ct
            idx += 1
    return pts


def error_batch_loop(tt, tv, mt, mv, pts):
    out = np.empty(pts.shape[0])
    for n in range(pts.shape[0]):
        out[n] = error_at(tt, tv, mt, mv, pts[n, 0], pts[n, 1], pts[n, 2])
    return out


def pick_starts(pts, vals, max_starts, min_angle):
    """Indices of the best grid points, pairwise separated by ``min_angle``."""
    n_pts = pts.shape[0]
    free = np.ones(n_pts, dtype=np.bool_)
    chosen = np.empty(max_starts, dtype=np.int64)
    cmin = math.cos(min_angle)
    n = 0
    while n < max_starts:
        best = -1
        best_v = -np.inf
        for i in range(n_pts):
            if free[i] and vals[i] > best_v:
                best_v = vals[i]
                best = i
        if best < 0:
            break
        chosen[n] = best
        n += 1
        for i in range(n_pts):
            if free[i]:
                d = pts[i, 0] * pts[best, 0] + pts[i, 1] * pts[best, 1] + pts[i, 2] * pts[best, 2]
                if d > cmin:
                    free[i] = False
    return chosen[:n]


def ascend(tt, tv, mt, mv, x0, max_iter, gtol):
    """Riemannian gradient ascent on the unit sphere with Armijo backtracking.

    Returns ``(value, point, iterations, last_gain)``.
    """
    x = x0 / math.sqrt(x0[0] ** 2 + x0[1] ** 2 + x0[2] ** 2)
    f = error_at(tt, tv, mt, mv, x[0], x[1], x[2])
    g = np.zeros(3)
    y = np.zeros(3)
    step = 0.1
    gain = 0.0
    it = 0
    if not math.isfinite(f):
        return f, x, it, 0.0
    while it < max_iter:
        it += 1
        grad_at(tt, tv, mt, mv, x[0], x[1], x[2], g)
        radial = g[0] * x[0] + g[1] * x[1] + g[2] * x[2]
        for i in range(3):
            g[i] -= radial * x[i]
        gn2 = g[0] ** 2 + g[1] ** 2 + g[2] ** 2
        if gn2 < gtol * gtol:
            gain = 0.0
            break
        step = min(step * 2.0, 1.0 / math.sqrt(gn2))
        accepted = False
        while step * math.sqrt(gn2) > 1e-15:
            for i in range(3):
                y[i] = x[i] + step * g[i]
            ny = math.sqrt(y[0] ** 2 + y[1] ** 2 + y[2] ** 2)
            for i in range(3):
                y[i] /= ny
            fy = error_at(tt, tv, mt, mv, y[0], y[1], y[2])
            if not math.isfinite(fy):
                return fy, y.copy(), it, math.inf
            if fy >= f + 1e-4 * step * gn2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            gain = 0.0
            break
        gain = fy - f
        f = fy
        for i in range(3):
            x[i] = y[i]
        if gain < 1e-16:
            break
    return f, x, it, gain


def sphere_sup_loop(tt, tv, mt, mv, pts, vals, seeds, max_starts, min_angle, max_iter, gtol):
    """Refine the best grid points and the seed directions; return the best ascent."""
    starts = pick_starts(pts, vals, max_starts, min_angle)
    n_start = starts.shape[0] + seeds.shape[0]
    best_f = -1.0
    best_x = np.zeros(3)
    best_gain = 0.0
    iters = 0
    for s in range(n_start):
        if s < starts.shape[0]:
            x0 = pts[starts[s]].copy()
        else:
            x0 = seeds[s - starts.shape[0]].copy()
        f, x, it, gain = ascend(tt, tv, mt, mv, x0, max_iter, gtol)
        iters += it
        if f > best_f:
            best_f = f
            best_x = x.copy()
            best_gain = gain
        if not math.isfinite(f):
            break
    return best_f, best_x, iters, best_gain
