"""Hot numeric kernels for the enclosure-region geometry and the
minimum-distance solver.

Everything here operates on raw floats and float64 arrays so the functions can
be compiled with numba.  Compilation is controlled by the ``ERPSIM_NUMBA``
environment variable: any value other than ``0``/``false``/``no``/``off``
(default ``1``) enables ``@njit``; otherwise the same code runs as plain
numpy/Python.  ``benchmarks/bench_kernels.py`` compares the two paths.
"""

from __future__ import annotations

import math
import os

import numpy as np

_flag = os.environ.get("ERPSIM_NUMBA", "1").strip().lower()
NUMBA_ENABLED = _flag not in ("0", "false", "no", "off")

if NUMBA_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def _njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


TWO_PI = 2.0 * math.pi
GRID_N = 256  # coarse polar sweep before golden-section refinement
_INV_PHI = 0.6180339887498949

# status codes returned by solve_min_dist
STATUS_OK = 0
STATUS_TOUCHING = 1
STATUS_MAXITER = 2

GOAL_DISK = 0
GOAL_ELLIPSE = 1


@_njit(cache=True)
def pef_value(x0, x1, px, py, ex, ey, alpha, r):
    """Pursuit enclosure value at a point: |x-p| - alpha*|x-e| - r."""
    return (
        math.hypot(x0 - px, x1 - py)
        - alpha * math.hypot(x0 - ex, x1 - ey)
        - r
    )


@_njit(cache=True)
def boundary_rho(ang, px, py, ex, ey, alpha, r):
    """Radius of the enclosure boundary at polar angle ``ang`` around the evader.

    Valid for alpha > 1 and |p - e| > r; the discriminant is then strictly
    positive and the radius strictly positive.
    """
    dx = ex - px
    dy = ey - py
    h1 = dx * math.cos(ang) + dy * math.sin(ang) - alpha * r
    gap = dx * dx + dy * dy - r * r
    a2m1 = alpha * alpha - 1.0
    h2 = math.sqrt(h1 * h1 + a2m1 * gap)
    return (h1 + h2) / a2m1


@_njit(cache=True)
def boundary_rho_many(angs, px, py, ex, ey, alpha, r):
    """Vectorized boundary_rho over an array of angles."""
    dx = ex - px
    dy = ey - py
    h1 = dx * np.cos(angs) + dy * np.sin(angs) - alpha * r
    gap = dx * dx + dy * dy - r * r
    a2m1 = alpha * alpha - 1.0
    h2 = np.sqrt(h1 * h1 + a2m1 * gap)
    return (h1 + h2) / a2m1


@_njit(cache=True)
def _boundary_and_tangent(ang, px, py, ex, ey, alpha, r):
    """Boundary point and its derivative with respect to the polar angle."""
    dx = ex - px
    dy = ey - py
    ca = math.cos(ang)
    sa = math.sin(ang)
    h1 = dx * ca + dy * sa - alpha * r
    gap = dx * dx + dy * dy - r * r
    a2m1 = alpha * alpha - 1.0
    h2 = math.sqrt(h1 * h1 + a2m1 * gap)
    rho = (h1 + h2) / a2m1
    dh1 = -dx * sa + dy * ca
    drho = dh1 * (h2 + h1) / (h2 * a2m1)
    bx = ex + rho * ca
    by = ey + rho * sa
    tx = drho * ca - rho * sa
    ty = drho * sa + rho * ca
    return bx, by, tx, ty


@_njit(cache=True)
def _dist2_to_boundary(ang, zx, zy, px, py, ex, ey, alpha, r):
    rho = boundary_rho(ang, px, py, ex, ey, alpha, r)
    bx = ex + rho * math.cos(ang)
    by = ey + rho * math.sin(ang)
    return (bx - zx) * (bx - zx) + (by - zy) * (by - zy)


@_njit(cache=True)
def project_enclosure(zx, zy, px, py, ex, ey, alpha, r):
    """Closest point of the enclosure region {f >= 0} to (zx, zy).

    Interior points are fixed.  Exterior points are mapped to the boundary by
    a coarse polar sweep, golden-section refinement (the region is strictly
    convex, so the sweep isolates the unique minimum), and a secant iteration
    on the tangency condition, which recovers the accuracy a purely
    comparison-based search cannot reach.
    """
    if pef_value(zx, zy, px, py, ex, ey, alpha, r) >= 0.0:
        return zx, zy
    step = TWO_PI / GRID_N
    best_k = 0
    best_d = 1e300
    for k in range(GRID_N):
        d = _dist2_to_boundary(k * step, zx, zy, px, py, ex, ey, alpha, r)
        if d < best_d:
            best_d = d
            best_k = k
    a = best_k * step - step
    b = best_k * step + step
    lo = a
    hi = b
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = _dist2_to_boundary(c, zx, zy, px, py, ex, ey, alpha, r)
    fd = _dist2_to_boundary(d, zx, zy, px, py, ex, ey, alpha, r)
    for _ in range(40):
        if fc < fd:
            b = d
            d = c
            fd = fc
            c = b - _INV_PHI * (b - a)
            fc = _dist2_to_boundary(c, zx, zy, px, py, ex, ey, alpha, r)
        else:
            a = c
            c = d
            fc = fd
            d = a + _INV_PHI * (b - a)
            fd = _dist2_to_boundary(d, zx, zy, px, py, ex, ey, alpha, r)
    # secant on the tangency condition (b(ang) - z) . b'(ang) = 0
    ang0 = 0.5 * (a + b)
    bx, by, tx, ty = _boundary_and_tangent(ang0, px, py, ex, ey, alpha, r)
    t0 = (bx - zx) * tx + (by - zy) * ty
    ang1 = ang0 + 1e-7
    for _ in range(12):
        bx, by, tx, ty = _boundary_and_tangent(ang1, px, py, ex, ey, alpha, r)
        t1 = (bx - zx) * tx + (by - zy) * ty
        if t1 == t0:
            break
        ang2 = ang1 - t1 * (ang1 - ang0) / (t1 - t0)
        if ang2 < lo:
            ang2 = lo
        elif ang2 > hi:
            ang2 = hi
        ang0 = ang1
        t0 = t1
        ang1 = ang2
        if abs(ang1 - ang0) < 1e-15:
            break
    rho = boundary_rho(ang1, px, py, ex, ey, alpha, r)
    return ex + rho * math.cos(ang1), ey + rho * math.sin(ang1)


@_njit(cache=True)
def min_pef_value(x0, x1, P, alphas, rs, ex, ey):
    """Smallest constraint value over the coalition at a point."""
    worst = 1e300
    for i in range(P.shape[0]):
        v = pef_value(x0, x1, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
        if v < worst:
            worst = v
    return worst


@_njit(cache=True)
def _boundary_crossings(i, k, P, alphas, rs, ex, ey):
    """Points where the boundaries of enclosure regions i and k cross.

    Scans region i's boundary for sign changes of constraint k, bisects each
    bracket, and polishes with Newton.  Strictly convex boundaries cross at
    most twice; slivers thinner than the scan resolution fall through to the
    caller's fallback.
    """
    out = np.empty((4, 2))
    n_out = 0
    N = 128
    step = TWO_PI / N
    rho = boundary_rho(0.0, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
    prev_f = pef_value(
        ex + rho, ey, P[k, 0], P[k, 1], ex, ey, alphas[k], rs[k]
    )
    prev_ang = 0.0
    for s in range(1, N + 1):
        ang = s * step
        rho = boundary_rho(ang, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
        bx = ex + rho * math.cos(ang)
        by = ey + rho * math.sin(ang)
        f = pef_value(bx, by, P[k, 0], P[k, 1], ex, ey, alphas[k], rs[k])
        if (prev_f < 0.0) != (f < 0.0):
            a = prev_ang
            b = ang
            fa = prev_f
            for _ in range(50):
                mid = 0.5 * (a + b)
                rho_m = boundary_rho(mid, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
                fm = pef_value(
                    ex + rho_m * math.cos(mid),
                    ey + rho_m * math.sin(mid),
                    P[k, 0],
                    P[k, 1],
                    ex,
                    ey,
                    alphas[k],
                    rs[k],
                )
                if (fa < 0.0) != (fm < 0.0):
                    b = mid
                else:
                    a = mid
                    fa = fm
            mid = 0.5 * (a + b)
            rho_m = boundary_rho(mid, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
            cx, cy, ok = _corner_newton(
                ex + rho_m * math.cos(mid),
                ey + rho_m * math.sin(mid),
                i,
                k,
                P,
                alphas,
                rs,
                ex,
                ey,
            )
            if ok and n_out < 4:
                out[n_out, 0] = cx
                out[n_out, 1] = cy
                n_out += 1
        prev_ang = ang
        prev_f = f
    return out, n_out


@_njit(cache=True)
def project_intersection(zx, zy, P, alphas, rs, ex, ey, tol, max_cycles):
    """Project a point onto the intersection of the coalition's enclosure
    regions.

    In the plane the projection has at most two active constraints, so it is
    either a feasible single-region projection or a feasible boundary
    crossing; both candidate sets are finite and evaluated exactly.  Dykstra's
    alternating scheme remains as a fallback for degenerate geometry the
    candidate scan cannot resolve.  Returns (x, y, converged).
    """
    m = P.shape[0]
    if m == 1:
        x0, x1 = project_enclosure(zx, zy, P[0, 0], P[0, 1], ex, ey, alphas[0], rs[0])
        return x0, x1, True
    if min_pef_value(zx, zy, P, alphas, rs, ex, ey) >= 0.0:
        return zx, zy, True
    feas_tol = -1e-9 * (1.0 + math.hypot(zx, zy) + math.hypot(ex, ey))
    best_d = 1e300
    best_x = zx
    best_y = zy
    found = False
    for i in range(m):
        xi, yi = project_enclosure(zx, zy, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
        ok = True
        for k in range(m):
            if k == i:
                continue
            if pef_value(xi, yi, P[k, 0], P[k, 1], ex, ey, alphas[k], rs[k]) < feas_tol:
                ok = False
                break
        if ok:
            d = (xi - zx) * (xi - zx) + (yi - zy) * (yi - zy)
            if d < best_d:
                best_d = d
                best_x = xi
                best_y = yi
                found = True
    if not found:
        for i in range(m):
            for k in range(i + 1, m):
                corners, n_c = _boundary_crossings(i, k, P, alphas, rs, ex, ey)
                for c in range(n_c):
                    cx = corners[c, 0]
                    cy = corners[c, 1]
                    ok = True
                    for q in range(m):
                        if q == i or q == k:
                            continue
                        if pef_value(cx, cy, P[q, 0], P[q, 1], ex, ey, alphas[q], rs[q]) < feas_tol:
                            ok = False
                            break
                    if ok:
                        d = (cx - zx) * (cx - zx) + (cy - zy) * (cy - zy)
                        if d < best_d:
                            best_d = d
                            best_x = cx
                            best_y = cy
                            found = True
    if found:
        return best_x, best_y, True
    # degenerate fallback: Dykstra's scheme with per-region increments
    cx = zx
    cy = zy
    inc = np.zeros((m, 2))
    for _ in range(max_cycles):
        sx = cx
        sy = cy
        for i in range(m):
            ux = cx + inc[i, 0]
            uy = cy + inc[i, 1]
            nx, ny = project_enclosure(ux, uy, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
            inc[i, 0] = ux - nx
            inc[i, 1] = uy - ny
            cx = nx
            cy = ny
        if math.hypot(cx - sx, cy - sy) < tol:
            return cx, cy, True
    return cx, cy, False


@_njit(cache=True)
def goal_value_builtin(zx, zy, kind, gp):
    """Implicit goal function for the built-in region kinds."""
    if kind == GOAL_DISK:
        dx = zx - gp[0]
        dy = zy - gp[1]
        return dx * dx + dy * dy - gp[2] * gp[2]
    dx = (zx - gp[0]) / gp[2]
    dy = (zy - gp[1]) / gp[3]
    return dx * dx + dy * dy - 1.0


@_njit(cache=True)
def goal_project_builtin(zx, zy, kind, gp):
    """Orthogonal projection onto a built-in goal region."""
    if kind == GOAL_DISK:
        cx = gp[0]
        cy = gp[1]
        R = gp[2]
        dx = zx - cx
        dy = zy - cy
        d = math.hypot(dx, dy)
        if d <= R:
            return zx, zy
        return cx + R * dx / d, cy + R * dy / d
    cx = gp[0]
    cy = gp[1]
    a = gp[2]
    b = gp[3]
    p0 = zx - cx
    p1 = zy - cy
    if (p0 / a) * (p0 / a) + (p1 / b) * (p1 / b) <= 1.0:
        return zx, zy
    # root of F(t) = (a p0/(a^2+t))^2 + (b p1/(b^2+t))^2 - 1, decreasing on t > 0
    t_lo = 0.0
    t_hi = max(a, b) * math.hypot(p0, p1) + a * a + b * b
    for _ in range(200):
        v0 = a * p0 / (a * a + t_hi)
        v1 = b * p1 / (b * b + t_hi)
        if v0 * v0 + v1 * v1 <= 1.0:
            break
        t_hi *= 2.0
    for _ in range(120):
        t = 0.5 * (t_lo + t_hi)
        v0 = a * p0 / (a * a + t)
        v1 = b * p1 / (b * b + t)
        if v0 * v0 + v1 * v1 > 1.0:
            t_lo = t
        else:
            t_hi = t
    t = 0.5 * (t_lo + t_hi)
    return cx + a * a * p0 / (a * a + t), cy + b * b * p1 / (b * b + t)


@_njit(cache=True)
def _goal_distance_builtin(x0, x1, kind, gp):
    g0, g1 = goal_project_builtin(x0, x1, kind, gp)
    return math.hypot(x0 - g0, x1 - g1)


@_njit(cache=True)
def _arc_objective(ang, i, P, alphas, rs, ex, ey, kind, gp):
    """Goal distance along constraint i's boundary, with the remaining
    constraints enforced through a large penalty."""
    rho = boundary_rho(ang, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
    bx = ex + rho * math.cos(ang)
    by = ey + rho * math.sin(ang)
    obj = _goal_distance_builtin(bx, by, kind, gp)
    for k in range(P.shape[0]):
        if k == i:
            continue
        v = pef_value(bx, by, P[k, 0], P[k, 1], ex, ey, alphas[k], rs[k])
        if v < 0.0:
            obj += 1e6 * (-v)
    return obj


@_njit(cache=True)
def _arc_polish(x0, x1, i, P, alphas, rs, ex, ey, kind, gp):
    """Refine the boundary point of constraint i near the current iterate to
    the local minimizer of distance to the goal region: golden section with
    feasibility penalties, then a secant pass on the tangency condition."""
    px = P[i, 0]
    py = P[i, 1]
    al = alphas[i]
    rr = rs[i]
    mid = math.atan2(x1 - ey, x0 - ex)
    a = mid - 0.02
    b = mid + 0.02
    lo = a
    hi = b
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = _arc_objective(c, i, P, alphas, rs, ex, ey, kind, gp)
    fd = _arc_objective(d, i, P, alphas, rs, ex, ey, kind, gp)
    for _ in range(40):
        if fc < fd:
            b = d
            d = c
            fd = fc
            c = b - _INV_PHI * (b - a)
            fc = _arc_objective(c, i, P, alphas, rs, ex, ey, kind, gp)
        else:
            a = c
            c = d
            fc = fd
            d = a + _INV_PHI * (b - a)
            fd = _arc_objective(d, i, P, alphas, rs, ex, ey, kind, gp)
    # secant on (b(ang) - proj_goal(b(ang))) . b'(ang) = 0
    ang0 = 0.5 * (a + b)
    bx, by, tx, ty = _boundary_and_tangent(ang0, px, py, ex, ey, al, rr)
    g0x, g0y = goal_project_builtin(bx, by, kind, gp)
    t0 = (bx - g0x) * tx + (by - g0y) * ty
    ang1 = ang0 + 1e-7
    for _ in range(12):
        bx, by, tx, ty = _boundary_and_tangent(ang1, px, py, ex, ey, al, rr)
        g0x, g0y = goal_project_builtin(bx, by, kind, gp)
        t1 = (bx - g0x) * tx + (by - g0y) * ty
        if t1 == t0:
            break
        ang2 = ang1 - t1 * (ang1 - ang0) / (t1 - t0)
        if ang2 < lo:
            ang2 = lo
        elif ang2 > hi:
            ang2 = hi
        ang0 = ang1
        t0 = t1
        ang1 = ang2
        if abs(ang1 - ang0) < 1e-15:
            break
    rho = boundary_rho(ang1, px, py, ex, ey, al, rr)
    return ex + rho * math.cos(ang1), ey + rho * math.sin(ang1)


@_njit(cache=True)
def _corner_newton(x0, x1, i, k, P, alphas, rs, ex, ey):
    """Newton iteration onto the crossing of two constraint boundaries.

    Returns (x, y, ok); fails if the constraint gradients become parallel.
    """
    cx = x0
    cy = x1
    for _ in range(40):
        fi = pef_value(cx, cy, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
        fk = pef_value(cx, cy, P[k, 0], P[k, 1], ex, ey, alphas[k], rs[k])
        if abs(fi) < 1e-13 and abs(fk) < 1e-13:
            return cx, cy, True
        dpi = math.hypot(cx - P[i, 0], cy - P[i, 1])
        dei = math.hypot(cx - ex, cy - ey)
        dpk = math.hypot(cx - P[k, 0], cy - P[k, 1])
        if dpi < 1e-12 or dei < 1e-12 or dpk < 1e-12:
            return cx, cy, False
        g1x = (cx - P[i, 0]) / dpi - alphas[i] * (cx - ex) / dei
        g1y = (cy - P[i, 1]) / dpi - alphas[i] * (cy - ey) / dei
        g2x = (cx - P[k, 0]) / dpk - alphas[k] * (cx - ex) / dei
        g2y = (cy - P[k, 1]) / dpk - alphas[k] * (cy - ey) / dei
        det = g1x * g2y - g1y * g2x
        if abs(det) < 1e-12:
            return cx, cy, False
        cx += (-fi * g2y + fk * g1y) / det
        cy += (fi * g2x - fk * g1x) / det
    fi = pef_value(cx, cy, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
    fk = pef_value(cx, cy, P[k, 0], P[k, 1], ex, ey, alphas[k], rs[k])
    return cx, cy, abs(fi) < 1e-9 and abs(fk) < 1e-9


@_njit(cache=True)
def _two_smallest_abs(vals):
    """Indices of the two smallest |vals| entries (second is -1 if len 1)."""
    i1 = 0
    best = abs(vals[0])
    for i in range(1, vals.shape[0]):
        if abs(vals[i]) < best:
            best = abs(vals[i])
            i1 = i
    i2 = -1
    second = 1e300
    for i in range(vals.shape[0]):
        if i != i1 and abs(vals[i]) < second:
            second = abs(vals[i])
            i2 = i
    return i1, i2


@_njit(cache=True)
def solve_min_dist(P, alphas, rs, ex, ey, kind, gp, eps_dist, max_iter, wx, wy, has_warm):
    """Minimum-distance pair between the coalition enclosure intersection and a
    built-in goal region.

    Alternation of exact projections onto the two convex bodies, a touching
    test on every cycle, and a local polish (boundary golden section; corner
    Newton when two constraints are active) once the alternation settles.
    Returns (xi0, xi1, xg0, xg1, status, iterations).
    """
    m = P.shape[0]
    dyk_tol = eps_dist * 0.1
    if has_warm:
        x0, x1, _ = project_intersection(wx, wy, P, alphas, rs, ex, ey, dyk_tol, 2000)
    else:
        x0 = ex
        x1 = ey
    if goal_value_builtin(x0, x1, kind, gp) <= 0.0:
        return x0, x1, x0, x1, STATUS_TOUCHING, 0
    y0, y1 = goal_project_builtin(x0, x1, kind, gp)
    it = 0
    status = STATUS_MAXITER
    prev_move = 1e300
    stagnant = 0
    loose = 1e-6 * (1.0 + math.hypot(x0, x1))
    while it < max_iter:
        it += 1
        if min_pef_value(y0, y1, P, alphas, rs, ex, ey) >= 0.0:
            return y0, y1, y0, y1, STATUS_TOUCHING, it
        nx0, nx1, _ = project_intersection(y0, y1, P, alphas, rs, ex, ey, dyk_tol, 1000)
        if goal_value_builtin(nx0, nx1, kind, gp) <= 0.0:
            return nx0, nx1, nx0, nx1, STATUS_TOUCHING, it
        ny0, ny1 = goal_project_builtin(nx0, nx1, kind, gp)
        move = math.hypot(nx0 - x0, nx1 - x1) + math.hypot(ny0 - y0, ny1 - y1)
        x0 = nx0
        x1 = nx1
        y0 = ny0
        y1 = ny1
        if move < eps_dist:
            status = STATUS_OK
            break
        # slow linear contraction: once displacement is small and no longer
        # shrinking, hand over to the polish instead of burning the budget
        if move < loose and move > 0.5 * prev_move:
            stagnant += 1
            if stagnant >= 5:
                status = STATUS_OK
                break
        else:
            stagnant = 0
        prev_move = move
    if status != STATUS_OK:
        return x0, x1, y0, y1, status, it

    # Local polish: candidates from each near-active boundary arc and from the
    # two-constraint corner; keep the best feasible one.
    fvals = np.empty(m)
    for i in range(m):
        fvals[i] = pef_value(x0, x1, P[i, 0], P[i, 1], ex, ey, alphas[i], rs[i])
    i1, i2 = _two_smallest_abs(fvals)
    scale = 1.0 + math.hypot(x0, x1)
    base_rho = math.hypot(x0 - y0, x1 - y1)

    cand_x = np.empty((3, 2))
    n_cand = 0
    px0, px1 = _arc_polish(x0, x1, i1, P, alphas, rs, ex, ey, kind, gp)
    cand_x[n_cand, 0] = px0
    cand_x[n_cand, 1] = px1
    n_cand += 1
    if i2 >= 0 and abs(fvals[i2]) < 1e-2 * scale:
        px0, px1 = _arc_polish(x0, x1, i2, P, alphas, rs, ex, ey, kind, gp)
        cand_x[n_cand, 0] = px0
        cand_x[n_cand, 1] = px1
        n_cand += 1
        cx0, cx1, ok = _corner_newton(x0, x1, i1, i2, P, alphas, rs, ex, ey)
        if ok:
            cand_x[n_cand, 0] = cx0
            cand_x[n_cand, 1] = cx1
            n_cand += 1
    pol_rho = 1e300
    pol_x0 = pol_x1 = pol_y0 = pol_y1 = 0.0
    for c in range(n_cand):
        qx = cand_x[c, 0]
        qy = cand_x[c, 1]
        if min_pef_value(qx, qy, P, alphas, rs, ex, ey) < -1e-9 * scale:
            continue
        gx, gy = goal_project_builtin(qx, qy, kind, gp)
        rho_c = math.hypot(qx - gx, qy - gy)
        if rho_c < pol_rho:
            pol_rho = rho_c
            pol_x0 = qx
            pol_x1 = qy
            pol_y0 = gx
            pol_y1 = gy
    # A polished point is exactly on its boundary, so prefer it unless it is
    # clearly worse than the (possibly slightly infeasible) alternation result.
    if pol_rho < base_rho + 1e-7 * scale:
        return pol_x0, pol_x1, pol_y0, pol_y1, STATUS_OK, it
    return x0, x1, y0, y1, STATUS_OK, it
