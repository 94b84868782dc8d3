"""Pure-Python fallback for the numerical hot kernels.

The compiled extension ``circulant3._ckernels`` implements the same
functions with C doubles; this module keeps the package usable without a
C toolchain and serves as the reference in the backend parity tests.
Every routine works on the four structure parameters (m, d, u, c) of a
strongly symmetric circulant tensor and never materializes the 3^m entry
array: the form, its gradient and its Hessian all reduce to a handful of
scalar powers of x1, x2, x3 and their pairwise/triple sums.
"""

from __future__ import annotations

import math

BACKEND = "python"


def eval_form(m, d, u, c, x1, x2, x3):
    """Value of the degree-m form at (x1, x2, x3)."""
    p = x1**m + x2**m + x3**m
    q = (x1 + x2) ** m + (x1 + x3) ** m + (x2 + x3) ** m
    s = (x1 + x2 + x3) ** m
    return d * p + u * (q - 2.0 * p) + c * (s - q + p)


def apply_power(m, d, u, c, x1, x2, x3):
    """Components of A x^{m-1}, i.e. the form gradient divided by m."""
    e = m - 1
    a1 = x1**e
    a2 = x2**e
    a3 = x3**e
    b12 = (x1 + x2) ** e
    b13 = (x1 + x3) ** e
    b23 = (x2 + x3) ** e
    t = (x1 + x2 + x3) ** e
    g1 = d * a1 + u * (b12 + b13 - 2.0 * a1) + c * (t - b12 - b13 + a1)
    g2 = d * a2 + u * (b12 + b23 - 2.0 * a2) + c * (t - b12 - b23 + a2)
    g3 = d * a3 + u * (b13 + b23 - 2.0 * a3) + c * (t - b13 - b23 + a3)
    return g1, g2, g3


def power_jacobian(m, d, u, c, x1, x2, x3):
    """Jacobian of x -> A x^{m-1}, returned as (J11, J22, J33, J12, J13, J23)."""
    e = m - 2
    w = m - 1.0
    a1 = x1**e
    a2 = x2**e
    a3 = x3**e
    b12 = (x1 + x2) ** e
    b13 = (x1 + x3) ** e
    b23 = (x2 + x3) ** e
    t = (x1 + x2 + x3) ** e
    j11 = w * (d * a1 + u * (b12 + b13 - 2.0 * a1) + c * (t - b12 - b13 + a1))
    j22 = w * (d * a2 + u * (b12 + b23 - 2.0 * a2) + c * (t - b12 - b23 + a2))
    j33 = w * (d * a3 + u * (b13 + b23 - 2.0 * a3) + c * (t - b13 - b23 + a3))
    j12 = w * (u * b12 + c * (t - b12))
    j13 = w * (u * b13 + c * (t - b13))
    j23 = w * (u * b23 + c * (t - b23))
    return j11, j22, j33, j12, j13, j23


def _norm_m(m, x1, x2, x3):
    return (abs(x1) ** m + abs(x2) ** m + abs(x3) ** m) ** (1.0 / m)


def _solve4(a, b):
    """Solve a 4x4 linear system in place (partial pivoting).

    `a` is a flat row-major list of 16 floats, `b` a list of 4 floats.
    Returns the solution list or None when the pivot collapses.
    """
    idx = [0, 1, 2, 3]
    for col in range(4):
        piv = col
        big = abs(a[idx[col] * 4 + col])
        for r in range(col + 1, 4):
            v = abs(a[idx[r] * 4 + col])
            if v > big:
                big = v
                piv = r
        if big == 0.0 or not math.isfinite(big):
            return None
        if piv != col:
            idx[col], idx[piv] = idx[piv], idx[col]
        prow = idx[col]
        pval = a[prow * 4 + col]
        for r in range(col + 1, 4):
            row = idx[r]
            fac = a[row * 4 + col] / pval
            if fac != 0.0:
                for k in range(col, 4):
                    a[row * 4 + k] -= fac * a[prow * 4 + k]
                b[row] -= fac * b[prow]
    x = [0.0, 0.0, 0.0, 0.0]
    for col in range(3, -1, -1):
        row = idx[col]
        s = b[row]
        for k in range(col + 1, 4):
            s -= a[row * 4 + k] * x[k]
        p = a[row * 4 + col]
        if p == 0.0 or not math.isfinite(p):
            return None
        x[col] = s / p
    return x


def kkt_newton(m, d, u, c, x1, x2, x3, lam, iters):
    """Newton refinement of the eigenpair system A x^{m-1} = lam x^[m-1], |x|_m = 1.

    Returns (lam, x1, x2, x3, residual); keeps the best iterate seen and
    falls back to the input when the 4x4 Jacobian solve degenerates.
    """
    e1 = m - 1
    e2 = m - 2
    bl, b1, b2, b3, bres = lam, x1, x2, x3, math.inf
    for _ in range(iters):
        g1, g2, g3 = apply_power(m, d, u, c, x1, x2, x3)
        p1 = x1**e1
        p2 = x2**e1
        p3 = x3**e1
        s = abs(x1) ** m + abs(x2) ** m + abs(x3) ** m
        f0 = g1 - lam * p1
        f1 = g2 - lam * p2
        f2 = g3 - lam * p3
        f3 = (s - 1.0) / m
        res = max(abs(f0), abs(f1), abs(f2), abs(f3))
        if res < bres:
            bl, b1, b2, b3, bres = lam, x1, x2, x3, res
        if res == 0.0:
            break
        j11, j22, j33, j12, j13, j23 = power_jacobian(m, d, u, c, x1, x2, x3)
        w = lam * (m - 1.0)
        a = [
            j11 - w * x1**e2, j12, j13, -p1,
            j12, j22 - w * x2**e2, j23, -p2,
            j13, j23, j33 - w * x3**e2, -p3,
            p1, p2, p3, 0.0,
        ]
        rhs = [-f0, -f1, -f2, -f3]
        sol = _solve4(a, rhs)
        if sol is None:
            break
        step = max(abs(sol[0]), abs(sol[1]), abs(sol[2]))
        if step > 0.5:
            sc = 0.5 / step
            sol = [v * sc for v in sol]
        x1 += sol[0]
        x2 += sol[1]
        x3 += sol[2]
        lam += sol[3]
        if not (math.isfinite(x1) and math.isfinite(x2) and math.isfinite(x3) and math.isfinite(lam)):
            return bl, b1, b2, b3, bres
    # renormalize the best iterate and recompute its data
    n = _norm_m(m, b1, b2, b3)
    if n > 0.0 and math.isfinite(n):
        b1 /= n
        b2 /= n
        b3 /= n
    lam = eval_form(m, d, u, c, b1, b2, b3)
    g1, g2, g3 = apply_power(m, d, u, c, b1, b2, b3)
    res = max(
        abs(g1 - lam * b1**e1),
        abs(g2 - lam * b2**e1),
        abs(g3 - lam * b3**e1),
    )
    return lam, b1, b2, b3, res


def minimize_from(m, d, u, c, x1, x2, x3, max_iters, tol):
    """Projected descent on the quotient f(x)/|x|_m^m from one start.

    Backtracking descent steps on the unit |.|_m sphere, switching to
    Newton on the eigenpair system once the residual is small. Returns
    (lam, x1, x2, x3, residual, iterations).
    """
    e1 = m - 1
    n = _norm_m(m, x1, x2, x3)
    if n == 0.0 or not math.isfinite(n):
        return math.inf, x1, x2, x3, math.inf, 0
    x1 /= n
    x2 /= n
    x3 /= n
    eta = 0.1
    it = 0
    scale = 1.0
    for it in range(1, max_iters + 1):
        g1, g2, g3 = apply_power(m, d, u, c, x1, x2, x3)
        f = x1 * g1 + x2 * g2 + x3 * g3
        r1 = g1 - f * x1**e1
        r2 = g2 - f * x2**e1
        r3 = g3 - f * x3**e1
        res = max(abs(r1), abs(r2), abs(r3))
        scale = max(1.0, abs(f), abs(g1), abs(g2), abs(g3))
        if res <= 1e-5 * scale:
            break
        rr = r1 * r1 + r2 * r2 + r3 * r3
        accepted = False
        for _ in range(40):
            y1 = x1 - eta * r1
            y2 = x2 - eta * r2
            y3 = x3 - eta * r3
            ny = _norm_m(m, y1, y2, y3)
            if ny > 0.0 and math.isfinite(ny):
                y1n = y1 / ny
                y2n = y2 / ny
                y3n = y3 / ny
                fy = eval_form(m, d, u, c, y1n, y2n, y3n)
                if fy <= f - 1e-4 * eta * rr:
                    x1, x2, x3 = y1n, y2n, y3n
                    accepted = True
                    break
            eta *= 0.5
            if eta < 1e-18:
                break
        if not accepted:
            break
        eta = min(eta * 1.8, 1e3)
    f = eval_form(m, d, u, c, x1, x2, x3)
    lam, x1, x2, x3, res = kkt_newton(m, d, u, c, x1, x2, x3, f, 30)
    if res > tol * scale:
        # one more descent/Newton round from the polished point
        lam2, a1, a2, a3, res2 = kkt_newton(m, d, u, c, x1, x2, x3, lam, 30)
        if res2 < res:
            lam, x1, x2, x3, res = lam2, a1, a2, a3, res2
    return lam, x1, x2, x3, res, it


def minimize_batch(m, d, u, c, starts, max_iters, tol):
    """Run minimize_from over an iterable of (x1, x2, x3) starts; keep the best.

    Returns (lam, x1, x2, x3, residual, starts_used).
    """
    best = (math.inf, 0.0, 0.0, 0.0, math.inf)
    used = 0
    for s1, s2, s3 in starts:
        used += 1
        lam, x1, x2, x3, res, _ = minimize_from(m, d, u, c, s1, s2, s3, max_iters, tol)
        if lam < best[0] or (lam == best[0] and res < best[4]):
            best = (lam, x1, x2, x3, res)
    return best[0], best[1], best[2], best[3], best[4], used


def scan_two_equal(m, d, u, c, n_grid, polish_iters):
    """One-dimensional scan over x = (cos t, cos t, sin t), t in [0, pi).

    Every vector with at least two equal coordinates is a permutation of
    +-(s, s, t), so for the fully symmetric form this section covers the
    whole two-equal-coordinate family. Grid minima are polished by Newton
    on the section quotient, then by Newton on the full eigenpair system.
    Returns (lam, x1, x2, x3, residual).
    """
    h = math.pi / n_grid
    vals = []
    for i in range(n_grid):
        t = i * h
        ct = math.cos(t)
        st = math.sin(t)
        s = abs(ct) ** m * 2.0 + abs(st) ** m
        vals.append(eval_form(m, d, u, c, ct, ct, st) / s)
    best = (math.inf, 0.0, 0.0, 0.0, math.inf)
    for i in range(n_grid):
        prev = vals[(i - 1) % n_grid]
        nxt = vals[(i + 1) % n_grid]
        if not (vals[i] <= prev and vals[i] <= nxt):
            continue
        theta = i * h
        # Newton on the section quotient R(t) = f(x(t)) / S(x(t))
        for _ in range(polish_iters):
            ct = math.cos(theta)
            st = math.sin(theta)
            x1, x2, x3 = ct, ct, st
            d1, d2, d3 = -st, -st, ct
            g1, g2, g3 = apply_power(m, d, u, c, x1, x2, x3)
            f = x1 * g1 + x2 * g2 + x3 * g3
            s = abs(x1) ** m + abs(x2) ** m + abs(x3) ** m
            fp = m * (g1 * d1 + g2 * d2 + g3 * d3)
            j11, j22, j33, j12, j13, j23 = power_jacobian(m, d, u, c, x1, x2, x3)
            jq = (
                j11 * d1 * d1
                + j22 * d2 * d2
                + j33 * d3 * d3
                + 2.0 * (j12 * d1 * d2 + j13 * d1 * d3 + j23 * d2 * d3)
            )
            fpp = m * jq - m * f
            e1 = m - 1
            sp = m * (x1**e1 * d1 + x2**e1 * d2 + x3**e1 * d3)
            spp = m * (m - 1.0) * (x1 ** (m - 2) * d1 * d1 + x2 ** (m - 2) * d2 * d2 + x3 ** (m - 2) * d3 * d3) - m * s
            rp = (fp * s - f * sp) / (s * s)
            rpp = (fpp * s - f * spp) / (s * s) - 2.0 * (sp / s) * rp
            if rpp <= 0.0 or not math.isfinite(rpp):
                break
            step = rp / rpp
            if abs(step) > 2.0 * h:
                step = math.copysign(2.0 * h, step)
            theta -= step
            if abs(step) < 1e-16:
                break
        ct = math.cos(theta)
        st = math.sin(theta)
        n = _norm_m(m, ct, ct, st)
        x1, x2, x3 = ct / n, ct / n, st / n
        f = eval_form(m, d, u, c, x1, x2, x3)
        lam, x1, x2, x3, res = kkt_newton(m, d, u, c, x1, x2, x3, f, 20)
        if lam < best[0] or (lam == best[0] and res < best[4]):
            best = (lam, x1, x2, x3, res)
    return best
