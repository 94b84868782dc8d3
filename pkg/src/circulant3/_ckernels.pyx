# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of ``circulant3._pykernels``.

Same functions, same algorithms, C doubles throughout. The pure-Python
module is the reference; the parity tests in the suite hold the two
backends together. Keep edits synchronized.
"""

from libc.math cimport cos, sin, fabs, pow, copysign, isfinite, INFINITY, M_PI
from libc.stdlib cimport malloc, free

BACKEND = "compiled"


cdef inline double _eval_form(int m, double d, double u, double c,
                              double x1, double x2, double x3) noexcept nogil:
    cdef double p = pow(x1, m) + pow(x2, m) + pow(x3, m)
    cdef double q = pow(x1 + x2, m) + pow(x1 + x3, m) + pow(x2 + x3, m)
    cdef double s = pow(x1 + x2 + x3, m)
    return d * p + u * (q - 2.0 * p) + c * (s - q + p)


cdef inline void _apply_power(int m, double d, double u, double c,
                              double x1, double x2, double x3, double* g) noexcept nogil:
    cdef int e = m - 1
    cdef double a1 = pow(x1, e)
    cdef double a2 = pow(x2, e)
    cdef double a3 = pow(x3, e)
    cdef double b12 = pow(x1 + x2, e)
    cdef double b13 = pow(x1 + x3, e)
    cdef double b23 = pow(x2 + x3, e)
    cdef double t = pow(x1 + x2 + x3, e)
    g[0] = d * a1 + u * (b12 + b13 - 2.0 * a1) + c * (t - b12 - b13 + a1)
    g[1] = d * a2 + u * (b12 + b23 - 2.0 * a2) + c * (t - b12 - b23 + a2)
    g[2] = d * a3 + u * (b13 + b23 - 2.0 * a3) + c * (t - b13 - b23 + a3)


cdef inline void _power_jacobian(int m, double d, double u, double c,
                                 double x1, double x2, double x3, double* j) noexcept nogil:
    cdef int e = m - 2
    cdef double w = m - 1.0
    cdef double a1 = pow(x1, e)
    cdef double a2 = pow(x2, e)
    cdef double a3 = pow(x3, e)
    cdef double b12 = pow(x1 + x2, e)
    cdef double b13 = pow(x1 + x3, e)
    cdef double b23 = pow(x2 + x3, e)
    cdef double t = pow(x1 + x2 + x3, e)
    j[0] = w * (d * a1 + u * (b12 + b13 - 2.0 * a1) + c * (t - b12 - b13 + a1))
    j[1] = w * (d * a2 + u * (b12 + b23 - 2.0 * a2) + c * (t - b12 - b23 + a2))
    j[2] = w * (d * a3 + u * (b13 + b23 - 2.0 * a3) + c * (t - b13 - b23 + a3))
    j[3] = w * (u * b12 + c * (t - b12))
    j[4] = w * (u * b13 + c * (t - b13))
    j[5] = w * (u * b23 + c * (t - b23))


cdef inline double _norm_m(int m, double x1, double x2, double x3) noexcept nogil:
    return pow(pow(fabs(x1), m) + pow(fabs(x2), m) + pow(fabs(x3), m), 1.0 / m)


cdef int _solve4(double* a, double* b, double* x) noexcept nogil:
    # partial-pivot Gaussian elimination on a 4x4 row-major system
    cdef int idx[4]
    cdef int col, r, k, piv, prow, row
    cdef double big, v, pval, fac, s, p
    for col in range(4):
        idx[col] = col
    for col in range(4):
        piv = col
        big = fabs(a[idx[col] * 4 + col])
        for r in range(col + 1, 4):
            v = fabs(a[idx[r] * 4 + col])
            if v > big:
                big = v
                piv = r
        if big == 0.0 or not isfinite(big):
            return 0
        if piv != col:
            k = idx[col]
            idx[col] = idx[piv]
            idx[piv] = k
        prow = idx[col]
        pval = a[prow * 4 + col]
        for r in range(col + 1, 4):
            row = idx[r]
            fac = a[row * 4 + col] / pval
            if fac != 0.0:
                for k in range(col, 4):
                    a[row * 4 + k] -= fac * a[prow * 4 + k]
                b[row] -= fac * b[prow]
    for col in range(3, -1, -1):
        row = idx[col]
        s = b[row]
        for k in range(col + 1, 4):
            s -= a[row * 4 + k] * x[k]
        p = a[row * 4 + col]
        if p == 0.0 or not isfinite(p):
            return 0
        x[col] = s / p
    return 1


cdef void _kkt_newton(int m, double d, double u, double c,
                      double x1, double x2, double x3, double lam, int iters,
                      double* out) noexcept nogil:
    cdef int e1 = m - 1
    cdef int e2 = m - 2
    cdef double bl = lam, b1 = x1, b2 = x2, b3 = x3, bres = INFINITY
    cdef double g[3]
    cdef double j[6]
    cdef double a[16]
    cdef double rhs[4]
    cdef double sol[4]
    cdef double p1, p2, p3, s, f0, f1, f2, f3, res, w, step, sc, n
    cdef int it
    for it in range(iters):
        _apply_power(m, d, u, c, x1, x2, x3, g)
        p1 = pow(x1, e1)
        p2 = pow(x2, e1)
        p3 = pow(x3, e1)
        s = pow(fabs(x1), m) + pow(fabs(x2), m) + pow(fabs(x3), m)
        f0 = g[0] - lam * p1
        f1 = g[1] - lam * p2
        f2 = g[2] - lam * p3
        f3 = (s - 1.0) / m
        res = fabs(f0)
        if fabs(f1) > res:
            res = fabs(f1)
        if fabs(f2) > res:
            res = fabs(f2)
        if fabs(f3) > res:
            res = fabs(f3)
        if res < bres:
            bl = lam
            b1 = x1
            b2 = x2
            b3 = x3
            bres = res
        if res == 0.0:
            break
        _power_jacobian(m, d, u, c, x1, x2, x3, j)
        w = lam * (m - 1.0)
        a[0] = j[0] - w * pow(x1, e2); a[1] = j[3]; a[2] = j[4]; a[3] = -p1
        a[4] = j[3]; a[5] = j[1] - w * pow(x2, e2); a[6] = j[5]; a[7] = -p2
        a[8] = j[4]; a[9] = j[5]; a[10] = j[2] - w * pow(x3, e2); a[11] = -p3
        a[12] = p1; a[13] = p2; a[14] = p3; a[15] = 0.0
        rhs[0] = -f0
        rhs[1] = -f1
        rhs[2] = -f2
        rhs[3] = -f3
        if not _solve4(a, rhs, sol):
            break
        step = fabs(sol[0])
        if fabs(sol[1]) > step:
            step = fabs(sol[1])
        if fabs(sol[2]) > step:
            step = fabs(sol[2])
        if step > 0.5:
            sc = 0.5 / step
            sol[0] *= sc
            sol[1] *= sc
            sol[2] *= sc
            sol[3] *= sc
        x1 += sol[0]
        x2 += sol[1]
        x3 += sol[2]
        lam += sol[3]
        if not (isfinite(x1) and isfinite(x2) and isfinite(x3) and isfinite(lam)):
            out[0] = bl
            out[1] = b1
            out[2] = b2
            out[3] = b3
            out[4] = bres
            return
    n = _norm_m(m, b1, b2, b3)
    if n > 0.0 and isfinite(n):
        b1 /= n
        b2 /= n
        b3 /= n
    lam = _eval_form(m, d, u, c, b1, b2, b3)
    _apply_power(m, d, u, c, b1, b2, b3, g)
    res = fabs(g[0] - lam * pow(b1, e1))
    if fabs(g[1] - lam * pow(b2, e1)) > res:
        res = fabs(g[1] - lam * pow(b2, e1))
    if fabs(g[2] - lam * pow(b3, e1)) > res:
        res = fabs(g[2] - lam * pow(b3, e1))
    out[0] = lam
    out[1] = b1
    out[2] = b2
    out[3] = b3
    out[4] = res


cdef int _minimize_from(int m, double d, double u, double c,
                        double x1, double x2, double x3, int max_iters, double tol,
                        double* out) noexcept nogil:
    cdef int e1 = m - 1
    cdef double n = _norm_m(m, x1, x2, x3)
    cdef double g[3]
    cdef double o2[5]
    cdef double f, r1, r2, r3, res, scale, rr, y1, y2, y3, ny, y1n, y2n, y3n, fy
    cdef double eta = 0.1
    cdef int it = 0
    cdef int bt, accepted
    if n == 0.0 or not isfinite(n):
        out[0] = INFINITY
        out[1] = x1
        out[2] = x2
        out[3] = x3
        out[4] = INFINITY
        return 0
    x1 /= n
    x2 /= n
    x3 /= n
    scale = 1.0
    for it in range(1, max_iters + 1):
        _apply_power(m, d, u, c, x1, x2, x3, g)
        f = x1 * g[0] + x2 * g[1] + x3 * g[2]
        r1 = g[0] - f * pow(x1, e1)
        r2 = g[1] - f * pow(x2, e1)
        r3 = g[2] - f * pow(x3, e1)
        res = fabs(r1)
        if fabs(r2) > res:
            res = fabs(r2)
        if fabs(r3) > res:
            res = fabs(r3)
        scale = 1.0
        if fabs(f) > scale:
            scale = fabs(f)
        if fabs(g[0]) > scale:
            scale = fabs(g[0])
        if fabs(g[1]) > scale:
            scale = fabs(g[1])
        if fabs(g[2]) > scale:
            scale = fabs(g[2])
        if res <= 1e-5 * scale:
            break
        rr = r1 * r1 + r2 * r2 + r3 * r3
        accepted = 0
        for bt in range(40):
            y1 = x1 - eta * r1
            y2 = x2 - eta * r2
            y3 = x3 - eta * r3
            ny = _norm_m(m, y1, y2, y3)
            if ny > 0.0 and isfinite(ny):
                y1n = y1 / ny
                y2n = y2 / ny
                y3n = y3 / ny
                fy = _eval_form(m, d, u, c, y1n, y2n, y3n)
                if fy <= f - 1e-4 * eta * rr:
                    x1 = y1n
                    x2 = y2n
                    x3 = y3n
                    accepted = 1
                    break
            eta *= 0.5
            if eta < 1e-18:
                break
        if not accepted:
            break
        eta *= 1.8
        if eta > 1e3:
            eta = 1e3
    f = _eval_form(m, d, u, c, x1, x2, x3)
    _kkt_newton(m, d, u, c, x1, x2, x3, f, 30, out)
    if out[4] > tol * scale:
        _kkt_newton(m, d, u, c, out[1], out[2], out[3], out[0], 30, o2)
        if o2[4] < out[4]:
            out[0] = o2[0]
            out[1] = o2[1]
            out[2] = o2[2]
            out[3] = o2[3]
            out[4] = o2[4]
    return it


def eval_form(m, d, u, c, x1, x2, x3):
    """Value of the degree-m form at (x1, x2, x3)."""
    return _eval_form(m, d, u, c, x1, x2, x3)


def apply_power(m, d, u, c, x1, x2, x3):
    """Components of A x^{m-1}, i.e. the form gradient divided by m."""
    cdef double g[3]
    _apply_power(m, d, u, c, x1, x2, x3, g)
    return g[0], g[1], g[2]


def power_jacobian(m, d, u, c, x1, x2, x3):
    """Jacobian of x -> A x^{m-1}, returned as (J11, J22, J33, J12, J13, J23)."""
    cdef double j[6]
    _power_jacobian(m, d, u, c, x1, x2, x3, j)
    return j[0], j[1], j[2], j[3], j[4], j[5]


def kkt_newton(m, d, u, c, x1, x2, x3, lam, iters):
    """Newton refinement of the eigenpair system; see the pure backend."""
    cdef double out[5]
    _kkt_newton(m, d, u, c, x1, x2, x3, lam, iters, out)
    return out[0], out[1], out[2], out[3], out[4]


def minimize_from(m, d, u, c, x1, x2, x3, max_iters, tol):
    """Projected descent plus Newton polish from one start."""
    cdef double out[5]
    cdef int it = _minimize_from(m, d, u, c, x1, x2, x3, max_iters, tol, out)
    return out[0], out[1], out[2], out[3], out[4], it


def minimize_batch(m, d, u, c, starts, max_iters, tol):
    """Run minimize_from over an iterable of starts; keep the best result."""
    cdef double out[5]
    cdef double bl = INFINITY, b1 = 0.0, b2 = 0.0, b3 = 0.0, bres = INFINITY
    cdef int used = 0
    cdef double s1, s2, s3
    for start in starts:
        s1, s2, s3 = start
        used += 1
        _minimize_from(m, d, u, c, s1, s2, s3, max_iters, tol, out)
        if out[0] < bl or (out[0] == bl and out[4] < bres):
            bl = out[0]
            b1 = out[1]
            b2 = out[2]
            b3 = out[3]
            bres = out[4]
    return bl, b1, b2, b3, bres, used


def scan_two_equal(m, d, u, c, n_grid, polish_iters):
    """1-D scan over x = (cos t, cos t, sin t); see the pure backend."""
    cdef int ng = n_grid
    cdef int mi = m
    cdef int npolish = polish_iters
    cdef double dd = d, du = u, dc = c
    cdef double h = M_PI / ng
    cdef double* vals = <double*> malloc(ng * sizeof(double))
    if vals == NULL:
        raise MemoryError()
    cdef double bl = INFINITY, b1 = 0.0, b2 = 0.0, b3 = 0.0, bres = INFINITY
    cdef double t, ct, st, s, prev, nxt, theta
    cdef double x1, x2, x3, d1, d2, d3, f, fp, jq, fpp, sp, spp, rp, rpp, step, n
    cdef double g[3]
    cdef double j[6]
    cdef double out[5]
    cdef int i, p, e1
    e1 = mi - 1
    with nogil:
        for i in range(ng):
            t = i * h
            ct = cos(t)
            st = sin(t)
            s = 2.0 * pow(fabs(ct), mi) + pow(fabs(st), mi)
            vals[i] = _eval_form(mi, dd, du, dc, ct, ct, st) / s
        for i in range(ng):
            prev = vals[(i - 1 + ng) % ng]
            nxt = vals[(i + 1) % ng]
            if not (vals[i] <= prev and vals[i] <= nxt):
                continue
            theta = i * h
            for p in range(npolish):
                ct = cos(theta)
                st = sin(theta)
                x1 = ct
                x2 = ct
                x3 = st
                d1 = -st
                d2 = -st
                d3 = ct
                _apply_power(mi, dd, du, dc, x1, x2, x3, g)
                f = x1 * g[0] + x2 * g[1] + x3 * g[2]
                s = pow(fabs(x1), mi) + pow(fabs(x2), mi) + pow(fabs(x3), mi)
                fp = mi * (g[0] * d1 + g[1] * d2 + g[2] * d3)
                _power_jacobian(mi, dd, du, dc, x1, x2, x3, j)
                jq = (j[0] * d1 * d1 + j[1] * d2 * d2 + j[2] * d3 * d3
                      + 2.0 * (j[3] * d1 * d2 + j[4] * d1 * d3 + j[5] * d2 * d3))
                fpp = mi * jq - mi * f
                sp = mi * (pow(x1, e1) * d1 + pow(x2, e1) * d2 + pow(x3, e1) * d3)
                spp = mi * (mi - 1.0) * (pow(x1, mi - 2) * d1 * d1
                                         + pow(x2, mi - 2) * d2 * d2
                                         + pow(x3, mi - 2) * d3 * d3) - mi * s
                rp = (fp * s - f * sp) / (s * s)
                rpp = (fpp * s - f * spp) / (s * s) - 2.0 * (sp / s) * rp
                if rpp <= 0.0 or not isfinite(rpp):
                    break
                step = rp / rpp
                if fabs(step) > 2.0 * h:
                    step = copysign(2.0 * h, step)
                theta -= step
                if fabs(step) < 1e-16:
                    break
            ct = cos(theta)
            st = sin(theta)
            n = _norm_m(mi, ct, ct, st)
            x1 = ct / n
            x2 = ct / n
            x3 = st / n
            f = _eval_form(mi, dd, du, dc, x1, x2, x3)
            _kkt_newton(mi, dd, du, dc, x1, x2, x3, f, 20, out)
            if out[0] < bl or (out[0] == bl and out[4] < bres):
                bl = out[0]
                b1 = out[1]
                b2 = out[2]
                b3 = out[3]
                bres = out[4]
    free(vals)
    return bl, b1, b2, b3, bres
