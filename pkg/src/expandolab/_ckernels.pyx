# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; mirrors ``_pykernels`` operation for operation."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, fabs, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()

IMPLEMENTATION = "cython"


cdef inline int _locate(const double[:, :, ::1] hp, int nb, int m,
                        double x, double y, double tol) noexcept nogil:
    cdef int b, r
    cdef bint ok
    for b in range(nb):
        ok = True
        for r in range(m):
            if hp[b, r, 2] - hp[b, r, 0] * x - hp[b, r, 1] * y < -tol:
                ok = False
                break
        if ok:
            return b
    return -1


cdef inline double _slack(const double[:, :, ::1] hp, int b, int m,
                          double x, double y) noexcept nogil:
    cdef double best = INFINITY, s
    cdef int r
    for r in range(m):
        if hp[b, r, 0] == 0.0 and hp[b, r, 1] == 0.0:
            continue
        s = hp[b, r, 2] - hp[b, r, 0] * x - hp[b, r, 1] * y
        if s < best:
            best = s
    return best


cdef inline int _closest(const double[:, :, ::1] hp, int nb, int m,
                         double x, double y) noexcept nogil:
    cdef double best = -INFINITY, s
    cdef int b, arg = 0
    for b in range(nb):
        s = _slack(hp, b, m, x, y)
        if s > best:
            best = s
            arg = b
    return arg


def orbit(hp, lin, off, x0, jitter, kicks, double near, double tol):
    cdef const double[:, :, ::1] H = np.ascontiguousarray(hp, dtype=np.float64)
    cdef double[:, :, ::1] L = np.zeros((H.shape[0], 2, 2))
    cdef double[:, ::1] O = np.zeros((H.shape[0], 2))
    lin = np.asarray(lin, dtype=np.float64)
    off = np.asarray(off, dtype=np.float64)
    cdef int d = lin.shape[1]
    cdef int nb = H.shape[0], m = H.shape[1]
    cdef Py_ssize_t n = np.asarray(jitter).shape[0], j
    cdef double[:, ::1] J = np.zeros((n, 2))
    cdef double[:, ::1] K = np.zeros((n, 2))
    cdef int b, bk
    for b in range(nb):
        L[b, 0, 0] = lin[b, 0, 0]
        O[b, 0] = off[b, 0]
        if d == 2:
            L[b, 0, 1] = lin[b, 0, 1]
            L[b, 1, 0] = lin[b, 1, 0]
            L[b, 1, 1] = lin[b, 1, 1]
            O[b, 1] = off[b, 1]
    jit = np.asarray(jitter, dtype=np.float64)
    kic = np.asarray(kicks, dtype=np.float64)
    np.asarray(J)[:, :d] = jit[:, :d]
    np.asarray(K)[:, :d] = kic[:, :d]
    cdef double x = x0[0], y = x0[1] if d == 2 else 0.0
    out_pts = np.zeros((n, 2))
    out_br = np.zeros(n, dtype=np.int64)
    out_ds = np.zeros(n)
    cdef double[:, ::1] P = out_pts
    cdef long long[::1] B = out_br
    cdef double[::1] D = out_ds
    cdef double dist, xk, yk, nx, ny, zx, zy
    with nogil:
        for j in range(n):
            b = _locate(H, nb, m, x, y, tol)
            if b < 0:
                b = _closest(H, nb, m, x, y)
            dist = _slack(H, b, m, x, y)
            if dist < 0.0:
                dist = 0.0
            if dist < near:
                xk = x + K[j, 0]
                yk = y + K[j, 1]
                bk = _locate(H, nb, m, xk, yk, tol)
                if bk < 0:
                    xk = x - K[j, 0]
                    yk = y - K[j, 1]
                    bk = _locate(H, nb, m, xk, yk, tol)
                if bk >= 0:
                    x = xk
                    y = yk
                    b = bk
                    dist = _slack(H, b, m, x, y)
                    if dist < 0.0:
                        dist = 0.0
            P[j, 0] = x
            P[j, 1] = y
            B[j] = b
            D[j] = dist
            if d == 1:
                nx = L[b, 0, 0] * x + O[b, 0]
                ny = 0.0
            else:
                nx = L[b, 0, 0] * x + L[b, 0, 1] * y + O[b, 0]
                ny = L[b, 1, 0] * x + L[b, 1, 1] * y + O[b, 1]
            zx = nx + J[j, 0]
            zy = ny + J[j, 1]
            if (zx != nx or zy != ny) and _locate(H, nb, m, zx, zy, tol) >= 0:
                x = zx
                y = zy
            else:
                x = nx
                y = ny
    if d == 1:
        return out_pts[:, :1].copy(), out_br, out_ds
    return out_pts, out_br, out_ds


def locate_many(hp, points, double tol):
    cdef const double[:, :, ::1] H = np.ascontiguousarray(hp, dtype=np.float64)
    pts = np.asarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0], i
    cdef int nb = H.shape[0], m = H.shape[1]
    cdef double[:, ::1] Pm
    if pts.shape[1] == 1:
        Pm = np.column_stack([pts[:, 0], np.zeros(n)])
    else:
        Pm = np.ascontiguousarray(pts)
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] O = out
    with nogil:
        for i in range(n):
            O[i] = _locate(H, nb, m, Pm[i, 0], Pm[i, 1], tol)
    return out


def lyapunov_qr(lin, branches):
    cdef const double[:, :, ::1] A = np.ascontiguousarray(lin, dtype=np.float64)
    cdef const long long[::1] Bs = np.ascontiguousarray(branches, dtype=np.int64)
    cdef double q00 = 1.0, q01 = 0.0, q10 = 0.0, q11 = 1.0
    cdef double s1 = 0.0, s2 = 0.0
    cdef double m00, m01, m10, m11, r11, r12, r22, v0, v1
    cdef Py_ssize_t i
    cdef long long b
    with nogil:
        for i in range(Bs.shape[0]):
            b = Bs[i]
            m00 = A[b, 0, 0] * q00 + A[b, 0, 1] * q10
            m10 = A[b, 1, 0] * q00 + A[b, 1, 1] * q10
            m01 = A[b, 0, 0] * q01 + A[b, 0, 1] * q11
            m11 = A[b, 1, 0] * q01 + A[b, 1, 1] * q11
            r11 = sqrt(m00 * m00 + m10 * m10)
            q00 = m00 / r11
            q10 = m10 / r11
            r12 = q00 * m01 + q10 * m11
            v0 = m01 - r12 * q00
            v1 = m11 - r12 * q10
            r22 = sqrt(v0 * v0 + v1 * v1)
            q01 = v0 / r22
            q11 = v1 / r22
            s1 += log(r11)
            s2 += log(r22)
    return np.array([s1, s2])


cdef int _clip(const double* xs, const double* ys, int n, int axis, double bound,
               bint keep_below, double* ox, double* oy) noexcept nogil:
    cdef int i, j, k = 0
    cdef double si, sj, ci, cj, r
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        ci = xs[i] if axis == 0 else ys[i]
        cj = xs[j] if axis == 0 else ys[j]
        si = bound - ci if keep_below else ci - bound
        sj = bound - cj if keep_below else cj - bound
        if si >= 0.0:
            ox[k] = xs[i]
            oy[k] = ys[i]
            k += 1
        if (si > 0.0 and sj < 0.0) or (si < 0.0 and sj > 0.0):
            r = si / (si - sj)
            ox[k] = xs[i] + r * (xs[j] - xs[i])
            oy[k] = ys[i] + r * (ys[j] - ys[i])
            k += 1
    return k


cdef double _area(const double* xs, const double* ys, int n) noexcept nogil:
    cdef int i, j
    cdef double s = 0.0
    if n < 3:
        return 0.0
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        s += xs[i] * ys[j] - xs[j] * ys[i]
    return fabs(s) * 0.5


def grid_overlap(xs, ys, double ox, double oy, double h, int ix0, int ix1, int iy0, int iy1):
    cdef const double[::1] X = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef int n = X.shape[0]
    cdef int cap = 2 * n + 8
    out = np.zeros((max(ix1 - ix0, 0), max(iy1 - iy0, 0)))
    cdef double[:, ::1] Out = out
    cdef double* buf = <double*> malloc(8 * cap * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double *ax = buf, *ay = buf + cap, *bx = buf + 2 * cap, *by = buf + 3 * cap
    cdef double *cx = buf + 4 * cap, *cy = buf + 5 * cap, *dx = buf + 6 * cap, *dy = buf + 7 * cap
    cdef int i, j, k1, k2, k3, k4
    cdef double x0, x1, y0, y1
    try:
        with nogil:
            for i in range(ix0, ix1):
                x0 = ox + i * h
                x1 = ox + (i + 1) * h
                k1 = _clip(&X[0], &Y[0], n, 0, x0, False, ax, ay)
                k2 = _clip(ax, ay, k1, 0, x1, True, bx, by)
                if k2 < 3:
                    continue
                for j in range(iy0, iy1):
                    y0 = oy + j * h
                    y1 = oy + (j + 1) * h
                    k3 = _clip(bx, by, k2, 1, y0, False, cx, cy)
                    k4 = _clip(cx, cy, k3, 1, y1, True, dx, dy)
                    Out[i - ix0, j - iy0] = _area(dx, dy, k4)
    finally:
        free(buf)
    return out
