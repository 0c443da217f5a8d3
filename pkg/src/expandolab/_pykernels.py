"""Pure-Python hot loops.

Reference implementation of the kernels in ``_ckernels.pyx``; both modules
expose the same functions and perform the same floating-point operations in
the same order, so their outputs agree bit for bit.

Branch domains arrive as a padded array ``hp[nb, m, 3]`` of unit-normal
half-planes ``a*x + b*y <= c``; padding rows are ``(0, 0, +big)``.
"""
import math

import numpy as np

IMPLEMENTATION = "python"


def _locate(hp, nb, m, x, y, tol):
    for b in range(nb):
        row = hp[b]
        ok = True
        for r in range(m):
            a_, b_, c_ = row[r]
            if c_ - a_ * x - b_ * y < -tol:
                ok = False
                break
        if ok:
            return b
    return -1


def _slack(row, m, x, y):
    best = math.inf
    for r in range(m):
        a_, b_, c_ = row[r]
        if a_ == 0.0 and b_ == 0.0:
            continue
        s = c_ - a_ * x - b_ * y
        if s < best:
            best = s
    return best


def _closest(hp, nb, m, x, y):
    best, arg = -math.inf, 0
    for b in range(nb):
        s = _slack(hp[b], m, x, y)
        if s > best:
            best, arg = s, b
    return arg


def orbit(hp, lin, off, x0, jitter, kicks, near, tol):
    """Iterate a piecewise affine map.

    Returns the visited points, their branch indices and their distance to
    the boundary of the selected branch domain.  A point closer than
    ``near`` to that boundary is displaced by ``kicks[j]`` before use;
    ``jitter[j]`` is added to the image unless it would leave the domain.
    """
    hp = np.asarray(hp, dtype=np.float64).tolist()
    lin = np.asarray(lin, dtype=np.float64)
    off = np.asarray(off, dtype=np.float64)
    jitter = np.asarray(jitter, dtype=np.float64)
    kicks = np.asarray(kicks, dtype=np.float64)
    nb = len(hp)
    m = len(hp[0])
    d = lin.shape[1]
    n = jitter.shape[0]
    if d == 1:
        L = [(float(lin[b, 0, 0]), 0.0, 0.0, 0.0) for b in range(nb)]
        O = [(float(off[b, 0]), 0.0) for b in range(nb)]
        jx, jy = jitter[:, 0].tolist(), [0.0] * n
        kx, ky = kicks[:, 0].tolist(), [0.0] * n
        x, y = float(x0[0]), 0.0
    else:
        L = [tuple(float(v) for v in lin[b].ravel()) for b in range(nb)]
        O = [(float(off[b, 0]), float(off[b, 1])) for b in range(nb)]
        jx, jy = jitter[:, 0].tolist(), jitter[:, 1].tolist()
        kx, ky = kicks[:, 0].tolist(), kicks[:, 1].tolist()
        x, y = float(x0[0]), float(x0[1])
    px = [0.0] * n
    py = [0.0] * n
    br = [0] * n
    ds = [0.0] * n
    for j in range(n):
        b = _locate(hp, nb, m, x, y, tol)
        if b < 0:
            b = _closest(hp, nb, m, x, y)
        dist = _slack(hp[b], m, x, y)
        if dist < 0.0:
            dist = 0.0
        if dist < near:
            xk, yk = x + kx[j], y + ky[j]
            bk = _locate(hp, nb, m, xk, yk, tol)
            if bk < 0:
                xk, yk = x - kx[j], y - ky[j]
                bk = _locate(hp, nb, m, xk, yk, tol)
            if bk >= 0:
                x, y, b = xk, yk, bk
                dist = _slack(hp[b], m, x, y)
                if dist < 0.0:
                    dist = 0.0
        px[j] = x
        py[j] = y
        br[j] = b
        ds[j] = dist
        l00, l01, l10, l11 = L[b]
        o0, o1 = O[b]
        if d == 1:
            nx, ny = l00 * x + o0, 0.0
        else:
            nx = l00 * x + l01 * y + o0
            ny = l10 * x + l11 * y + o1
        zx, zy = nx + jx[j], ny + jy[j]
        if (zx != nx or zy != ny) and _locate(hp, nb, m, zx, zy, tol) >= 0:
            x, y = zx, zy
        else:
            x, y = nx, ny
    if d == 1:
        pts = np.array(px, dtype=np.float64).reshape(n, 1)
    else:
        pts = np.column_stack([np.array(px), np.array(py)])
    return pts, np.array(br, dtype=np.int64), np.array(ds, dtype=np.float64)


def locate_many(hp, points, tol):
    """Branch index for each point (-1 if outside every domain)."""
    hp = np.asarray(hp, dtype=np.float64).tolist()
    pts = np.asarray(points, dtype=np.float64)
    nb, m = len(hp), len(hp[0])
    out = np.empty(pts.shape[0], dtype=np.int64)
    if pts.shape[1] == 1:
        for i, x in enumerate(pts[:, 0].tolist()):
            out[i] = _locate(hp, nb, m, x, 0.0, tol)
    else:
        for i, (x, y) in enumerate(pts.tolist()):
            out[i] = _locate(hp, nb, m, x, y, tol)
    return out


def lyapunov_qr(lin, branches):
    """Sums of ``log|R_ii|`` from the QR-continued product of 2x2 matrices."""
    lin = np.asarray(lin, dtype=np.float64)
    mats = [tuple(float(v) for v in lin[b].ravel()) for b in range(lin.shape[0])]
    q00, q01, q10, q11 = 1.0, 0.0, 0.0, 1.0
    s1 = s2 = 0.0
    for b in np.asarray(branches).tolist():
        a00, a01, a10, a11 = mats[b]
        # M = A @ Q, then Gram-Schmidt on columns of M
        m00 = a00 * q00 + a01 * q10
        m10 = a10 * q00 + a11 * q10
        m01 = a00 * q01 + a01 * q11
        m11 = a10 * q01 + a11 * q11
        r11 = math.sqrt(m00 * m00 + m10 * m10)
        q00, q10 = m00 / r11, m10 / r11
        r12 = q00 * m01 + q10 * m11
        v0, v1 = m01 - r12 * q00, m11 - r12 * q10
        r22 = math.sqrt(v0 * v0 + v1 * v1)
        q01, q11 = v0 / r22, v1 / r22
        s1 += math.log(r11)
        s2 += math.log(r22)
    return np.array([s1, s2])


def _clip(xs, ys, axis, bound, keep_below):
    """One Sutherland-Hodgman pass against an axis-aligned line."""
    n = len(xs)
    ox, oy = [], []
    if n == 0:
        return ox, oy
    coord = xs if axis == 0 else ys
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        si = bound - coord[i] if keep_below else coord[i] - bound
        sj = bound - coord[j] if keep_below else coord[j] - bound
        if si >= 0.0:
            ox.append(xs[i])
            oy.append(ys[i])
        if (si > 0.0 and sj < 0.0) or (si < 0.0 and sj > 0.0):
            r = si / (si - sj)
            ox.append(xs[i] + r * (xs[j] - xs[i]))
            oy.append(ys[i] + r * (ys[j] - ys[i]))
    return ox, oy


def _area(xs, ys):
    n = len(xs)
    if n < 3:
        return 0.0
    s = 0.0
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        s += xs[i] * ys[j] - xs[j] * ys[i]
    return abs(s) * 0.5


def grid_overlap(xs, ys, ox, oy, h, ix0, ix1, iy0, iy1):
    """Area of a convex polygon inside each grid square ``[ix0, ix1) x [iy0, iy1)``.

    Square ``(i, j)`` is ``[ox + i*h, ox + (i+1)*h] x [oy + j*h, oy + (j+1)*h]``.
    """
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    out = np.zeros((ix1 - ix0, iy1 - iy0))
    for i in range(ix0, ix1):
        x0 = ox + i * h
        x1 = ox + (i + 1) * h
        cx, cy = _clip(xs, ys, 0, x0, False)
        cx, cy = _clip(cx, cy, 0, x1, True)
        if len(cx) < 3:
            continue
        for j in range(iy0, iy1):
            y0 = oy + j * h
            y1 = oy + (j + 1) * h
            rx, ry = _clip(cx, cy, 1, y0, False)
            rx, ry = _clip(rx, ry, 1, y1, True)
            out[i - ix0, j - iy0] = _area(rx, ry)
    return out
