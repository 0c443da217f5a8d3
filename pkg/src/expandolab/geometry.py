"""Planar and linear geometry kernel.

Regions are either closed intervals (``Interval``) or convex polygons
(``ConvexPolygon``, counterclockwise vertex tuples).  Everything here is
immutable and pure.  Polygons whose area falls under ``eps`` are normalised
to the empty polygon, so clipping never returns slivers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

from .errors import EmptySingularSet, SingularTransform

EPS_GEOM = 1e-12
EPS_DET = 1e-12
# slack allowed when deciding whether a point sits on a closed region
BOUNDARY_TOL = 1e-12
# relative slack used inside clipping to snap vertices onto the cutting line
_SNAP = 1e-14


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"Interval needs lo <= hi, got [{self.lo}, {self.hi}]")

    dim = 1

    @property
    def measure(self) -> float:
        return self.hi - self.lo

    @property
    def is_empty(self) -> bool:
        return self.hi <= self.lo

    @property
    def vertices(self):
        return (self.lo, self.hi)

    @property
    def centroid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def bbox(self):
        return (self.lo, self.hi)

    @property
    def diameter(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with counterclockwise vertices.

    Build through :func:`polygon` unless the vertices are already known to be
    normalised; the constructor itself does no cleanup.
    """

    vertices: tuple = ()

    dim = 2

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) < 3

    @property
    def measure(self) -> float:
        return _shoelace(self.vertices)

    @property
    def centroid(self):
        v = self.vertices
        if not v:
            return (math.nan, math.nan)
        a = cx = cy = 0.0
        n = len(v)
        for i in range(n):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % n]
            cr = x0 * y1 - x1 * y0
            a += cr
            cx += (x0 + x1) * cr
            cy += (y0 + y1) * cr
        if a == 0.0:
            return (sum(p[0] for p in v) / n, sum(p[1] for p in v) / n)
        return (cx / (3.0 * a), cy / (3.0 * a))

    @property
    def bbox(self):
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return (min(xs), max(xs), min(ys), max(ys))

    @property
    def diameter(self) -> float:
        v = self.vertices
        best = 0.0
        for i in range(len(v)):
            for j in range(i + 1, len(v)):
                best = max(best, math.hypot(v[i][0] - v[j][0], v[i][1] - v[j][1]))
        return best


Region = Union[Interval, ConvexPolygon]
EMPTY_POLYGON = ConvexPolygon(())


class HalfPlane(NamedTuple):
    """Closed half-plane ``a*x + b*y <= c`` (``b`` ignored in 1D)."""

    a: float
    b: float
    c: float

    def slack(self, p) -> float:
        if isinstance(p, (int, float)):
            return self.c - self.a * p
        return self.c - self.a * p[0] - self.b * p[1]


def _shoelace(v) -> float:
    n = len(v)
    if n < 3:
        return 0.0
    s = 0.0
    for i in range(n):
        x0, y0 = v[i]
        x1, y1 = v[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return abs(s) * 0.5


def polygon(points: Iterable, eps: float = EPS_GEOM) -> ConvexPolygon:
    """Normalise a vertex list of a convex polygon.

    Duplicate and collinear vertices are dropped, orientation is made
    counterclockwise, and anything with area below ``eps`` becomes empty.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        return EMPTY_POLYGON
    scale = max(max(abs(x), abs(y)) for x, y in pts) or 1.0
    tol = _SNAP * scale
    dedup = []
    for p in pts:
        if not dedup or abs(p[0] - dedup[-1][0]) > tol or abs(p[1] - dedup[-1][1]) > tol:
            dedup.append(p)
    while len(dedup) > 1 and abs(dedup[0][0] - dedup[-1][0]) <= tol and abs(dedup[0][1] - dedup[-1][1]) <= tol:
        dedup.pop()
    if len(dedup) < 3:
        return EMPTY_POLYGON
    signed = 0.0
    for i in range(len(dedup)):
        x0, y0 = dedup[i]
        x1, y1 = dedup[(i + 1) % len(dedup)]
        signed += x0 * y1 - x1 * y0
    if abs(signed) * 0.5 < eps:
        return EMPTY_POLYGON
    if signed < 0:
        dedup.reverse()
    # drop vertices lying on the segment joining their neighbours
    changed = True
    while changed and len(dedup) >= 3:
        changed = False
        n = len(dedup)
        for i in range(n):
            ax, ay = dedup[i - 1]
            bx, by = dedup[i]
            cx, cy = dedup[(i + 1) % n]
            cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
            norm = math.hypot(bx - ax, by - ay) * math.hypot(cx - bx, cy - by)
            if abs(cross) <= 1e-13 * norm:
                del dedup[i]
                changed = True
                break
    if len(dedup) < 3:
        return EMPTY_POLYGON
    return ConvexPolygon(tuple(dedup))


def halfplanes(region: Region) -> list[HalfPlane]:
    """Unit-normal half-planes whose intersection is ``region``."""
    if isinstance(region, Interval):
        return [HalfPlane(-1.0, 0.0, -region.lo), HalfPlane(1.0, 0.0, region.hi)]
    v = region.vertices
    out = []
    n = len(v)
    for i in range(n):
        px, py = v[i]
        qx, qy = v[(i + 1) % n]
        a, b = qy - py, px - qx
        norm = math.hypot(a, b)
        a, b = a / norm, b / norm
        out.append(HalfPlane(a, b, a * px + b * py))
    return out


def clip_halfplane(region: Region, plane: HalfPlane, eps: float = EPS_GEOM) -> Region:
    """Intersect a region with a closed half-plane (one Sutherland-Hodgman pass)."""
    if isinstance(region, Interval):
        if region.is_empty:
            return region
        a, c = plane.a, plane.c
        lo, hi = region.lo, region.hi
        if a > 0:
            hi = min(hi, c / a)
        elif a < 0:
            lo = max(lo, c / a)
        elif c < 0:
            return Interval(lo, lo)
        if hi - lo < eps:
            return Interval(lo, lo)
        return Interval(lo, hi)
    v = region.vertices
    if len(v) < 3:
        return EMPTY_POLYGON
    a, b, c = plane
    scale = abs(c) + 1.0
    tol = _SNAP * scale
    s = [c - a * x - b * y for x, y in v]
    if min(s) >= -tol:
        return region
    if max(s) <= tol:
        return EMPTY_POLYGON
    out = []
    n = len(v)
    for i in range(n):
        j = (i + 1) % n
        si, sj = s[i], s[j]
        if si >= -tol:
            out.append(v[i])
        if (si > tol and sj < -tol) or (si < -tol and sj > tol):
            r = si / (si - sj)
            out.append((v[i][0] + r * (v[j][0] - v[i][0]), v[i][1] + r * (v[j][1] - v[i][1])))
    return polygon(out, eps)


def intersect(a: Region, b: Region, eps: float = EPS_GEOM) -> Region:
    """``a`` clipped by every edge of ``b``."""
    if isinstance(a, Interval):
        lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
        if hi - lo < eps or a.is_empty or b.is_empty:
            return Interval(lo, lo)
        return Interval(lo, hi)
    if a.is_empty or b.is_empty:
        return EMPTY_POLYGON
    out = a
    for hp in halfplanes(b):
        out = clip_halfplane(out, hp, eps)
        if out.is_empty:
            return EMPTY_POLYGON
    return out


def measure(region: Region) -> float:
    return region.measure


@dataclass(frozen=True)
class AffineTransform:
    """``x -> linear @ x + offset`` for d in {1, 2}."""

    linear: np.ndarray
    offset: np.ndarray
    _det: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lin = np.atleast_2d(np.asarray(self.linear, dtype=float)).copy()
        off = np.atleast_1d(np.asarray(self.offset, dtype=float)).copy()
        if lin.shape[0] != lin.shape[1] or lin.shape[0] != off.shape[0] or lin.shape[0] not in (1, 2):
            raise ValueError(f"bad affine shapes {lin.shape}, {off.shape}")
        lin.flags.writeable = False
        off.flags.writeable = False
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "_det", float(np.linalg.det(lin)) if lin.shape[0] == 2 else float(lin[0, 0]))

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @property
    def det(self) -> float:
        return self._det

    @property
    def jacobian(self) -> float:
        return abs(self._det)

    def __call__(self, p):
        if self.dim == 1:
            return float(self.linear[0, 0] * p + self.offset[0])
        m, o = self.linear, self.offset
        x, y = p
        return (m[0, 0] * x + m[0, 1] * y + o[0], m[1, 0] * x + m[1, 1] * y + o[1])

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.dim == 1:
            return self.linear[0, 0] * pts + self.offset[0]
        return pts @ self.linear.T + self.offset

    def compose(self, inner: "AffineTransform") -> "AffineTransform":
        """``self o inner``."""
        return AffineTransform(self.linear @ inner.linear, self.linear @ inner.offset + self.offset)

    def inverse(self) -> "AffineTransform":
        if abs(self._det) < EPS_DET:
            raise SingularTransform(f"|det| = {abs(self._det):.3g} below {EPS_DET}")
        inv = np.linalg.inv(self.linear)
        return AffineTransform(inv, -inv @ self.offset)

    def inverse_norm(self) -> float:
        """Spectral norm of the inverse linear part."""
        if self.dim == 1:
            return 1.0 / abs(self.linear[0, 0])
        return 1.0 / float(np.linalg.svd(self.linear, compute_uv=False)[-1])

    def norm(self) -> float:
        if self.dim == 1:
            return abs(float(self.linear[0, 0]))
        return float(np.linalg.svd(self.linear, compute_uv=False)[0])

    @classmethod
    def identity(cls, dim: int) -> "AffineTransform":
        return cls(np.eye(dim), np.zeros(dim))


def affine_image(region: Region, t: AffineTransform, eps: float = EPS_GEOM) -> Region:
    """Image of a region; measure scales by ``|det|``."""
    if abs(t.det) < EPS_DET:
        raise SingularTransform(f"|det| = {abs(t.det):.3g} below {EPS_DET}")
    if isinstance(region, Interval):
        a, b = t(region.lo), t(region.hi)
        return Interval(min(a, b), max(a, b))
    if region.is_empty:
        return EMPTY_POLYGON
    m, o = t.linear, t.offset
    m00, m01, m10, m11 = float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1])
    o0, o1 = float(o[0]), float(o[1])
    pts = [(m00 * x + m01 * y + o0, m10 * x + m11 * y + o1) for x, y in region.vertices]
    if t.det < 0:
        pts.reverse()
    return ConvexPolygon(tuple(pts))


def contains(region: Region, p, lower: Sequence[Region] = (), tol: float = BOUNDARY_TOL) -> bool:
    """Closed membership, minus the points already claimed by ``lower``.

    ``lower`` lists the abutting regions with smaller index; a point on a
    shared boundary belongs to the lowest-index region that holds it.
    """
    if not _closed_contains(region, p, tol):
        return False
    return not any(_closed_contains(r, p, tol) for r in lower)


def _closed_contains(region: Region, p, tol: float) -> bool:
    if isinstance(region, Interval):
        return region.lo - tol <= p <= region.hi + tol
    if region.is_empty:
        return False
    x, y = p
    v = region.vertices
    n = len(v)
    for i in range(n):
        px, py = v[i]
        qx, qy = v[(i + 1) % n]
        ex, ey = qx - px, qy - py
        cross = ex * (y - py) - ey * (x - px)
        if cross < -tol * math.hypot(ex, ey):
            return False
    return True


def locate(regions: Sequence[Region], p, tol: float = BOUNDARY_TOL):
    """Index of the first region holding ``p`` (tie-break: lowest index), or None."""
    for i, r in enumerate(regions):
        if _closed_contains(r, p, tol):
            return i
    return None


@dataclass(frozen=True)
class SegmentSet:
    """Singular set: 2D line segments ``(m, 2, 2)`` or 1D points ``(m,)``."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float).copy()
        if arr.ndim == 3:
            lengths = np.hypot(arr[:, 1, 0] - arr[:, 0, 0], arr[:, 1, 1] - arr[:, 0, 1])
            if np.any(lengths <= 0):
                raise ValueError("segments need positive length")
        elif arr.ndim != 1:
            raise ValueError(f"bad segment array shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return 1 if self.data.ndim == 1 else 2

    def __len__(self):
        return self.data.shape[0]

    @classmethod
    def from_regions(cls, regions: Sequence[Region], ndigits: int = 12) -> "SegmentSet":
        """Union of region boundaries, with duplicates removed."""
        if isinstance(regions[0], Interval):
            pts = sorted({round(v, ndigits) for r in regions for v in (r.lo, r.hi)})
            return cls(np.array(pts))
        seen = {}
        for r in regions:
            v = r.vertices
            for i in range(len(v)):
                p, q = v[i], v[(i + 1) % len(v)]
                key = tuple(sorted(((round(p[0], ndigits), round(p[1], ndigits)),
                                    (round(q[0], ndigits), round(q[1], ndigits)))))
                seen.setdefault(key, (p, q))
        return cls(np.array([seen[k] for k in sorted(seen)]))


def distances_to_set(points, s: SegmentSet) -> np.ndarray:
    """Vectorised Euclidean distance from each point to the nearest element of ``s``."""
    if len(s) == 0:
        raise EmptySingularSet("singular set is empty")
    pts = np.asarray(points, dtype=float)
    if s.dim == 1:
        return np.min(np.abs(pts.reshape(-1, 1) - s.data.reshape(1, -1)), axis=1)
    pts = pts.reshape(-1, 2)
    a = s.data[:, 0, :]
    d = s.data[:, 1, :] - a
    dd = np.einsum("ij,ij->i", d, d)
    rel = pts[:, None, :] - a[None, :, :]
    u = np.clip(np.einsum("pij,ij->pi", rel, d) / dd, 0.0, 1.0)
    near = a[None, :, :] + u[..., None] * d[None, :, :]
    return np.min(np.hypot(*(pts[:, None, :] - near).transpose(2, 0, 1)), axis=1)


def distance_to_set(p, s: SegmentSet) -> float:
    return float(distances_to_set([p], s)[0])


def bounding_box(regions: Sequence[Region]):
    if isinstance(regions[0], Interval):
        return (min(r.lo for r in regions), max(r.hi for r in regions))
    boxes = [r.bbox for r in regions if not r.is_empty]
    return (min(b[0] for b in boxes), max(b[1] for b in boxes),
            min(b[2] for b in boxes), max(b[3] for b in boxes))


def convex_hull(points) -> ConvexPolygon:
    """Andrew's monotone chain."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) < 3:
        return EMPTY_POLYGON

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and ((out[-1][0] - out[-2][0]) * (p[1] - out[-2][1])
                                     - (out[-1][1] - out[-2][1]) * (p[0] - out[-2][0])) <= 0:
                out.pop()
            out.append(p)
        return out

    lower, upper = half(pts), half(reversed(pts))
    return polygon(lower[:-1] + upper[:-1])


def square(x0: float, y0: float, h: float) -> ConvexPolygon:
    return ConvexPolygon(((x0, y0), (x0 + h, y0), (x0 + h, y0 + h), (x0, y0 + h)))
