"""Invariant densities via Ulam discretisation of the transfer operator.

Densities are piecewise constant on a grid of boxes (intervals in 1D,
squares clipped to the ambient region in 2D).  The exact Ulam matrix has
entries ``P[i, j] = m(box_i & phi^-1 box_j) / m(box_i)``, computed by clipping
affine images, so it carries no sampling noise.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import geometry as geo
from . import kernels
from .errors import EmptyBox, GridMismatch, InvalidConfig, NoConvergence, NonFinite, OutsideDomain
from .maps import PiecewiseAffineMap, evaluate_many

# orbit noise: added to every image to stop float orbits collapsing onto
# dyadic points (x -> 2x exhausts the mantissa in ~52 steps)
ORBIT_JITTER = 1e-12
SINGULAR_NEAR = 1e-13
SINGULAR_KICK = 1e-9
DEFAULT_BURN_IN = 1000


def orbit(m: PiecewiseAffineMap, x0, n: int, burn_in: int = DEFAULT_BURN_IN, seed: int = 42,
          jitter: float = ORBIT_JITTER):
    """Seeded orbit of ``n`` points after ``burn_in`` steps.

    Returns ``(points (n, d), branch indices (n,), distance to singular set (n,))``.
    An iterate within 1e-13 of the singular set is displaced by at most 1e-9.
    The distance column equals dist(x, S) because S is the union of the
    (convex) branch-domain boundaries.
    """
    d = m.dim
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if geo.locate(m.domains, float(x0[0]) if d == 1 else (float(x0[0]), float(x0[1]))) is None:
        raise OutsideDomain(f"start point {x0.tolist()} is outside the domain")
    rng = np.random.default_rng(seed)
    total = burn_in + n
    jit = rng.uniform(-jitter, jitter, size=(total, d)) if jitter > 0 else np.zeros((total, d))
    kicks = rng.uniform(-SINGULAR_KICK, SINGULAR_KICK, size=(total, d)) / math.sqrt(d)
    x0 = np.concatenate([x0, np.zeros(2 - d)]) if d == 1 else x0
    pts, br, ds = kernels.orbit(m.halfplane_array, m.linear_array, m.offset_array, x0,
                                jit, kicks, SINGULAR_NEAR, geo.BOUNDARY_TOL)
    return pts[burn_in:], br[burn_in:], ds[burn_in:]


@dataclass(frozen=True, eq=False)
class Grid:
    dim: int
    k: int
    h: float
    origin: tuple
    index: np.ndarray       # grid coordinates -> box id, -1 where the box is empty
    coords: np.ndarray      # (nbox, dim) integer grid coordinates
    measures: np.ndarray    # (nbox,)
    centroids: np.ndarray   # (nbox, dim)
    pieces: tuple           # per box: convex regions making up box & ambient

    def __len__(self):
        return self.measures.shape[0]

    def compatible(self, other: "Grid") -> bool:
        return self is other or (
            self.dim == other.dim and self.k == other.k and self.h == other.h
            and self.origin == other.origin and np.array_equal(self.coords, other.coords))

    def box_of(self, points: np.ndarray) -> np.ndarray:
        """Box id for each point (-1 for points in dropped boxes)."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        ij = np.floor((pts - np.array(self.origin)) / self.h).astype(np.int64)
        np.clip(ij, 0, self.k - 1, out=ij)
        if self.dim == 1:
            return self.index[ij[:, 0]]
        return self.index[ij[:, 0], ij[:, 1]]


def build_grid(m: PiecewiseAffineMap, k: int) -> Grid:
    """``k`` equal intervals (1D) or ``k x k`` squares over the bounding box (2D)."""
    if k < 2:
        raise InvalidConfig(f"grid resolution must be >= 2, got {k}")
    eps = m.eps_geom
    if m.dim == 1:
        lo, hi = m.bbox
        h = (hi - lo) / k
        index = -np.ones(k, dtype=np.int64)
        coords, meas, cents, pieces = [], [], [], []
        for i in range(k):
            box = geo.Interval(lo + i * h, hi if i == k - 1 else lo + (i + 1) * h)
            parts = [p for p in (geo.intersect(box, a, eps) for a in m.ambient) if p.measure >= eps]
            mass = sum(p.measure for p in parts)
            if mass < eps:
                continue
            index[i] = len(meas)
            coords.append((i,))
            meas.append(mass)
            cents.append((sum(p.centroid * p.measure for p in parts) / mass,))
            pieces.append(tuple(parts))
        return Grid(1, k, h, (lo,), index, np.array(coords), np.array(meas), np.array(cents), tuple(pieces))

    x0, x1, y0, y1 = m.bbox
    h = max(x1 - x0, y1 - y0) / k
    index = -np.ones((k, k), dtype=np.int64)
    # squares wholly inside one ambient piece need no clipping
    gx = x0 + h * np.arange(k + 1)
    gy = y0 + h * np.arange(k + 1)
    inside = np.zeros((len(m.ambient), k, k), dtype=bool)
    for a_i, amb in enumerate(m.ambient):
        ok = np.ones((k, k), dtype=bool)
        for hp in geo.halfplanes(amb):
            for dx in (0, 1):
                for dy in (0, 1):
                    X = gx[dx:k + dx][:, None]
                    Y = gy[dy:k + dy][None, :]
                    ok &= hp.c - hp.a * X - hp.b * Y >= -1e-15
        inside[a_i] = ok
    coords, meas, cents, pieces = [], [], [], []
    for i in range(k):
        for j in range(k):
            sq = geo.square(float(gx[i]), float(gy[j]), h)
            hit = np.flatnonzero(inside[:, i, j])
            if hit.size:
                parts = [sq]
            else:
                parts = [p for p in (geo.intersect(sq, a, eps) for a in m.ambient)
                         if not p.is_empty and p.measure >= eps]
            mass = sum(p.measure for p in parts)
            if mass < eps:
                continue
            index[i, j] = len(meas)
            coords.append((i, j))
            meas.append(mass)
            cx = sum(p.centroid[0] * p.measure for p in parts) / mass
            cy = sum(p.centroid[1] * p.measure for p in parts) / mass
            cents.append((cx, cy))
            pieces.append(tuple(parts))
    return Grid(2, k, h, (x0, y0), index, np.array(coords), np.array(meas), np.array(cents), tuple(pieces))


@dataclass(frozen=True, eq=False)
class UlamOperator:
    grid: Grid
    matrix: sp.csr_matrix

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def push(self, masses: np.ndarray) -> np.ndarray:
        """One transfer-operator step on box masses."""
        return self.matrix.T @ masses


def _overlaps(grid: Grid, region) -> tuple[np.ndarray, np.ndarray]:
    """(box ids, overlap measures) of a region with the grid boxes."""
    if grid.dim == 1:
        lo, hi = region.lo, region.hi
        ox = grid.origin[0]
        i0 = max(int(math.floor((lo - ox) / grid.h)) - 1, 0)
        i1 = min(int(math.ceil((hi - ox) / grid.h)) + 1, grid.k)
        ids, vals = [], []
        for i in range(i0, i1):
            b = grid.index[i]
            if b < 0:
                continue
            w = sum(max(min(hi, p.hi) - max(lo, p.lo), 0.0) for p in grid.pieces[b])
            if w > 0.0:
                ids.append(b)
                vals.append(w)
        return np.array(ids, dtype=np.int64), np.array(vals)
    if region.is_empty:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    xmin, xmax, ymin, ymax = region.bbox
    ox, oy = grid.origin
    h, k = grid.h, grid.k
    ix0 = min(max(int(math.floor((xmin - ox) / h)), 0), k)
    ix1 = min(max(int(math.floor((xmax - ox) / h)) + 1, 0), k)
    iy0 = min(max(int(math.floor((ymin - oy) / h)), 0), k)
    iy1 = min(max(int(math.floor((ymax - oy) / h)) + 1, 0), k)
    if ix1 <= ix0 or iy1 <= iy0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    xs = [p[0] for p in region.vertices]
    ys = [p[1] for p in region.vertices]
    areas = kernels.grid_overlap(xs, ys, ox, oy, h, ix0, ix1, iy0, iy1)
    ids = grid.index[ix0:ix1, iy0:iy1]
    mask = (areas > 0.0) & (ids >= 0)
    return ids[mask], areas[mask]


def build_ulam(m: PiecewiseAffineMap, grid: Grid, mode: str = "exact", samples: int = 10000,
               seed: int = 42) -> UlamOperator:
    """Row-stochastic Ulam matrix.

    ``mode="exact"`` clips each branch image of each box against the grid.
    ``mode="montecarlo"`` maps ``samples`` uniform points per box and counts
    where they land (rows renormalised).
    """
    n = len(grid)
    if np.any(grid.measures <= 0):
        raise EmptyBox("grid contains a box of zero measure")
    if mode == "exact":
        rows, cols, vals = [], [], []
        eps = m.eps_geom
        for i in range(n):
            mi = grid.measures[i]
            for piece in grid.pieces[i]:
                for br in m.branches:
                    part = geo.intersect(piece, br.domain, eps)
                    if part.is_empty or part.measure <= 0.0:
                        continue
                    image = geo.affine_image(part, br.transform)
                    ids, w = _overlaps(grid, image)
                    if ids.size:
                        rows.append(np.full(ids.size, i))
                        cols.append(ids)
                        vals.append(w / (br.transform.jacobian * mi))
        P = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n))
        P.sum_duplicates()
        return UlamOperator(grid, P)
    if mode == "montecarlo":
        rng = np.random.default_rng(seed)
        rows, cols, vals = [], [], []
        for i in range(n):
            pts = _sample_box(grid, i, samples, rng)
            dest = grid.box_of(evaluate_many(m, pts))
            dest = dest[dest >= 0]
            if dest.size == 0:
                raise EmptyBox(f"no Monte Carlo sample of box {i} landed on the grid")
            ids, counts = np.unique(dest, return_counts=True)
            rows.append(np.full(ids.size, i))
            cols.append(ids)
            vals.append(counts / dest.size)
        P = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n))
        return UlamOperator(grid, P)
    raise InvalidConfig(f"unknown Ulam mode {mode!r}")


def _sample_box(grid: Grid, i: int, count: int, rng: np.random.Generator) -> np.ndarray:
    parts = grid.pieces[i]
    if grid.dim == 1:
        w = np.array([p.measure for p in parts])
        which = rng.choice(len(parts), size=count, p=w / w.sum()) if len(parts) > 1 else np.zeros(count, int)
        lo = np.array([p.lo for p in parts])[which]
        hi = np.array([p.hi for p in parts])[which]
        return rng.uniform(lo, hi).reshape(-1, 1)
    out = []
    need = count
    while need > 0:
        for p in parts:
            x0, x1, y0, y1 = p.bbox
            share = max(int(math.ceil(need * p.measure / grid.measures[i])), 1)
            cand = np.column_stack([rng.uniform(x0, x1, 2 * share + 8), rng.uniform(y0, y1, 2 * share + 8)])
            keep = np.ones(len(cand), dtype=bool)
            for hp in geo.halfplanes(p):
                keep &= hp.c - hp.a * cand[:, 0] - hp.b * cand[:, 1] >= 0.0
            out.append(cand[keep][:share])
        got = sum(len(o) for o in out)
        need = count - got
    return np.concatenate(out)[:count]


@dataclass(frozen=True, eq=False)
class Density:
    """Piecewise constant probability density on a grid."""

    grid: Grid
    values: np.ndarray
    iterations: int = 0
    residual: float = 0.0

    @property
    def masses(self) -> np.ndarray:
        return self.values * self.grid.measures

    def total_variation(self) -> float:
        """Grid-level variation: jumps between neighbouring boxes (times edge length in 2D)."""
        g, v = self.grid, self.values
        if g.dim == 1:
            full = np.zeros(g.k)
            full[g.index >= 0] = v[g.index[g.index >= 0]]
            return float(np.abs(np.diff(full)).sum())
        full = np.zeros((g.k, g.k))
        mask = g.index >= 0
        full[mask] = v[g.index[mask]]
        return float((np.abs(np.diff(full, axis=0)).sum() + np.abs(np.diff(full, axis=1)).sum()) * g.h)

    def to_csv(self, path) -> None:
        g = self.grid
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "measure", "rho"] if g.dim == 1 else ["x", "y", "measure", "rho"])
            for c, mi, r in zip(g.centroids.tolist(), g.measures.tolist(), self.values.tolist()):
                w.writerow([repr(v) for v in (*c, mi, r)])


def uniform_density(grid: Grid) -> Density:
    total = grid.measures.sum()
    return Density(grid, np.full(len(grid), 1.0 / total))


def stationary_density(op: UlamOperator, tol: float = 1e-12, max_iters: int = 100_000) -> Density:
    """Fixed density of the Ulam operator by damped power iteration.

    Starts from the uniform density and iterates ``p <- (p + pP) / 2`` on box
    masses; the damping removes the oscillation of maps whose attractor
    splits into cyclically permuted pieces without moving the fixed point.
    Stops once ``||pP - p||_1 < tol`` and returns ``pP``.
    """
    g = op.grid
    PT = op.matrix.T.tocsr()
    p = g.measures / g.measures.sum()
    res = math.inf
    for it in range(1, max_iters + 1):
        q = PT @ p
        res = float(np.abs(q - p).sum())
        if res < tol:
            q = np.maximum(q, 0.0)
            q /= q.sum()
            return Density(g, q / g.measures, iterations=it, residual=res)
        p = 0.5 * (p + q)
    raise NoConvergence(f"power iteration stopped after {max_iters} steps with residual {res:.3g}",
                        residual=res, iterations=max_iters)


def l1_distance(a: Density, b: Density) -> float:
    if not a.grid.compatible(b.grid):
        raise GridMismatch("densities live on different grids")
    return float(np.sum(np.abs(a.values - b.values) * a.grid.measures))


def coarsen(d: Density, coarse: Grid) -> Density:
    """Re-bin a density onto a coarser grid of the same map (``coarse.k`` divides ``d.grid.k``)."""
    g = d.grid
    if g.dim != coarse.dim or g.k % coarse.k or not np.allclose(g.origin, coarse.origin):
        raise GridMismatch(f"cannot coarsen a k={g.k} grid onto k={coarse.k}")
    f = g.k // coarse.k
    masses = np.zeros(len(coarse))
    if g.dim == 1:
        fine = np.flatnonzero(g.index >= 0)
        np.add.at(masses, coarse.index[fine // f], d.masses[g.index[fine]])
    else:
        ii, jj = np.nonzero(g.index >= 0)
        target = coarse.index[ii // f, jj // f]
        if np.any(target < 0):
            raise GridMismatch("fine box outside every coarse box")
        np.add.at(masses, target, d.masses[g.index[ii, jj]])
    return Density(coarse, masses / coarse.measures, d.iterations, d.residual)


def empirical_density(m: PiecewiseAffineMap, x0, n: int, grid: Grid, burn_in: int = DEFAULT_BURN_IN,
                      seed: int = 42) -> Density:
    """Histogram density of an orbit."""
    if n < 10_000:
        raise InvalidConfig(f"orbit length must be >= 1e4, got {n}")
    pts, _b, _d = orbit(m, x0, n, burn_in=burn_in, seed=seed)
    ids = grid.box_of(pts)
    ids = ids[ids >= 0]
    counts = np.bincount(ids, minlength=len(grid)).astype(float)
    masses = counts / counts.sum()
    return Density(grid, masses / grid.measures)


def integrate(d: Density, f: Callable) -> float:
    """Midpoint rule: sum of f(box centroid) * rho * measure."""
    g = d.grid
    cents = g.centroids[:, 0] if g.dim == 1 else g.centroids
    vals = np.array([f(float(c)) if g.dim == 1 else f((float(c[0]), float(c[1]))) for c in cents])
    if not np.all(np.isfinite(vals[d.masses > 0])):
        raise NonFinite("integrand is not finite at some box centroid")
    return float(np.sum(np.where(d.masses > 0, vals, 0.0) * d.masses))


def region_mass(d: Density, region) -> float:
    """Integral of the density over a region (exact clipping against the boxes)."""
    ids, w = _overlaps(d.grid, region)
    return float(np.sum(d.values[ids] * w)) if ids.size else 0.0


def density_from_function(grid: Grid, f: Callable) -> Density:
    """Box-centroid samples of ``f``, renormalised to a probability density."""
    cents = grid.centroids[:, 0] if grid.dim == 1 else grid.centroids
    vals = np.array([f(float(c)) if grid.dim == 1 else f((float(c[0]), float(c[1]))) for c in cents])
    return Density(grid, vals / np.sum(vals * grid.measures))
