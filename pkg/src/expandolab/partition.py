"""Refined partitions, the cell through a point, and partition entropy."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import geometry as geo
from .errors import CellBudgetExceeded, NegativeMass
from .geometry import AffineTransform
from .maps import PiecewiseAffineMap, compose_cells

DEFAULT_CELL_BUDGET = 20000


@dataclass(frozen=True)
class RefinedCell:
    itinerary: tuple
    cell: geo.Region
    image: geo.Region
    depth: int
    transform: AffineTransform | None = None

    @property
    def measure(self) -> float:
        return self.cell.measure


def refine(m: PiecewiseAffineMap, n: int, budget: int = DEFAULT_CELL_BUDGET) -> list[RefinedCell]:
    """All non-empty cells of the n-step refinement, lexicographic in itinerary."""
    cells = compose_cells(m, n, budget, error=CellBudgetExceeded)
    return [RefinedCell(w, c, img, n, F) for w, c, img, F in cells]


def forward_images(m: PiecewiseAffineMap, x, n: int) -> Iterator[tuple]:
    """Yield ``(branch, image P_k, composed transform, x_k)`` for k = 1..n.

    ``P_1`` is the image of the branch domain holding ``x``; afterwards
    ``P_{k+1} = phi(P_k & R(phi^k x))``.  Only one convex region is kept in
    memory, so the cost is linear in ``n``.
    """
    eps = m.eps_geom
    hull = m.hull
    b = m.branch_index(x)
    br = m.branches[b]
    P = _to_hull(geo.affine_image(br.domain, br.transform), hull, eps)
    F = br.transform
    x = br.transform(x)
    yield b, P, F, x
    for _ in range(n - 1):
        b = m.branch_index(_snap(m, x))
        piece = geo.intersect(P, m.branches[b].domain, eps)
        if piece.is_empty or piece.measure < eps:
            # the orbit point drifted onto a boundary: follow the branch that
            # still meets the image
            areas = [geo.intersect(P, br.domain, 0.0).measure for br in m.branches]
            b = int(np.argmax(areas))
            piece = geo.intersect(P, m.branches[b].domain, 0.0)
        br = m.branches[b]
        P = _to_hull(geo.affine_image(piece, br.transform), hull, eps)
        F = br.transform.compose(F)
        x = br.transform(_snap(m, x))
        yield b, P, F, x


def _to_hull(region, hull, eps: float):
    """Clip an image to the hull, moving vertices within ``eps`` of a hull vertex onto it.

    Full branches then give images of exactly the ambient measure instead of
    one rounding off.
    """
    if isinstance(region, geo.Interval):
        lo, hi = region.lo, region.hi
        lo = hull.lo if abs(lo - hull.lo) <= eps else lo
        hi = hull.hi if abs(hi - hull.hi) <= eps else hi
        return geo.intersect(geo.Interval(lo, max(lo, hi)), hull, 0.0)
    if region.is_empty:
        return region
    snapped = []
    for v in region.vertices:
        for h in hull.vertices:
            if abs(v[0] - h[0]) <= eps and abs(v[1] - h[1]) <= eps:
                v = h
                break
        snapped.append(v)
    return geo.intersect(geo.polygon(snapped, 0.0), hull, 0.0)


def _snap(m: PiecewiseAffineMap, x):
    """Pull a point that rounding pushed just outside the ambient region back in."""
    if geo.locate(m.domains, x) is not None:
        return x
    if m.dim == 1:
        lo, hi = m.bbox
        return min(max(x, lo), hi)
    best = min(m.domains, key=lambda d: -min(hp.slack(x) for hp in geo.halfplanes(d)))
    c = best.centroid
    for s in (1e-12, 1e-10, 1e-8):
        y = (x[0] + s * (c[0] - x[0]), x[1] + s * (c[1] - x[1]))
        if geo.locate(m.domains, y) is not None:
            return y
    return x


def cell_of(m: PiecewiseAffineMap, x, n: int) -> RefinedCell:
    """The cell of the n-step refinement containing ``x`` and its n-th image."""
    word = []
    P = F = None
    for b, P, F, _x in forward_images(m, x, n):
        word.append(b)
    cell = geo.affine_image(P, F.inverse()) if not P.is_empty else P
    return RefinedCell(tuple(word), cell, P, n, F)


def partition_entropy(cells: Sequence[RefinedCell], mu=None) -> float:
    """``-sum mu(P) log mu(P)`` with ``0 log 0 = 0``.

    ``mu`` is a :class:`~expandolab.acim.Density`, a sequence of cell masses,
    or ``None`` for normalised Lebesgue measure on the union of the cells.
    """
    if mu is None:
        masses = np.array([c.cell.measure for c in cells])
        masses = masses / masses.sum()
    elif hasattr(mu, "grid"):
        from .acim import region_mass

        masses = np.array([region_mass(mu, c.cell) for c in cells])
    else:
        masses = np.asarray(mu, dtype=float)
    return entropy_of_masses(masses)


def entropy_of_masses(masses) -> float:
    masses = np.asarray(masses, dtype=float)
    if np.any(masses < -1e-9):
        raise NegativeMass(f"negative cell mass {masses.min():.3g}")
    masses = np.clip(masses, 0.0, None)
    total = masses.sum()
    if abs(total - 1.0) > 1e-6:
        warnings.warn(f"cell masses sum to {total:.9g}; renormalising", RuntimeWarning, stacklevel=2)
        masses = masses / total
    nz = masses[masses > 0]
    return float(-np.sum(nz * np.log(nz)))


def max_diameter(cells: Sequence[RefinedCell]) -> float:
    if not cells:
        raise ValueError("no cells")
    return max(c.cell.diameter for c in cells)


def total_measure(cells: Sequence[RefinedCell]) -> float:
    return math.fsum(c.cell.measure for c in cells)
