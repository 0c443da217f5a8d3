"""Piecewise affine expanding maps and the tent families.

A map is an ordered list of affine branches on convex domains that tile the
ambient region.  Boundary points go to the lowest-index branch holding them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import geometry as geo
from . import kernels
from .errors import BranchBudgetExceeded, OutsideDomain, ParameterOutOfRange
from .geometry import AffineTransform, ConvexPolygon, Interval, SegmentSet

TAU = (math.sqrt(2.0) + 1.0) ** 0.25 / math.sqrt(2.0)
DEFAULT_BRANCH_BUDGET = 20000

FAMILIES = ("tent1d", "tent2d", "skew_tent")


@dataclass(frozen=True)
class Branch:
    domain: geo.Region
    transform: AffineTransform


@dataclass(frozen=True)
class PiecewiseAffineMap:
    ambient: tuple
    branches: tuple
    singular: SegmentSet
    name: str = ""
    # itinerary of each branch when the map is an iterate
    labels: tuple = ()

    @property
    def dim(self) -> int:
        return self.ambient[0].dim

    @cached_property
    def measure(self) -> float:
        return sum(r.measure for r in self.ambient)

    @cached_property
    def bbox(self):
        return geo.bounding_box(self.ambient)

    @cached_property
    def diameter(self) -> float:
        if self.dim == 1:
            lo, hi = self.bbox
            return hi - lo
        return self.hull.diameter

    @cached_property
    def hull(self):
        if self.dim == 1:
            return Interval(*self.bbox)
        return geo.convex_hull([p for r in self.ambient for p in r.vertices])

    @cached_property
    def eps_geom(self) -> float:
        """Measure below which a cell counts as empty."""
        return geo.EPS_GEOM * self.diameter ** self.dim

    @property
    def domains(self) -> list:
        return [b.domain for b in self.branches]

    @cached_property
    def halfplane_array(self) -> np.ndarray:
        rows = [geo.halfplanes(b.domain) for b in self.branches]
        m = max(len(r) for r in rows)
        out = np.zeros((len(rows), m, 3))
        out[:, :, 2] = 1e300
        for i, r in enumerate(rows):
            out[i, : len(r)] = np.array(r)
        return out

    @cached_property
    def linear_array(self) -> np.ndarray:
        return np.array([b.transform.linear for b in self.branches])

    @cached_property
    def offset_array(self) -> np.ndarray:
        return np.array([b.transform.offset for b in self.branches])

    @cached_property
    def log_jacobians(self) -> np.ndarray:
        return np.log(np.array([b.transform.jacobian for b in self.branches]))

    def branch_index(self, x) -> int:
        i = geo.locate(self.domains, x)
        if i is None:
            raise OutsideDomain(f"{x!r} is outside the domain of {self.name or 'map'}")
        return i

    def __repr__(self):
        return f"PiecewiseAffineMap({self.name!r}, dim={self.dim}, branches={len(self.branches)})"


@dataclass(frozen=True)
class FamilySpec:
    name: str
    parameter: float

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ParameterOutOfRange(f"unknown family {self.name!r}; expected one of {FAMILIES}")
        lo, hi, closed_hi = _LEGAL[self.name]
        p = self.parameter
        ok = lo < p < hi or (closed_hi and p == hi)
        if not ok or not math.isfinite(p):
            bracket = "]" if closed_hi else ")"
            raise ParameterOutOfRange(f"{self.name} parameter {p} outside ({lo}, {hi}{bracket}")


_LEGAL = {"tent1d": (1.0, 2.0, True), "tent2d": (0.0, 1.0, True), "skew_tent": (0.0, 1.0, False)}


def _affine1(slope: float, offset: float) -> AffineTransform:
    return AffineTransform([[slope]], [offset])


def tent1d(t: float) -> PiecewiseAffineMap:
    FamilySpec("tent1d", t)
    left, right = Interval(0.0, 1.0), Interval(1.0, 2.0)
    return PiecewiseAffineMap(
        ambient=(Interval(0.0, 2.0),),
        branches=(Branch(left, _affine1(t, 0.0)), Branch(right, _affine1(-t, 2.0 * t))),
        singular=SegmentSet(np.array([0.0, 1.0, 2.0])),
        name=f"tent1d({t:g})",
    )


def skew_tent(p: float) -> PiecewiseAffineMap:
    FamilySpec("skew_tent", p)
    q = 1.0 - p
    return PiecewiseAffineMap(
        ambient=(Interval(0.0, 1.0),),
        branches=(Branch(Interval(0.0, p), _affine1(1.0 / p, 0.0)),
                  Branch(Interval(p, 1.0), _affine1(-1.0 / q, 1.0 / q))),
        singular=SegmentSet(np.array([0.0, p, 1.0])),
        name=f"skew_tent({p:g})",
    )


TRIANGLE_0 = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0)))
TRIANGLE_1 = ConvexPolygon(((1.0, 0.0), (2.0, 0.0), (1.0, 1.0)))


def tent2d(t: float) -> PiecewiseAffineMap:
    FamilySpec("tent2d", t)
    b0 = AffineTransform(t * np.array([[1.0, 1.0], [1.0, -1.0]]), [0.0, 0.0])
    b1 = AffineTransform(t * np.array([[-1.0, 1.0], [-1.0, -1.0]]), [2.0 * t, 2.0 * t])
    return PiecewiseAffineMap(
        ambient=(TRIANGLE_0, TRIANGLE_1),
        branches=(Branch(TRIANGLE_0, b0), Branch(TRIANGLE_1, b1)),
        singular=SegmentSet.from_regions([TRIANGLE_0, TRIANGLE_1]),
        name=f"tent2d({t:g})",
    )


_BUILDERS = {"tent1d": tent1d, "tent2d": tent2d, "skew_tent": skew_tent}


def make_family(spec: FamilySpec | str, parameter: float | None = None) -> PiecewiseAffineMap:
    if isinstance(spec, str):
        spec = FamilySpec(spec, parameter)
    return _BUILDERS[spec.name](spec.parameter)


def evaluate(m: PiecewiseAffineMap, x):
    return m.branches[m.branch_index(x)].transform(x)


def evaluate_many(m: PiecewiseAffineMap, points) -> np.ndarray:
    """Vectorised evaluate; raises OutsideDomain if any point misses every branch."""
    pts = np.asarray(points, dtype=float).reshape(-1, m.dim)
    idx = kernels.locate_many(m.halfplane_array, pts, geo.BOUNDARY_TOL)
    if np.any(idx < 0):
        bad = pts[np.argmax(idx < 0)]
        raise OutsideDomain(f"{bad.tolist()} is outside the domain of {m.name or 'map'}")
    out = np.empty_like(pts)
    for b, br in enumerate(m.branches):
        sel = idx == b
        if np.any(sel):
            out[sel] = br.transform.apply_many(pts[sel]).reshape(-1, m.dim)
    return out


def jacobian(m: PiecewiseAffineMap, x) -> float:
    return m.branches[m.branch_index(x)].transform.jacobian


def expansion_constant(m: PiecewiseAffineMap) -> float:
    """Largest spectral norm of an inverse branch derivative."""
    return max(b.transform.inverse_norm() for b in m.branches)


def distortion_constant(m: PiecewiseAffineMap) -> float:
    # affine branches have constant Jacobian on each domain
    return 0.0


def compose_cells(m: PiecewiseAffineMap, n: int, budget: int = DEFAULT_BRANCH_BUDGET,
                  error=BranchBudgetExceeded):
    """Cells of the n-fold refinement by pullback.

    Returns ``(itinerary, cell, image, transform)`` tuples in lexicographic
    itinerary order, where ``transform`` is the composed affine map on the
    cell and ``image`` its forward image.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    eps = m.eps_geom
    level = []
    for b, br in enumerate(m.branches):
        if br.domain.measure < eps:
            continue
        level.append(((b,), br.domain, geo.affine_image(br.domain, br.transform), br.transform))
    if len(level) > budget:
        raise error(f"{len(level)} cells exceed the budget {budget}")
    for _ in range(n - 1):
        nxt = []
        for word, _cell, image, F in level:
            Finv = None
            for b, br in enumerate(m.branches):
                piece = geo.intersect(image, br.domain, eps)
                if piece.is_empty or piece.measure < eps:
                    continue
                if Finv is None:
                    Finv = F.inverse()
                cell = geo.affine_image(piece, Finv)
                if cell.measure < eps:
                    continue
                nxt.append((word + (b,), cell, geo.affine_image(piece, br.transform),
                            br.transform.compose(F)))
                if len(nxt) > budget:
                    raise error(f"refinement exceeds the budget of {budget} cells")
        level = nxt
    return level


def iterate(m: PiecewiseAffineMap, n: int, budget: int = DEFAULT_BRANCH_BUDGET) -> PiecewiseAffineMap:
    """Explicit piecewise affine representation of the n-th iterate."""
    if n == 1:
        return m
    cells = compose_cells(m, n, budget)
    return PiecewiseAffineMap(
        ambient=m.ambient,
        branches=tuple(Branch(cell, F) for _w, cell, _img, F in cells),
        singular=SegmentSet.from_regions([c for _w, c, _i, _F in cells]),
        name=f"{m.name}^{n}",
        labels=tuple(w for w, _c, _i, _F in cells),
    )


def typical_point(m: PiecewiseAffineMap, seed: int = 42, burn_in: int = 1000):
    """A point after a burn-in orbit from a seeded random start."""
    from .acim import orbit  # local: acim imports this module

    rng = np.random.default_rng(seed)
    x0 = random_point(m, rng)
    pts, _b, _d = orbit(m, x0, 1, burn_in=burn_in, seed=seed)
    return float(pts[0, 0]) if m.dim == 1 else (float(pts[0, 0]), float(pts[0, 1]))


def random_point(m: PiecewiseAffineMap, rng: np.random.Generator):
    """Uniform point of the ambient region by rejection from its bounding box."""
    if m.dim == 1:
        lo, hi = m.bbox
        return float(rng.uniform(lo, hi))
    x0, x1, y0, y1 = m.bbox
    while True:
        p = (float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)))
        if geo.locate(m.ambient, p, tol=0.0) is not None:
            return p


def check_invariants(m: PiecewiseAffineMap) -> dict:
    """Residuals of the structural invariants of a map.

    ``overlap``: total pairwise interior overlap of branch domains;
    ``cover``: |sum of domain measures - measure(ambient)|;
    ``escape``: measure of branch images lying outside the ambient region.
    """
    doms = m.domains
    overlap = 0.0
    for i in range(len(doms)):
        for j in range(i + 1, len(doms)):
            overlap += geo.intersect(doms[i], doms[j], 0.0).measure
    cover = abs(sum(d.measure for d in doms) - m.measure)
    escape = 0.0
    for br in m.branches:
        img = geo.affine_image(br.domain, br.transform)
        inside = sum(geo.intersect(img, a, 0.0).measure for a in m.ambient)
        escape += max(img.measure - inside, 0.0)
    return {"overlap": overlap, "cover": cover, "escape": escape}


def identity_stub(ambient: Sequence[geo.Region] = (Interval(0.0, 1.0),)) -> PiecewiseAffineMap:
    """Identity map on the given convex pieces (test double)."""
    dim = ambient[0].dim
    return PiecewiseAffineMap(
        ambient=tuple(ambient),
        branches=tuple(Branch(r, AffineTransform.identity(dim)) for r in ambient),
        singular=SegmentSet.from_regions(list(ambient)),
        name="identity",
    )


def affine_stub(slope: float, ambient: Interval = Interval(0.0, 1.0)) -> PiecewiseAffineMap:
    """Single-branch 1D map ``x -> slope * x`` on ``ambient`` (test double)."""
    return PiecewiseAffineMap(
        ambient=(ambient,),
        branches=(Branch(ambient, _affine1(slope, 0.0)),),
        singular=SegmentSet(np.array([ambient.lo, ambient.hi])),
        name=f"affine({slope:g})",
    )
