"""Entropy estimators and Lyapunov exponents.

Three routes to the metric entropy of the invariant density are kept
independent of each other:

* ``formula_integral`` / ``formula_birkhoff`` average ``log J`` against the
  density or along an orbit;
* ``smb_estimate`` evaluates ``-(1/n) log mu(R^n(x))`` at orbit samples, with
  ``mu(R^n(x))`` obtained by clipping the cell against the density grid;
* ``block_entropy`` is ``H_mu(R^n) / n`` over the full refinement.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import acim, kernels
from . import geometry as geo
from .errors import InvalidConfig, NonFinite, ZeroCellMass
from .maps import PiecewiseAffineMap, random_point
from .partition import cell_of, entropy_of_masses, refine

DEFAULT_SAMPLES = 50
DEFAULT_ORBIT = 1_000_000


def default_depth(m: PiecewiseAffineMap) -> int:
    return 16 if m.dim == 1 else 10


def default_block_depth(m: PiecewiseAffineMap) -> int:
    return 12 if m.dim == 1 else 8


def branch_split(m: PiecewiseAffineMap, grid: acim.Grid):
    """``(box ids, branch ids, measures)`` of every non-empty box/branch overlap.

    Boxes whose vertices all fall in one branch domain are taken whole; the
    rest are clipped against each domain.
    """
    boxes, branches, meas = [], [], []
    doms = m.domains
    for i, parts in enumerate(grid.pieces):
        verts = [[p] for part in parts for p in part.vertices] if grid.dim == 1 else \
            [p for part in parts for p in part.vertices]
        idx = kernels.locate_many(m.halfplane_array, np.asarray(verts, dtype=float), geo.BOUNDARY_TOL)
        if idx[0] >= 0 and np.all(idx == idx[0]):
            boxes.append(i)
            branches.append(int(idx[0]))
            meas.append(grid.measures[i])
            continue
        for b, dom in enumerate(doms):
            w = sum(geo.intersect(part, dom, 0.0).measure for part in parts)
            if w > 0.0:
                boxes.append(i)
                branches.append(b)
                meas.append(w)
    return np.array(boxes, dtype=np.int64), np.array(branches, dtype=np.int64), np.array(meas)


def formula_integral(m: PiecewiseAffineMap, rho: acim.Density) -> float:
    """Integral of ``log J`` against the density.

    ``log J`` is constant on each branch domain, so every box is split
    exactly along the domains and no quadrature error remains.
    """
    boxes, branches, meas = branch_split(m, rho.grid)
    vals = m.log_jacobians[branches]
    if not np.all(np.isfinite(vals)):
        raise NonFinite("log Jacobian is not finite")
    return float(np.sum(vals * rho.values[boxes] * meas))


def formula_birkhoff(m: PiecewiseAffineMap, x0, n: int = DEFAULT_ORBIT, seed: int = 42,
                     burn_in: int = acim.DEFAULT_BURN_IN) -> float:
    """Orbit average of ``log J``."""
    _check_length(n)
    _pts, br, _d = acim.orbit(m, x0, n, burn_in=burn_in, seed=seed)
    return _birkhoff(m, br)


def _check_length(n: int) -> None:
    if n < 10_000:
        raise InvalidConfig(f"orbit length must be >= 1e4, got {n}")


def _birkhoff(m: PiecewiseAffineMap, br: np.ndarray) -> float:
    return float(np.mean(m.log_jacobians[br]))


def _sample(m: PiecewiseAffineMap, pts: np.ndarray, count: int) -> list:
    step = len(pts) // count
    sel = pts[step - 1::step][:count]
    if m.dim == 1:
        return [float(p[0]) for p in sel]
    return [(float(p[0]), float(p[1])) for p in sel]


def _lyapunov(m: PiecewiseAffineMap, br: np.ndarray) -> list[float]:
    if m.dim == 1:
        return [float(np.mean(np.log(np.abs(m.linear_array[:, 0, 0]))[br]))]
    sums = kernels.lyapunov_qr(m.linear_array, br)
    return sorted((float(s) / len(br) for s in sums), reverse=True)


def orbit_samples(m: PiecewiseAffineMap, count: int = DEFAULT_SAMPLES, n: int = DEFAULT_ORBIT,
                  seed: int = 42, x0=None) -> list:
    """``count`` points taken at equally spaced times along a seeded orbit."""
    if x0 is None:
        x0 = random_point(m, np.random.default_rng(seed))
    pts, _b, _d = acim.orbit(m, x0, n, seed=seed)
    return _sample(m, pts, count)


@dataclass(frozen=True)
class SMBEstimate:
    mean: float
    sd: float
    values: tuple

    def __iter__(self):
        return iter((self.mean, self.sd))


def smb_estimate(m: PiecewiseAffineMap, rho: acim.Density, sample_points, n: int) -> SMBEstimate:
    """Mean and sample sd of ``-(1/n) log mu(R^n(x))`` over the sample points."""
    if n < 1:
        raise InvalidConfig("depth n must be >= 1")
    vals = []
    for x in sample_points:
        cell = cell_of(m, x, n).cell
        mass = acim.region_mass(rho, cell)
        if not mass >= 1e-300:
            raise ZeroCellMass(f"mu(R^{n}(x)) = {mass:.3g} at x={x!r}; depth too large for the grid")
        vals.append(-math.log(mass) / n)
    arr = np.array(vals)
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return SMBEstimate(float(arr.mean()), sd, tuple(vals))


def block_entropy(m: PiecewiseAffineMap, rho: acim.Density | None, n: int,
                  budget: int = 20000) -> float:
    """``H_mu(R^n) / n``; ``rho=None`` means normalised Lebesgue measure."""
    cells = refine(m, n, budget)
    if rho is None:
        masses = np.array([c.cell.measure for c in cells]) / m.measure
    else:
        masses = np.array([acim.region_mass(rho, c.cell) for c in cells])
    return entropy_of_masses(masses) / n


def lyapunov_exponents(m: PiecewiseAffineMap, x0, n: int = DEFAULT_ORBIT, seed: int = 42,
                       burn_in: int = acim.DEFAULT_BURN_IN) -> list[float]:
    """Lyapunov exponents from QR continuation of the branch derivatives, descending."""
    _check_length(n)
    _pts, br, _d = acim.orbit(m, x0, n, burn_in=burn_in, seed=seed)
    return _lyapunov(m, br)


@dataclass
class EntropyReport:
    h_formula: float
    h_formula_birkhoff: float
    h_smb: float
    h_smb_sd: float
    h_block: float
    lyapunov: list
    n_used: int
    block_n_used: int
    N_used: int
    grid_k: int
    seed: int
    family: str = ""
    parameter: float = math.nan
    samples: int = DEFAULT_SAMPLES
    density_residual: float = 0.0
    density_iterations: int = 0
    density_variation: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"


def entropy_report(m: PiecewiseAffineMap, grid_k: int = 256, n: int | None = None,
                   block_n: int | None = None, orbit_length: int = DEFAULT_ORBIT,
                   samples: int = DEFAULT_SAMPLES, seed: int = 42, rho: acim.Density | None = None,
                   family: str = "", parameter: float = math.nan) -> tuple[EntropyReport, acim.Density]:
    """Grid -> Ulam -> density -> every estimator, for one map."""
    n = default_depth(m) if n is None else n
    block_n = default_block_depth(m) if block_n is None else block_n
    if rho is None:
        grid = acim.build_grid(m, grid_k)
        rho = acim.stationary_density(acim.build_ulam(m, grid))
    _check_length(orbit_length)
    x0 = random_point(m, np.random.default_rng(seed))
    # one orbit feeds the SMB samples, the Birkhoff average and the exponents
    pts, br, _d = acim.orbit(m, x0, orbit_length, seed=seed)
    smb = smb_estimate(m, rho, _sample(m, pts, samples), n)
    report = EntropyReport(
        h_formula=formula_integral(m, rho),
        h_formula_birkhoff=_birkhoff(m, br),
        h_smb=smb.mean,
        h_smb_sd=smb.sd,
        h_block=block_entropy(m, rho, block_n),
        lyapunov=_lyapunov(m, br),
        n_used=n,
        block_n_used=block_n,
        N_used=orbit_length,
        grid_k=rho.grid.k,
        seed=seed,
        family=family,
        parameter=parameter,
        samples=samples,
        density_residual=rho.residual,
        density_iterations=rho.iterations,
        density_variation=rho.total_variation(),
    )
    return report, rho
