"""Hypothesis checks and parameter sweeps.

Everything checkable for piecewise affine maps is computed: expansion and
distortion constants, condition (*) given a large-branch angle constant,
the constants of the power-of-distance conditions, the quasi-Markov image
series, slow recurrence, log-distance integrability and continuity sweeps.
The large-branch constants of 2D maps are inputs, never inferred.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import acim, entropy
from . import geometry as geo
from .errors import ExpandolabError, InvalidConfig, NonPositiveBeta
from .maps import (PiecewiseAffineMap, distortion_constant, expansion_constant, iterate,
                   make_family)
from .partition import forward_images

SWEEP_COLUMNS = ("t", "h_formula", "h_smb_mean", "h_smb_sd", "h_block", "lyap_1", "lyap_2",
                 "l1_prev_density", "star_value", "status")


class P1Check(NamedTuple):
    sigma: float
    passed: bool

    @property
    def flag(self):
        return None if self.passed else "NotExpanding"


class StarCheck(NamedTuple):
    value: float
    passed: bool


class S1S2Check(NamedTuple):
    B: float
    beta_s: float
    passed: bool


def check_p1(m: PiecewiseAffineMap) -> P1Check:
    sigma = float(expansion_constant(m))
    return P1Check(sigma, bool(sigma < 1.0))


def _beta_for(m: PiecewiseAffineMap, beta):
    if beta is None:
        if m.dim == 1:
            return 1.0
        raise InvalidConfig("the large-branch angle constant beta must be configured for 2D maps")
    if not beta > 0:
        raise NonPositiveBeta(f"beta must be positive, got {beta}")
    return float(beta)


def star_condition(m: PiecewiseAffineMap, beta: float | None = None) -> StarCheck:
    """``sigma * (1 + 1/beta)`` and whether it is below 1 (beta defaults to 1 in 1D)."""
    beta = _beta_for(m, beta)
    value = float(expansion_constant(m)) * (1.0 + 1.0 / beta)
    return StarCheck(value, bool(value < 1.0))


def check_s1_s2(m: PiecewiseAffineMap) -> S1S2Check:
    # derivative constant on each branch: (S1) holds with exponent 0 and
    # B = max ||D phi||, and the (S2) left-hand side vanishes within a branch
    return S1S2Check(float(max(b.transform.norm() for b in m.branches)), 0.0, True)


def _alpha_1d(m: PiecewiseAffineMap) -> float:
    """Largest collar width: half the shortest branch image."""
    return min(geo.affine_image(b.domain, b.transform).measure for b in m.branches) / 2.0


@dataclass
class ExpansionReport:
    sigma: float
    delta: float
    alpha: float
    beta: float
    star_value: float
    lambda_bound: float
    K_bound: float
    p1_pass: bool
    star_pass: bool
    beta_status: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def expansion_report(m: PiecewiseAffineMap, beta: float | None = None,
                     alpha: float | None = None) -> ExpansionReport:
    """Constants of the large-branch setting for one map.

    In 1D beta defaults to 1 and alpha to half the shortest branch image.  In
    2D missing constants are reported as NaN with status ``"unverified"``.
    """
    sigma = float(expansion_constant(m))
    delta = float(distortion_constant(m))
    if m.dim == 1:
        status = "configured" if beta is not None else "default-1d"
        beta = 1.0 if beta is None else beta
        alpha = _alpha_1d(m) if alpha is None else alpha
    else:
        status = "configured" if beta is not None else "unverified"
    if beta is not None and not beta > 0:
        raise NonPositiveBeta(f"beta must be positive, got {beta}")
    b = math.nan if beta is None else float(beta)
    a = math.nan if alpha is None else float(alpha)
    star = sigma * (1.0 + 1.0 / b)
    return ExpansionReport(
        sigma=sigma, delta=delta, alpha=a, beta=b, star_value=star,
        lambda_bound=star, K_bound=delta + 1.0 / (a * b) + delta / b,
        p1_pass=bool(sigma < 1.0), star_pass=bool(star < 1.0), beta_status=status,
    )


def family_constants(family: str, t_values: Sequence[float], power: int = 1,
                     beta: float | None = None, alpha: float | None = None) -> dict:
    """Expansion reports across a family and the uniform lambda, K over it."""
    reports = [expansion_report(iterate(make_family(family, t), power), beta, alpha) for t in t_values]
    return {
        "reports": reports,
        "lambda": max(r.lambda_bound for r in reports),
        "K": max(r.K_bound for r in reports),
    }


@dataclass
class QuasiMarkovScan:
    x0: object
    N: int
    window: int
    series: np.ndarray
    eta_hat: float
    running: np.ndarray = field(repr=False, default=None)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "m_Pn", "eta_hat"])
            for n, (v, r) in enumerate(zip(self.series.tolist(), self.running.tolist()), start=1):
                w.writerow([n, repr(v), "nan" if math.isnan(r) else repr(r)])


def windowed_eta(series: np.ndarray, window: int) -> float:
    """``min_k max(series[k : k + window + 1])`` over complete windows."""
    series = np.asarray(series, dtype=float)
    if series.size <= window:
        return math.nan
    view = np.lib.stride_tricks.sliding_window_view(series, window + 1)
    return float(view.max(axis=1).min())


def quasi_markov_scan(m: PiecewiseAffineMap, x0, N: int = 200, window: int = 50) -> QuasiMarkovScan:
    """Measures of the images ``phi^n(R^n(x0))`` for n = 1..N and their windowed floor."""
    if not (N >= window >= 1):
        raise InvalidConfig(f"need N >= window >= 1, got N={N}, window={window}")
    series = np.array([P.measure for _b, P, _F, _x in forward_images(m, x0, N)])
    running = np.full(N, math.nan)
    if N > window:
        view = np.lib.stride_tricks.sliding_window_view(series, window + 1).max(axis=1)
        running[window:] = np.minimum.accumulate(view)
    return QuasiMarkovScan(x0, N, window, series, windowed_eta(series, window), running)


def slow_recurrence(m: PiecewiseAffineMap, x0, N: int = 1_000_000, delta: float = 0.1,
                    seed: int = 42, burn_in: int = acim.DEFAULT_BURN_IN) -> float:
    """Orbit average of ``-log dist_delta(x_j, S)`` (dist_delta is 1 beyond delta)."""
    if not 0 < delta < m.diameter:
        raise InvalidConfig(f"delta must lie in (0, diam) = (0, {m.diameter}), got {delta}")
    if N < 10_000:
        raise InvalidConfig(f"orbit length must be >= 1e4, got {N}")
    _pts, _br, dist = acim.orbit(m, x0, N, burn_in=burn_in, seed=seed)
    d = np.where(dist < delta, np.maximum(dist, 1e-300), 1.0)
    return float(np.mean(-np.log(d)))


class LogDistEstimate(NamedTuple):
    value: float
    value_fine: float
    gap: float


def _logdist_midpoint(m: PiecewiseAffineMap, p: int, k: int) -> float:
    grid = acim.build_grid(m, k)
    dist = geo.distances_to_set(grid.centroids if m.dim == 2 else grid.centroids[:, 0], m.singular)
    return float(np.sum(np.abs(np.log(dist)) ** p * grid.measures))


def logdist_integral(m: PiecewiseAffineMap, p: int = 1, quadrature_k: int = 256) -> LogDistEstimate:
    """Midpoint-rule ``int |log dist(x, S)|^p dm`` at k and 2k and their relative gap."""
    if p not in (1, 2):
        raise InvalidConfig(f"p must be 1 or 2, got {p}")
    if quadrature_k < 64:
        raise InvalidConfig(f"quadrature_k must be >= 64, got {quadrature_k}")
    coarse = _logdist_midpoint(m, p, quadrature_k)
    fine = _logdist_midpoint(m, p, 2 * quadrature_k)
    return LogDistEstimate(coarse, fine, abs(fine - coarse) / abs(fine))


def log_jacobian_l1_continuity(family: str, t1: float, t2: float, power: int = 1) -> float:
    """``int |log J_t1 - log J_t2| dm`` by exact overlap of the branch domains."""
    a = iterate(make_family(family, t1), power)
    b = iterate(make_family(family, t2), power)
    total = 0.0
    la, lb = a.log_jacobians, b.log_jacobians
    for i, bra in enumerate(a.branches):
        for j, brb in enumerate(b.branches):
            diff = abs(la[i] - lb[j])
            if diff == 0.0:
                continue
            total += geo.intersect(bra.domain, brb.domain, 0.0).measure * diff
    return total


DEFAULT_POWER = {"tent1d": 5, "tent2d": 6, "skew_tent": 1}


@dataclass
class SweepConfig:
    grid_k: int = 256
    n: int | None = None
    block_n: int | None = None
    orbit: int = entropy.DEFAULT_ORBIT
    samples: int = entropy.DEFAULT_SAMPLES
    seed: int = 42
    power: int | None = None
    beta: float | None = None
    threads: int = 1


@dataclass
class SweepRow:
    t: float
    h_formula: float = math.nan
    h_smb_mean: float = math.nan
    h_smb_sd: float = math.nan
    h_block: float = math.nan
    lyap_1: float = math.nan
    lyap_2: float = math.nan
    l1_prev_density: float = math.nan
    star_value: float = math.nan
    status: str = "ok"

    def values(self):
        return [getattr(self, c) for c in SWEEP_COLUMNS]


@dataclass
class SweepTable:
    family: str
    rows: list
    reports: list = field(default_factory=list, repr=False)
    densities: list = field(default_factory=list, repr=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SWEEP_COLUMNS)
            for r in self.rows:
                w.writerow([_fmt(v) for v in r.values()])


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return repr(float(v))


def _sweep_row(family: str, t: float, cfg: SweepConfig):
    m = make_family(family, t)
    report, rho = entropy.entropy_report(
        m, grid_k=cfg.grid_k, n=cfg.n, block_n=cfg.block_n, orbit_length=cfg.orbit,
        samples=cfg.samples, seed=cfg.seed, family=family, parameter=t)
    power = cfg.power if cfg.power is not None else DEFAULT_POWER[family]
    try:
        star = star_condition(iterate(m, power), cfg.beta).value
    except InvalidConfig:
        star = math.nan
    lyap = list(report.lyapunov) + [math.nan]
    row = SweepRow(t=t, h_formula=report.h_formula, h_smb_mean=report.h_smb, h_smb_sd=report.h_smb_sd,
                   h_block=report.h_block, lyap_1=lyap[0], lyap_2=lyap[1], star_value=star)
    return row, report, rho


def entropy_sweep(family: str, t_values: Sequence[float], config: SweepConfig | None = None) -> SweepTable:
    """One entropy report per parameter; failures are recorded per row."""
    cfg = config or SweepConfig()
    ts = [float(t) for t in t_values]
    if not ts:
        raise InvalidConfig("empty parameter grid")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise InvalidConfig("parameter values must be strictly increasing")

    def run(t):
        try:
            return _sweep_row(family, t, cfg)
        except ExpandolabError as exc:
            return SweepRow(t=t, status=f"failed:{exc.code}"), None, None

    with ThreadPoolExecutor(max_workers=max(cfg.threads, 1)) as pool:
        results = list(pool.map(run, ts))
    rows, reports, dens = [], [], []
    prev = None
    for row, rep, rho in results:
        if rho is not None and prev is not None:
            row.l1_prev_density = acim.l1_distance(prev, rho)
        if rho is not None:
            prev = rho
        rows.append(row)
        reports.append(rep)
        dens.append(rho)
    return SweepTable(family, rows, reports, dens)


def parameter_grid(t_min: float, t_max: float, t_step: float) -> list[float]:
    """Inclusive arithmetic grid, rounded to the step's decimal precision."""
    if t_step <= 0 or t_min > t_max:
        raise InvalidConfig(f"empty parameter grid [{t_min}, {t_max}] step {t_step}")
    count = int(math.floor((t_max - t_min) / t_step + 1e-9)) + 1
    digits = max(0, -int(math.floor(math.log10(t_step))) + 2)
    return [round(t_min + i * t_step, digits) for i in range(count)]
