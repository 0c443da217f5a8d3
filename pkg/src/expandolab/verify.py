"""Acceptance and property suites.

Each criterion returns a :class:`CriterionResult` holding its individual
checks.  ``tol_scale`` multiplies every numeric tolerance; it exists so the
failure path of the runner can be exercised (``tol_scale=0`` makes every
inexact check fail).
"""
from __future__ import annotations

import io
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import acim, diagnostics, entropy
from .maps import TAU, evaluate_many, expansion_constant, iterate, make_family, random_point, typical_point
from .partition import max_diameter, refine, total_measure

LOG2 = math.log(2.0)
SWEEP_2D = (0.89, 0.92, 0.95, 0.98, 1.00)
SWEEP_1D = tuple(round(1.20 + 0.05 * i, 2) for i in range(17))
ETA_0 = 0.25
LOGDIST_1D = 4.0 * (0.5 - 0.5 * math.log(0.5))


@dataclass
class Check:
    label: str
    value: float
    limit: float
    passed: bool

    def __str__(self) -> str:
        mark = "ok" if self.passed else "FAIL"
        return f"{mark} {self.label}: {self.value:.6g} (limit {self.limit:.3g})"


@dataclass
class CriterionResult:
    name: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tail = f"{len(self.checks) - len(self.failures)}/{len(self.checks)} checks"
        if self.error:
            tail = f"error {self.error}"
        return f"{status}  {self.name}  [{tail}, {self.seconds:.1f}s]"


class _Checks:
    def __init__(self, result: CriterionResult, scale: float):
        self.result = result
        self.scale = scale

    def _add(self, label, value, limit, passed):
        self.result.checks.append(Check(label, float(value), float(limit), bool(passed)))

    def close(self, label, value, target, tol, rel=False):
        err = abs(value - target)
        if rel:
            err /= abs(target)
        limit = tol * self.scale
        self._add(label, err, limit, err <= limit)

    def le(self, label, value, bound):
        """``value <= bound * scale``: the bound itself is the tolerance."""
        limit = bound * self.scale
        self._add(label, value, limit, value <= limit)

    def ge(self, label, value, bound):
        self._add(label, value, bound, value > bound)

    def runtime(self, limit):
        self._add("runtime [s]", self.result.seconds, limit, self.result.seconds < limit)


def _density(m, k=256):
    return acim.stationary_density(acim.build_ulam(m, acim.build_grid(m, k)))


def _smb(m, rho, n, seed=42, samples=50, orbit=entropy.DEFAULT_ORBIT):
    x0 = random_point(m, np.random.default_rng(seed))
    pts = entropy.orbit_samples(m, samples, orbit, seed, x0=x0)
    return entropy.smb_estimate(m, rho, pts, n).mean


def c1_tent1d_exact(ck: _Checks):
    m = make_family("tent1d", 2.0)
    rho = _density(m)
    ck.close("L1(rho, 1/2)", acim.l1_distance(rho, acim.uniform_density(rho.grid)), 0.0, 1e-3)
    ck.close("h_formula = log 2", entropy.formula_integral(m, rho), LOG2, 1e-12)
    ck.close("block(n=12) = log 2", entropy.block_entropy(m, rho, 12), LOG2, 1e-6)
    ck.close("smb(n=16) rel", _smb(m, rho, 16), LOG2, 0.01, rel=True)
    return 10.0


def c2_skew_tent(ck: _Checks):
    m = make_family("skew_tent", 1.0 / 3.0)
    rho = _density(m)
    exact = math.log(3.0) / 3.0 + 2.0 * math.log(1.5) / 3.0
    ck.close("L1(rho, 1)", acim.l1_distance(rho, acim.uniform_density(rho.grid)), 0.0, 1e-3)
    ck.close("h_formula", entropy.formula_integral(m, rho), exact, 1e-3)
    ck.close("smb(n=14) rel", _smb(m, rho, 14), exact, 0.02, rel=True)
    return 10.0


def c3_tent2d_conformal(ck: _Checks):
    m = make_family("tent2d", 1.0)
    rho = _density(m)
    x0 = random_point(m, np.random.default_rng(42))
    lyap = entropy.lyapunov_exponents(m, x0, entropy.DEFAULT_ORBIT, 42)
    for i, v in enumerate(lyap, start=1):
        ck.close(f"lyap_{i} = log(2)/2", v, LOG2 / 2.0, 1e-6)
    ck.close("h_formula = log 2", entropy.formula_integral(m, rho), LOG2, 1e-12)
    ck.close("smb(n=10) rel", _smb(m, rho, 10), LOG2, 0.05, rel=True)
    ck.close("block(n=8) rel", entropy.block_entropy(m, rho, 8), LOG2, 0.08, rel=True)
    return 120.0


def _sweep(family, ts, n):
    cfg = diagnostics.SweepConfig(grid_k=256, n=n, samples=50, seed=42, beta=None)
    return diagnostics.entropy_sweep(family, ts, cfg)


def c4_tent2d_sweep(ck: _Checks):
    table = _sweep("tent2d", SWEEP_2D, 10)
    for r in table.rows:
        exact = math.log(2.0 * r.t * r.t)
        ck.close(f"t={r.t} h_formula = log(2t^2)", r.h_formula, exact, 1e-12)
        ck.close(f"t={r.t} smb rel", r.h_smb_mean, exact, 0.05, rel=True)
    for a, b in zip(table.rows, table.rows[1:]):
        ck.le(f"|dh_smb| {a.t}->{b.t}", abs(b.h_smb_mean - a.h_smb_mean), 0.08)
        ck.le(f"L1 density {a.t}->{b.t}", b.l1_prev_density, 0.15)
    return 600.0


def c5_tent1d_sweep(ck: _Checks):
    table = _sweep("tent1d", SWEEP_1D, 16)
    for r in table.rows:
        ck.close(f"t={r.t} h_formula = log t", r.h_formula, math.log(r.t), 1e-12)
        ck.close(f"t={r.t} smb rel", r.h_smb_mean, math.log(r.t), 0.03, rel=True)
    for a, b in zip(table.rows, table.rows[1:]):
        ck.le(f"|dh_smb| {a.t}->{b.t}", abs(b.h_smb_mean - a.h_smb_mean), 0.05)
    return 120.0


def c6_expansion(ck: _Checks):
    worst = 2.0 ** -0.25
    for t in SWEEP_1D:
        star = diagnostics.star_condition(iterate(make_family("tent1d", t), 5), 1.0)
        ck.close(f"t={t} star = 2 t^-5", star.value, 2.0 * t ** -5, 1e-12)
        ck._add(f"t={t} star <= 2^-1/4", star.value, worst + 1e-9 * ck.scale,
                star.passed and star.value <= worst + 1e-9 * ck.scale)
    for t in sorted(set(np.linspace(TAU, 1.0, 12).tolist()) | set(SWEEP_2D)):
        p1 = diagnostics.check_p1(make_family("tent2d", t))
        ck.close(f"t={t:.5f} sigma = 1/(t sqrt 2)", p1.sigma, 1.0 / (t * math.sqrt(2.0)), 1e-12)
        ck._add(f"t={t:.5f} P1 sigma <= 0.8023", p1.sigma, 0.8023, p1.passed and p1.sigma <= 0.8023)
    return 60.0


def c7_quasi_markov(ck: _Checks):
    for fam, t in (("tent1d", 2.0), ("skew_tent", 1.0 / 3.0)):
        m = make_family(fam, t)
        scan = diagnostics.quasi_markov_scan(m, typical_point(m, 42), 200, 50)
        ck.close(f"{fam} eta_hat = m(Omega)", scan.eta_hat, m.measure, 0.0)
        ck.le(f"{fam} max series - m(Omega)", float(scan.series.max()) - m.measure, 1e-9)
    m = make_family("tent2d", 0.95)
    scan = diagnostics.quasi_markov_scan(m, typical_point(m, 42), 200, 50)
    ck.ge("tent2d(0.95) eta_hat > eta_0", scan.eta_hat, ETA_0)
    ck.le("tent2d(0.95) max series - m(Omega)", float(scan.series.max()) - m.measure, 1e-9)
    return 60.0


def c8_integrability(ck: _Checks):
    for t in (1.2, 1.5, 2.0):
        est = diagnostics.logdist_integral(make_family("tent1d", t), 1, 4096)
        ck.close(f"tent1d({t}) p=1", est.value, LOGDIST_1D, 0.01, rel=True)
    est = diagnostics.logdist_integral(make_family("tent2d", 1.0), 2, 256)
    ck.le("tent2d(1) p=2 gap k vs 2k", est.gap, 0.05)
    return 60.0


# property suite -------------------------------------------------------------

_PROPERTY_MAPS = (("tent1d", 1.5), ("skew_tent", 1.0 / 3.0), ("tent2d", 0.95))


def p_row_stochastic(ck: _Checks):
    for fam, t in _PROPERTY_MAPS:
        m = make_family(fam, t)
        op = acim.build_ulam(m, acim.build_grid(m, 64))
        ck.le(f"{fam}({t:.4g}) max |row sum - 1|", float(np.abs(op.row_sums() - 1.0).max()), 1e-9)
    return 60.0


def _sample_points(m, count, seed):
    rng = np.random.default_rng(seed)
    return np.array([random_point(m, rng) for _ in range(count)], dtype=float).reshape(count, m.dim)


def p_chain_rule(ck: _Checks):
    for fam, t in _PROPERTY_MAPS:
        m = make_family(fam, t)
        m3 = iterate(m, 3)
        pts = _sample_points(m, 1000, 7)
        worst = 0.0
        for x in pts:
            x = float(x[0]) if m.dim == 1 else tuple(x)
            prod, y = 1.0, x
            for _ in range(3):
                b = m.branches[m.branch_index(y)]
                prod *= b.transform.jacobian
                y = b.transform(y)
            j = m3.branches[m3.branch_index(x)].transform.jacobian
            worst = max(worst, abs(j - prod) / abs(prod))
        ck.le(f"{fam}({t:.4g}) J chain rule rel", worst, 1e-9)
    return 60.0


def p_partition(ck: _Checks):
    for (fam, t), n in zip(_PROPERTY_MAPS, (8, 6, 6)):
        m = make_family(fam, t)
        cells = refine(m, n)
        ck.le(f"{fam}({t:.4g}) |sum m(cells) - m(Omega)| n={n}", abs(total_measure(cells) - m.measure), 1e-8)
        bound = expansion_constant(m) ** n * m.diameter
        ck.le(f"{fam}({t:.4g}) diam(R^n) - sigma^n diam", max_diameter(cells) - bound, 1e-9)
    return 60.0


def p_lyapunov_sum(ck: _Checks):
    for fam, t in _PROPERTY_MAPS:
        m = make_family(fam, t)
        x0 = random_point(m, np.random.default_rng(3))
        lyap = entropy.lyapunov_exponents(m, x0, 100_000, 3)
        birk = entropy.formula_birkhoff(m, x0, 100_000, 3)
        ck.close(f"{fam}({t:.4g}) sum lyap - birkhoff", sum(lyap), birk, 1e-9)
    return 60.0


def p_iterate(ck: _Checks):
    for fam, t in _PROPERTY_MAPS:
        m = make_family(fam, t)
        pts = _sample_points(m, 1000, 11)
        direct = evaluate_many(iterate(m, 3), pts)
        seq = pts
        for _ in range(3):
            seq = evaluate_many(m, seq)
        ck.le(f"{fam}({t:.4g}) max |T^3 x - T(T(T x))|", float(np.abs(direct - seq).max()), 1e-9)
    return 60.0


def _run_outputs(seed: int) -> bytes:
    buf = io.BytesIO()
    for fam, t in _PROPERTY_MAPS:
        m = make_family(fam, t)
        report, rho = entropy.entropy_report(m, grid_k=64, orbit_length=100_000, samples=10, seed=seed,
                                             family=fam, parameter=t)
        buf.write(report.to_json().encode())
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "rho.csv"
            rho.to_csv(path)
            buf.write(path.read_bytes())
    return buf.getvalue()


def p_determinism(ck: _Checks):
    a, b = _run_outputs(42), _run_outputs(42)
    ck._add("byte-identical reports and densities", float(a != b), 0.0, a == b)
    return 120.0


PROPERTIES: dict[str, Callable] = {
    "P1 Ulam rows stochastic": p_row_stochastic,
    "P2 Jacobian chain rule": p_chain_rule,
    "P3 partition additivity and diameters": p_partition,
    "P4 sum of Lyapunov exponents = Birkhoff log J": p_lyapunov_sum,
    "P5 iterate = repeated evaluate": p_iterate,
    "P6 determinism": p_determinism,
}


def c9_properties(ck: _Checks):
    for res in run_suite("properties", ck.scale):
        ck._add(res.name, len(res.failures), 0.0, res.passed)
    return 600.0


ACCEPTANCE: dict[str, Callable] = {
    "C1 tent1d t=2 exact": c1_tent1d_exact,
    "C2 skew tent p=1/3": c2_skew_tent,
    "C3 tent2d t=1 conformal": c3_tent2d_conformal,
    "C4 tent2d sweep": c4_tent2d_sweep,
    "C5 tent1d sweep": c5_tent1d_sweep,
    "C6 expansion and condition (*)": c6_expansion,
    "C7 quasi-Markov scan": c7_quasi_markov,
    "C8 log-distance integrability": c8_integrability,
    "C9 property suite": c9_properties,
}

SUITES = {"acceptance": ACCEPTANCE, "properties": PROPERTIES}


def run_criterion(name: str, fn: Callable, tol_scale: float = 1.0) -> CriterionResult:
    res = CriterionResult(name)
    ck = _Checks(res, tol_scale)
    start = time.perf_counter()
    try:
        limit = fn(ck)
    except Exception as exc:  # a crashing criterion is a failed criterion
        res.error = f"{type(exc).__name__}: {exc}"
        limit = None
    res.seconds = time.perf_counter() - start
    if limit is not None:
        ck.runtime(limit)
    return res


def run_suite(suite: str, tol_scale: float = 1.0, only=None, echo: Callable | None = None) -> list:
    """Run every criterion of a suite, optionally echoing one line per criterion."""
    if suite not in SUITES:
        raise KeyError(suite)
    out = []
    for name, fn in SUITES[suite].items():
        if only is not None and name not in only:
            continue
        res = run_criterion(name, fn, tol_scale)
        out.append(res)
        if echo is not None:
            echo(res.line())
            for c in res.failures:
                echo(f"      {c}")
    return out
