import csv
import math

import numpy as np
import pytest

from expandolab import diagnostics as dg
from expandolab import entropy, maps
from expandolab.errors import InvalidConfig, NonPositiveBeta, OutsideDomain

SQ2 = math.sqrt(2)


def test_check_p1_examples():
    p = dg.check_p1(maps.tent2d(maps.TAU))
    assert p.sigma == pytest.approx(0.8022, abs=1e-4) and p.passed and p.flag is None
    p = dg.check_p1(maps.tent1d(1.1))
    assert p.sigma == pytest.approx(1 / 1.1) and p.passed
    p = dg.check_p1(maps.affine_stub(0.5))
    assert not p.passed and p.flag == "NotExpanding"


@pytest.mark.parametrize("t", [1.19, 1.2, 1.5, 2.0])
def test_star_tent1d_fifth_power(t):
    s = dg.star_condition(maps.iterate(maps.tent1d(t), 5), 1.0)
    assert s.value == pytest.approx(2 * t ** -5, rel=1e-12)
    assert s.passed
    if t > 2 ** 0.25:
        assert s.value <= 2 ** -0.25 + 1e-9


def test_star_unit_power_and_2d():
    s = dg.star_condition(maps.tent1d(2.0))
    assert s.value == pytest.approx(1.0) and not s.passed
    beta = 3.0
    assert dg.star_condition(maps.tent2d(1.0), beta).value == pytest.approx((1 / SQ2) * (1 + 1 / beta))
    with pytest.raises(NonPositiveBeta):
        dg.star_condition(maps.tent1d(2.0), 0.0)
    with pytest.raises(InvalidConfig):
        dg.star_condition(maps.tent2d(1.0))


def test_s1_s2_constants():
    for t in (0.9, 1.0):
        r = dg.check_s1_s2(maps.tent2d(t))
        assert r.B == pytest.approx(t * SQ2) and r.beta_s == 0 and r.passed
    assert dg.check_s1_s2(maps.tent1d(1.4)).B == pytest.approx(1.4)
    assert dg.check_s1_s2(maps.skew_tent(1 / 3)).B == pytest.approx(3.0)


def test_expansion_report():
    r = dg.expansion_report(maps.iterate(maps.tent1d(1.5), 5))
    assert r.star_value == pytest.approx(r.sigma * (1 + 1 / r.beta), abs=1e-12)
    assert r.beta_status == "default-1d" and r.delta == 0.0
    assert r.K_bound == pytest.approx(1 / (r.alpha * r.beta))
    assert r.star_pass == (r.star_value < 1) and r.p1_pass == (r.sigma < 1)
    r2 = dg.expansion_report(maps.tent2d(0.95))
    assert r2.beta_status == "unverified" and math.isnan(r2.star_value) and math.isnan(r2.K_bound)
    r3 = dg.expansion_report(maps.tent2d(0.95), beta=2.0, alpha=0.1)
    assert r3.beta_status == "configured"
    assert r3.star_value == pytest.approx(1.5 / (0.95 * SQ2))
    with pytest.raises(NonPositiveBeta):
        dg.expansion_report(maps.tent2d(0.95), beta=-1.0)


def test_family_constants_uniform():
    out = dg.family_constants("tent1d", [1.2, 1.5, 2.0], power=5)
    assert out["lambda"] == pytest.approx(2 * 1.2 ** -5)


@pytest.mark.parametrize("family,t,full", [("tent1d", 2.0, 2.0), ("skew_tent", 1 / 3, 1.0), ("skew_tent", 0.7, 1.0)])
def test_quasi_markov_full_branches(family, t, full):
    m = maps.make_family(family, t)
    scan = dg.quasi_markov_scan(m, maps.typical_point(m, 1), 200, 50)
    assert np.all(scan.series == full)
    assert scan.eta_hat == full


def test_quasi_markov_tent2d():
    m = maps.tent2d(0.95)
    scan = dg.quasi_markov_scan(m, maps.typical_point(m, 42), 200, 50)
    assert scan.eta_hat > 0.25
    assert scan.series.max() <= m.measure + 1e-9 and scan.series.min() >= 0
    # brute-force windowed minimum
    ref = min(max(scan.series[k:k + 51]) for k in range(200 - 50))
    assert scan.eta_hat == ref
    assert scan.running[-1] == ref and math.isnan(scan.running[49])


def test_quasi_markov_errors():
    with pytest.raises(InvalidConfig):
        dg.quasi_markov_scan(maps.tent1d(2.0), 0.3, 10, 20)
    with pytest.raises(OutsideDomain):
        dg.quasi_markov_scan(maps.tent1d(2.0), 3.0, 100, 10)


def test_slow_recurrence_oracle():
    # density 1/2 on [0, 2], four one-sided neighbourhoods of {0, 1, 2}
    oracle = 4 * 0.1 * (1 - math.log(0.1)) / 2
    val = dg.slow_recurrence(maps.tent1d(2.0), 0.3, 1_000_000, 0.1)
    assert val == pytest.approx(oracle, rel=0.01)


def test_slow_recurrence_monotone_and_limit():
    m = maps.tent2d(0.95)
    vals = [dg.slow_recurrence(m, (0.9, 0.3), 100_000, d) for d in (1e-9, 1e-3, 0.01, 0.1, 0.3)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[0] < 1e-3
    with pytest.raises(InvalidConfig):
        dg.slow_recurrence(m, (0.9, 0.3), 100_000, 5.0)


@pytest.mark.parametrize("t", [1.2, 1.7])
def test_logdist_tent1d(t):
    est = dg.logdist_integral(maps.tent1d(t), 1, 4096)
    assert est.value == pytest.approx(4 * (0.5 - 0.5 * math.log(0.5)), rel=0.01)
    assert est.gap < 0.05


def test_logdist_tent2d_l2_bounded():
    est = dg.logdist_integral(maps.tent2d(1.0), 2, 128)
    assert est.gap < 0.05
    with pytest.raises(InvalidConfig):
        dg.logdist_integral(maps.tent2d(1.0), 3, 128)


def test_log_jacobian_continuity():
    assert dg.log_jacobian_l1_continuity("tent2d", 0.9, 0.9) == 0.0
    assert dg.log_jacobian_l1_continuity("tent2d", 0.9, 0.95) == \
        pytest.approx(abs(math.log(2 * 0.81) - math.log(2 * 0.9025)), abs=1e-12)
    assert dg.log_jacobian_l1_continuity("tent1d", 1.5, 1.6) == pytest.approx(0.12908, abs=1e-5)
    skew = dg.log_jacobian_l1_continuity("skew_tent", 0.3, 0.4)
    oracle = 0.3 * abs(math.log(1 / 0.3) - math.log(1 / 0.4)) + 0.1 * abs(math.log(1 / 0.7) - math.log(1 / 0.4)) \
        + 0.6 * abs(math.log(1 / 0.7) - math.log(1 / 0.6))
    assert skew == pytest.approx(oracle, rel=1e-12)


FAST = dg.SweepConfig(grid_k=64, orbit=100_000, samples=10, seed=42)


def test_sweep_tent1d_formula_column(tmp_path):
    ts = [1.2, 1.5, 2.0]
    table = dg.entropy_sweep("tent1d", ts, FAST)
    assert table.column("h_formula") == pytest.approx(np.log(ts), abs=1e-12)
    assert math.isnan(table.rows[0].l1_prev_density) and table.rows[1].l1_prev_density > 0
    assert table.column("star_value") == pytest.approx([2 * t ** -5 for t in ts])
    path = tmp_path / "s.csv"
    table.to_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == list(dg.SWEEP_COLUMNS) and len(rows) == 4


def test_sweep_single_t_equals_report():
    table = dg.entropy_sweep("tent2d", [0.95], FAST)
    report, _ = entropy.entropy_report(maps.tent2d(0.95), grid_k=64, orbit_length=100_000, samples=10,
                                       seed=42)
    row = table.rows[0]
    assert (row.h_formula, row.h_smb_mean, row.h_block) == (report.h_formula, report.h_smb, report.h_block)
    assert row.h_formula == pytest.approx(math.log(2 * 0.95 ** 2), abs=1e-12)
    assert math.isnan(row.star_value)


def test_sweep_row_failure_is_tagged():
    table = dg.entropy_sweep("tent1d", [1.5, 2.5], FAST)
    assert table.rows[0].status == "ok"
    assert table.rows[1].status == "failed:ParameterOutOfRange"


def test_sweep_thread_count_irrelevant(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    dg.entropy_sweep("tent1d", [1.3, 1.6, 1.9], FAST).to_csv(a)
    cfg = dg.SweepConfig(**{**FAST.__dict__, "threads": 3})
    dg.entropy_sweep("tent1d", [1.3, 1.6, 1.9], cfg).to_csv(b)
    assert a.read_bytes() == b.read_bytes()


def test_sweep_rejects_bad_grid():
    with pytest.raises(InvalidConfig):
        dg.entropy_sweep("tent1d", [1.5, 1.4], FAST)
    assert dg.parameter_grid(1.2, 2.0, 0.05) == pytest.approx([1.2 + 0.05 * i for i in range(17)])
    assert len(dg.parameter_grid(0.89, 1.0, 0.01)) == 12
    with pytest.raises(InvalidConfig):
        dg.parameter_grid(2.0, 1.2, 0.05)
