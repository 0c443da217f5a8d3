import json
import math

import numpy as np
import pytest

from conftest import LOG2, density
from expandolab import acim, entropy, maps
from expandolab.errors import InvalidConfig, ZeroCellMass

SKEW_H = math.log(3) / 3 + 2 * math.log(1.5) / 3


@pytest.mark.parametrize("t", [1.2, 1.5, 2.0])
def test_formula_integral_tent1d_any_density(t):
    m = maps.tent1d(t)
    g = acim.build_grid(m, 64)
    for rho in (acim.uniform_density(g), acim.density_from_function(g, lambda x: 1 + x * x), density("tent1d", t)):
        assert entropy.formula_integral(m, rho) == pytest.approx(math.log(t), abs=1e-12)


@pytest.mark.parametrize("t,expected", [(1.0, LOG2), (0.95, 0.59057)])
def test_formula_integral_tent2d(t, expected):
    rho = density("tent2d", t)
    assert entropy.formula_integral(maps.tent2d(t), rho) == pytest.approx(math.log(2 * t * t), abs=1e-12)
    assert entropy.formula_integral(maps.tent2d(t), rho) == pytest.approx(expected, abs=1e-5)


def test_formula_integral_skew_closed_form():
    m = maps.skew_tent(1 / 3)
    one = acim.uniform_density(acim.build_grid(m, 256))
    assert entropy.formula_integral(m, one) == pytest.approx(SKEW_H, abs=1e-3)
    # the exact branch split leaves no quadrature error even off the grid points
    m7 = maps.skew_tent(0.3)
    assert entropy.formula_integral(m7, acim.uniform_density(acim.build_grid(m7, 64))) == \
        pytest.approx(0.3 * math.log(1 / 0.3) + 0.7 * math.log(1 / 0.7), abs=1e-12)


def test_formula_birkhoff():
    m = maps.tent2d(0.95)
    assert entropy.formula_birkhoff(m, (0.9, 0.3), 100_000) == pytest.approx(math.log(2 * 0.95 ** 2), abs=1e-12)
    assert entropy.formula_birkhoff(maps.skew_tent(1 / 3), 0.4, 1_000_000) == pytest.approx(SKEW_H, abs=2e-3)
    a = entropy.formula_birkhoff(maps.tent1d(1.7), 0.2, 10_000, seed=1)
    b = entropy.formula_birkhoff(maps.tent1d(1.7), 1.3, 50_000, seed=9)
    assert a == pytest.approx(math.log(1.7), abs=1e-12)
    assert b == pytest.approx(math.log(1.7), abs=1e-12)
    with pytest.raises(InvalidConfig):
        entropy.formula_birkhoff(m, (0.9, 0.3), 100)


def test_smb_hand_example():
    m = maps.tent1d(2.0)
    est = entropy.smb_estimate(m, density("tent1d", 2.0), [0.3], 2)
    assert est.mean == pytest.approx(LOG2)
    assert est.sd == 0.0


def test_smb_single_branch_is_zero():
    m = maps.identity_stub()
    rho = acim.uniform_density(acim.build_grid(m, 16))
    assert entropy.smb_estimate(m, rho, [0.2, 0.7], 1).mean == 0.0


def test_smb_tent2d_unit():
    m = maps.tent2d(1.0)
    rho = density("tent2d", 1.0)
    pts = entropy.orbit_samples(m, 50, 1_000_000, 42)
    mean, sd = entropy.smb_estimate(m, rho, pts, 10)
    assert mean == pytest.approx(LOG2, rel=0.05)
    assert sd >= 0


def test_smb_zero_mass():
    m = maps.tent1d(1.2)
    rho = density("tent1d", 1.2)  # supported on [0.96, 1.2]
    with pytest.raises(ZeroCellMass):
        entropy.smb_estimate(m, rho, [1.9], 3)


def test_block_entropy_dyadic():
    assert entropy.block_entropy(maps.tent1d(2.0), density("tent1d", 2.0), 12) == pytest.approx(LOG2, abs=1e-6)


def test_block_entropy_one_step_definition():
    m = maps.skew_tent(0.4)
    g = acim.build_grid(m, 50)
    rho = acim.density_from_function(g, lambda x: 2 * x)
    q = acim.region_mass(rho, m.branches[0].domain)
    expected = -(q * math.log(q) + (1 - q) * math.log(1 - q))
    assert entropy.block_entropy(m, rho, 1) == pytest.approx(expected, rel=1e-12)


def test_block_entropy_tent2d_upper_biased():
    rho = density("tent2d", 0.95)
    h = entropy.block_entropy(maps.tent2d(0.95), rho, 8)
    assert h == pytest.approx(0.59057, rel=0.08)
    assert h > math.log(2 * 0.95 ** 2)


@pytest.mark.parametrize("t", [maps.TAU, 0.95, 1.0])
def test_lyapunov_tent2d_conformal(t):
    m = maps.tent2d(t)
    lyap = entropy.lyapunov_exponents(m, (0.9, 0.3), 200_000)
    assert lyap == pytest.approx([math.log(t * math.sqrt(2))] * 2, abs=1e-6)
    assert lyap[0] >= lyap[1]


def test_lyapunov_1d_and_sum():
    assert entropy.lyapunov_exponents(maps.tent1d(1.6), 0.3, 20_000) == pytest.approx([math.log(1.6)])
    m = maps.skew_tent(0.3)
    lyap = entropy.lyapunov_exponents(m, 0.45, 100_000)
    assert sum(lyap) == pytest.approx(entropy.formula_birkhoff(m, 0.45, 100_000), abs=1e-9)


def test_report_fields_and_determinism():
    m = maps.tent2d(0.95)
    r1, rho = entropy.entropy_report(m, grid_k=64, orbit_length=100_000, samples=10, seed=5,
                                     family="tent2d", parameter=0.95)
    r2, _ = entropy.entropy_report(m, grid_k=64, orbit_length=100_000, samples=10, seed=5,
                                   family="tent2d", parameter=0.95)
    assert r1.to_json() == r2.to_json()
    data = json.loads(r1.to_json())
    for key in ("h_formula", "h_formula_birkhoff", "h_smb", "h_smb_sd", "h_block", "lyapunov",
                "n_used", "N_used", "grid_k", "seed"):
        assert key in data
    assert data["n_used"] == 10 and data["block_n_used"] == 8 and data["grid_k"] == 64
    assert sum(r1.lyapunov) == pytest.approx(r1.h_formula_birkhoff, abs=1e-9)
    assert r1.h_formula == pytest.approx(math.log(2 * 0.95 ** 2), abs=1e-12)


def test_orbit_samples_count():
    pts = entropy.orbit_samples(maps.tent1d(1.5), 50, 100_000, 3)
    assert len(pts) == 50 and all(0 <= p <= 2 for p in pts)
