import math

import numpy as np
import pytest

from expandolab import geometry as geo
from expandolab import maps
from expandolab.errors import CellBudgetExceeded, NegativeMass
from expandolab.partition import (cell_of, entropy_of_masses, max_diameter, partition_entropy, refine,
                                  total_measure)


def test_refine_tent1d_three_steps():
    cells = refine(maps.tent1d(2.0), 3)
    assert len(cells) == 8
    assert [c.cell.measure for c in cells] == pytest.approx([0.25] * 8)
    assert [c.itinerary for c in cells] == sorted(c.itinerary for c in cells)


def test_refine_one_step_is_branch_domains():
    m = maps.tent2d(0.9)
    cells = refine(m, 1)
    assert [c.cell.measure for c in cells] == pytest.approx([d.measure for d in m.domains])


def test_refine_matches_iterate_branch_count():
    m = maps.tent2d(1.0)
    assert len(refine(m, 6)) == len(maps.iterate(m, 6).branches)


def test_refine_budget():
    with pytest.raises(CellBudgetExceeded):
        refine(maps.tent1d(2.0), 12, budget=1000)


@pytest.mark.parametrize("family,t,n", [("tent1d", 1.45, 7), ("skew_tent", 0.3, 5), ("tent2d", 0.93, 6)])
def test_cell_invariants(family, t, n):
    m = maps.make_family(family, t)
    cells = refine(m, n)
    assert total_measure(cells) == pytest.approx(m.measure, abs=1e-10)
    for c in cells:
        jac = math.prod(m.branches[b].transform.jacobian for b in c.itinerary)
        assert c.image.measure == pytest.approx(c.cell.measure * jac, rel=1e-9)
        inside = geo.intersect(c.cell, m.branches[c.itinerary[0]].domain, 0.0).measure
        assert inside == pytest.approx(c.cell.measure, rel=1e-9)


def test_cell_of_examples():
    c = cell_of(maps.tent1d(2.0), 0.3, 2)
    assert (c.cell.lo, c.cell.hi) == pytest.approx((0.0, 0.5))
    assert c.image.measure == pytest.approx(2.0)
    m = maps.tent2d(0.95)
    c1 = cell_of(m, (0.6, 0.2), 1)
    assert c1.cell.measure == pytest.approx(0.5)
    assert c1.image.measure == pytest.approx(0.9025)


def test_cell_of_agrees_with_refine(rng):
    m = maps.tent2d(0.95)
    cells = refine(m, 5)
    by_word = {c.itinerary: c for c in cells}
    for _ in range(50):
        x = maps.random_point(m, rng)
        c = cell_of(m, x, 5)
        ref = by_word[c.itinerary]
        assert geo.contains(ref.cell, x, tol=1e-9)
        assert c.cell.measure == pytest.approx(ref.cell.measure, rel=1e-7)
        assert c.image.measure == pytest.approx(ref.image.measure, rel=1e-7)


def test_partition_entropy_examples():
    cells = refine(maps.tent1d(2.0), 3)
    h = partition_entropy(cells)
    assert h == pytest.approx(3 * math.log(2))
    assert h / 3 == pytest.approx(0.693147, abs=1e-6)
    assert partition_entropy(refine(maps.identity_stub(), 1)) == 0.0
    assert entropy_of_masses([0.5, 0.5]) == pytest.approx(math.log(2))


def test_negative_mass():
    with pytest.raises(NegativeMass):
        entropy_of_masses([1.1, -0.1])


def test_mass_renormalised_with_warning():
    with pytest.warns(RuntimeWarning):
        assert entropy_of_masses([1.0, 1.0]) == pytest.approx(math.log(2))


def test_max_diameter():
    m = maps.tent1d(2.0)
    for n in (1, 3, 5):
        assert max_diameter(refine(m, n)) == pytest.approx(2 * 2.0 ** -n)
    assert max_diameter(refine(maps.tent2d(1.0), 1)) == pytest.approx(math.sqrt(2))
    m2 = maps.tent2d(0.9)
    diams = [max_diameter(refine(m2, n)) for n in range(1, 8)]
    assert all(b <= a + 1e-12 for a, b in zip(diams, diams[1:]))
    sigma = maps.expansion_constant(m2)
    assert all(d <= sigma ** n * m2.diameter + 1e-9 for n, d in enumerate(diams, start=1))
