import numpy as np
import pytest

from pqradial import (ProblemParams, RegimeError, critical_masses,
                      find_constant_solutions, field_grid, ray_curve_intersections,
                      region_label, vanishing_curves)
from pqradial.params import compute_exponents
from pqradial.portrait import portrait_case

P_I = ProblemParams(3, 2, 4 / 3, 1.0)
P_II = ProblemParams(3, 5, 5 / 3, 2.0)
P_IV = ProblemParams(3, 5, 5 / 3, 1.0)


def test_case_labels():
    assert portrait_case(P_I) == "I"
    assert portrait_case(P_II) == "II"
    assert portrait_case(P_IV) == "IV"
    ms = critical_masses(P_IV).m_star
    assert portrait_case(ProblemParams(3, 5, 5 / 3, ms)) == "III"
    with pytest.raises(RegimeError):
        portrait_case(ProblemParams(3, 2, 4 / 3, -1.0))


@pytest.mark.parametrize("pp", [P_I, P_II, P_IV])
def test_intersections_match_equilibria(pp):
    hits = ray_curve_intersections(pp)
    roots = find_constant_solutions(pp).roots
    assert len(hits) == len(roots)
    for (hx, hy), x in zip(hits, roots):
        assert abs(hx - x) <= 1e-9 * max(1.0, x)
        e = compute_exponents(pp)
        assert hy == pytest.approx(e.alpha * hx, rel=1e-12)


def test_intersections_tangent_case():
    ms = critical_masses(P_IV).m_star
    pp = ProblemParams(3, 5, 5 / 3, ms)
    hits = ray_curve_intersections(pp)
    roots = find_constant_solutions(pp).roots
    assert len(hits) == 1 == len(roots)
    assert abs(hits[0][0] - roots[0]) <= 1e-9


def test_curves_pass_through_equilibria():
    rmap = vanishing_curves(P_II, (0.0, 2.0, -1.0, 2.0))
    e = compute_exponents(P_II)
    c1 = np.array(rmap.curves["C1"])
    for x in find_constant_solutions(P_II).roots:
        y = e.alpha * x
        d = np.min(np.hypot(c1[:, 0] - x, c1[:, 1] - y))
        assert d < 5e-3  # the sampled polyline passes nearby


def test_region_labels_case_I():
    rmap = vanishing_curves(P_I, (0.0, 20.0, -20.0, 30.0))
    xm = find_constant_solutions(P_I).roots[0]
    assert region_label((xm, 2 * xm + 10.0), rmap) == "A"
    assert region_label((10.0, 0.5), rmap) == "C"     # below both curves in Q1
    assert region_label((2.0, 4.0), rmap) == "L"      # on the ray
    assert region_label((0.05, 0.06), rmap) == "D"    # between curve and ray
    assert region_label((8.0, 17.0), rmap) == "B"
    assert region_label((1.0, -20.0), rmap) == "E"
    assert region_label((10.0, -0.5), rmap) == "C"
    with pytest.raises(RegimeError):
        region_label((-1.0, 0.0), rmap)


def test_region_labels_case_II_and_IV():
    rmap = vanishing_curves(P_II, (0.0, 2.0, -2.0, 2.0))
    x1, x2 = find_constant_solutions(P_II).roots
    assert region_label((x1 * 0.5, x1 * 0.5 * 0.5 + 0.04), rmap) in ("F", "A")
    # between the roots the band between curve and ray is (D)
    xm = 0.5 * (x1 + x2)
    e = compute_exponents(P_II)
    assert region_label((xm, e.alpha * xm * 0.98), rmap) == "D"
    rmap4 = vanishing_curves(P_IV, (0.0, 2.0, -2.0, 2.0))
    labels = set()
    for x in np.linspace(0.05, 1.9, 23):
        for y in np.linspace(0.01, 1.9, 23):
            labels.add(region_label((x, y), rmap4))
    assert "D" not in labels        # (D) is empty in case IV
    assert "B~" in labels
    assert "B" not in labels and "F" not in labels


def test_field_grid_export():
    grid = field_grid(P_I, (0.0, 10.0, -5.0, 10.0), resolution=12)
    rows = list(grid.to_rows())
    assert len(rows) == len(grid.points)
    x, y, h1, h2, tag = rows[0]
    assert isinstance(tag, str)
    # sign structure: every sampled (A)-point has x_t < 0 and y_t > 0
    for (px, py), (f1, f2), lab in zip(grid.points, grid.H, grid.labels):
        if lab == "A":
            assert f1 < 0 and f2 > 0
        if lab == "D":
            assert f1 > 0 and f2 > 0


def test_bbox_validation():
    with pytest.raises(RegimeError):
        vanishing_curves(P_I, (-5.0, -1.0, 0.0, 1.0))
    with pytest.raises(RegimeError):
        vanishing_curves(ProblemParams(3, 3, 1.8, 1.0), (0.0, 1.0, 0.0, 1.0))
