import math

import numpy as np
import pytest

from pqradial import (ProblemParams, RegimeError, bifurcation_check, critical_masses,
                      eval_pm, find_constant_solutions, fixed_points,
                      linearize_order3, linearize_planar)
from pqradial.equilibria import eval_pm_prime
from pqradial.params import compute_exponents


def mstar(N=3.0, p=5.0):
    return critical_masses(ProblemParams(N, p, 2 * p / (p + 1), 1.0)).m_star


def test_eval_pm_closed_form_root_m_zero():
    # x_0 = (alpha |K|)^{1/(p-1)} = 2 for (N, p) = (3, 2)
    assert eval_pm(2.0, ProblemParams(3, 2, 4 / 3, 0.0)) == pytest.approx(0.0, abs=1e-14)


def test_eval_pm_borderline_root():
    p = 5.0
    pp = ProblemParams(3, p, 5 / 3, mstar())
    e = compute_exponents(pp)
    x = (e.alpha * e.K / p) ** (1.0 / (p - 1.0))
    assert x == pytest.approx(0.4729, abs=1e-4)
    assert abs(eval_pm(x, pp)) < 1e-10


def test_eval_pm_small_x_limit_supercritical():
    pp = ProblemParams(3, 5, 5 / 3, 7.0)
    e = compute_exponents(pp)
    assert e.ell > 0
    assert eval_pm(1e-12, pp) == pytest.approx(e.ell, rel=1e-6)


def test_roots_subcritical_m_zero():
    sols = find_constant_solutions(ProblemParams(3, 2, 4 / 3, 0.0))
    assert sols.labels == ["x_0"]
    assert sols.roots[0] == pytest.approx(2.0, rel=1e-12)


def test_roots_supercritical_two():
    pp = ProblemParams(3, 5, 5 / 3, 2.0)
    sols = find_constant_solutions(pp)
    assert sols.labels == ["x_1M", "x_2M"]
    x1, x2 = sols.roots
    assert x1 < 0.4729 < x2
    e = compute_exponents(pp)
    for x in sols.roots:
        assert abs(eval_pm(x, pp)) <= 1e-10 * max(1.0, abs(e.ell))


def test_roots_none_below_mstar():
    assert find_constant_solutions(ProblemParams(3, 5, 5 / 3, 1.0)).roots == []
    # M <= 0 in the supercritical range: no roots either
    assert find_constant_solutions(ProblemParams(3, 5, 5 / 3, -1.0)).roots == []


def test_root_count_transition_and_double_root():
    p, ms = 5.0, mstar()
    e = compute_exponents(ProblemParams(3, p, 5 / 3, ms))
    counts = []
    for M in (0.5 * ms, ms, 1.5 * ms):
        sols = find_constant_solutions(ProblemParams(3, p, 5 / 3, M))
        counts.append(len(sols.roots))
    assert counts == [0, 1, 2]
    sols = find_constant_solutions(ProblemParams(3, p, 5 / 3, ms))
    assert sols.multiplicities == [2]
    assert sols.labels == ["x_mstar"]
    xref = (e.alpha * e.K / p) ** (1.0 / (p - 1.0))
    assert sols.roots[0] == pytest.approx(xref, rel=1e-8)


def test_root_monotonicity_in_mass():
    a = find_constant_solutions(ProblemParams(3, 5, 5 / 3, 2.0)).roots
    b = find_constant_solutions(ProblemParams(3, 5, 5 / 3, 3.0)).roots
    xm = (0.5 * 0.5 / 5.0) ** 0.25
    assert b[0] < a[0] < xm < a[1] < b[1]


def test_roots_require_scale_invariance():
    with pytest.raises(RegimeError):
        find_constant_solutions(ProblemParams(3, 5, 1.8, 2.0))


def test_fixed_points_examples():
    fx = fixed_points(ProblemParams(3, 3, 2.0, 1.0))
    assert fx["X_M"] == pytest.approx(4.0, rel=1e-13)
    assert "xi_M" not in fx  # q = 2 has no Riccati power law

    fx2 = fixed_points(ProblemParams(3, 3, 1.8, 1.0))
    kappa = (2 * 1.8 - 3) / 0.8
    eta = math.exp(math.log(kappa / 1.0) / 0.8)
    assert fx2["eta_M"] == pytest.approx(eta, rel=1e-12)
    assert fx2["eta_M"] == pytest.approx(0.69796, abs=1e-5)
    assert fx2["xi_M"] == pytest.approx(2.79185, abs=1e-5)
    assert fx2["xi_M"] == pytest.approx(fx2["eta_M"] / 0.25, rel=1e-12)


def test_fixed_points_absent_at_serrin_exponent():
    fx = fixed_points(ProblemParams(3, 3, 1.5, 1.0))
    assert "xi_M" not in fx and "eta_M" not in fx
    # x_0 needs K != 0; here K = 0
    assert "x_0" not in fx


def test_linearize_origin():
    rep = linearize_planar((0.0, 0.0), ProblemParams(3, 2, 4 / 3, 1.0))
    assert sorted(rep.eigenvalues) == pytest.approx([1.0, 2.0], abs=1e-14)
    vecs = {tuple(np.round(v, 12)) for v in rep.eigenvectors}
    assert (1.0, 0.0) in vecs and (1.0, 1.0) in vecs
    assert rep.stability == "node-source"


def test_linearize_rejects_non_equilibrium():
    with pytest.raises(RegimeError):
        linearize_planar((1.0, 1.0), ProblemParams(3, 2, 4 / 3, 1.0))


def test_linearize_node_source_and_saddle():
    pp = ProblemParams(3, 5, 5 / 3, 2.0)
    e = compute_exponents(pp)
    x1, x2 = find_constant_solutions(pp).roots
    r1 = linearize_planar((x1, e.alpha * x1), pp)
    assert all(isinstance(v, float) and v > 0 for v in r1.eigenvalues)
    assert r1.data["discriminant"] > 0
    assert r1.stability == "node-source"
    r2 = linearize_planar((x2, e.alpha * x2), pp)
    assert r2.stability == "saddle"


def test_linearize_borderline_non_hyperbolic():
    pp = ProblemParams(3, 5, 5 / 3, mstar())
    e = compute_exponents(pp)
    x = find_constant_solutions(pp).roots[0]
    rep = linearize_planar((x, e.alpha * x), pp)
    got = sorted(v.real if isinstance(v, complex) else v for v in rep.eigenvalues)
    assert got[0] == pytest.approx(0.0, abs=1e-9)
    assert got[1] == pytest.approx(1.0, abs=1e-9)   # N - 2
    assert rep.stability == "non-hyperbolic"


def test_planar_spectral_identity():
    # eigenvalue sum/product match the characteristic polynomial coefficients
    for pp in (ProblemParams(3, 2, 4 / 3, 1.0), ProblemParams(3, 5, 5 / 3, 2.5)):
        e = compute_exponents(pp)
        for x in find_constant_solutions(pp).roots:
            rep = linearize_planar((x, e.alpha * x), pp)
            s = sum(rep.eigenvalues)
            prod = rep.eigenvalues[0] * rep.eigenvalues[1]
            assert s == pytest.approx(rep.data["charpoly_trace"], abs=1e-10)
            assert prod == pytest.approx(rep.data["charpoly_det"], abs=1e-10)


def test_order3_closed_forms_and_eigensolver():
    pp = ProblemParams(3, 3, 1.8, 1.0)
    rep = linearize_order3(pp)
    assert rep.eigenvalues == pytest.approx([1.5, 0.25, 0.6], abs=1e-13)
    numeric = sorted(np.linalg.eigvals(np.array(rep.jacobian)).real)
    assert numeric == pytest.approx(sorted(rep.eigenvalues), rel=1e-9)
    # u3 = (0, 1, -M beta^{q-1})
    u3 = rep.eigenvectors[2]
    assert u3[0] == 0.0 and u3[1] == 1.0
    assert u3[2] == pytest.approx(-0.25 ** 0.8, rel=1e-12)
    # every reported eigenpair satisfies J v = mu v
    A = np.array(rep.jacobian)
    for mu, v in zip(rep.eigenvalues, rep.eigenvectors):
        v = np.asarray(v)
        assert np.linalg.norm(A @ v - mu * v) < 1e-9 * np.linalg.norm(v)


def test_order3_zero_mode_at_scale_invariance():
    # q = 2p/(p+1) forces the first eigenvalue to vanish
    rep = linearize_order3(ProblemParams(3, 9, 1.8, 1.0))
    assert rep.eigenvalues[0] == pytest.approx(0.0, abs=1e-12)


def test_order3_degenerate_flag():
    q = 1.0 + 1.0 / math.sqrt(2.0)   # mu2 = mu3 for N = 3
    rep = linearize_order3(ProblemParams(3, 3, q, 1.0))
    assert rep.data["degenerate_spectrum"]


def test_order3_regime_errors():
    with pytest.raises(RegimeError):
        linearize_order3(ProblemParams(3, 3, 1.4, 1.0))  # q < N/(N-1)
    with pytest.raises(RegimeError):
        linearize_order3(ProblemParams(3, 3, 1.8, -1.0))  # M <= 0


def test_bifurcation_check():
    entries = bifurcation_check(ProblemParams(3, 5, 5 / 3, 2.0), 10)
    assert len(entries) == 20
    assert all(en.nonzero for en in entries)
    # k = 1 at the smaller root: the contradiction chain of the theorem
    first = [en for en in entries if en.k == 1 and en.label == "x_1M"]
    assert len(first) == 1 and first[0].nonzero
    assert bifurcation_check(ProblemParams(3, 5, 5 / 3, 2.0), 0) == []


def test_bifurcation_outside_two_root_regime():
    with pytest.raises(RegimeError):
        bifurcation_check(ProblemParams(3, 5, 5 / 3, 1.0), 5)
    with pytest.raises(RegimeError):
        bifurcation_check(ProblemParams(3, 2, 4 / 3, 1.0), 5)


def test_pm_prime_consistency():
    # analytic derivative of pm against a central difference
    pp = ProblemParams(3, 5, 5 / 3, 2.0)
    for x in (0.2, 0.5, 1.0):
        h = 1e-6 * x
        fd = (eval_pm(x + h, pp) - eval_pm(x - h, pp)) / (2 * h)
        assert eval_pm_prime(x, pp) == pytest.approx(fd, rel=1e-8)
