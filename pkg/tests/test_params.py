import math

import pytest
from hypothesis import given, settings, strategies as st

from pqradial import (ProblemParams, RegimeError, classify_regime, compute_exponents,
                      critical_masses)
from pqradial.params import compare, dimension_ratio, scale_invariant_q


def test_exponents_frozen_case_scale_invariant():
    # independent arithmetic on the printed formulas, worked by hand
    e = compute_exponents(ProblemParams(3, 2, 4 / 3, 0.0))
    assert e.alpha == pytest.approx(2.0, abs=1e-14)
    assert e.beta == pytest.approx(2.0, abs=1e-13)
    assert e.gamma == pytest.approx(2.0, abs=1e-13)
    assert e.sigma == pytest.approx(0.0, abs=1e-14)
    assert e.K == pytest.approx(-1.0, abs=1e-14)
    assert e.L == pytest.approx(-3.0, abs=1e-14)
    assert e.kappa == pytest.approx(-1.0, abs=1e-13)
    assert e.theta == pytest.approx(1.0, abs=1e-13)
    assert e.ell == pytest.approx(-2.0, abs=1e-14)


def test_exponents_frozen_case_generic():
    e = compute_exponents(ProblemParams(3, 3, 1.8, 0.0))
    assert e.sigma == pytest.approx(1.2, abs=1e-13)
    assert e.kappa == pytest.approx(0.75, abs=1e-13)
    assert e.beta == pytest.approx(0.25, abs=1e-13)
    assert e.gamma == pytest.approx(1.5, abs=1e-13)
    assert e.theta == pytest.approx(0.5, abs=1e-13)


def test_gamma_theta_absent_when_q_equals_p():
    e = compute_exponents(ProblemParams(3, 2.5, 2.5, 1.0))
    assert e.gamma is None and e.theta is None


@given(p=st.floats(1.05, 12.0))
@settings(max_examples=60, deadline=None)
def test_scale_invariant_exponent_collapse(p):
    q = scale_invariant_q(p)
    e = compute_exponents(ProblemParams(3.5, p, q, 1.0))
    assert abs(e.sigma) < 1e-10
    assert e.alpha == pytest.approx(e.beta, rel=1e-9)
    assert e.alpha == pytest.approx(e.gamma, rel=1e-9)


@given(N=st.floats(1.0, 9.0), p=st.floats(1.05, 9.0), q=st.floats(1.05, 8.0))
@settings(max_examples=120, deadline=None)
def test_theta_identity(N, p, q):
    e = compute_exponents(ProblemParams(N, p, q, 0.5))
    if e.gamma is not None:
        assert e.theta - e.gamma - 2.0 + N == pytest.approx(0.0, abs=1e-9)
    # sigma and q - 2p/(p+1) always share sign
    assert e.sigma * (q - scale_invariant_q(p)) >= -1e-12


def test_critical_mass_frozen_values():
    cm = critical_masses(ProblemParams(3, 5, 5 / 3, 1.0))
    # exact value 1.569192...; the 4-significant-figure guidepost is 1.5690
    assert cm.m_star == pytest.approx(6.0 * 0.2 ** (5.0 / 6.0), rel=1e-14)
    assert cm.m_star == pytest.approx(1.5690, abs=5e-4)
    assert cm.m_tilde / cm.m_star == pytest.approx(3.0, rel=1e-12)
    assert cm.theta_N == pytest.approx(1.47, abs=1e-2)
    assert cm.m_tilde / cm.m_star > cm.theta_N > 1.0


def test_critical_mass_independent_bisection():
    # cross-check via the minimum of the substituted map: it vanishes at m*
    N, p = 3.0, 5.0
    alpha = 2.0 / (p - 1.0)
    ell = alpha * (N - 2.0 - alpha)

    def min_val(M):
        z0 = (M / (p + 1.0)) ** (1.0 / p) * alpha ** (2.0 / (p + 1.0))
        return z0 ** (p + 1.0) - M * alpha ** (2.0 * p / (p + 1.0)) * z0 + ell
    lo, hi = 0.1, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if min_val(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    cm = critical_masses(ProblemParams(N, p, 2 * p / (p + 1), 1.0))
    assert cm.m_star == pytest.approx(0.5 * (lo + hi), abs=1e-10)


def test_critical_mass_vanishes_at_critical_p():
    cm = critical_masses(ProblemParams(3, 3, 1.5, 1.0))
    assert cm.m_star == 0.0


def test_critical_mass_domain_errors():
    with pytest.raises(RegimeError):
        critical_masses(ProblemParams(3, 2, 4 / 3, 1.0))   # p < N/(N-2)
    with pytest.raises(RegimeError):
        critical_masses(ProblemParams(2, 5, 5 / 3, 1.0))   # N < 3
    with pytest.raises(RegimeError):
        dimension_ratio(ProblemParams(2.5, 5, 5 / 3, 1.0))


@given(N=st.floats(3.05, 8.0), frac=st.floats(0.05, 4.0))
@settings(max_examples=60, deadline=None)
def test_mass_ordering_random_grid(N, frac):
    p = N / (N - 2.0) + frac
    cm = critical_masses(ProblemParams(N, p, scale_invariant_q(p), 1.0))
    assert cm.m_tilde > cm.theta_N * cm.m_star


def test_classifier_examples():
    rep = classify_regime(ProblemParams(3, 5, 5 / 3, 1.0))
    assert rep.scale_invariant and rep.p_vs_critical == "supercritical"
    assert rep.mass_position == "below_m_star"
    assert rep.laws_at_zero == []  # no admissible singular behaviour below m*

    rep2 = classify_regime(ProblemParams(3, 2, 4 / 3, -1.0))
    assert rep2.scale_invariant and rep2.p_vs_critical == "subcritical"
    assert rep2.mass_position is None
    assert {l.name for l in rep2.laws_at_zero} == {"selfsimilar_x_M", "newtonian"}

    rep3 = classify_regime(ProblemParams(3, 3, 1.8, 1.0))
    assert rep3.q_vs_scale == "above" and rep3.q_vs_serrin == "above"
    assert {l.name for l in rep3.laws_at_zero} == {"eikonal_power", "riccati_power"}


def test_classifier_supercritical_two_roots():
    rep = classify_regime(ProblemParams(3, 5, 5 / 3, 2.0))
    assert rep.mass_position == "between_m_star_m_tilde"
    assert {l.name for l in rep.laws_at_zero} == {"selfsimilar_x_1M", "selfsimilar_x_2M"}
    assert {l.name for l in rep.laws_at_infinity} == \
        {"selfsimilar_x_1M", "selfsimilar_x_2M", "newtonian"}


@given(N=st.floats(1.0, 8.0), p=st.floats(1.05, 8.0), q=st.floats(1.05, 6.0),
       M=st.floats(-3.0, 5.0))
@settings(max_examples=120, deadline=None)
def test_classifier_total(N, p, q, M):
    rep = classify_regime(ProblemParams(N, p, q, M))
    assert rep.p_vs_critical in ("subcritical", "critical", "supercritical")
    assert rep.q_vs_scale in ("below", "equal", "above")
    if rep.mass_position is not None:
        assert rep.scale_invariant and rep.p_vs_critical == "supercritical" and M > 0


def test_parameter_validation():
    for bad in (dict(N=0.5, p=2, q=1.5), dict(N=3, p=1.0, q=1.5),
                dict(N=3, p=2, q=1.0)):
        with pytest.raises(RegimeError):
            ProblemParams(**bad)


def test_compare_tolerance():
    assert compare(1.0, 1.0 + 5e-13) == "equal"
    assert compare(1.0, 1.1) == "below"
    assert compare(1.1, 1.0) == "above"
