import math

import numpy as np
import pytest

from pqradial import (ProblemParams, RegimeError, barrier, critical_explicit,
                      eikonal_harmonic, exterior_newton_profile,
                      find_constant_solutions, linearize_order3, newton_matching_C,
                      residual_oracle, riccati_profile, selfsimilar)
from pqradial.equilibria import eikonal_constant, riccati_constants
from pqradial.integrator import integrate
from pqradial.params import compute_exponents
from pqradial.profiles import Profile, _certify, riccati_barrier_window_roots

GRID = np.geomspace(1e-3, 1e3, 160)


def test_selfsimilar_residuals():
    pp = ProblemParams(3, 2, 4 / 3, 1.0)
    xm = find_constant_solutions(pp).roots[0]
    assert residual_oracle(selfsimilar(xm, pp), GRID).max_normalized < 1e-8

    from pqradial import critical_masses
    ms = critical_masses(ProblemParams(3, 5, 5 / 3, 1.0)).m_star
    ps = ProblemParams(3, 5, 5 / 3, ms)
    xs = find_constant_solutions(ps).roots[0]
    assert residual_oracle(selfsimilar(xs, ps), GRID).max_normalized < 1e-8

    p0 = ProblemParams(3, 2, 4 / 3, 0.0)
    assert residual_oracle(selfsimilar(2.0, p0), GRID).max_normalized < 1e-8


def test_selfsimilar_rejects_non_root():
    pp = ProblemParams(3, 2, 4 / 3, 1.0)
    with pytest.raises(RegimeError):
        selfsimilar(1.0, pp)


def test_eikonal_harmonic():
    prof = eikonal_harmonic(ProblemParams(3, 4, 2.0, 4.0))
    assert prof.data["C_star"] == pytest.approx(2.0, rel=1e-14)  # sqrt(M)
    assert residual_oracle(prof, GRID).max_normalized < 1e-10
    u1, du1 = prof.fn(1.0)
    assert u1 == pytest.approx(2.0) and du1 == pytest.approx(-2.0)
    with pytest.raises(RegimeError):
        eikonal_harmonic(ProblemParams(3, 4, 2.0 + 1e-3, 4.0))


def test_critical_explicit():
    prof = critical_explicit(ProblemParams(3, 3, 1.5, 1.0))
    assert prof.data["constant"] == pytest.approx(1.0, rel=1e-14)
    assert residual_oracle(prof, GRID).max_normalized < 1e-9

    prof4 = critical_explicit(ProblemParams(4, 2, 4 / 3, 1.0))
    assert prof4.data["constant"] == pytest.approx(4.0, rel=1e-14)
    assert residual_oracle(prof4, GRID).max_normalized < 1e-8

    # amplitude vanishes with M
    tiny = critical_explicit(ProblemParams(3, 3, 1.5, 1e-9))
    assert tiny.data["constant"] < 1e-5


def test_critical_explicit_wrong_exponent_variant_fails_oracle():
    # the printed variant with M^{N/(N-1)} does not solve the equation at M != 1
    N, M = 3.0, 2.0
    pp = ProblemParams(N, 3, 1.5, M)
    c_bad = ((N - 2.0) * M ** (N / (N - 1.0))) ** (N - 2.0)

    def fn(r):
        return c_bad * r ** (2.0 - N), -c_bad * (N - 2.0) * r ** (1.0 - N)
    bad = Profile(fn=fn, interval=(0.0, math.inf), label="bad", params=pp)
    assert residual_oracle(bad, GRID).max_normalized > 1e-3
    # while the correct exponent passes
    assert residual_oracle(critical_explicit(pp), GRID).max_normalized < 1e-8


def test_riccati_profile_against_direct_integration():
    pp = ProblemParams(3, 3, 1.8, 1.0)
    prof = riccati_profile(1.0, pp, r_lo=1e-4, r_cap=1e4)
    u0, du0 = prof.fn(0.1)

    def f(r, s):
        u, v = s
        return (v, -(pp.N - 1.0) * v / r - pp.M * abs(v) ** pp.q)
    traj = integrate(f, (u0, du0), 0.1, 50.0, rtol=1e-12, atol=1e-14)
    for r in (1.0, 5.0, 20.0, 49.0):
        import bisect
        i = min(range(len(traj.times)), key=lambda i: abs(traj.times[i] - r))
        from pqradial.integrator import sample_trajectory
        u_int = sample_trajectory(traj, f, [r])[0][0]
        u_cf, _ = prof.fn(r)
        assert u_cf == pytest.approx(u_int, rel=1e-8)


def test_riccati_zero_constant_is_power_law():
    pp = ProblemParams(3, 3, 1.8, 1.0)
    xi, eta = riccati_constants(pp)
    e = compute_exponents(pp)
    prof = riccati_profile(0.0, pp)
    for r in (1e-6, 1e-2, 1.0, 1e3):
        u, du = prof.fn(r)
        assert u * r ** e.beta == pytest.approx(xi, rel=1e-12)
        assert abs(du) * r ** (e.beta + 1.0) == pytest.approx(eta, rel=1e-12)


def test_riccati_log_branch():
    # kappa = 0 at q = N/(N-1); the gradient follows the log-corrected law
    pp = ProblemParams(3, 3, 1.5, 1.0)
    prof = riccati_profile(1.0, pp, r_lo=1e-40)
    N, M = pp.N, pp.M
    target = ((N - 1.0) / M) ** (N - 1.0)
    r = 1e-30
    _, du = prof.fn(r)
    val = abs(du) * r ** (N - 1.0) * abs(math.log(r)) ** (N - 1.0)
    assert val == pytest.approx(target, rel=0.15)  # slow log convergence
    # the oracle still certifies it as a gradient-equation solution
    g = np.geomspace(1e-35, 0.5, 80)
    assert residual_oracle(prof, g).max_normalized < 1e-8


def test_riccati_requires_positive_mass():
    with pytest.raises(RegimeError):
        riccati_profile(1.0, ProblemParams(3, 3, 1.8, -1.0))


def test_exterior_newton_limit_and_scaling():
    pp = ProblemParams(3, 3, 1.8, 1.0)
    prof = exterior_newton_profile(1.0, pp)
    assert prof.data["newton_limit"] == pytest.approx(1.0, rel=1e-12)
    r = 2e5
    w, _ = prof.fn(r)
    assert r * w == pytest.approx(1.0, rel=1e-2)
    # C -> lambda^{q-1} C scales the limit by 1/lambda
    lam = 2.0
    prof2 = exterior_newton_profile(lam ** (pp.q - 1.0), pp)
    w2, _ = prof2.fn(r)
    assert (r * w2) * lam == pytest.approx(r * w, rel=1e-6)


def test_exterior_newton_k_matching():
    pp = ProblemParams(3, 3, 1.8, 1.0)
    k = 0.37
    C = newton_matching_C(k, pp)
    prof = exterior_newton_profile(C, pp)
    assert prof.data["newton_limit"] == pytest.approx(k, rel=1e-12)
    r = 5e5
    w, _ = prof.fn(r)
    assert r * w == pytest.approx(k, rel=1e-2)


def test_exterior_newton_regime():
    with pytest.raises(RegimeError):
        exterior_newton_profile(1.0, ProblemParams(3, 3, 1.4, 1.0))  # q < N/(N-1)
    with pytest.raises(RegimeError):
        exterior_newton_profile(-1.0, ProblemParams(3, 3, 1.8, 1.0))


# ---------------------------------------------------------------------------
# barriers
# ---------------------------------------------------------------------------

def test_barrier_eikonal_sub_positive_theta():
    pp = ProblemParams(3, 3, 2.0, 1.0)   # theta = 1 > 0
    XM = eikonal_constant(pp)
    cert = barrier("eikonal_sub", pp, c=XM / 2.0)
    assert cert.certified and cert.n_points >= 1000
    with pytest.raises(RegimeError):
        barrier("eikonal_sub", pp, c=2.0 * XM)


def test_barrier_eikonal_sub_negative_theta():
    pp = ProblemParams(3, 4, 1.8, 1.0)   # theta < 0, sigma > 0
    cert = barrier("eikonal_sub", pp)
    assert cert.certified
    r1 = cert.profile.interval[1]
    assert 0.0 < r1 < math.inf


def test_barrier_eikonal_super():
    cert = barrier("eikonal_super", ProblemParams(3, 4, 1.8, 1.0), A=1.0)
    assert cert.certified
    cert2 = barrier("eikonal_super", ProblemParams(3, 3, 2.0, 1.0))  # theta > 0
    assert cert2.certified


def test_barrier_riccati_sub_window_and_certificate():
    pp = ProblemParams(3, 3, 1.8, 1.0)
    lo, hi = riccati_barrier_window_roots(pp)
    mus = sorted(linearize_order3(pp).eigenvalues[1:])
    assert abs(lo - mus[0]) < 1e-12 and abs(hi - mus[1]) < 1e-12
    assert (lo, hi) == pytest.approx((0.25, 0.6), abs=1e-12)
    cert = barrier("riccati_sub", pp, d=0.4)
    assert cert.certified
    with pytest.raises(RegimeError):
        barrier("riccati_sub", pp, d=0.7)  # outside the window


def test_barrier_emden_super():
    pp = ProblemParams(3, 2, 4 / 3 - 0.1, 1.0)
    cert = barrier("emden_super", pp)
    assert cert.certified
    # C solves alpha^q C^{q-1} M = C^{p-1} - x0^{p-1}
    e = compute_exponents(pp)
    C = cert.data["C"]
    x0 = (e.alpha * abs(e.K)) ** (1.0 / (pp.p - 1.0))
    assert e.alpha ** pp.q * C ** (pp.q - 1.0) * pp.M == \
        pytest.approx(C ** (pp.p - 1.0) - x0 ** (pp.p - 1.0), rel=1e-10)
    assert cert.data["A"] == pytest.approx(pp.M * e.alpha ** (pp.q / pp.p), rel=1e-12)


def test_barrier_weak_super():
    cert = barrier("weak_super", ProblemParams(3, 2, 1.3, 0.05), k=1.0)
    assert cert.certified
    with pytest.raises(RegimeError):
        barrier("weak_super", ProblemParams(3, 2, 1.6, 0.05))  # q > N/(N-1)


def test_certificate_failure_reports_radius():
    # a profile that is NOT a subsolution: amplitude above the eikonal root
    pp = ProblemParams(3, 3, 2.0, 1.0)
    XM = eikonal_constant(pp)
    e = compute_exponents(pp)
    c = 2.0 * XM

    def fn(r):
        return c * r ** (-e.gamma), -c * e.gamma * r ** (-e.gamma - 1.0)

    def d2(r):
        return c * e.gamma * (e.gamma + 1.0) * r ** (-e.gamma - 2.0)
    prof = Profile(fn=fn, interval=(0.0, math.inf), label="not-a-sub", params=pp,
                   d2=d2)
    cert = _certify(prof, "subsolution", np.geomspace(1e-6, 1e6, 1000), pp)
    assert not cert.certified
    assert cert.violating_r is not None and cert.max_violation > 0


def test_unknown_family():
    with pytest.raises(RegimeError):
        barrier("bogus", ProblemParams(3, 3, 1.8, 1.0))


def test_oracle_flags_non_solution():
    # harmonic but with uncancelled absorption: u = r^{2-N}, M = 0, p = 2
    pp = ProblemParams(3, 2, 1.5, 0.0)

    def fn(r):
        return r ** -1.0, -r ** -2.0

    prof = Profile(fn=fn, interval=(0.0, math.inf), label="harmonic", params=pp)
    rep = residual_oracle(prof, GRID)
    assert rep.max_normalized > 1e-2


def test_oracle_grid_validation():
    pp = ProblemParams(3, 3, 1.8, 1.0)
    prof = riccati_profile(1.0, pp, r_lo=1e-2, r_cap=1e2)
    with pytest.raises(RegimeError):
        residual_oracle(prof, [1e-3])
