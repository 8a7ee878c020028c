import math

import numpy as np
import pytest

from pqradial import (NumericalError, ProblemParams, RegimeError,
                      central_manifold_profile, eigen_rate_check,
                      find_constant_solutions, integrate_chart, linearize_planar,
                      manifold_seed, regular_solution, shoot_connection)
from pqradial.params import compute_exponents
from pqradial.portrait import region_label, vanishing_curves

PSUB = ProblemParams(3, 2, 4 / 3, 1.0)
PSUP = ProblemParams(3, 5, 5 / 3, 2.0)


def _planar_reports(pp):
    e = compute_exponents(pp)
    reps = [linearize_planar((0.0, 0.0), pp)]
    for x in find_constant_solutions(pp).roots:
        reps.append(linearize_planar((x, e.alpha * x), pp))
    return reps


def test_regular_solution_blows_up_increasing():
    prof = regular_solution(1.0, PSUB)
    assert prof.event.kind == "blow_up"
    assert prof.blowup_radius is not None and prof.blowup_radius > 0
    assert prof.du[-1] > 0.0
    assert all(u > 0 for u in prof.u)


def test_regular_solution_scaling_covariance():
    # at sigma = 0, T_l maps u(0)=a to u(0)=l^alpha a with R scaled by 1/l
    base = regular_solution(1.0, PSUB)
    for ell in (2.0, 3.0):
        other = regular_solution(ell ** 2 * 1.0, PSUB)  # alpha = 2
        assert other.blowup_radius * ell == pytest.approx(base.blowup_radius,
                                                          rel=1e-5)


def test_regular_solution_radius_monotone():
    radii = [regular_solution(a, PSUB).blowup_radius for a in (0.5, 1.0, 2.0)]
    assert radii[0] > radii[1] > radii[2]


def test_regular_solution_validation():
    with pytest.raises(RegimeError):
        regular_solution(-1.0, PSUB)
    with pytest.raises(RegimeError):
        regular_solution(1.0, ProblemParams(3, 2, 4 / 3, -0.5))


def test_manifold_seed():
    rep = linearize_planar((0.0, 0.0), PSUB)
    s = manifold_seed(rep, 1, epsilon=1e-6, side=1)
    assert s == pytest.approx((1e-6, 0.0), abs=1e-18)
    s0 = manifold_seed(rep, 0, epsilon=0.0)
    assert s0 == pytest.approx((0.0, 0.0), abs=0)


def test_manifold_seed_rejects_zero_eigenvalue():
    from pqradial import critical_masses
    ms = critical_masses(ProblemParams(3, 5, 5 / 3, 1.0)).m_star
    pp = ProblemParams(3, 5, 5 / 3, ms)
    e = compute_exponents(pp)
    x = find_constant_solutions(pp).roots[0]
    rep = linearize_planar((x, e.alpha * x), pp)
    idx = min(range(2), key=lambda i: abs(rep.eigenvalues[i]))
    with pytest.raises(RegimeError):
        manifold_seed(rep, idx)


def test_shoot_origin_to_pm():
    origin, pm = _planar_reports(PSUB)
    res = shoot_connection(origin, pm, PSUB)
    assert res.success
    assert res.terminal_distance < 1e-6
    assert res.method == "backward_stable_manifold"
    # trajectory runs from the source end to the target end
    assert res.trajectory.times[0] < res.trajectory.times[-1]


def test_shoot_p1_to_p2():
    _, p1, p2 = _planar_reports(PSUP)
    res = shoot_connection(p1, p2, PSUP)
    assert res.success and res.terminal_distance < 1e-6


def test_shoot_p2_to_p1_no_connection():
    _, p1, p2 = _planar_reports(PSUP)
    res = shoot_connection(p2, p1, PSUP)
    assert not res.success
    assert "no_connection_found" in res.message
    assert res.trajectory is not None  # best effort evidence


def test_shoot_scaling_covariance():
    # the rescaled connection still solves the chart equations: time
    # translation maps the heteroclinic to itself
    origin, pm = _planar_reports(PSUB)
    res = shoot_connection(origin, pm, PSUB)
    from pqradial.charts import chart_rhs, sample_chart_trajectory
    ts = np.linspace(res.trajectory.times[0] + 1.0, res.trajectory.times[-1] - 1.0, 9)
    states = sample_chart_trajectory(res.trajectory, ts)
    # finite-difference time derivative along the orbit matches the field
    h = 1e-5
    for t, s in zip(ts, states):
        sp = sample_chart_trajectory(res.trajectory, [t + h])[0]
        sm = sample_chart_trajectory(res.trajectory, [t - h])[0]
        fd = [(a - b) / (2 * h) for a, b in zip(sp, sm)]
        f = chart_rhs("planar_W4", t, s, PSUB)
        for a, b in zip(fd, f):
            assert abs(a - b) < 1e-6 * max(1.0, abs(b))


def test_uniqueness_evidence_two_seeds():
    # two independent stable-manifold seeds produce the same orbit as a set
    e = compute_exponents(PSUB)
    xm = find_constant_solutions(PSUB).roots[0]
    rep = linearize_planar((xm, e.alpha * xm), PSUB)
    idx = [i for i, mu in enumerate(rep.eigenvalues) if mu < 0][0]
    curves = []
    for eps in (1e-8, 1e-9):
        v = np.asarray(rep.eigenvectors[idx], float)
        v /= np.linalg.norm(v)
        seed = tuple(np.asarray(rep.location) - eps * v)
        traj = integrate_chart("planar_W4", seed, 0.0, -400.0, PSUB,
                               rtol=1e-11, atol=1e-14)
        assert traj.event.kind == "converged_to_equilibrium"
        curves.append(np.asarray(traj.states))
    a, b = curves
    # one-sided discrete Hausdorff distance from a to b
    d = 0.0
    for pt in a[:: max(1, len(a) // 400)]:
        d = max(d, np.min(np.linalg.norm(b - pt, axis=1)))
    assert d <= 1e-6


def test_region_C_seeds_escape():
    rmap = vanishing_curves(PSUB, (0.0, 30.0, -30.0, 30.0))
    xm = find_constant_solutions(PSUB).roots[0]
    seeds = [(xm + 2.0, 1.0), (xm + 4.0, 3.0), (2.0, -1.0), (9.0, 2.0), (12.0, -5.0)]
    for s in seeds:
        assert region_label(s, rmap) == "C"
        traj = integrate_chart("planar_W4", s, 0.0, 60.0, PSUB)
        assert traj.event.kind in ("blow_up", "x_axis_crossing")


def test_central_manifold_profile():
    pp = ProblemParams(3, 3, 1.5, 1.0)
    prof = central_manifold_profile(pp)
    # computed log-law amplitude; the derivation-consistent constant is
    # ((N-1)/M)^{N-1}/(N-2) = 4 (the printed 1/4 variant is recorded but wrong)
    assert prof.predicted_zero_constant == pytest.approx(4.0, rel=1e-12)
    assert prof.fitted_zero_constant == pytest.approx(4.0, rel=0.10)
    assert prof.infinity_limit == pytest.approx(1.0, rel=1e-6)
    assert prof.x_M == pytest.approx(1.0, rel=1e-9)


def test_central_manifold_mass_scaling():
    # doubling M scales the log-law constant by 2^{1-N}
    a = central_manifold_profile(ProblemParams(3, 3, 1.5, 1.0), t_back=-2000.0)
    b = central_manifold_profile(ProblemParams(3, 3, 1.5, 2.0), t_back=-2000.0)
    assert b.fitted_zero_constant / a.fitted_zero_constant == \
        pytest.approx(0.25, abs=0.01)


def test_central_manifold_regime_errors():
    with pytest.raises(RegimeError):
        central_manifold_profile(ProblemParams(3, 3.2, 1.5, 1.0))
    with pytest.raises(RegimeError):
        central_manifold_profile(ProblemParams(3, 3, 1.5, -1.0))


def test_eigen_rate_regular_trajectory():
    # the regular family leaves the origin tangent to (1, 0) with rate alpha
    origin = linearize_planar((0.0, 0.0), PSUB)
    idx = max(range(2), key=lambda i: origin.eigenvalues[i])  # alpha = 2
    seed = manifold_seed(origin, idx, epsilon=1e-4, side=1)
    traj = integrate_chart("planar_W4", seed, 0.0, -60.0, PSUB,
                           track_equilibria=False)
    fit = eigen_rate_check(traj, origin, idx)
    assert fit.ell > 0.0
    assert fit.residual < 1e-3


def test_eigen_rate_newtonian_direction():
    # trajectories tangent to (1, N-2) approach with rate -K = 1
    origin = linearize_planar((0.0, 0.0), PSUB)
    idx = min(range(2), key=lambda i: origin.eigenvalues[i])
    seed = manifold_seed(origin, idx, epsilon=1e-4, side=1)
    traj = integrate_chart("planar_W4", seed, 0.0, -60.0, PSUB,
                           track_equilibria=False)
    fit = eigen_rate_check(traj, origin, idx)
    assert abs(fit.ell) > 1e-8
    assert fit.mu == pytest.approx(1.0, abs=1e-12)


def test_eigen_rate_rejects_stationary():
    origin = linearize_planar((0.0, 0.0), PSUB)
    traj = integrate_chart("planar_W4", (0.0, 0.0), 0.0, 3.0, PSUB,
                           track_equilibria=False, positivity_event=False)
    with pytest.raises(NumericalError):
        eigen_rate_check(traj, origin, 1)
