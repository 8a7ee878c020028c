"""Distinguished solutions: regular profiles, heteroclinic connections,
central-manifold profiles and convergence-rate fits.

Connections between equilibria of the planar system are computed by
integrating backward along the target's one-dimensional stable manifold
(the reliable route when the target is a saddle) or, for node sources, by
bisecting the angle of a seed circle on the outcome of the forward flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charts import integrate_chart, sample_chart_trajectory
from .equilibria import EquilibriumReport, find_constant_solutions, linearize_planar
from .errors import NumericalError, RegimeError
from .integrator import Event, Trajectory, integrate
from .params import ProblemParams, compute_exponents, scale_invariant_q

TOL_CONNECT = 1e-6
SHOOT_EPS = 1e-9         # relative seed offset along the stable eigenvector
ANGLE_BUDGET = 200


# ---------------------------------------------------------------------------
# regular solutions u(0) = a, u'(0) = 0
# ---------------------------------------------------------------------------

@dataclass
class RadialProfile:
    """A radial profile sampled on increasing r, with its terminating event."""
    r: list
    u: list
    du: list
    event: Event
    params: ProblemParams
    meta: dict = field(default_factory=dict)

    @property
    def blowup_radius(self):
        if self.event.kind == "blow_up":
            return self.event.data.get("t_star", self.r[-1])
        return None

    def to_dict(self):
        return {"r": list(self.r), "u": list(self.u), "du": list(self.du),
                "event": self.event.to_dict(), "params": self.params.to_dict(),
                "meta": self.meta}


def radial_rhs(params: ProblemParams):
    """Right-hand side of the radial equation as a first-order system in r."""
    N, p, q, M = params.N, params.p, params.q, params.M

    def f(r, s):
        u, v = s
        return (v, -(N - 1.0) * v / r + abs(u) ** (p - 1.0) * u - M * abs(v) ** q)
    return f


def regular_solution(a: float, params: ProblemParams, *, rtol=1e-10, atol=1e-12,
                     r_max=math.inf) -> RadialProfile:
    """The maximal solution with u(0) = a > 0, u'(0) = 0, up to its blow-up radius.

    Integration starts from the second-order Taylor seed
    u(r0) = a + a^p r0^2/(2N), u'(r0) = a^p r0/N at r0 = 1e-4 a^{-(p-1)/2}:
    at that radius the neglected terms (including the gradient source, which
    enters at order r^q with q > 1) are below the local error tolerance.
    """
    if a <= 0.0:
        raise RegimeError("regular solutions require a > 0")
    if params.M < 0.0 or not (1.0 < params.q < params.p):
        raise RegimeError("regular solutions are built for M >= 0 and 1 < q < p")
    p, N = params.p, params.N
    r0 = 1e-4 * a ** (-(p - 1.0) / 2.0)
    u0 = a + a ** p * r0 * r0 / (2.0 * N)
    v0 = a ** p * r0 / N
    traj = integrate(radial_rhs(params), (u0, v0), r0, r_max, rtol=rtol, atol=atol,
                     chart="radial", params=params,
                     meta={"a": a, "seed_r0": r0})
    rs = traj.times
    us = [s[0] for s in traj.states]
    dus = [s[1] for s in traj.states]
    return RadialProfile(r=rs, u=us, du=dus, event=traj.event, params=params,
                         meta=dict(traj.meta))


# ---------------------------------------------------------------------------
# manifold seeds and connections
# ---------------------------------------------------------------------------

def manifold_seed(eq: EquilibriumReport, eig_index: int, epsilon=None, side=1):
    """Point displaced from an equilibrium along one unit eigenvector.

    Rejects directions with (numerically) zero eigenvalue: the central
    manifold needs its own construction.
    """
    mu = eq.eigenvalues[eig_index]
    mu_re = mu.real if isinstance(mu, complex) else mu
    scale = max(1.0, max(abs(c) for c in eq.location))
    if abs(mu_re) <= 1e-9 * scale:
        raise RegimeError(f"eigenvalue {mu} is not hyperbolic; cannot seed a manifold")
    v = np.asarray(eq.eigenvectors[eig_index], dtype=float)
    v = v / np.linalg.norm(v)
    if epsilon is None:
        epsilon = 1e-6 * scale
    return tuple(np.asarray(eq.location, dtype=float) + side * epsilon * v)


@dataclass
class ShootResult:
    trajectory: Trajectory | None
    source: tuple
    target: tuple
    terminal_distance: float
    bisection_iterations: int
    success: bool
    method: str
    message: str = ""

    def to_dict(self):
        return {
            "trajectory": self.trajectory.to_dict() if self.trajectory else None,
            "source": list(self.source), "target": list(self.target),
            "terminal_distance": self.terminal_distance,
            "bisection_iterations": self.bisection_iterations,
            "success": self.success, "method": self.method, "message": self.message,
        }


def _dist(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def _closest_approach(traj, point):
    return min(_dist(s, point) for s in traj.states)


def _stable_indices(eq):
    out = []
    for i, mu in enumerate(eq.eigenvalues):
        m = mu.real if isinstance(mu, complex) else mu
        if m < -1e-9:
            out.append(i)
    return out


def _unstable_indices(eq):
    out = []
    for i, mu in enumerate(eq.eigenvalues):
        m = mu.real if isinstance(mu, complex) else mu
        if m > 1e-9:
            out.append(i)
    return out


def shoot_connection(source_eq: EquilibriumReport, target_eq: EquilibriumReport,
                     params: ProblemParams, *, tol_connect=TOL_CONNECT,
                     budget=ANGLE_BUDGET, t_span=600.0, rtol=1e-11,
                     atol=1e-14) -> ShootResult:
    """Search for a heteroclinic connection source -> target of the planar flow."""
    if abs(params.q - scale_invariant_q(params.p)) > 1e-9:
        raise RegimeError("connections are defined for the scale-invariant planar flow")
    src = tuple(source_eq.location)
    tgt = tuple(target_eq.location)
    tol = tol_connect * max(1.0, max(abs(c) for c in tgt))

    stable = _stable_indices(target_eq)
    if len(stable) == 1:
        return _shoot_backward(source_eq, target_eq, params, stable[0], tol,
                               t_span, rtol, atol)

    if len(_unstable_indices(source_eq)) == len(src):
        return _shoot_angles(source_eq, target_eq, params, tol, budget,
                             t_span, rtol, atol)

    return _shoot_unstable_sweep(source_eq, target_eq, params, tol, t_span,
                                 rtol, atol)


def _shoot_backward(source_eq, target_eq, params, eig_index, tol, t_span,
                    rtol, atol):
    """Backward integration along the target's stable manifold.

    The stable manifold of a saddle is one-dimensional and unique, so the two
    seed sides are exhaustive; backward flow converges to the source when the
    connection exists.
    """
    src = tuple(source_eq.location)
    tgt = tuple(target_eq.location)
    scale = max(1.0, max(abs(c) for c in tgt))
    best = None
    for side in (-1, 1):
        seed = manifold_seed(target_eq, eig_index, epsilon=SHOOT_EPS * scale,
                             side=side)
        traj = integrate_chart("planar_W4", seed, 0.0, -t_span, params,
                               rtol=rtol, atol=atol)
        ev = traj.event
        if ev.kind == "converged_to_equilibrium" and _dist(ev.data["point"], src) <= tol:
            return ShootResult(trajectory=traj, source=src, target=tgt,
                               terminal_distance=ev.data["distance"],
                               bisection_iterations=0, success=True,
                               method="backward_stable_manifold")
        d = _closest_approach(traj, src)
        if best is None or d < best[0]:
            best = (d, traj)
    return ShootResult(trajectory=best[1], source=src, target=tgt,
                       terminal_distance=best[0], bisection_iterations=0,
                       success=False, method="backward_stable_manifold",
                       message="no_connection_found: backward flow from the "
                               "target's stable manifold does not reach the source")


def _forward_outcome(seed, params, tgt, tol, t_span, rtol, atol):
    traj = integrate_chart("planar_W4", seed, 0.0, t_span, params,
                           rtol=rtol, atol=atol)
    ev = traj.event
    if ev.kind == "converged_to_equilibrium" and _dist(ev.data["point"], tgt) <= tol:
        return "hit", traj
    if ev.kind == "blow_up":
        return "blow_up", traj
    if ev.kind == "x_axis_crossing":
        return "crossed", traj
    return "other", traj


def _shoot_angles(source_eq, target_eq, params, tol, budget, t_span, rtol, atol):
    """Outcome bisection on the seed angle around a node source.

    Seeds live on a circle of radius eps around the source; the connection
    separates seeds whose forward flow blows up from those that leave the
    positive half-plane.
    """
    src = tuple(source_eq.location)
    tgt = tuple(target_eq.location)
    scale = max(1.0, max(abs(c) for c in src))
    eps = 1e-6 * scale

    def seed_at(theta):
        return (src[0] + eps * math.cos(theta), src[1] + eps * math.sin(theta))

    n0 = 64
    outcomes = []
    best = (math.inf, None)
    iterations = 0
    for i in range(n0):
        theta = 2.0 * math.pi * i / n0
        kind, traj = _forward_outcome(seed_at(theta), params, tgt, tol, t_span,
                                      rtol, atol)
        iterations += 1
        d = _closest_approach(traj, tgt)
        if d < best[0]:
            best = (d, traj)
        if kind == "hit":
            return ShootResult(trajectory=traj, source=src, target=tgt,
                               terminal_distance=traj.event.data["distance"],
                               bisection_iterations=iterations, success=True,
                               method="angle_bisection")
        outcomes.append((theta, kind))

    bracket = None
    for i in range(n0):
        (ta, ka), (tb, kb) = outcomes[i], outcomes[(i + 1) % n0]
        if {ka, kb} == {"blow_up", "crossed"}:
            bracket = (ta, tb if tb > ta else tb + 2.0 * math.pi, ka)
            break
    if bracket is None:
        return ShootResult(trajectory=best[1], source=src, target=tgt,
                           terminal_distance=best[0], bisection_iterations=iterations,
                           success=False, method="angle_bisection",
                           message="no_connection_found: no outcome bracket on the seed circle")

    lo, hi, lo_kind = bracket
    while iterations < budget:
        mid = 0.5 * (lo + hi)
        kind, traj = _forward_outcome(seed_at(mid), params, tgt, tol, t_span,
                                      rtol, atol)
        iterations += 1
        d = _closest_approach(traj, tgt)
        if d < best[0]:
            best = (d, traj)
        if kind == "hit":
            return ShootResult(trajectory=traj, source=src, target=tgt,
                               terminal_distance=traj.event.data["distance"],
                               bisection_iterations=iterations, success=True,
                               method="angle_bisection")
        if kind == lo_kind:
            lo = mid
        else:
            hi = mid
        if best[0] <= tol:
            return ShootResult(trajectory=best[1], source=src, target=tgt,
                               terminal_distance=best[0],
                               bisection_iterations=iterations, success=True,
                               method="angle_bisection")
    return ShootResult(trajectory=best[1], source=src, target=tgt,
                       terminal_distance=best[0], bisection_iterations=iterations,
                       success=best[0] <= tol, method="angle_bisection",
                       message="" if best[0] <= tol else
                       "no_connection_found: angle bisection budget exhausted")


def _shoot_unstable_sweep(source_eq, target_eq, params, tol, t_span, rtol, atol):
    """Exhaustive forward sweep of a saddle source's two unstable seeds."""
    src = tuple(source_eq.location)
    tgt = tuple(target_eq.location)
    unstable = _unstable_indices(source_eq)
    if not unstable:
        raise RegimeError("source equilibrium has no unstable direction to shoot from")
    scale = max(1.0, max(abs(c) for c in src))
    best = (math.inf, None)
    tried = 0
    for idx in unstable:
        for side in (-1, 1):
            seed = manifold_seed(source_eq, idx, epsilon=SHOOT_EPS * scale, side=side)
            kind, traj = _forward_outcome(seed, params, tgt, tol, t_span, rtol, atol)
            tried += 1
            if kind == "hit":
                return ShootResult(trajectory=traj, source=src, target=tgt,
                                   terminal_distance=traj.event.data["distance"],
                                   bisection_iterations=tried, success=True,
                                   method="unstable_sweep")
            d = _closest_approach(traj, tgt)
            if d < best[0]:
                best = (d, traj)
    return ShootResult(trajectory=best[1], source=src, target=tgt,
                       terminal_distance=best[0], bisection_iterations=tried,
                       success=False, method="unstable_sweep",
                       message="no_connection_found: every unstable seed of the "
                               "source exits without reaching the target")


# ---------------------------------------------------------------------------
# critical central manifold
# ---------------------------------------------------------------------------

@dataclass
class CentralManifoldProfile:
    trajectory: Trajectory
    fitted_zero_constant: float      # limit of r^{N-2} |ln r|^{N-1} u at r -> 0
    predicted_zero_constant: float   # ((N-1)/M)^{N-1} / (N-2)
    printed_variant: float           # ((N-1) M)^{1-N} / (N-2); see ledger
    infinity_limit: float            # limit of r^{N-2} u at r -> infinity
    x_M: float

    def to_dict(self):
        return {"trajectory": self.trajectory.to_dict(),
                "fitted_zero_constant": self.fitted_zero_constant,
                "predicted_zero_constant": self.predicted_zero_constant,
                "printed_variant": self.printed_variant,
                "infinity_limit": self.infinity_limit, "x_M": self.x_M}


def central_manifold_profile(params: ProblemParams, *, t_back=-3000.0,
                             rtol=1e-12) -> CentralManifoldProfile:
    """The solution riding the central manifold of the origin in the critical case.

    Requires p = N/(N-2) and q = N/(N-1) (so K = 0).  The connection is
    computed backward from the saddle's stable direction; near r = 0 the
    profile follows the log-corrected law

        r^{N-2} |ln r|^{N-1} u(r)  ->  ((N-1)/M)^{N-1} / (N-2),

    which is fitted over the last computed decade.  Convergence toward the
    constant is algebraic (O(1/|ln r|)), so t_back must be large.
    """
    N, M = params.N, params.M
    if N < 3.0 - 1e-12 or M <= 0.0:
        raise RegimeError("the critical central manifold requires N >= 3 and M > 0")
    if abs(params.p - N / (N - 2.0)) > 1e-9 or abs(params.q - N / (N - 1.0)) > 1e-9:
        raise RegimeError("requires the critical pair p = N/(N-2), q = N/(N-1)")
    e = compute_exponents(params)

    sols = find_constant_solutions(params)
    x_M = sols.roots[0]
    P = (x_M, e.alpha * x_M)
    rep = linearize_planar(P, params)
    stable = _stable_indices(rep)
    if len(stable) != 1:
        raise NumericalError(f"expected a saddle at {P}, got spectrum {rep.eigenvalues}")
    v = np.asarray(rep.eigenvectors[stable[0]], dtype=float)
    v = v / np.linalg.norm(v)
    side = -1 if v[0] > 0 else 1   # enter the region x < x_M
    seed = tuple(np.asarray(P) + side * 1e-9 * max(1.0, x_M) * v)

    back = integrate_chart("planar_W4", seed, 0.0, t_back, params, rtol=rtol,
                           atol=1e-16, track_equilibria=False)
    if back.event.kind != "reached_t_end":
        raise NumericalError(f"backward leg terminated early: {back.event.kind}",
                             partial=back)

    ts = np.linspace(t_back + 0.05, t_back + math.log(10.0), 40)
    xs = np.array([s[0] for s in sample_chart_trajectory(back, ts)])
    fitted = float(np.mean(xs * np.abs(ts) ** (N - 1.0)))

    # forward limit at the saddle: a sustained convergence event cannot
    # trigger there (the unstable mode ejects any numerical trajectory), so
    # the limit is read off at the closest approach
    fwd = integrate_chart("planar_W4", seed, 0.0, 8.0, params, rtol=rtol,
                          atol=1e-16, track_equilibria=False)
    st = np.asarray(fwd.states, dtype=float)
    i = int(np.argmin(np.linalg.norm(st - np.asarray(P), axis=1)))
    inf_limit = float(st[i][0])

    return CentralManifoldProfile(
        trajectory=back,
        fitted_zero_constant=fitted,
        predicted_zero_constant=((N - 1.0) / M) ** (N - 1.0) / (N - 2.0),
        printed_variant=((N - 1.0) * M) ** (1.0 - N) / (N - 2.0),
        infinity_limit=inf_limit,
        x_M=x_M)


# ---------------------------------------------------------------------------
# convergence-rate fit along a simple eigendirection
# ---------------------------------------------------------------------------

@dataclass
class EigenRateFit:
    ell: float
    residual: float
    mu: float
    window: tuple

    def to_dict(self):
        return {"ell": self.ell, "residual": self.residual, "mu": self.mu,
                "window": list(self.window)}


def eigen_rate_check(traj: Trajectory, eq: EquilibriumReport, eig_index: int,
                     *, d_lo=1e-10, d_hi=1e-3) -> EigenRateFit:
    """Fit the limit of exp(-mu t) * (component along the eigenvector).

    The trajectory must converge to the equilibrium at one of its time ends;
    the fitted limit must be nonzero (the approach is genuinely along the
    chosen simple eigendirection).
    """
    loc = np.asarray(eq.location, dtype=float)
    scale = max(1.0, float(np.abs(loc).max()))
    mu = eq.eigenvalues[eig_index]
    mu = mu.real if isinstance(mu, complex) else mu

    states = np.asarray(traj.states, dtype=float)
    times = np.asarray(traj.times, dtype=float)
    dists = np.linalg.norm(states - loc, axis=1)
    if dists[0] > d_hi * scale and dists[-1] > d_hi * scale:
        raise NumericalError("trajectory does not converge to the equilibrium")
    at_start = dists[0] < dists[-1]
    if not at_start:
        times, states, dists = times[::-1], states[::-1], dists[::-1]
    # approach at t -> -inf rides a positive eigenvalue, at t -> +inf a negative one
    if at_start and mu <= 0.0:
        raise RegimeError("the t -> -infinity approach needs a positive eigenvalue")
    if not at_start and mu >= 0.0:
        raise RegimeError("the t -> +infinity approach needs a negative eigenvalue")

    V = np.array([np.asarray(v, dtype=float) for v in eq.eigenvectors]).T
    try:
        W = np.linalg.inv(V)
    except np.linalg.LinAlgError:
        raise NumericalError("eigenbasis is singular; cannot project") from None
    dual = W[eig_index]

    # contiguous converging segment only (the trajectory may pass close again later)
    n_seg = 0
    while n_seg < len(dists) and dists[n_seg] < d_hi * scale:
        n_seg += 1
    mask = np.zeros(len(dists), dtype=bool)
    mask[:n_seg] = dists[:n_seg] > d_lo * scale
    if mask.sum() < 8 or times[mask].ptp() < 0.5:
        raise NumericalError("window too short for a rate fit")
    tw = times[mask]
    comp = (states[mask] - loc) @ dual
    ell_series = comp * np.exp(-mu * tw)
    ell = float(np.median(ell_series))
    spread = float(ell_series.max() - ell_series.min())
    if abs(ell) <= 1e-8 * scale:
        raise NumericalError(f"fitted limit {ell} vanishes; approach is not "
                             "along this eigendirection")
    return EigenRateFit(ell=ell, residual=spread / abs(ell), mu=mu,
                        window=(float(tw.min()), float(tw.max())))
