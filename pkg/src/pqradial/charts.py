"""Dynamical charts: vector fields, chart transfers and flow diagnostics.

Every chart describes the same radial profile u(r) through a change of
variables with t = ln r:

    planar_W4        (x, y)    u = r^-alpha x, u' = -r^(-alpha-1) y, q = 2p/(p+1)
    emden_U2         (x, y)    same variables, general q (non-autonomous)
    riccati_U5       (xi, eta) u = r^-beta xi, u' = -r^(-beta-1) eta
    eikonal_U9       (X, Y)    u = r^-gamma X, u' = -r^(-gamma-1) Y
    order3_N1        (X, xi, S)        S = -r u'/u
    order3_M2_desing (Xhat, xihat, S)  Xhat = X^(p-q), xihat = xi^(q-1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RegimeError
from .integrator import EventSpec, Trajectory, integrate
from .params import ProblemParams, THRESHOLD_TOL, compute_exponents, scale_invariant_q
from . import equilibria as eqmod

EXP_CLAMP = 700.0  # |exponent| beyond this would overflow double precision


@dataclass(frozen=True)
class Chart:
    name: str
    dimension: int
    autonomous: bool
    components: tuple


CHARTS = {
    "planar_W4": Chart("planar_W4", 2, True, ("x", "y")),
    "emden_U2": Chart("emden_U2", 2, False, ("x", "y")),
    "riccati_U5": Chart("riccati_U5", 2, False, ("xi", "eta")),
    "eikonal_U9": Chart("eikonal_U9", 2, False, ("X", "Y")),
    "order3_N1": Chart("order3_N1", 3, True, ("X", "xi", "S")),
    "order3_M2_desing": Chart("order3_M2_desing", 3, True, ("Xhat", "xihat", "S")),
}


def get_chart(name: str) -> Chart:
    try:
        return CHARTS[name]
    except KeyError:
        raise RegimeError(f"unknown chart {name!r}; valid: {sorted(CHARTS)}") from None


def validate_chart(name: str, params: ProblemParams):
    chart = get_chart(name)
    e = compute_exponents(params)
    if name == "planar_W4" and abs(params.q - scale_invariant_q(params.p)) > 1e-9:
        raise RegimeError("planar_W4 is only valid for q = 2p/(p+1)")
    if name in ("eikonal_U9", "order3_N1", "order3_M2_desing") and e.gamma is None:
        raise RegimeError(f"{name} requires q != p")
    return chart


def _odd_pow(x, a):
    return math.copysign(abs(x) ** a, x)


def exp_argument(name: str, t: float, params: ProblemParams) -> float:
    """Argument of the non-autonomous exponential factor of a chart (0 if autonomous)."""
    e = compute_exponents(params)
    if name == "emden_U2":
        return -e.sigma * t / (params.p - 1.0)
    if name == "riccati_U5":
        return e.sigma * t / (params.q - 1.0)
    if name == "eikonal_U9":
        return -e.sigma * t / (params.p - params.q)
    return 0.0


def chart_rhs(name: str, t: float, state, params: ProblemParams):
    """Right-hand side of a chart's system at (t, state).

    The exponential factors are clamped to the representable range; the
    integrator halts with a left_domain event before a clamp can activate.
    The |y|^q style terms use plain powers of the absolute value (the field
    is continuous but not C^1 across y = 0).
    """
    chart = validate_chart(name, params)
    if len(state) != chart.dimension:
        raise RegimeError(f"{name} expects {chart.dimension} components, got {len(state)}")
    N, p, q, M = params.N, params.p, params.q, params.M
    e = compute_exponents(params)

    if name == "planar_W4":
        x, y = state
        return (e.alpha * x - y,
                -e.K * y - _odd_pow(x, p) + M * abs(y) ** (2.0 * p / (p + 1.0)))
    if name == "emden_U2":
        x, y = state
        f = math.exp(_clamp(exp_argument(name, t, params)))
        return (e.alpha * x - y, -e.K * y - _odd_pow(x, p) + M * f * abs(y) ** q)
    if name == "riccati_U5":
        xi, eta = state
        f = math.exp(_clamp(exp_argument(name, t, params)))
        return (e.beta * xi - eta, -e.kappa * eta - f * _odd_pow(xi, p) + M * abs(eta) ** q)
    if name == "eikonal_U9":
        X, Y = state
        f = math.exp(_clamp(exp_argument(name, t, params)))
        return (e.gamma * X - Y, e.theta * Y + f * (M * abs(Y) ** q - _odd_pow(X, p)))
    if name == "order3_N1":
        X, xi, S = state
        return (X * (e.gamma - S), xi * (e.beta - S),
                S * (S + 2.0 - N) + abs(xi) ** (q - 1.0) * (M * abs(S) ** q - abs(X) ** (p - q)))
    if name == "order3_M2_desing":
        Xh, xih, S = state
        return ((p - q) * Xh * (e.gamma - S), (q - 1.0) * xih * (e.beta - S),
                S * (S + 2.0 - N) + xih * (M * abs(S) ** q - Xh))
    raise RegimeError(f"unknown chart {name}")


def _clamp(a):
    return max(-EXP_CLAMP, min(EXP_CLAMP, a))


def exp_guard(name: str, params: ProblemParams):
    """Domain guard for the integrator: False once a clamp would activate."""
    chart = get_chart(name)
    if chart.autonomous:
        return None

    def ok(t, state):
        return abs(exp_argument(name, t, params)) < EXP_CLAMP
    return ok


# ---------------------------------------------------------------------------
# profile reconstruction and chart transfer
# ---------------------------------------------------------------------------

def profile_from_state(name: str, t: float, state, params: ProblemParams):
    """(r, u, u') encoded by a chart state at time t = ln r."""
    e = compute_exponents(params)
    r = math.exp(t)
    if name in ("planar_W4", "emden_U2"):
        x, y = state
        return r, x * r ** (-e.alpha), -y * r ** (-e.alpha - 1.0)
    if name == "riccati_U5":
        xi, eta = state
        return r, xi * r ** (-e.beta), -eta * r ** (-e.beta - 1.0)
    if name == "eikonal_U9":
        X, Y = state
        return r, X * r ** (-e.gamma), -Y * r ** (-e.gamma - 1.0)
    if name == "order3_N1":
        X, xi, S = state
        u = X * r ** (-e.gamma)
        return r, u, -S * u / r
    if name == "order3_M2_desing":
        Xh, xih, S = state
        u = Xh ** (1.0 / (params.p - params.q)) * r ** (-e.gamma)
        return r, u, -S * u / r
    raise RegimeError(f"unknown chart {name}")


def state_from_profile(name: str, r: float, u: float, du: float, params: ProblemParams):
    """Inverse of profile_from_state."""
    e = compute_exponents(params)
    if name in ("planar_W4", "emden_U2"):
        return (u * r ** e.alpha, -du * r ** (e.alpha + 1.0))
    if name == "riccati_U5":
        return (u * r ** e.beta, -du * r ** (e.beta + 1.0))
    if name == "eikonal_U9":
        return (u * r ** e.gamma, -du * r ** (e.gamma + 1.0))
    if name == "order3_N1":
        if u <= 0.0:
            raise RegimeError("order3 charts require u > 0")
        return (u * r ** e.gamma, u * r ** e.beta, -r * du / u)
    if name == "order3_M2_desing":
        if u <= 0.0:
            raise RegimeError("order3 charts require u > 0")
        return ((u * r ** e.gamma) ** (params.p - params.q),
                (u * r ** e.beta) ** (params.q - 1.0), -r * du / u)
    raise RegimeError(f"unknown chart {name}")


def chart_transfer(traj, target: str):
    """Pointwise re-coordinatization of a trajectory into another chart.

    The reconstructed profile u(r) is preserved exactly (up to rounding);
    in particular x^(p-1) = X^(p-q) xi^(q-1) holds along the result.
    """
    validate_chart(target, traj.params)
    states = []
    for t, s in zip(traj.times, traj.states):
        r, u, du = profile_from_state(traj.chart, t, s, traj.params)
        states.append(state_from_profile(target, r, u, du, traj.params))
    return Trajectory(chart=target, params=traj.params, times=list(traj.times),
                      states=states, event=traj.event, meta=dict(traj.meta))


def equilibrium_points(name: str, params: ProblemParams) -> list:
    """Known equilibria of a chart (used for convergence detection)."""
    e = compute_exponents(params)
    pts = []
    if name == "planar_W4":
        pts.append((0.0, 0.0))
        for x in eqmod.find_constant_solutions(params).roots:
            pts.append((x, e.alpha * x))
    elif name == "eikonal_U9":
        try:
            XM = eqmod.eikonal_constant(params)
            pts.append((XM, e.gamma * XM))
        except RegimeError:
            pass
        pts.append((0.0, 0.0))
    elif name == "emden_U2":
        pts.append((0.0, 0.0))
        try:
            x0 = eqmod.emden_constant(params)
            if e.ell < 0.0:
                pts.append((x0, e.alpha * x0))
        except RegimeError:
            pass
    elif name == "riccati_U5":
        pts.append((0.0, 0.0))
        try:
            xi, eta = eqmod.riccati_constants(params)
            pts.append((xi, eta))
        except RegimeError:
            pass
    elif name == "order3_N1":
        pts.extend([(0.0, 0.0, 0.0), (0.0, 0.0, params.N - 2.0)])
        try:
            xi, _ = eqmod.riccati_constants(params)
            pts.append((0.0, xi, e.beta))
        except RegimeError:
            pass
    elif name == "order3_M2_desing":
        pts.extend([(0.0, 0.0, 0.0), (0.0, 0.0, params.N - 2.0)])
        try:
            xi, _ = eqmod.riccati_constants(params)
            pts.append((0.0, xi ** (params.q - 1.0), e.beta))
        except RegimeError:
            pass
    return pts


def integrate_chart(name: str, initial, t0: float, t1: float,
                    params: ProblemParams, *, rtol=None, atol=None,
                    track_equilibria=True, positivity_event=True,
                    extra_events=(), **kw) -> Trajectory:
    """Integrate a chart flow with the standard event set.

    Installs the leave-x>0 crossing event on the first component, blow-up
    and convergence detection against the chart's known equilibria, and the
    domain guard for non-autonomous exponential factors.
    """
    validate_chart(name, params)
    events = list(extra_events)
    if positivity_event:
        events.append(EventSpec("x_axis_crossing", lambda t, s: s[0], terminal=True))
    eqs = equilibrium_points(name, params) if track_equilibria else ()
    opts = {}
    if rtol is not None:
        opts["rtol"] = rtol
    if atol is not None:
        opts["atol"] = atol
    return integrate(lambda t, s: chart_rhs(name, t, s, params), initial, t0, t1,
                     events=events, equilibria=eqs,
                     domain_guard=exp_guard(name, params),
                     chart=name, params=params, **opts, **kw)


def sample_chart_trajectory(traj: Trajectory, ts, rtol=1e-13):
    """Chart states at arbitrary times by local re-integration."""
    from .integrator import sample_trajectory
    f = lambda t, s: chart_rhs(traj.chart, t, s, traj.params)
    return sample_trajectory(traj, f, ts, rtol=rtol)


def trajectory_profile(traj: Trajectory, trim_event: float = 0.05):
    """Wrap a chart trajectory as a radial Profile r -> (u, u').

    Evaluation re-integrates locally from the nearest stored node, so the
    profile is accurate to the re-integration tolerance rather than to a
    polyline interpolation.  The 5% of the time span adjacent to a
    terminating event is excluded from the stated interval.
    """
    from .profiles import Profile
    t_lo, t_hi = traj.times[0], traj.times[-1]
    span = t_hi - t_lo
    if traj.event.kind not in ("reached_t_end", "converged_to_equilibrium"):
        if traj.direction > 0:
            t_hi -= trim_event * span
        else:
            t_lo += trim_event * span

    def fn(r):
        t = math.log(r)
        state = sample_chart_trajectory(traj, [t])[0]
        _, u, du = profile_from_state(traj.chart, t, state, traj.params)
        return u, du

    return Profile(fn=fn, interval=(math.exp(t_lo), math.exp(t_hi)),
                   label=f"trajectory({traj.chart})", params=traj.params,
                   operator="full", kind="solution",
                   data={"event": traj.event.kind})


# ---------------------------------------------------------------------------
# diagnostics along trajectories
# ---------------------------------------------------------------------------

@dataclass
class DiagnosticsSeries:
    times: list
    energy: list          # E(t), eikonal chart only (None otherwise)
    slope: list           # S(t) = second/first component ratio (None at zeros)
    c2: float | None      # constant of the corrected-monotonicity bound
    monotone: bool | None

    def to_dict(self):
        return {"times": list(self.times), "energy": self.energy, "slope": self.slope,
                "c2": self.c2, "monotone": self.monotone}


def energy(name: str, t: float, state, params: ProblemParams) -> float:
    """Lyapunov-type functional of the eikonal chart."""
    if name != "eikonal_U9":
        raise RegimeError("energy diagnostic requires the eikonal chart")
    e = compute_exponents(params)
    p, q, M = params.p, params.q, params.M
    X, Y = state
    f = math.exp(_clamp(e.sigma * t / (p - q)))
    return (X ** (p + 1.0) / (p + 1.0) - M * e.gamma ** q * X ** (q + 1.0) / (q + 1.0)
            - f * ((e.gamma * X - Y) ** 2 / 2.0 + e.gamma * e.theta * X ** 2 / 2.0))


def diagnostics(traj) -> DiagnosticsSeries:
    """Slope series for any chart; energy and corrected monotonicity for eikonal.

    The monotone flag asserts that t -> E(t) - C2 exp(sigma t/(p-q)) is
    non-increasing along the trajectory for the reported C2, which bounds the
    non-autonomous part of dE/dt.
    """
    params = traj.params
    e = compute_exponents(params)
    p, q, M = params.p, params.q, params.M
    slopes = []
    for s in traj.states:
        denom, num = s[0], s[1]
        slopes.append(None if abs(denom) < 1e-300 else num / denom)

    if traj.chart != "eikonal_U9":
        return DiagnosticsSeries(times=list(traj.times), energy=None, slope=slopes,
                                 c2=None, monotone=None)

    D = e.sigma / (p - q)
    energies = [energy(traj.chart, t, s, params) for t, s in zip(traj.times, traj.states)]
    if abs(e.sigma) <= THRESHOLD_TOL:
        c2 = 0.0
        corrected = energies
    else:
        brackets = []
        for t, s in zip(traj.times, traj.states):
            X, Y = s
            brackets.append(abs((e.alpha / 2.0 + e.gamma + e.theta) * (e.gamma * X - Y) ** 2
                                + D * e.gamma * e.theta * X ** 2 / 2.0))
        c2 = max(brackets) / D if D != 0.0 else 0.0
        corrected = [E - c2 * math.exp(_clamp(D * t)) for E, t in zip(energies, traj.times)]
    scale = max(1.0, max(abs(v) for v in corrected))
    mono = all(corrected[i + 1] <= corrected[i] + 1e-9 * scale for i in range(len(corrected) - 1))
    return DiagnosticsSeries(times=list(traj.times), energy=energies, slope=slopes,
                             c2=c2, monotone=mono)


# ---------------------------------------------------------------------------
# a priori growth-exponent check
# ---------------------------------------------------------------------------

@dataclass
class AprioriReport:
    ok: bool
    u_bound: float
    du_bound: float
    violations: list  # (r, kind, slope) triples

    def to_dict(self):
        return {"ok": self.ok, "u_bound": self.u_bound, "du_bound": self.du_bound,
                "violations": [list(v) for v in self.violations]}


def apriori_check(r, u, du, params: ProblemParams, slope_tol: float = 0.05) -> AprioriReport:
    """Check the a priori growth exponents of a positive profile near r = 0.

    Only the exponents of the bounds are enforced (their constants are not
    quantitative): the local log-slope of u may not exceed max(gamma, alpha)
    and that of |u'| may not exceed the matching gradient bound, both up to
    slope_tol.  Requires M > 0 and 1 < q < p.
    """
    if params.M <= 0.0 or not (1.0 < params.q < params.p):
        raise RegimeError("a priori bounds require M > 0 and 1 < q < p")
    e = compute_exponents(params)
    u_bound = max(e.gamma, e.alpha)
    if params.q <= scale_invariant_q(params.p) + THRESHOLD_TOL:
        du_bound = max(params.p / (params.p - params.q), (params.p + 1.0) / (params.p - 1.0))
    else:
        du_bound = max(1.0 / (params.q - 1.0), params.p / (params.p - params.q),
                       2.0 * params.p / (params.q * (params.p - 1.0)))

    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    if np.any(u <= 0.0):
        raise RegimeError("a priori bounds apply to positive profiles")
    lr = np.log(r)
    slope_u = -np.gradient(np.log(u), lr)
    with np.errstate(divide="ignore"):
        ldu = np.where(np.abs(du) > 0.0, np.log(np.abs(du)), -np.inf)
    slope_du = -np.gradient(ldu, lr)

    violations = []
    for i in range(1, len(r) - 1):
        if slope_u[i] > u_bound + slope_tol:
            violations.append((float(r[i]), "u", float(slope_u[i])))
        if np.isfinite(slope_du[i]) and slope_du[i] > du_bound + slope_tol:
            violations.append((float(r[i]), "du", float(slope_du[i])))
    return AprioriReport(ok=not violations, u_bound=u_bound, du_bound=du_bound,
                         violations=violations)
