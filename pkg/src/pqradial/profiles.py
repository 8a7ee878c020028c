"""Explicit solutions, barrier families, and the finite-difference residual oracle.

Every constructor returns a Profile: an evaluator r -> (u, u') on a stated
interval, together with the operator it is measured against ("full" for
-u'' - (N-1)u'/r + u^p - M|u'|^q, "riccati" for the same without the
absorption term) and its role (solution / subsolution / supersolution).

The residual oracle is deliberately independent of the constructors'
algebra: it only consumes the numeric (u, u') samples, differentiating the
u' channel for u'' and cross-checking u' against a difference of u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .equilibria import (eikonal_constant, emden_constant, eval_pm,
                         order3_eigenvalues, riccati_constants)
from .errors import NumericalError, RegimeError
from .params import ProblemParams, THRESHOLD_TOL, compute_exponents, scale_invariant_q

ORACLE_H_REL = 1e-4   # finite-difference step, as a fraction of r
CERT_POINTS = 1000
CERT_SLACK = 1e-10    # one-sided slack for barrier certificates, normalized


@dataclass
class Profile:
    fn: callable                    # r -> (u, u')
    interval: tuple
    label: str
    params: ProblemParams
    operator: str = "full"          # "full" | "riccati"
    kind: str = "solution"          # "solution" | "subsolution" | "supersolution"
    d2: callable | None = None      # analytic u'' when available
    data: dict = field(default_factory=dict)

    def __call__(self, r):
        return self.fn(r)

    def sample(self, rs):
        us, dus = [], []
        for r in np.asarray(rs, dtype=float):
            u, du = self.fn(float(r))
            us.append(u)
            dus.append(du)
        return np.array(us), np.array(dus)


def full_operator(r, u, du, d2u, params: ProblemParams):
    N, p, q, M = params.N, params.p, params.q, params.M
    return -d2u - (N - 1.0) * du / r + abs(u) ** (p - 1.0) * u - M * abs(du) ** q


def riccati_operator(r, u, du, d2u, params: ProblemParams):
    N, q, M = params.N, params.q, params.M
    return -d2u - (N - 1.0) * du / r - M * abs(du) ** q


def _normalizer(r, u, du, params, operator):
    N, p, q, M = params.N, params.p, params.q, params.M
    if operator == "full":
        return max(abs(u) ** p, abs(M) * abs(du) ** q, 1.0)
    return max(abs(M) * abs(du) ** q, abs((N - 1.0) * du / r), 1.0)


# ---------------------------------------------------------------------------
# explicit solutions
# ---------------------------------------------------------------------------

def _power_profile(c, a, params, label, **kw):
    def fn(r):
        return c * r ** (-a), -c * a * r ** (-a - 1.0)

    def d2(r):
        return c * a * (a + 1.0) * r ** (-a - 2.0)
    return Profile(fn=fn, interval=(0.0, math.inf), label=label, params=params,
                   d2=d2, **kw)


def selfsimilar(x_root: float, params: ProblemParams) -> Profile:
    """u = x r^{-alpha} for a constant reduced solution x (root of pm)."""
    e = compute_exponents(params)
    if abs(params.q - scale_invariant_q(params.p)) > 1e-9:
        raise RegimeError("self-similar profiles require q = 2p/(p+1)")
    res = eval_pm(x_root, params)
    if abs(res) > 1e-8 * max(1.0, abs(e.ell)):
        raise RegimeError(f"{x_root} is not a constant reduced solution (pm = {res})")
    return _power_profile(x_root, e.alpha, params,
                          label=f"selfsimilar(x={x_root:.12g})",
                          data={"x_root": x_root})


def eikonal_harmonic(params: ProblemParams) -> Profile:
    """The explicit harmonic solution u = C* r^{2-N} at q = (N-2)p/(N-1).

    It is harmonic and balances the eikonal pair u^p = M|u'|^q exactly.
    """
    N, p, q, M = params.N, params.p, params.q, params.M
    if N < 3.0 - THRESHOLD_TOL or M <= 0.0:
        raise RegimeError("the harmonic eikonal profile requires N >= 3 and M > 0")
    if abs(q - (N - 2.0) * p / (N - 1.0)) > THRESHOLD_TOL:
        raise RegimeError("requires q = (N-2) p/(N-1) exactly")
    cstar = (M * (N - 2.0) ** ((N - 2.0) / ((N - 1.0) * p))) ** ((N - 1.0) / p)
    return _power_profile(cstar, N - 2.0, params,
                          label=f"eikonal_harmonic(C*={cstar:.12g})",
                          data={"C_star": cstar})


def critical_explicit(params: ProblemParams) -> Profile:
    """The separable solution ((N-2) M^{(N-1)/N})^{N-2} r^{2-N} of the critical pair.

    The exponent (N-1)/N on M is the one the residual oracle certifies; the
    printed variant with N/(N-1) fails it for M != 1 (see the ledger).
    """
    N, M = params.N, params.M
    if N < 3.0 - THRESHOLD_TOL or M <= 0.0:
        raise RegimeError("the critical explicit profile requires N >= 3 and M > 0")
    if abs(params.p - N / (N - 2.0)) > 1e-9 or abs(params.q - N / (N - 1.0)) > 1e-9:
        raise RegimeError("requires p = N/(N-2) and q = N/(N-1)")
    c = ((N - 2.0) * M ** ((N - 1.0) / N)) ** (N - 2.0)
    return _power_profile(c, N - 2.0, params,
                          label=f"critical_explicit(c={c:.12g})", data={"constant": c})


# ---------------------------------------------------------------------------
# Riccati quadrature profiles
# ---------------------------------------------------------------------------

class _TailIntegral:
    """u(r) = integral of g from r to r_top (+ tail beyond r_top), evaluated by
    chaining short adaptive quadratures between cached log-spaced anchors."""

    def __init__(self, g, r_lo, r_top, tail=0.0, n_anchors=240):
        self.g = g
        self.tail = tail
        self.anchors = np.geomspace(r_lo, r_top, n_anchors)
        vals = [tail]
        for i in range(len(self.anchors) - 1, 0, -1):
            seg, _ = quad(g, self.anchors[i - 1], self.anchors[i],
                          epsabs=0.0, epsrel=1e-12, limit=200)
            vals.append(vals[-1] + seg)
        self.cum = np.array(vals[::-1])  # value at each anchor

    def __call__(self, r):
        if r < self.anchors[0] * (1.0 - 1e-12) or r > self.anchors[-1] * (1.0 + 1e-12):
            raise RegimeError(f"r = {r} outside the quadrature range")
        i = int(np.searchsorted(self.anchors, r))
        i = min(max(i, 1), len(self.anchors) - 1)
        # integrate from r to the nearest anchor at or above r
        seg, _ = quad(self.g, r, self.anchors[i], epsabs=0.0, epsrel=1e-12, limit=200)
        return self.cum[i] + seg


def riccati_profile(C: float, params: ProblemParams, *, r_lo=1e-8,
                    r_cap=1e8) -> Profile:
    """Radial solution of the pure gradient equation -Lap u = M |grad u|^q.

    |u'| follows the closed form with integration constant C; u is recovered
    by quadrature with u -> 0 at the right end of the admissible interval
    (or anchored there when the tail is not integrable).
    """
    N, q, M = params.N, params.q, params.M
    if M <= 0.0 or q <= 1.0:
        raise RegimeError("riccati profiles require M > 0 and q > 1")
    e = compute_exponents(params)
    kappa = e.kappa
    expo = N - (N - 1.0) * q   # = -kappa (q-1)

    if abs(kappa) <= THRESHOLD_TOL:
        # logarithmic branch: bracket C - M/(N-1) ln r must stay positive
        def bracket(r):
            return C - (M / (N - 1.0)) * math.log(r)
        r_hi = math.exp(C * (N - 1.0) / M)
        integrable_right = False
    else:
        def bracket(r):
            return C + (M / kappa) * r ** expo
        if kappa > 0.0:
            if C > 0.0:
                r_hi = math.inf
                integrable_right = N > 2.0 + THRESHOLD_TOL
            elif C == 0.0:
                r_hi = math.inf
                integrable_right = e.beta > THRESHOLD_TOL
            else:
                r_hi = (-C * kappa / M) ** (1.0 / expo)
                integrable_right = False
        else:
            if C <= 0.0:
                raise RegimeError("kappa < 0 requires C > 0 for a nonempty domain")
            r_hi = (C * abs(kappa) / M) ** (1.0 / expo)
            integrable_right = False

    def du_mag(r):
        b = bracket(r)
        if b <= 0.0:
            raise RegimeError(f"r = {r} outside the admissible interval")
        return r ** (1.0 - N) * b ** (-1.0 / (q - 1.0))

    if abs(kappa) > THRESHOLD_TOL and kappa > 0.0 and C == 0.0:
        # exact power law: u = xi_M r^{-beta}
        xi, eta = riccati_constants(params)

        def fn(r):
            return xi * r ** (-e.beta), -eta * r ** (-e.beta - 1.0)
        interval = (0.0, math.inf)
        anchor = None
    else:
        if math.isfinite(r_hi):
            r_top = 0.995 * r_hi if not integrable_right else r_hi
        else:
            r_top = r_cap
        tail = 0.0
        if integrable_right and not math.isfinite(r_hi):
            tail, _ = quad(du_mag, r_top, math.inf, epsabs=0.0, epsrel=1e-12,
                           limit=200)
        U = _TailIntegral(du_mag, r_lo, r_top, tail=tail)

        def fn(r):
            return U(r), -du_mag(r)
        interval = (r_lo, r_top)
        anchor = None if integrable_right else r_top

    def d2(r):
        # u solves the gradient equation exactly
        u, du = fn(r)
        return -(N - 1.0) * du / r - M * abs(du) ** q

    return Profile(fn=fn, interval=interval,
                   label=f"riccati(C={C:.12g})", params=params, operator="riccati",
                   d2=d2, data={"C": C, "kappa": kappa, "anchor_r": anchor,
                                "r_domain_end": r_hi})


def exterior_newton_profile(C: float, params: ProblemParams, *, r_lo=1e-6) -> Profile:
    """Decaying gradient-equation profile with Newtonian behaviour at infinity.

    w(r) = int_r^inf s^{1-N} (C + (M/kappa) s^{N-(N-1)q})^{-1/(q-1)} ds, with
    r^{N-2} w -> 1/((N-2) C^{1/(q-1)}).  A supersolution of the full operator.
    """
    N, q = params.N, params.q
    e = compute_exponents(params)
    if N < 3.0 - THRESHOLD_TOL or e.kappa <= THRESHOLD_TOL or C <= 0.0:
        raise RegimeError("exterior profiles require N >= 3, q > N/(N-1), C > 0")
    prof = riccati_profile(C, params, r_lo=r_lo)
    limit = 1.0 / ((N - 2.0) * C ** (1.0 / (q - 1.0)))
    prof.label = f"exterior_newton(C={C:.12g})"
    prof.kind = "supersolution"
    prof.data["newton_limit"] = limit
    return prof


def newton_matching_C(k: float, params: ProblemParams) -> float:
    """The constant C that makes r^{N-2} w -> k at infinity."""
    if k <= 0.0:
        raise RegimeError("matching requires k > 0")
    return (1.0 / ((params.N - 2.0) * k)) ** (params.q - 1.0)


# ---------------------------------------------------------------------------
# barrier families with certified residual sign
# ---------------------------------------------------------------------------

@dataclass
class BarrierCertificate:
    profile: Profile
    side: str                  # "subsolution" | "supersolution"
    certified: bool
    max_violation: float       # worst signed violation (normalized)
    violating_r: float | None
    n_points: int
    data: dict = field(default_factory=dict)

    def to_dict(self):
        return {"label": self.profile.label, "side": self.side,
                "certified": self.certified, "max_violation": self.max_violation,
                "violating_r": self.violating_r, "n_points": self.n_points,
                "interval": list(self.profile.interval), "data": self.data}


def _certify(profile: Profile, side: str, grid, params, extra=None) -> BarrierCertificate:
    """Sample the full operator on a log grid and check its one-sided sign.

    Closed-form barriers carry an analytic second derivative, so the sampled
    residual is exact up to rounding; the certificate is a dense sampling
    statement, not a rigorous proof.
    """
    worst = -math.inf
    worst_r = None
    for r in grid:
        u, du = profile.fn(r)
        d2u = profile.d2(r)
        res = full_operator(r, u, du, d2u, params)
        nrm = _normalizer(r, u, du, params, "full")
        v = res / nrm if side == "subsolution" else -res / nrm
        if v > worst:
            worst, worst_r = v, r
    certified = worst <= CERT_SLACK
    return BarrierCertificate(profile=profile, side=side, certified=certified,
                              max_violation=worst,
                              violating_r=None if certified else worst_r,
                              n_points=len(grid), data=extra or {})


def _loggrid(lo, hi, n=CERT_POINTS):
    return np.geomspace(lo, hi, n)


def eikonal_phi(c, params):
    XM = eikonal_constant(params)
    return c ** (params.p - 1.0) - c ** (params.q - 1.0) * XM ** (params.p - params.q)


def eikonal_cm(params):
    """Minimizer of Phi: the deepest subsolution amplitude."""
    p, q = params.p, params.q
    XM = eikonal_constant(params)
    return ((q - 1.0) / (p - 1.0) * XM ** (p - q)) ** (1.0 / (p - q))


def riccati_barrier_window(params: ProblemParams) -> tuple:
    """Admissible decay-rate window (lo, hi) for the Riccati-type subsolution.

    Computed from the quadratic d^2 - ((q-1)kappa + beta) d + (q-1) kappa beta
    (whose roots are the two slow eigenvalues of the desingularized order-3
    system), intersected with d <= mu1.
    """
    e = compute_exponents(params)
    mu1 = e.sigma / (params.q - 1.0)
    b = (params.q - 1.0) * e.kappa + e.beta
    cc = (params.q - 1.0) * e.kappa * e.beta
    disc = b * b - 4.0 * cc
    if disc <= 0.0:
        raise RegimeError("degenerate slow spectrum: no admissible rate window")
    s = math.sqrt(disc)
    r1, r2 = 0.5 * (b - s), 0.5 * (b + s)
    lo, hi = r1, min(mu1, r2)
    if not (hi > lo):
        raise RegimeError(f"empty rate window: roots ({r1}, {r2}), mu1 = {mu1}")
    return lo, hi


def barrier(family: str, params: ProblemParams, **kw) -> BarrierCertificate:
    """Instantiate a barrier family inside its window and certify its sign.

    Families: eikonal_sub, eikonal_super, riccati_sub, emden_super, weak_super.
    Window violations raise RegimeError; a failed certificate is returned
    with the violating radius.
    """
    e = compute_exponents(params)
    N, p, q, M = params.N, params.p, params.q, params.M
    n_points = int(kw.pop("n_points", CERT_POINTS))

    if family == "eikonal_sub":
        if not (q < p) or M <= 0.0 or e.theta is None:
            raise RegimeError("eikonal barriers require q < p, M > 0")
        XM = eikonal_constant(params)
        if e.theta > THRESHOLD_TOL:
            c = kw.pop("c", 0.5 * XM)
            if c > XM + THRESHOLD_TOL:
                raise RegimeError(f"subsolution window is c <= X_M = {XM}")
            prof = _power_profile(c, e.gamma, params,
                                  label=f"eikonal_sub(c={c:.12g})",
                                  kind="subsolution")
            grid = _loggrid(1e-6, 1e6, n_points)
        elif e.theta < -THRESHOLD_TOL:
            if e.sigma <= THRESHOLD_TOL:
                raise RegimeError("theta < 0 subsolutions need q > 2p/(p+1)")
            c = kw.pop("c", eikonal_cm(params))
            phi = eikonal_phi(c, params)
            if phi >= 0.0:
                raise RegimeError("amplitude outside the subsolution window (Phi >= 0)")

            def g(r):
                return phi - e.gamma * e.theta * r ** (e.sigma / (p - q))
            lo, hi = 1e-12, 1.0
            while g(hi) < 0.0:
                hi *= 2.0
            for _ in range(400):
                mid = 0.5 * (lo + hi)
                if g(mid) < 0.0:
                    lo = mid
                else:
                    hi = mid
            r1 = lo
            prof = _power_profile(c, e.gamma, params,
                                  label=f"eikonal_sub(c={c:.12g}, r1={r1:.6g})",
                                  kind="subsolution")
            prof.interval = (0.0, r1)
            grid = _loggrid(1e-6 * r1, r1 * (1.0 - 1e-9), n_points)
        else:
            raise RegimeError("theta = 0 is the explicit harmonic solution, not a barrier")
        return _certify(prof, "subsolution", grid, params, {"c": c})

    if family == "eikonal_super":
        if not (q < p) or M <= 0.0 or e.theta is None:
            raise RegimeError("eikonal barriers require q < p, M > 0")
        XM = eikonal_constant(params)
        if e.theta < -THRESHOLD_TOL:
            c = kw.pop("c", 2.0 * XM)
            A = kw.pop("A", 0.0)
            if c < XM - THRESHOLD_TOL or A < 0.0:
                raise RegimeError("supersolution window is c >= X_M, A >= 0")
            lo_r, hi_r = 1e-6, 1e6
        elif e.theta > THRESHOLD_TOL and e.sigma > THRESHOLD_TOL:
            R = kw.pop("R", 1.0)
            target = 2.0 * e.gamma * e.theta * R ** (e.sigma / (p - q))
            c = kw.pop("c", _solve_phi_level(params, target))
            A = kw.pop("A", (2.0 * e.gamma * e.theta * c * R ** (-e.gamma - 2.0)) ** (1.0 / p))
            lo_r, hi_r = 1e-6, 1e6
        elif e.theta > THRESHOLD_TOL:
            # sigma < 0: supersolution on the exterior domain only
            R = kw.pop("R", 1.0)
            target = e.gamma * e.theta * R ** (e.sigma / (p - q))
            c = kw.pop("c", _solve_phi_level(params, 2.0 * target))
            A = kw.pop("A", 0.0)
            lo_r, hi_r = R, 1e6 * R
        else:
            raise RegimeError("theta = 0 is the explicit harmonic solution, not a barrier")
        interval_lo = lo_r if (e.theta > THRESHOLD_TOL and e.sigma <= THRESHOLD_TOL) else 0.0

        base = _power_profile(c, e.gamma, params, label="")

        def fn(r):
            u, du = base.fn(r)
            return u + A, du
        prof = Profile(fn=fn, interval=(interval_lo, math.inf),
                       label=f"eikonal_super(c={c:.12g}, A={A:.12g})", params=params,
                       kind="supersolution", d2=base.d2)
        return _certify(prof, "supersolution", _loggrid(lo_r, hi_r, n_points),
                        params, {"c": c, "A": A})

    if family == "riccati_sub":
        xi_M, eta_M = riccati_constants(params)
        lo, hi = riccati_barrier_window(params)
        d = kw.pop("d", 0.5 * (lo + hi))
        if not (lo < d < hi):
            raise RegimeError(f"rate d = {d} outside the window ({lo}, {hi})")
        mu1 = e.sigma / (q - 1.0)
        mu2, mu3 = sorted(riccati_barrier_window_roots(params))
        P0 = -(d - mu2) * (d - mu3)
        if P0 <= 0.0:
            raise RegimeError("rate outside the concavity window")
        A_min = (xi_M ** (p - 1.0) / P0) ** (d / mu1)
        A = kw.pop("A", 2.0 * max(1.0, A_min))
        r_kink = A ** (-1.0 / d)

        def fn(r):
            z = A * r ** d
            u = xi_M * (1.0 - z) * r ** (-e.beta)
            du = -xi_M * r ** (-e.beta - 1.0) * (e.beta - A * (e.beta - d) * r ** d)
            return u, du

        def d2(r):
            # second derivative of xi_M (r^-beta - A r^{d-beta})
            return xi_M * (e.beta * (e.beta + 1.0) * r ** (-e.beta - 2.0)
                           - A * (d - e.beta) * (d - e.beta - 1.0) * r ** (d - e.beta - 2.0))
        prof = Profile(fn=fn, interval=(0.0, r_kink),
                       label=f"riccati_sub(d={d:.12g}, A={A:.12g})", params=params,
                       kind="subsolution", d2=d2,
                       data={"d": d, "A": A, "window": (lo, hi)})
        grid = _loggrid(1e-6 * r_kink, r_kink * (1.0 - 1e-6), n_points)
        return _certify(prof, "subsolution", grid, params,
                        {"d": d, "A": A, "window": [lo, hi]})

    if family == "emden_super":
        if e.sigma >= -THRESHOLD_TOL:
            raise RegimeError("the Emden supersolution requires q < 2p/(p+1)")
        x0 = emden_constant(params)
        if e.K >= -THRESHOLD_TOL:
            raise RegimeError("requires the subcritical range p < N/(N-2)")
        C = kw.pop("C", None)
        if C is None:
            C = _solve_emden_amplitude(params, x0)
        A = kw.pop("A", M * e.alpha ** (q / p))

        def fn(r):
            return C * r ** (-e.alpha) + A, -C * e.alpha * r ** (-e.alpha - 1.0)

        def d2(r):
            return C * e.alpha * (e.alpha + 1.0) * r ** (-e.alpha - 2.0)
        prof = Profile(fn=fn, interval=(0.0, math.inf),
                       label=f"emden_super(C={C:.12g}, A={A:.12g})", params=params,
                       kind="supersolution", d2=d2, data={"C": C, "A": A, "x0": x0})
        return _certify(prof, "supersolution", _loggrid(1e-6, 1e6, n_points),
                        params, {"C": C, "A": A})

    if family == "weak_super":
        if N < 3.0 - THRESHOLD_TOL:
            raise RegimeError("the weak-singularity supersolution is built for N >= 3")
        if not (q < N / (N - 1.0) - THRESHOLD_TOL):
            raise RegimeError("requires q < N/(N-1)")
        if (N - 1.0) * q < 2.0 - THRESHOLD_TOL:
            raise RegimeError("requires (N-1) q >= 2")
        k = kw.pop("k", 1.0)
        a = kw.pop("a", None)
        e2 = 2.0 - (N - 1.0) * q

        def make(aval):
            def fn(r):
                u = k * r ** (2.0 - N) + k ** q * r ** e2 + aval
                du = (2.0 - N) * k * r ** (1.0 - N) + e2 * k ** q * r ** (e2 - 1.0)
                return u, du

            def d2(r):
                return ((2.0 - N) * (1.0 - N) * k * r ** (-N)
                        + e2 * (e2 - 1.0) * k ** q * r ** (e2 - 2.0))
            return Profile(fn=fn, interval=(0.0, math.inf),
                           label=f"weak_super(k={k:.12g}, a={aval:.12g})",
                           params=params, kind="supersolution", d2=d2,
                           data={"k": k, "a": aval})
        grid = _loggrid(1e-6, 1e6, n_points)
        if a is None:
            a = _min_weak_constant(make, grid, params)
        cert = _certify(make(a), "supersolution", grid, params, {"k": k, "a": a})
        return cert

    raise RegimeError(f"unknown barrier family {family!r}")


def riccati_barrier_window_roots(params) -> tuple:
    """The two roots of the rate quadratic (equalling the slow order-3 eigenvalues)."""
    e = compute_exponents(params)
    b = (params.q - 1.0) * e.kappa + e.beta
    cc = (params.q - 1.0) * e.kappa * e.beta
    s = math.sqrt(max(b * b - 4.0 * cc, 0.0))
    return 0.5 * (b - s), 0.5 * (b + s)


def _solve_phi_level(params, level):
    """Smallest c > X_M with Phi(c) >= level, by bisection."""
    XM = eikonal_constant(params)
    lo, hi = XM, 2.0 * XM
    while eikonal_phi(hi, params) < level:
        hi *= 2.0
        if hi > 1e100:
            raise NumericalError("Phi never reaches the requested level")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if eikonal_phi(mid, params) < level:
            lo = mid
        else:
            hi = mid
    return hi


def _solve_emden_amplitude(params, x0):
    """C > x0 with C^{p-1} - x0^{p-1} = M alpha^q C^{q-1}, by bisection."""
    e = compute_exponents(params)
    p, q, M = params.p, params.q, params.M

    def h(C):
        return C ** (p - 1.0) - x0 ** (p - 1.0) - M * e.alpha ** q * C ** (q - 1.0)
    lo, hi = x0, 2.0 * x0
    while h(hi) < 0.0:
        hi *= 2.0
        if hi > 1e100:
            raise NumericalError("no supersolution amplitude found")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def _min_weak_constant(make, grid, params):
    """Smallest additive constant making the profile a supersolution (doubled
    for margin); monotone in a since only the absorption term grows."""
    def min_res(a):
        prof = make(a)
        worst = math.inf
        for r in grid[:: max(1, len(grid) // 200)]:
            u, du = prof.fn(r)
            worst = min(worst, full_operator(r, u, du, prof.d2(r), params))
        return worst
    lo, hi = 0.0, 1.0
    it = 0
    while min_res(hi) < 0.0:
        hi *= 4.0
        it += 1
        if it > 40:
            raise NumericalError("no additive constant certifies the supersolution "
                                 "(M too large for this k)")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if min_res(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 2.0 * hi


# ---------------------------------------------------------------------------
# finite-difference residual oracle
# ---------------------------------------------------------------------------

@dataclass
class ResidualReport:
    max_normalized: float
    consistency: float       # max |u' - FD(u)| / scale over the grid
    r: list
    residual: list

    def to_dict(self):
        return {"max_normalized": self.max_normalized, "consistency": self.consistency,
                "r": list(self.r), "residual": list(self.residual)}


def _fd5(samples, h):
    m2, m1, _, p1, p2 = samples
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)


def residual_oracle(profile: Profile, r_grid, h_rel=ORACLE_H_REL) -> ResidualReport:
    """Max normalized residual of the profile's operator over a grid.

    Five-point central differences with step h = h_rel * r act on the numeric
    samples only: u'' is differenced from the u' channel, and the u' channel
    itself is cross-checked against a difference of u.
    """
    params = profile.params
    lo, hi = profile.interval
    op = full_operator if profile.operator == "full" else riccati_operator
    rs, res, cons = [], [], 0.0
    for r in np.asarray(r_grid, dtype=float):
        h = h_rel * r
        if r - 2.0 * h <= lo or (math.isfinite(hi) and r + 2.0 * h >= hi):
            raise RegimeError(f"grid point {r} too close to the profile boundary")
        stencil = [profile.fn(r + k * h) for k in (-2, -1, 0, 1, 2)]
        us = [s[0] for s in stencil]
        dus = [s[1] for s in stencil]
        u, du = us[2], dus[2]
        d2u = _fd5(dus, h)
        du_fd = _fd5(us, h)
        cons = max(cons, abs(du_fd - du) / max(abs(du), 1.0))
        val = op(r, u, du, d2u, params) / _normalizer(r, u, du, params, profile.operator)
        rs.append(float(r))
        res.append(float(val))
    return ResidualReport(max_normalized=float(max(abs(v) for v in res)),
                          consistency=float(cons), r=rs, residual=res)
