"""Fixed points of the reduced systems and their linearizations.

Covers the constant reduced solutions of the scale-invariant case (roots of
the scalar polynomial-like map ``pm``), the distinguished constants of the
eikonal/Riccati regimes, the planar and order-3 spectra, and the spherical
non-resonance check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RegimeError
from .params import (ProblemParams, THRESHOLD_TOL, compute_exponents,
                     critical_masses, scale_invariant_q)

ROOT_RTOL = 1e-12        # relative bisection tolerance for roots of pm
DOUBLE_ROOT_TOL = 1e-8   # |pm_tilde'(z)| below this * scale => double root
EQ_RESIDUAL_TOL = 1e-9   # max field residual accepted at a claimed equilibrium
EIG_TOL = 1e-9           # |J v - mu v| <= EIG_TOL * |v|


# ---------------------------------------------------------------------------
# the scalar map whose positive roots are the constant reduced solutions
# ---------------------------------------------------------------------------

def eval_pm(x: float, params: ProblemParams) -> float:
    """x^{p-1} - M alpha^{2p/(p+1)} x^{(p-1)/(p+1)} + alpha*K, for x > 0."""
    if x <= 0.0:
        raise RegimeError("eval_pm requires x > 0")
    p, M = params.p, params.M
    e = compute_exponents(params)
    return x ** (p - 1.0) - M * e.alpha ** (2.0 * p / (p + 1.0)) * x ** ((p - 1.0) / (p + 1.0)) + e.ell


def eval_pm_prime(x: float, params: ProblemParams) -> float:
    p, M = params.p, params.M
    e = compute_exponents(params)
    c = M * e.alpha ** (2.0 * p / (p + 1.0))
    return (p - 1.0) * x ** (p - 2.0) - c * ((p - 1.0) / (p + 1.0)) * x ** ((p - 1.0) / (p + 1.0) - 1.0)


def _pm_tilde(z: float, params: ProblemParams) -> float:
    # substitution z = x^{(p-1)/(p+1)} turns pm into z^{p+1} - c z + ell
    p, M = params.p, params.M
    e = compute_exponents(params)
    return z ** (p + 1.0) - M * e.alpha ** (2.0 * p / (p + 1.0)) * z + e.ell


def _pm_tilde_prime(z: float, params: ProblemParams) -> float:
    p, M = params.p, params.M
    e = compute_exponents(params)
    return (p + 1.0) * z ** p - M * e.alpha ** (2.0 * p / (p + 1.0))


def _bisect(f, lo, hi, rtol=ROOT_RTOL, maxit=300):
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise RegimeError(f"bisection bracket does not straddle a root: f({lo})={flo}, f({hi})={fhi}")
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or (hi - lo) <= rtol * max(abs(mid), 1e-300):
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


@dataclass
class ConstantSolutionSet:
    """Positive roots of pm with their multiplicities and regime labels."""

    roots: list
    multiplicities: list
    labels: list
    params: ProblemParams

    def to_dict(self):
        return {"roots": list(self.roots), "multiplicities": list(self.multiplicities),
                "labels": list(self.labels), "params": self.params.to_dict()}


def _require_scale_invariant(params):
    if abs(params.q - scale_invariant_q(params.p)) > 1e-9:
        raise RegimeError(
            f"operation requires q = 2p/(p+1) = {scale_invariant_q(params.p)}, got q = {params.q}")


def find_constant_solutions(params: ProblemParams) -> ConstantSolutionSet:
    """All positive roots of pm, found by bisection on the two monotone branches.

    The substituted map z -> z^{p+1} - c z + ell is decreasing then increasing
    with minimum at z0 (M > 0), so each branch is globally safe to bisect.
    An empty set is a valid result.
    """
    _require_scale_invariant(params)
    N, p, M = params.N, params.p, params.M
    e = compute_exponents(params)
    scale = max(1.0, abs(e.ell))

    supercritical = N >= 3.0 and p > N / (N - 2.0) + THRESHOLD_TOL

    def f(z):
        return _pm_tilde(z, params)

    def grow_hi(start):
        z = max(start, 1.0)
        while f(z) <= 0.0:
            z *= 2.0
            if z > 1e150:
                raise RegimeError("pm_tilde does not become positive; bad parameters")
        return z

    zroots = []
    if M <= 0.0:
        # single increasing branch; a root exists iff ell < 0
        if e.ell < -THRESHOLD_TOL:
            zroots.append(_bisect(f, 1e-150, grow_hi(1.0)))
    else:
        z0 = (M / (p + 1.0)) ** (1.0 / p) * e.alpha ** (2.0 / (p + 1.0))
        v0 = f(z0)
        vscale = max(abs(e.ell), abs(_pm_tilde(2.0 * z0, params)), 1e-30)
        if abs(v0) <= 1e-13 * vscale:
            zroots.append(z0)  # double root at the branch junction (M ~ m_star)
        elif v0 < 0.0:
            if e.ell > 0.0:
                zroots.append(_bisect(f, 1e-150, z0))       # decreasing branch
            zroots.append(_bisect(f, z0, grow_hi(2.0 * z0)))  # increasing branch
        # v0 > 0: the minimum is positive, no roots

    roots, mults = [], []
    for z in sorted(zroots):
        x = z ** ((p + 1.0) / (p - 1.0))
        dscale = (p + 1.0) * max(z, 1.0) ** p + abs(M) * e.alpha ** (2.0 * p / (p + 1.0)) + 1.0
        mult = 2 if abs(_pm_tilde_prime(z, params)) < DOUBLE_ROOT_TOL * dscale else 1
        roots.append(x)
        mults.append(mult)

    labels = []
    if supercritical:
        if len(roots) == 1:
            labels = ["x_mstar"] if mults[0] == 2 else ["x_1M"]
        elif len(roots) == 2:
            labels = ["x_1M", "x_2M"]
    else:
        if len(roots) == 1:
            labels = ["x_0"] if M == 0.0 else ["x_M"]
    return ConstantSolutionSet(roots=roots, multiplicities=mults, labels=labels, params=params)


# ---------------------------------------------------------------------------
# distinguished constants of the non-scale-invariant regimes
# ---------------------------------------------------------------------------

def eikonal_constant(params: ProblemParams) -> float:
    """X_M = (M gamma^q)^{1/(p-q)}; the r^{-gamma} amplitude.  Needs q < p, M > 0."""
    e = compute_exponents(params)
    if e.gamma is None or params.q >= params.p or params.M <= 0.0:
        raise RegimeError("eikonal constant requires q < p and M > 0")
    return (params.M * e.gamma ** params.q) ** (1.0 / (params.p - params.q))


def riccati_constants(params: ProblemParams) -> tuple:
    """(xi_M, eta_M) with eta_M = (kappa/M)^{1/(q-1)}, xi_M = eta_M / beta.

    Defined for N/(N-1) < q < 2 and M > 0 (kappa > 0 and beta > 0).
    """
    e = compute_exponents(params)
    if params.M <= 0.0 or e.kappa <= THRESHOLD_TOL or e.beta <= THRESHOLD_TOL:
        raise RegimeError("Riccati constants require N/(N-1) < q < 2 and M > 0")
    eta = (e.kappa / params.M) ** (1.0 / (params.q - 1.0))
    return eta / e.beta, eta


def emden_constant(params: ProblemParams) -> float:
    """x_0 = (alpha |K|)^{1/(p-1)}; the pure-absorption amplitude.  Needs K != 0."""
    e = compute_exponents(params)
    if abs(e.K) <= THRESHOLD_TOL:
        raise RegimeError("emden constant requires K != 0")
    return (e.alpha * abs(e.K)) ** (1.0 / (params.p - 1.0))


def fixed_points(params: ProblemParams) -> dict:
    """Every distinguished constant whose precondition holds, keyed by name."""
    out = {}
    try:
        out["X_M"] = eikonal_constant(params)
    except RegimeError:
        pass
    try:
        xi, eta = riccati_constants(params)
        out["xi_M"], out["eta_M"] = xi, eta
    except RegimeError:
        pass
    try:
        out["x_0"] = emden_constant(params)
    except RegimeError:
        pass
    return out


# ---------------------------------------------------------------------------
# linearizations
# ---------------------------------------------------------------------------

@dataclass
class EquilibriumReport:
    chart: str
    location: tuple
    jacobian: tuple
    eigenvalues: list
    eigenvectors: list
    stability: str
    data: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "chart": self.chart,
            "location": list(self.location),
            "jacobian": [list(row) for row in self.jacobian],
            "eigenvalues": [[v.real, v.imag] if isinstance(v, complex) else [v, 0.0]
                            for v in self.eigenvalues],
            "eigenvectors": [list(v) for v in self.eigenvectors],
            "stability": self.stability,
            "data": self.data,
        }


def _normalize_first_nonzero(v):
    v = np.asarray(v, dtype=float)
    for c in v:
        if abs(c) > 1e-13 * max(1.0, np.abs(v).max()):
            return tuple(v / c)
    return tuple(v)


def _classify(eigs, scale):
    tol = 1e-9 * max(1.0, scale)
    re = [e.real for e in eigs]
    im = [abs(e.imag) for e in eigs]
    if any(abs(r) <= tol for r in re):
        return "non-hyperbolic"
    if max(im) > tol:
        return "node-source" if min(re) > 0 else ("node-sink" if max(re) < 0 else "degenerate")
    if min(re) > 0:
        return "node-source"
    if max(re) < 0:
        return "node-sink"
    if min(re) < 0 < max(re):
        return "saddle"
    return "degenerate"


def planar_jacobian(point, params: ProblemParams):
    """Jacobian of the autonomous planar field at an arbitrary point (x, y)."""
    x, y = point
    p, M = params.p, params.M
    e = compute_exponents(params)
    qs = 2.0 * p / (p + 1.0)
    dfdy = -e.K if y == 0.0 else -e.K + M * qs * abs(y) ** (qs - 1.0) * math.copysign(1.0, y)
    return ((e.alpha, -1.0), (-p * abs(x) ** (p - 1.0), dfdy))


def linearize_planar(point, params: ProblemParams) -> EquilibriumReport:
    """Spectrum and stability of the planar system at one of its equilibria.

    Accepts the origin or a point (x_r, alpha*x_r) with x_r a root of pm;
    anything with a larger field residual is rejected.
    """
    from .charts import chart_rhs  # deferred import; charts depends on this module

    _require_scale_invariant(params)
    x, y = float(point[0]), float(point[1])
    e = compute_exponents(params)
    N = params.N
    resid = chart_rhs("planar_W4", 0.0, (x, y), params)
    scale = max(1.0, abs(x), abs(y))
    if max(abs(resid[0]), abs(resid[1])) > EQ_RESIDUAL_TOL * scale:
        raise RegimeError(f"point {point} is not an equilibrium (residual {resid})")

    data = {}
    if abs(x) <= EQ_RESIDUAL_TOL:
        J = ((e.alpha, -1.0), (0.0, -e.K))
        eigs = [-e.K, e.alpha]
        if abs(N - 2.0) <= THRESHOLD_TOL:
            vecs = [(1.0, 0.0), (1.0, 0.0)]
            stability = "degenerate"
        else:
            vecs = [(1.0, N - 2.0), (1.0, 0.0)]
            stability = _classify([complex(v) for v in eigs], scale)
        if abs(e.K) <= 1e-12:
            stability = "non-hyperbolic"
        data["kind"] = "origin"
    else:
        J = planar_jacobian((x, y), params)
        A = np.array(J)
        w, V = np.linalg.eig(A)
        order = np.argsort(w.real)
        w = w[order]
        V = V[:, order]
        eigs = [complex(v) if abs(v.imag) > 1e-12 else float(v.real) for v in w]
        vecs = [_normalize_first_nonzero(V[:, i].real) for i in range(len(w))]
        stability = _classify([complex(v) for v in w], scale)
        # trace/determinant of the characteristic polynomial in closed form
        yM = y
        B = (2.0 * params.M * params.p / (params.p + 1.0)) * abs(yM) ** ((params.p - 1.0) / (params.p + 1.0))
        data["charpoly_trace"] = B - e.L
        data["charpoly_det"] = 2.0 * e.K - B
        data["discriminant"] = (B - e.L) ** 2 - 4.0 * (2.0 * e.K - B)
        data["kind"] = "constant_solution"

    rep = EquilibriumReport(chart="planar_W4", location=(x, y), jacobian=J,
                            eigenvalues=eigs, eigenvectors=vecs,
                            stability=stability, data=data)
    _check_eigenpairs(rep)
    return rep


def _check_eigenpairs(rep: EquilibriumReport):
    A = np.array(rep.jacobian, dtype=float)
    for mu, v in zip(rep.eigenvalues, rep.eigenvectors):
        if isinstance(mu, complex):
            continue  # stored real part only; verified through _classify path
        v = np.asarray(v, dtype=float)
        r = np.linalg.norm(A @ v - mu * v)
        if r > EIG_TOL * max(np.linalg.norm(v), 1e-30) * max(1.0, abs(mu)):
            raise AssertionError(f"eigenpair residual too large: mu={mu}, |Jv-mu v|={r}")


def order3_eigenvalues(params: ProblemParams) -> tuple:
    """Closed-form spectrum (sigma/(q-1), beta, (N-1)q - N) of the desingularized system."""
    e = compute_exponents(params)
    return (e.sigma / (params.q - 1.0), e.beta, (params.N - 1.0) * params.q - params.N)


def linearize_order3(params: ProblemParams) -> EquilibriumReport:
    """Linearization of the desingularized order-3 system at its Riccati point.

    The equilibrium is (Xhat, xihat, S) = (0, xi_M^{q-1}, beta).  Closed-form
    eigenvalues are checked against a generic eigensolver; the first
    eigenvector is taken from the eigensolver, the other two from their
    closed forms.
    """
    N, p, q, M = params.N, params.p, params.q, params.M
    e = compute_exponents(params)
    if abs(q - p) <= THRESHOLD_TOL:
        raise RegimeError("order-3 linearization requires q != p")
    if M <= 0.0 or e.kappa <= THRESHOLD_TOL or e.beta <= THRESHOLD_TOL:
        raise RegimeError("order-3 linearization requires N/(N-1) < q < 2 and M > 0")

    xihat = e.kappa / (M * e.beta ** (q - 1.0))
    mu1, mu2, mu3 = order3_eigenvalues(params)
    J = ((mu1, 0.0, 0.0),
         (0.0, 0.0, -(q - 1.0) * xihat),
         (-xihat, M * e.beta ** q, e.beta + e.kappa * (q - 1.0)))

    w, V = np.linalg.eig(np.array(J))
    w = w.real
    order = np.argsort(w)
    closed = sorted([mu1, mu2, mu3])
    numeric = w[order]
    for c, n in zip(closed, numeric):
        if abs(c - n) > EIG_TOL * max(1.0, abs(c)):
            raise AssertionError(f"closed-form eigenvalue {c} disagrees with eigensolver {n}")

    degenerate = (min(abs(mu1 - mu2), abs(mu1 - mu3), abs(mu2 - mu3))
                  <= 1e-10 * max(1.0, abs(mu1), abs(mu2), abs(mu3)))
    u2 = (0.0, 1.0, -M * e.beta ** q / (e.kappa * (q - 1.0)))
    u3 = (0.0, 1.0, -M * e.beta ** (q - 1.0))
    if degenerate:
        vecs = [_normalize_first_nonzero(V[:, i].real) for i in range(3)]
    else:
        i1 = int(np.argmin(np.abs(w - mu1)))
        u1 = _normalize_first_nonzero(V[:, i1].real)
        vecs = [u1, u2, u3]

    rep = EquilibriumReport(
        chart="order3_M2_desing", location=(0.0, xihat, e.beta), jacobian=J,
        eigenvalues=[mu1, mu2, mu3], eigenvectors=vecs,
        stability="degenerate" if degenerate else _classify([complex(m) for m in (mu1, mu2, mu3)], 1.0),
        data={"degenerate_spectrum": degenerate, "xihat_M": xihat})
    if not degenerate:
        _check_eigenpairs(rep)
    return rep


# ---------------------------------------------------------------------------
# spherical non-resonance check
# ---------------------------------------------------------------------------

@dataclass
class NonResonanceEntry:
    k: int
    label: str
    root: float
    value: float
    nonzero: bool

    def to_dict(self):
        return {"k": self.k, "label": self.label, "root": self.root,
                "value": self.value, "nonzero": self.nonzero}


def bifurcation_check(params: ProblemParams, k_max: int) -> list:
    """lambda_k + x pm'(x) != 0 for every spherical-harmonic mode k and root x.

    Only meaningful in the two-root regime (supercritical, M > m_star); the
    constant solutions never bifurcate, so every entry should be nonzero.
    """
    _require_scale_invariant(params)
    N, p, M = params.N, params.p, params.M
    if N < 3.0 or p <= N / (N - 2.0) + THRESHOLD_TOL:
        raise RegimeError("bifurcation check requires the supercritical regime p > N/(N-2)")
    cm = critical_masses(params)
    if M <= cm.m_star:
        raise RegimeError(f"bifurcation check requires M > m_star = {cm.m_star}")
    sols = find_constant_solutions(params)
    if len(sols.roots) != 2:
        raise RegimeError("bifurcation check requires exactly two constant solutions")

    out = []
    for k in range(1, int(k_max) + 1):
        lam = k * (N - 2.0 + k)
        for x, label in zip(sols.roots, sols.labels):
            val = lam + x * eval_pm_prime(x, params)
            out.append(NonResonanceEntry(k=k, label=label, root=x, value=val,
                                         nonzero=abs(val) > 1e-8 * max(1.0, lam)))
    return out
