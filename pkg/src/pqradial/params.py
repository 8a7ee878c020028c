"""Problem parameters, derived exponents and critical thresholds.

The equation under study is

    -u'' - (N-1)/r u' + u^p - M |u'|^q = 0,   p > 1, q > 1,

and everything downstream is driven by a small set of derived exponents
(alpha, beta, gamma, ...) and by the critical gradient coefficients
m_star / m_tilde of the scale-invariant case q = 2p/(p+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import RegimeError

# Absolute tolerance for threshold comparisons (q vs 2p/(p+1), p vs N/(N-2), ...).
# Values inside the tolerance are treated as the equality case, which has its
# own structure (sigma = 0, kappa = 0, ...).
THRESHOLD_TOL = 1e-12


@dataclass(frozen=True)
class ProblemParams:
    """One instance of the equation: dimension N, exponents p, q, coefficient M."""

    N: float
    p: float
    q: float
    M: float = 0.0

    def __post_init__(self):
        if not (self.N >= 1.0):
            raise RegimeError(f"dimension N must be >= 1, got {self.N}")
        if not (self.p > 1.0):
            raise RegimeError(f"absorption exponent p must be > 1, got {self.p}")
        if not (self.q > 1.0):
            raise RegimeError(f"gradient exponent q must be > 1, got {self.q}")

    def to_dict(self):
        return {"N": self.N, "p": self.p, "q": self.q, "M": self.M}

    @staticmethod
    def from_dict(d):
        return ProblemParams(N=d["N"], p=d["p"], q=d["q"], M=d.get("M", 0.0))


@dataclass(frozen=True)
class ExponentSet:
    """Derived exponents.  gamma and theta are None when q == p."""

    alpha: float          # 2/(p-1)
    beta: float           # (2-q)/(q-1)
    gamma: float | None   # q/(p-q)
    kappa: float          # ((N-1)q - N)/(q-1)
    theta: float | None   # ((N-1)q - (N-2)p)/(p-q) == gamma + 2 - N
    sigma: float          # (p+1)q - 2p
    K: float              # N - 2 - alpha
    L: float              # K - alpha
    ell: float            # alpha * K

    def to_dict(self):
        return {
            "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma,
            "kappa": self.kappa, "theta": self.theta, "sigma": self.sigma,
            "K": self.K, "L": self.L, "ell": self.ell,
        }


def scale_invariant_q(p: float) -> float:
    """The exponent q that makes the equation invariant under u -> l^alpha u(l x)."""
    return 2.0 * p / (p + 1.0)


def compute_exponents(params: ProblemParams) -> ExponentSet:
    N, p, q = params.N, params.p, params.q
    alpha = 2.0 / (p - 1.0)
    beta = (2.0 - q) / (q - 1.0)
    kappa = ((N - 1.0) * q - N) / (q - 1.0)
    sigma = (p + 1.0) * q - 2.0 * p
    K = N - 2.0 - alpha
    if abs(q - p) <= THRESHOLD_TOL:
        gamma = None
        theta = None
    else:
        gamma = q / (p - q)
        theta = gamma + 2.0 - N
    return ExponentSet(alpha=alpha, beta=beta, gamma=gamma, kappa=kappa,
                       theta=theta, sigma=sigma, K=K, L=K - alpha, ell=alpha * K)


@dataclass(frozen=True)
class CriticalMasses:
    m_star: float
    m_tilde: float
    theta_N: float

    def to_dict(self):
        return {"m_star": self.m_star, "m_tilde": self.m_tilde, "theta_N": self.theta_N}


def dimension_ratio(params: ProblemParams) -> float:
    """theta_N = (N-1)/(N-2) * ((N-1)/N)^{N/(2(N-1))}, the lower bound of m_tilde/m_star."""
    N = params.N
    if N < 3.0 - THRESHOLD_TOL:
        raise RegimeError("theta_N is defined for N >= 3")
    return (N - 1.0) / (N - 2.0) * ((N - 1.0) / N) ** (N / (2.0 * (N - 1.0)))


def critical_masses(params: ProblemParams) -> CriticalMasses:
    """Thresholds of the gradient coefficient in the supercritical scale-invariant case.

    m_star separates existence/non-existence of constant reduced solutions and
    m_tilde bounds the range where they are the only positive ones.  Requires
    N >= 3 and p >= N/(N-2).
    """
    N, p = params.N, params.p
    if N < 3.0 - THRESHOLD_TOL:
        raise RegimeError("critical masses require N >= 3")
    if p < N / (N - 2.0) - THRESHOLD_TOL:
        raise RegimeError("critical masses require p >= N/(N-2)")
    m_star = (p + 1.0) * (max((N - 2.0) * p - N, 0.0) / (2.0 * p)) ** (p / (p + 1.0))
    m_tilde = ((p + 1.0) ** 2 / 2.0) * (
        ((N - 2.0) * p * p - (N + 2.0)) / (4.0 * p * p)) ** (p / (p + 1.0))
    th = dimension_ratio(params)
    if p > N / (N - 2.0) + THRESHOLD_TOL:
        # ordering guaranteed in the strictly supercritical range
        assert m_tilde > th * m_star > m_star > 0.0, \
            f"mass ordering violated: m_star={m_star}, m_tilde={m_tilde}, theta_N={th}"
    return CriticalMasses(m_star=m_star, m_tilde=m_tilde, theta_N=th)


def compare(value: float, threshold: float, tol: float = THRESHOLD_TOL) -> str:
    """Three-way comparison with absolute tolerance: 'below' | 'equal' | 'above'."""
    if abs(value - threshold) <= tol:
        return "equal"
    return "below" if value < threshold else "above"
