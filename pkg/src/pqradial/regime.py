"""Regime classification: one total report per parameter quadruple."""

from __future__ import annotations

from dataclasses import dataclass, field

from .laws import AsymptoticLaw, laws_near_infinity, laws_near_zero
from .params import (ProblemParams, THRESHOLD_TOL, compare, compute_exponents,
                     critical_masses, scale_invariant_q)


@dataclass
class RegimeReport:
    params: ProblemParams
    scale_invariant: bool
    p_vs_critical: str        # subcritical | critical | supercritical
    q_vs_serrin: str          # below | equal | above  (vs N/(N-1))
    q_vs_scale: str           # below | equal | above  (vs 2p/(p+1))
    q_vs_harmonic: str        # below | equal | above  (vs (N-2)p/(N-1); sign of theta)
    mass_position: str | None
    laws_at_zero: list = field(default_factory=list)
    laws_at_infinity: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "scale_invariant": self.scale_invariant,
            "p_vs_critical": self.p_vs_critical,
            "q_vs_serrin": self.q_vs_serrin,
            "q_vs_scale": self.q_vs_scale,
            "q_vs_harmonic": self.q_vs_harmonic,
            "mass_position": self.mass_position,
            "laws_at_zero": [l.to_dict() for l in self.laws_at_zero],
            "laws_at_infinity": [l.to_dict() for l in self.laws_at_infinity],
            "data": self.data,
        }

    @staticmethod
    def from_dict(d):
        return RegimeReport(
            params=ProblemParams.from_dict(d["params"]),
            scale_invariant=d["scale_invariant"],
            p_vs_critical=d["p_vs_critical"], q_vs_serrin=d["q_vs_serrin"],
            q_vs_scale=d["q_vs_scale"], q_vs_harmonic=d["q_vs_harmonic"],
            mass_position=d["mass_position"],
            laws_at_zero=[AsymptoticLaw.from_dict(x) for x in d["laws_at_zero"]],
            laws_at_infinity=[AsymptoticLaw.from_dict(x) for x in d["laws_at_infinity"]],
            data=d.get("data", {}))


def classify_regime(params: ProblemParams) -> RegimeReport:
    """Route a parameter quadruple to its structural regime.

    Threshold comparisons use an absolute tolerance so that the equality
    cases (sigma = 0, kappa = 0, theta = 0, critical p) are recognized as
    such.  The mass position against (m_star, m_tilde) is populated only in
    the scale-invariant supercritical case with M > 0.
    """
    N, p, q, M = params.N, params.p, params.q, params.M
    e = compute_exponents(params)

    q_vs_scale = compare(q, scale_invariant_q(p))
    if N <= 2.0 + THRESHOLD_TOL:
        p_vs = "subcritical"
    else:
        c = compare(p, N / (N - 2.0))
        p_vs = {"below": "subcritical", "equal": "critical", "above": "supercritical"}[c]
    q_vs_serrin = compare(q, N / (N - 1.0)) if N > 1.0 + THRESHOLD_TOL else "below"
    if N > 1.0 + THRESHOLD_TOL:
        q_vs_harmonic = compare(q, (N - 2.0) * p / (N - 1.0))
    else:
        q_vs_harmonic = "above"

    mass_position = None
    data = {"exponents": e.to_dict()}
    if q_vs_scale == "equal" and p_vs == "supercritical" and M > 0.0:
        cm = critical_masses(params)
        data["m_star"], data["m_tilde"] = cm.m_star, cm.m_tilde
        if abs(M - cm.m_star) <= THRESHOLD_TOL:
            mass_position = "equal_m_star"
        elif M < cm.m_star:
            mass_position = "below_m_star"
        elif abs(M - cm.m_tilde) <= THRESHOLD_TOL:
            mass_position = "equal_m_tilde"
        elif M < cm.m_tilde:
            mass_position = "between_m_star_m_tilde"
        else:
            mass_position = "above_m_tilde"

    return RegimeReport(
        params=params, scale_invariant=(q_vs_scale == "equal"),
        p_vs_critical=p_vs, q_vs_serrin=q_vs_serrin, q_vs_scale=q_vs_scale,
        q_vs_harmonic=q_vs_harmonic, mass_position=mass_position,
        laws_at_zero=laws_near_zero(params),
        laws_at_infinity=laws_near_infinity(params), data=data)
