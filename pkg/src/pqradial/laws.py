"""Catalog of admissible end behaviours of positive radial profiles.

Template semantics (all at the stated end, r -> 0 or r -> infinity):

    power(a):          u ~ c r^{-a}
    power_log(a, b):   u ~ c r^{-a} |ln r|^{-b}
    log_only:          u ~ c |ln r|
    loglog:            u ~ c / ln|ln r|

``constant`` is the pinned amplitude when the theory fixes it, or None when
a one-parameter family is admissible.  Law names describe the governing
mechanism, not a literature reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .equilibria import (eikonal_constant, emden_constant, find_constant_solutions,
                         riccati_constants)
from .errors import RegimeError
from .params import (ProblemParams, THRESHOLD_TOL, compare, compute_exponents,
                     critical_masses, scale_invariant_q)


@dataclass(frozen=True)
class AsymptoticLaw:
    end: str                  # "zero" | "infinity"
    template: str             # "power" | "power_log" | "log_only" | "loglog"
    name: str
    a: float | None = None
    b: float | None = None
    constant: float | None = None

    def to_dict(self):
        return {"end": self.end, "template": self.template, "name": self.name,
                "a": self.a, "b": self.b, "constant": self.constant}

    @staticmethod
    def from_dict(d):
        return AsymptoticLaw(end=d["end"], template=d["template"], name=d["name"],
                             a=d.get("a"), b=d.get("b"), constant=d.get("constant"))


def serrin_log_constant(N: float, M: float) -> float:
    """Amplitude of the log-corrected Newtonian law at q = N/(N-1):
    r^{N-2} |ln r|^{N-1} u -> ((N-1)/M)^{N-1} / (N-2)."""
    return ((N - 1.0) / M) ** (N - 1.0) / (N - 2.0)


def emden_critical_infinity_constant(N: float) -> float:
    """(ln r)^{(N-2)/2} r^{N-2} u -> ((N-2)/sqrt(2))^{N-2} for the critical
    pure-absorption decay."""
    return ((N - 2.0) / math.sqrt(2.0)) ** (N - 2.0)


def _newtonian(end, N):
    if N > 2.0 + THRESHOLD_TOL:
        return AsymptoticLaw(end=end, template="power", name="newtonian", a=N - 2.0)
    return AsymptoticLaw(end=end, template="log_only", name="log_free")


def laws_near_zero(params: ProblemParams) -> list:
    """Admissible behaviours of unbounded positive solutions as r -> 0."""
    N, p, q, M = params.N, params.p, params.q, params.M
    e = compute_exponents(params)
    out = []
    qpos = compare(q, scale_invariant_q(p))
    serrin = compare(q, N / (N - 1.0)) if N > 1.0 + THRESHOLD_TOL else "below"

    if qpos == "equal":
        out.extend(_scale_invariant_zero(params, e))
        return out

    if qpos == "above" and q < p - THRESHOLD_TOL and M > 0.0:
        # gradient-dominated singularities
        out.append(AsymptoticLaw(end="zero", template="power", name="eikonal_power",
                                 a=e.gamma, constant=eikonal_constant(params)))
        if serrin == "above" and q < 2.0 - THRESHOLD_TOL:
            xi, _ = riccati_constants(params)
            out.append(AsymptoticLaw(end="zero", template="power",
                                     name="riccati_power", a=e.beta, constant=xi))
        elif abs(q - 2.0) <= THRESHOLD_TOL:
            if N > 2.0 + THRESHOLD_TOL:
                out.append(AsymptoticLaw(end="zero", template="log_only",
                                         name="gradient_log", constant=(N - 2.0) / M))
            else:
                out.append(AsymptoticLaw(end="zero", template="loglog",
                                         name="gradient_loglog", constant=1.0 / M))
        elif serrin == "equal":
            if N > 2.0 + THRESHOLD_TOL:
                out.append(AsymptoticLaw(end="zero", template="power_log",
                                         name="serrin_log", a=N - 2.0, b=N - 1.0,
                                         constant=serrin_log_constant(N, M)))
            else:
                out.append(AsymptoticLaw(end="zero", template="loglog",
                                         name="gradient_loglog", constant=1.0 / M))
        elif serrin == "below" and N > 1.0 + THRESHOLD_TOL:
            out.append(_newtonian("zero", N))
        return out

    if qpos == "below":
        # absorption-dominated singularities; removable when p >= N/(N-2)
        if N > 2.0 + THRESHOLD_TOL and compare(p, N / (N - 2.0)) != "below":
            return out
        out.append(AsymptoticLaw(end="zero", template="power", name="emden_power",
                                 a=e.alpha, constant=emden_constant(params)))
        if N > 1.0 + THRESHOLD_TOL:
            out.append(_newtonian("zero", N))
        return out

    return out


def laws_near_infinity(params: ProblemParams) -> list:
    """Admissible behaviours of positive solutions on exterior domains."""
    N, p, q, M = params.N, params.p, params.q, params.M
    e = compute_exponents(params)
    out = []
    qpos = compare(q, scale_invariant_q(p))
    serrin = compare(q, N / (N - 1.0)) if N > 1.0 + THRESHOLD_TOL else "below"
    pcrit = "subcritical" if N <= 2.0 + THRESHOLD_TOL else compare(p, N / (N - 2.0))

    if qpos == "equal":
        return _scale_invariant_infinity(params, e)

    if qpos == "above" and q < p - THRESHOLD_TOL and M > 0.0:
        if pcrit in ("subcritical", "below"):
            out.append(AsymptoticLaw(end="infinity", template="power",
                                     name="emden_power", a=e.alpha,
                                     constant=emden_constant(params)))
        elif pcrit == "above":
            out.append(_newtonian("infinity", N))
        else:
            out.append(AsymptoticLaw(end="infinity", template="power_log",
                                     name="emden_critical_log", a=N - 2.0,
                                     b=(N - 2.0) / 2.0,
                                     constant=emden_critical_infinity_constant(N)))
        return out

    if qpos == "below" and M > 0.0:
        out.append(AsymptoticLaw(end="infinity", template="power",
                                 name="eikonal_power", a=e.gamma,
                                 constant=eikonal_constant(params)))
        if serrin == "above":
            xi, _ = riccati_constants(params)
            out.append(AsymptoticLaw(end="infinity", template="power",
                                     name="riccati_power", a=e.beta, constant=xi))
            out.append(_newtonian("infinity", N))
        return out

    return out


def _scale_invariant_zero(params, e):
    N, p, M = params.N, params.p, params.M
    out = []
    roots = find_constant_solutions(params)
    for x, label in zip(roots.roots, roots.labels):
        out.append(AsymptoticLaw(end="zero", template="power",
                                 name=f"selfsimilar_{label}", a=e.alpha, constant=x))
    pcrit = "subcritical" if N <= 2.0 + THRESHOLD_TOL else compare(p, N / (N - 2.0))
    if pcrit in ("subcritical", "below"):
        out.append(_newtonian("zero", N))
    elif pcrit == "equal":
        # central-manifold profile: the log-corrected Newtonian law
        if M > 0.0 and N > 2.0 + THRESHOLD_TOL:
            out.append(AsymptoticLaw(end="zero", template="power_log",
                                     name="serrin_log", a=N - 2.0, b=N - 1.0,
                                     constant=serrin_log_constant(N, M)))
    return out


def _scale_invariant_infinity(params, e):
    N, p, M = params.N, params.p, params.M
    out = []
    roots = find_constant_solutions(params)
    for x, label in zip(roots.roots, roots.labels):
        out.append(AsymptoticLaw(end="infinity", template="power",
                                 name=f"selfsimilar_{label}", a=e.alpha, constant=x))
    pcrit = "subcritical" if N <= 2.0 + THRESHOLD_TOL else compare(p, N / (N - 2.0))
    if pcrit == "above":
        out.append(_newtonian("infinity", N))
    elif pcrit == "equal":
        # either the self-similar limit (already listed) or the log-corrected decay
        out.append(AsymptoticLaw(end="infinity", template="power_log",
                                 name="emden_critical_log", a=N - 2.0,
                                 b=(N - 2.0) / 2.0,
                                 constant=emden_critical_infinity_constant(N)))
    return out
