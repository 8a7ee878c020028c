"""Vanishing curves, invariant regions, and sampled planar vector fields.

The planar field H(x, y) = (alpha x - y, -K y - x^p + M |y|^{2p/(p+1)})
vanishes componentwise on the ray y = alpha x and on the curves x^p = Phi(y)
(upper half) / x^p = Psi(y) (lower half).  The open regions cut out by those
curves carry the standard tags:

    (A) H1 < 0, H2 > 0 in Q1          (D) H1 > 0, H2 > 0 in Q1
    (B) H1 < 0, H2 < 0, right part    (F) H1 < 0, H2 < 0, left part
    (C) H1 > 0, H2 < 0 in Q1, plus the outward part of Q4
    (E) the inward part of Q4
    (B~) the connected B/F band when no equilibrium splits it (case IV)

Membership is decided by the defining field-sign inequalities (not by
point-in-polygon tests), so labels are exact up to the comparison tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charts import chart_rhs
from .equilibria import find_constant_solutions
from .errors import RegimeError
from .params import (ProblemParams, THRESHOLD_TOL, compute_exponents,
                     critical_masses, scale_invariant_q)

BOUNDARY_TOL = 1e-12
INTERSECT_TOL = 1e-9


def portrait_case(params: ProblemParams) -> str:
    """I: K<=0, M>0; II: K>0, M>m*; III: K>0, M=m*; IV: K>0, 0<M<m*."""
    e = compute_exponents(params)
    if params.M <= 0.0:
        raise RegimeError("the portrait cases are defined for M > 0")
    if e.K <= THRESHOLD_TOL:
        return "I"
    cm = critical_masses(params)
    if abs(params.M - cm.m_star) <= THRESHOLD_TOL * max(1.0, cm.m_star):
        return "III"
    return "II" if params.M > cm.m_star else "IV"


@dataclass
class RegionMap:
    case: str
    curves: dict            # name -> list of (x, y)
    equilibria: list        # (x, y) pairs on the ray, origin excluded
    params: ProblemParams
    bbox: tuple

    def region_label(self, point) -> str:
        return region_label(point, self)

    def to_dict(self):
        return {"case": self.case,
                "curves": {k: [list(p) for p in v] for k, v in self.curves.items()},
                "equilibria": [list(p) for p in self.equilibria],
                "params": self.params.to_dict(), "bbox": list(self.bbox)}


def _phi(y, params):
    e = compute_exponents(params)
    return params.M * y ** (2.0 * params.p / (params.p + 1.0)) - e.K * y


def _psi(y, params):
    # y < 0 branch
    e = compute_exponents(params)
    return params.M * abs(y) ** (2.0 * params.p / (params.p + 1.0)) - e.K * y


def vanishing_curves(params: ProblemParams, bbox, n_points: int = 400) -> RegionMap:
    """Sample the ray and the two vanishing curves of H inside a bounding box.

    bbox = (xmin, xmax, ymin, ymax) must intersect the open half-plane x > 0.
    Curve points are taken on a log-spaced grid of y values.
    """
    if abs(params.q - scale_invariant_q(params.p)) > 1e-9:
        raise RegimeError("portraits are defined for q = 2p/(p+1)")
    xmin, xmax, ymin, ymax = bbox
    if xmax <= 0.0 or xmax <= xmin or ymax <= ymin:
        raise RegimeError("bounding box does not intersect the half-plane x > 0")
    e = compute_exponents(params)
    case = portrait_case(params)

    curves = {"L": [], "C1": [], "C4": []}
    x_hi = xmax
    x_lo = max(xmin, 1e-12 * x_hi)
    for x in np.geomspace(x_lo, x_hi, n_points):
        y = e.alpha * x
        if ymin <= y <= ymax:
            curves["L"].append((float(x), float(y)))

    if ymax > 0.0:
        y_lo = max(ymin, 1e-12 * ymax)
        for y in np.geomspace(y_lo, ymax, n_points):
            v = _phi(y, params)
            if v <= 0.0:
                continue
            x = v ** (1.0 / params.p)
            if xmin <= x <= xmax:
                curves["C1"].append((float(x), float(y)))
    if ymin < 0.0:
        y_hi = min(ymax, -1e-12 * abs(ymin))
        for y in -np.geomspace(abs(y_hi), abs(ymin), n_points):
            v = _psi(y, params)
            if v <= 0.0:
                continue
            x = v ** (1.0 / params.p)
            if xmin <= x <= xmax:
                curves["C4"].append((float(x), float(y)))

    eqs = [(x, e.alpha * x) for x in find_constant_solutions(params).roots]
    return RegionMap(case=case, curves=curves, equilibria=eqs, params=params,
                     bbox=tuple(bbox))


def region_label(point, rmap: RegionMap) -> str:
    """Exactly one region tag (or a boundary tag 'L'/'C1'/'C4') per point."""
    x, y = float(point[0]), float(point[1])
    if x <= 0.0:
        raise RegimeError("region labels are defined on the open half-plane x > 0")
    params = rmap.params
    H1, H2 = chart_rhs("planar_W4", 0.0, (x, y), params)
    scale = max(1.0, abs(x), abs(y)) ** max(params.p, 2.0)
    if abs(H1) <= BOUNDARY_TOL * scale:
        return "L"
    if abs(H2) <= BOUNDARY_TOL * scale:
        return "C1" if y > 0.0 else ("C4" if y < 0.0 else "C4")

    if y <= 0.0:
        return "C" if H2 < 0.0 else "E"
    if H1 < 0.0 and H2 > 0.0:
        return "A"
    if H1 > 0.0 and H2 > 0.0:
        return "D"
    if H1 > 0.0 and H2 < 0.0:
        return "C"
    # H1 < 0, H2 < 0: the band between the ray and the upper curve
    if rmap.case == "IV":
        return "B~"
    if rmap.case == "I":
        return "B"
    xs = sorted(p[0] for p in rmap.equilibria)
    if rmap.case == "III":
        return "F" if x <= xs[0] else "B"
    return "F" if x <= xs[0] else ("B" if x >= xs[-1] else "D")


def ray_curve_intersections(params: ProblemParams, x_hi=None) -> list:
    """Intersections of C1 with the ray y = alpha x, located by bisection.

    These are exactly the nontrivial equilibria; the points are found on the
    raw field component H2 restricted to the ray, independently of the root
    machinery, so they serve as a cross-check of the root catalog.  A
    tangential contact (the borderline mass) is located by bisecting a
    centered-difference derivative of the section.
    """
    e = compute_exponents(params)
    p = params.p

    def g(x):
        # H2 on the ray; sign changes exactly at equilibria
        return chart_rhs("planar_W4", 0.0, (x, e.alpha * x), params)[1]

    def gscale(x):
        c1 = abs(params.M) * e.alpha ** (2.0 * p / (p + 1.0))
        return x * (x ** (p - 1.0) + c1 * x ** ((p - 1.0) / (p + 1.0)) + abs(e.ell) + 1e-300)

    if x_hi is None:
        # beyond the dominance radius the absorption term wins and g < 0 for good
        c1 = abs(params.M) * e.alpha ** (2.0 * p / (p + 1.0))
        x_hi = 1.0
        while x_hi ** (p - 1.0) <= 2.0 * (c1 * x_hi ** ((p - 1.0) / (p + 1.0)) + abs(e.ell)) \
                and x_hi < 1e80:
            x_hi *= 2.0
        x_hi *= 2.0

    xs = np.geomspace(1e-8, x_hi, 4000)
    vals = [g(x) for x in xs]
    hits = []
    for i in range(len(xs) - 1):
        if vals[i] == 0.0:
            hits.append(xs[i])
        elif vals[i] * vals[i + 1] < 0.0:
            lo, hi = xs[i], xs[i + 1]
            flo = vals[i]
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fm = g(mid)
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            hits.append(0.5 * (lo + hi))

    if not hits:
        # possible tangential contact: refine the interior maximum of g
        i = int(np.argmax([v / gscale(x) for v, x in zip(vals, xs)]))
        if 0 < i < len(xs) - 1 and vals[i] > -1e-6 * gscale(xs[i]):
            x = xs[i]
            h = 1e-7 * x

            def dg(x):
                return (g(x + h) - g(x - h)) / (2.0 * h)
            lo, hi = xs[i - 1], xs[i + 1]
            if dg(lo) > 0.0 > dg(hi):
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    if dg(mid) > 0.0:
                        lo = mid
                    else:
                        hi = mid
                xstar = 0.5 * (lo + hi)
                if abs(g(xstar)) <= 1e-8 * gscale(xstar):
                    hits.append(xstar)
    return [(float(x), float(e.alpha * x)) for x in hits]


@dataclass
class FieldGrid:
    rmap: RegionMap
    points: list      # (x, y)
    H: list           # (H1, H2)
    labels: list

    def to_rows(self):
        for (x, y), (h1, h2), tag in zip(self.points, self.H, self.labels):
            yield (x, y, h1, h2, tag)

    def to_dict(self):
        return {"map": self.rmap.to_dict(),
                "points": [list(p) for p in self.points],
                "H": [list(h) for h in self.H], "labels": list(self.labels)}


def field_grid(params: ProblemParams, bbox, resolution=40,
               n_curve_points=400) -> FieldGrid:
    """The field H sampled on a regular grid, with curves and region tags."""
    rmap = vanishing_curves(params, bbox, n_curve_points)
    xmin, xmax, ymin, ymax = bbox
    pts, H, labels = [], [], []
    for x in np.linspace(xmin, xmax, resolution):
        if x <= 0.0:
            continue
        for y in np.linspace(ymin, ymax, resolution):
            h = chart_rhs("planar_W4", 0.0, (x, y), params)
            pts.append((float(x), float(y)))
            H.append((float(h[0]), float(h[1])))
            labels.append(region_label((x, y), rmap))
    return FieldGrid(rmap=rmap, points=pts, H=H, labels=labels)
