"""Adaptive embedded Runge-Kutta integration with event detection.

A Dormand-Prince 5(4) pair with FSAL and a PI step controller, written for
low-dimensional systems (the charts are 2- or 3-dimensional).  Events are
located by sign-change bracketing over accepted steps followed by hybrid
secant/bisection refinement on the cubic Hermite interpolant.

Blow-up is declared when the sup-norm exceeds a threshold and keeps growing
over consecutive accepted steps (the escape time is then extrapolated from a
power-law fit); convergence to an equilibrium requires the state to stay
inside a small ball around it for a full time window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NumericalError
from .params import ProblemParams

# Dormand-Prince 5(4) tableau
_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_B = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0)
_E = (71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0,
      22.0 / 525.0, -1.0 / 40.0)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
BLOWUP_THRESHOLD = 1e8
BLOWUP_RUN = 3           # consecutive growing accepted steps past the threshold
CONV_TOL = 1e-9
CONV_WINDOW = 5.0
EVENT_TTOL = 1e-10
MAX_STEPS = 2_000_000


@dataclass
class Event:
    kind: str            # reached_t_end | converged_to_equilibrium | blow_up |
                         # x_axis_crossing | left_domain | <custom event name>
    t: float
    state: tuple
    data: dict = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind, "t": self.t, "state": list(self.state),
                "data": self.data}

    @staticmethod
    def from_dict(d):
        return Event(kind=d["kind"], t=d["t"], state=tuple(d["state"]),
                     data=d.get("data", {}))


@dataclass
class EventSpec:
    """Terminating (or recorded) zero crossing of g(t, state)."""
    name: str
    g: callable
    terminal: bool = True
    direction: int = 0   # 0: any crossing; +1 rising only; -1 falling only


@dataclass
class Trajectory:
    """Time-stamped state series in a named chart; times are increasing."""
    chart: str
    params: ProblemParams | None
    times: list
    states: list
    event: Event
    meta: dict = field(default_factory=dict)

    @property
    def direction(self):
        return self.meta.get("direction", 1)

    def to_dict(self):
        return {
            "chart": self.chart,
            "params": self.params.to_dict() if self.params is not None else None,
            "times": list(self.times),
            "states": [list(s) for s in self.states],
            "event": self.event.to_dict(),
            "meta": self.meta,
        }

    @staticmethod
    def from_dict(d):
        params = ProblemParams.from_dict(d["params"]) if d.get("params") else None
        return Trajectory(chart=d["chart"], params=params, times=list(d["times"]),
                          states=[tuple(s) for s in d["states"]],
                          event=Event.from_dict(d["event"]), meta=d.get("meta", {}))


def _err_norm(err, y0, y1, rtol, atol):
    s = 0.0
    for e, a, b in zip(err, y0, y1):
        sc = atol + rtol * max(abs(a), abs(b))
        s += (e / sc) ** 2
    return math.sqrt(s / len(err))


def _hermite(theta, t0, y0, f0, t1, y1, f1):
    h = t1 - t0
    h00 = (1.0 + 2.0 * theta) * (1.0 - theta) ** 2
    h10 = theta * (1.0 - theta) ** 2
    h01 = theta * theta * (3.0 - 2.0 * theta)
    h11 = theta * theta * (theta - 1.0)
    return tuple(h00 * a + h10 * h * fa + h01 * b + h11 * h * fb
                 for a, fa, b, fb in zip(y0, f0, y1, f1))


def _refine_crossing(g, t0, y0, f0, t1, y1, f1, ttol):
    """Zero of theta -> g(hermite(theta)) on [0, 1] by secant with bisection fallback."""
    lo, hi = 0.0, 1.0
    glo = g(t0, y0)
    ghi = g(t1, y1)
    if glo == 0.0:
        return t0, y0
    a, b, ga, gb = lo, hi, glo, ghi
    for _ in range(100):
        if gb != ga:
            m = b - gb * (b - a) / (gb - ga)
        else:
            m = 0.5 * (lo + hi)
        if not (lo < m < hi):
            m = 0.5 * (lo + hi)
        tm = t0 + m * (t1 - t0)
        ym = _hermite(m, t0, y0, f0, t1, y1, f1)
        gm = g(tm, ym)
        if gm == 0.0 or abs(hi - lo) * abs(t1 - t0) <= ttol:
            return tm, ym
        if glo * gm < 0.0:
            hi = m
        else:
            lo, glo = m, gm
        a, b, ga, gb = b, m, gb, gm
    tm = t0 + 0.5 * (lo + hi) * (t1 - t0)
    return tm, _hermite(0.5 * (lo + hi), t0, y0, f0, t1, y1, f1)


def _extrapolate_blowup(hist):
    """Escape time from the last three (t, log norm) samples, assuming a
    power-law escape |y| ~ C (t* - t)^-nu; falls back to the last time."""
    (t0, n0), (t1, n1), (t2, n2) = hist[-3:]
    try:
        # solve for t*: collinearity of log(t*-t_i) vs log n_i
        def mismatch(ts):
            x0, x1, x2 = (math.log(ts - t0), math.log(ts - t1), math.log(ts - t2))
            return (x1 - x0) * (n2 - n1) - (x2 - x1) * (n1 - n0)
        span = abs(t2 - t1) + 1e-300
        lo = t2 + 1e-6 * span
        hi = t2 + 1e6 * span
        flo, fhi = mismatch(lo), mismatch(hi)
        if flo * fhi > 0:
            return t2
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            fm = mismatch(mid)
            if flo * fm <= 0:
                hi = mid
            else:
                lo, flo = mid, fm
        return 0.5 * (lo + hi)
    except (ValueError, OverflowError, ZeroDivisionError):
        return t2


def integrate(f, y0, t0, t1, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
              max_step=math.inf, first_step=None, events=(),
              equilibria=(), conv_tol=CONV_TOL, conv_window=CONV_WINDOW,
              blowup_threshold=BLOWUP_THRESHOLD, domain_guard=None,
              max_steps=MAX_STEPS, chart="generic", params=None,
              meta=None) -> Trajectory:
    """Integrate y' = f(t, y) from t0 toward t1 (t1 may be +-inf).

    Returns a Trajectory whose times are increasing regardless of the
    direction of integration.  Step-size underflow raises NumericalError
    carrying the partial trajectory.
    """
    y = tuple(float(v) for v in y0)
    t = float(t0)
    direction = 1.0 if t1 > t0 else -1.0
    dim = len(y)

    times = [t]
    states = [y]
    fy = f(t, y)

    def finish(event):
        if direction < 0:
            times.reverse()
            states.reverse()
        m = dict(meta or {})
        m.setdefault("direction", int(direction))
        m["rtol"] = rtol
        m["atol"] = atol
        return Trajectory(chart=chart, params=params, times=times, states=states,
                          event=event, meta=m)

    # initial step heuristic
    if first_step is not None:
        h = abs(first_step)
    else:
        fn = max(max(abs(v) for v in fy), 1e-30)
        yn = max(max(abs(v) for v in y), atol)
        h = min(1e-2 * yn / fn, 0.1, max_step)
        h = max(h, 1e-12)
    h *= direction

    gvals = [spec.g(t, y) for spec in events]
    norm_hist = []
    conv_since = [None] * len(equilibria)
    err_prev = 1.0
    nsteps = 0

    while True:
        nsteps += 1
        if nsteps > max_steps:
            raise NumericalError(f"step budget exceeded ({max_steps})",
                                 partial=finish(Event("reached_t_end", t, y,
                                                      {"truncated": True})))
        if math.isfinite(t1) and (t + h - t1) * direction > 0.0:
            h = t1 - t
        if abs(h) < 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0):
            raise NumericalError(f"step size underflow at t={t}", partial=finish(
                Event("reached_t_end", t, y, {"underflow": True})))

        # one DP54 step with FSAL
        k = [fy]
        failed = False
        for i in range(1, 7):
            ai = _A[i]
            yi = tuple(y[j] + h * sum(ai[m] * k[m][j] for m in range(i))
                       for j in range(dim))
            ki = f(t + _C[i] * h, yi)
            if any(math.isnan(v) or math.isinf(v) for v in ki):
                failed = True
                break
            k.append(ki)
        if failed:
            h *= 0.25
            continue
        ynew = tuple(y[j] + h * sum(_B[m] * k[m][j] for m in range(7))
                     for j in range(dim))
        err = tuple(h * sum(_E[m] * k[m][j] for m in range(7)) for j in range(dim))
        enorm = _err_norm(err, y, ynew, rtol, atol)

        if enorm > 1.0 or any(math.isnan(v) for v in ynew):
            fac = max(0.2, 0.9 * (enorm + 1e-300) ** -0.2)
            h *= min(fac, 1.0)
            err_prev = max(enorm, 1e-4)
            continue

        tnew = t + h
        fnew = k[6]  # FSAL: last stage is f(tnew, ynew)

        if domain_guard is not None and not domain_guard(tnew, ynew):
            return finish(Event("left_domain", t, y, {"refused_t": tnew}))

        # sign-change events over the accepted step
        hit = None
        for idx, spec in enumerate(events):
            gnew = spec.g(tnew, ynew)
            gold = gvals[idx]
            crossed = gold * gnew < 0.0 or (gold != 0.0 and gnew == 0.0)
            if crossed and spec.direction != 0:
                rising = gnew > gold
                if (spec.direction > 0) != rising:
                    crossed = False
            if crossed:
                te, ye = _refine_crossing(spec.g, t, y, k[0], tnew, ynew, fnew,
                                          EVENT_TTOL)
                if hit is None or (te - hit[0]) * direction < 0.0:
                    hit = (te, ye, spec)
            gvals[idx] = gnew
        if hit is not None and hit[2].terminal:
            te, ye, spec = hit
            times.append(te)
            states.append(ye)
            return finish(Event(spec.name, te, ye, {}))

        times.append(tnew)
        states.append(ynew)
        t, y, fy = tnew, ynew, fnew

        # blow-up bookkeeping
        nrm = max(abs(v) for v in y)
        if nrm > blowup_threshold:
            norm_hist.append((t, math.log(nrm)))
            if len(norm_hist) >= BLOWUP_RUN and all(
                    norm_hist[i][1] > norm_hist[i - 1][1]
                    for i in range(len(norm_hist) - BLOWUP_RUN + 1, len(norm_hist))):
                tstar = _extrapolate_blowup(norm_hist)
                return finish(Event("blow_up", t, y, {"t_star": tstar}))
        else:
            norm_hist.clear()

        # convergence bookkeeping
        for idx, pt in enumerate(equilibria):
            d = math.sqrt(sum((a - b) ** 2 for a, b in zip(y, pt)))
            if d < conv_tol * max(1.0, max(abs(v) for v in pt)):
                if conv_since[idx] is None:
                    conv_since[idx] = t
                elif abs(t - conv_since[idx]) >= conv_window:
                    return finish(Event("converged_to_equilibrium", t, y,
                                        {"point": list(pt), "distance": d,
                                         "entered_at": conv_since[idx]}))
            else:
                conv_since[idx] = None

        if math.isfinite(t1) and abs(t - t1) <= 1e-14 * max(1.0, abs(t1)):
            return finish(Event("reached_t_end", t, y, {}))

        # PI step controller
        fac = 0.9 * (enorm + 1e-300) ** -0.14 * (err_prev + 1e-300) ** 0.08
        fac = max(0.2, min(10.0, fac))
        h = direction * min(abs(h) * fac, max_step)
        err_prev = max(enorm, 1e-10)


def sample_trajectory(traj: Trajectory, f, ts, rtol=1e-13, atol=1e-15):
    """States at arbitrary times, by short re-integration from the nearest
    stored node (more accurate than interpolating the stored polyline)."""
    out = []
    times = traj.times
    for tq in ts:
        if tq < times[0] - 1e-12 or tq > times[-1] + 1e-12:
            raise NumericalError(f"query time {tq} outside trajectory range")
        # nearest node not past tq on either side works; pick closest
        import bisect
        i = bisect.bisect_left(times, tq)
        cands = [j for j in (i - 1, i, i + 1) if 0 <= j < len(times)]
        j = min(cands, key=lambda j: abs(times[j] - tq))
        t0, y0 = times[j], traj.states[j]
        if abs(t0 - tq) <= 1e-14 * max(1.0, abs(tq)):
            out.append(tuple(y0))
            continue
        sub = integrate(f, y0, t0, tq, rtol=rtol, atol=atol)
        out.append(tuple(sub.states[-1] if sub.direction > 0 else sub.states[0]))
    return out
