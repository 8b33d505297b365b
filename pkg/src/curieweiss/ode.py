"""Adaptive Dormand-Prince 5(4) integrator with dense output and events.

Small, explicit, and sufficient for the smooth non-stiff systems in this
package (short-time off-diagonal equations, registration flow).  State
vectors may be real or complex.  Dense output uses cubic Hermite
interpolation on each accepted step; events are located by bisection on
that interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import StepFailure

# Dormand-Prince 5(4) tableau; row sums equal the nodes, checked in tests.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_ERR = _B5 - _B4


@dataclass
class StepRecord:
    t0: float
    t1: float
    y0: np.ndarray
    y1: np.ndarray
    f0: np.ndarray
    f1: np.ndarray

    def interpolate(self, t: float) -> np.ndarray:
        """Cubic Hermite value inside [t0, t1]."""
        h = self.t1 - self.t0
        s = (t - self.t0) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * self.y0 + h * h10 * self.f0 + h01 * self.y1 + h * h11 * self.f1


@dataclass
class Solution:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim)
    steps: list[StepRecord]
    event_time: float | None = None
    event_index: int | None = None

    def __call__(self, t: float) -> np.ndarray:
        """Dense evaluation at any time inside the integration range."""
        if not self.steps:
            return self.states[0]
        if t <= self.steps[0].t0:
            return self.states[0]
        if t >= self.steps[-1].t1:
            return self.states[-1]
        lo, hi = 0, len(self.steps) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.steps[mid].t1 < t:
                lo = mid + 1
            else:
                hi = mid
        return self.steps[lo].interpolate(t)


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: Sequence,
    t_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_step: float | None = None,
    events: Sequence[Callable[[float, np.ndarray], float]] | None = None,
    first_step: float | None = None,
    max_rejects: int = 30,
) -> Solution:
    """Integrate y' = rhs(t, y) from t0 to t_end.

    Events are scalar functions of (t, y); integration stops at the first
    sign change (negative to positive), located by bisection on the dense
    interpolant.

    Raises
    ------
    StepFailure
        If the step size underflows or too many consecutive steps are
        rejected.
    """
    y = np.atleast_1d(np.asarray(y0))
    if not np.iscomplexobj(y):
        y = y.astype(float)
    t = float(t0)
    span = t_end - t0
    if span <= 0:
        raise ValueError("t_end must exceed t0")
    if max_step is None:
        max_step = span
    h = first_step if first_step is not None else min(max_step, span / 100.0)

    f = np.asarray(rhs(t, y))
    work_dtype = np.result_type(y.dtype, f.dtype)
    y = y.astype(work_dtype)
    f = f.astype(work_dtype)
    times = [t]
    states = [y.copy()]
    steps: list[StepRecord] = []
    ev_vals = [ev(t, y) for ev in events] if events else []
    event_time = None
    event_index = None

    k = np.empty((7,) + y.shape, dtype=work_dtype)
    rejects = 0
    while t < t_end:
        h = min(h, max_step)
        if h <= 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise StepFailure(f"step size underflow at t = {t}")
        final = t + h >= t_end
        h_step = (t_end - t) if final else h
        k[0] = f
        for i in range(1, 7):
            yi = y + h_step * np.tensordot(_A[i], k[:i], axes=(0, 0))
            k[i] = rhs(t + _C[i] * h_step, yi)
        y_new = y + h_step * np.tensordot(_B5, k, axes=(0, 0))
        err_vec = h_step * np.tensordot(_ERR, k, axes=(0, 0))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((np.abs(err_vec) / scale) ** 2)))

        if err > 1.0:
            rejects += 1
            if rejects > max_rejects:
                raise StepFailure(f"{max_rejects} consecutive rejected steps at t = {t}")
            h = h_step * max(0.2, 0.9 * err ** (-0.2))
            continue
        rejects = 0

        t_new = t_end if final else t + h_step
        f_new = k[6].copy()  # FSAL: last stage is rhs at (t_new, y_new)
        rec = StepRecord(t0=t, t1=t_new, y0=y.copy(), y1=y_new.copy(), f0=f.copy(), f1=f_new.copy())

        if events:
            new_vals = [ev(t_new, y_new) for ev in events]
            hit = None
            for i, (v0, v1) in enumerate(zip(ev_vals, new_vals)):
                if v0 < 0 <= v1:
                    hit = i
                    break
            if hit is not None:
                a, b = t, t_new
                for _ in range(80):
                    mid = 0.5 * (a + b)
                    if events[hit](mid, rec.interpolate(mid)) < 0:
                        a = mid
                    else:
                        b = mid
                    if b - a <= 1e-12 * max(abs(b), 1.0):
                        break
                event_time = 0.5 * (a + b)
                event_index = hit
                y_ev = rec.interpolate(event_time)
                steps.append(StepRecord(t, event_time, y.copy(), y_ev, f.copy(),
                                        np.asarray(rhs(event_time, y_ev))))
                times.append(event_time)
                states.append(y_ev)
                break
            ev_vals = new_vals

        steps.append(rec)
        times.append(t_new)
        states.append(y_new.copy())
        t, y, f = t_new, y_new, f_new
        if err == 0.0:
            factor = 5.0
        else:
            factor = min(5.0, max(0.2, 0.9 * err ** (-0.2)))
        h = h_step * factor

    return Solution(
        times=np.array(times),
        states=np.array(states),
        steps=steps,
        event_time=event_time,
        event_index=event_index,
    )
