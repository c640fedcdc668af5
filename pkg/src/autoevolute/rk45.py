"""Embedded Dormand-Prince 5(4) stepper with PI control and dense output.

Deliberately self-contained: the frame integrator needs three things a stock
IVP driver does not expose cleanly -- a hook to re-orthonormalize the state
after every accepted step, hard landings on interior checkpoints, and bitwise
deterministic behavior for identical inputs.  Coefficients are the standard
Dormand-Prince pair with Shampine's quartic interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import StepSizeUnderflow

__all__ = ["DenseSegment", "RKSolution", "solve_rk45"]

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
])
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# b5 - b4 weights over the 7 stages (FSAL stage included).
_E = np.array([-71 / 57600, 0, 71 / 16695, -71 / 1920, 17253 / 339200,
               -22 / 525, 1 / 40])
# Shampine's interpolant: y(t0 + x h) = y0 + h K^T (P @ [x, x^2, x^3, x^4]).
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
# PI controller exponents; error-per-unit-step makes the estimate O(h^4).
_BETA = 0.04
_ALPHA = 0.25 - 0.75 * _BETA
_H_FLOOR = 1e-14


@dataclass
class DenseSegment:
    """Quartic interpolant over one accepted step [t0, t1]."""

    t0: float
    t1: float
    y0: np.ndarray
    Q: np.ndarray  # (n, 4) = h * K^T P

    def __call__(self, t):
        x = (np.asarray(t, dtype=float) - self.t0) / (self.t1 - self.t0)
        if x.ndim == 0:
            p = np.array([x, x * x, x**3, x**4])
            return self.y0 + self.Q @ p
        p = np.vstack([x, x * x, x**3, x**4])
        return self.y0[:, None] + self.Q @ p


@dataclass
class RKSolution:
    """Accepted-step mesh plus the interpolants between mesh points."""

    ts: np.ndarray            # accepted step times, including t0 and t_end
    ys: np.ndarray            # states at ts (post-hook), shape (len(ts), n)
    segments: list[DenseSegment]
    n_steps: int
    n_rejected: int

    def __call__(self, t):
        """Evaluate the dense output at scalar or sorted array t."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tq = np.atleast_1d(t)
        out = np.empty((tq.size, self.ys.shape[1]))
        if not self.segments:
            out[:] = self.ys[0]
            return out[0] if scalar else out
        ascending = self.ts[0] <= self.ts[-1]
        bounds = np.array([s.t1 for s in self.segments])
        if ascending:
            idx = np.searchsorted(bounds, tq, side="left")
        else:
            idx = len(bounds) - np.searchsorted(bounds[::-1], tq, side="right")
        idx = np.clip(idx, 0, len(self.segments) - 1)
        for j in np.unique(idx):
            sel = idx == j
            vals = self.segments[j](tq[sel])
            out[sel] = vals.T if vals.ndim == 2 else vals
        return out[0] if scalar else out


def _initial_step(fun, t0, y0, f0, direction, tol):
    """Conventional two-trial guess for the first step size."""
    scale = tol + tol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = fun(t0 + h0 * direction, y1)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def solve_rk45(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t_end: float,
    tol: float,
    checkpoints: Sequence[float] = (),
    post_step: Callable[[float, np.ndarray], np.ndarray] | None = None,
    max_step: float = math.inf,
) -> RKSolution:
    """Integrate y' = fun(t, y) from t0 to t_end.

    Error control is per unit step: a step h is accepted when the scaled
    error estimate satisfies err <= tol * |h|.  `checkpoints` are interior
    times the stepper lands on exactly (each checkpoint state is an accepted
    step state, never interpolated).  `post_step` may adjust the state after
    every accepted step (in place or by returning a new array); the adjusted
    state feeds the next step while the dense segment keeps the raw step.

    Integration direction follows sign(t_end - t0).  Raises
    StepSizeUnderflow when the controller falls below 1e-14.
    """
    y0 = np.asarray(y0, dtype=float)
    n = y0.size
    if t_end == t0:
        return RKSolution(np.array([t0]), y0[None, :].copy(), [], 0, 0)

    direction = 1.0 if t_end > t0 else -1.0
    stops = [float(c) for c in checkpoints
             if (c - t0) * direction > 1e-12 and (t_end - c) * direction > 1e-12]
    stops = sorted(set(stops), reverse=direction < 0)
    # drop stops that crowd their successor; keep t_end as the final landing
    kept: list[float] = []
    for c in stops:
        if not kept or abs(c - kept[-1]) > 1e-12:
            kept.append(c)
    stops = kept + [float(t_end)]

    ts = [float(t0)]
    ys = [y0.copy()]
    segments: list[DenseSegment] = []
    n_steps = 0
    n_rejected = 0

    t = float(t0)
    y = y0.copy()
    f = fun(t, y)
    h = min(_initial_step(fun, t, y, f, direction, tol),
            abs(t_end - t0), max_step)
    err_prev = 1e-4
    K = np.empty((7, n))

    for stop in stops:
        while (stop - t) * direction > 0:
            h_remain = abs(stop - t)
            landing = h >= h_remain
            h = min(h, h_remain)
            if h < _H_FLOOR:
                raise StepSizeUnderflow(t, h)
            hs = (stop - t) if landing else h * direction
            K[0] = f
            for i in range(1, 6):
                K[i] = fun(t + _C[i] * hs, y + hs * (_A[i, :i] @ K[:i]))
            y_new = y + hs * (_B @ K[:6])
            t_new = stop if landing else t + hs
            K[6] = fun(t_new, y_new)
            err_vec = hs * (_E @ K)
            scale = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
            err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
            ratio = err / min(h, 1.0)  # error per unit step
            if ratio <= 1.0:
                seg = DenseSegment(t, t_new, y.copy(), hs * (K.T @ _P))
                segments.append(seg)
                t, y, f = t_new, y_new, K[6].copy()
                if post_step is not None:
                    y = np.asarray(post_step(t, y), dtype=float)
                    f = fun(t, y)
                ts.append(t)
                ys.append(y.copy())
                n_steps += 1
                factor = min(_MAX_FACTOR,
                             _SAFETY * max(ratio, 1e-10) ** (-_ALPHA)
                             * err_prev ** _BETA)
                err_prev = max(ratio, 1e-10)
                h = min(h * factor, max_step)
            else:
                n_rejected += 1
                h *= max(_MIN_FACTOR, _SAFETY * ratio ** (-_ALPHA))
    return RKSolution(np.array(ts), np.array(ys), segments, n_steps, n_rejected)
