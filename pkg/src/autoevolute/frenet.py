"""Integration of the modified Frenet system.

State layout is a flat 14-vector: position (3), T (3), N (3), B (3),
arc length s of the curve, arc length s_tilde of its evolute.  The frame
equations use speed v in the curvature terms and 1/v in the torsion terms;
the two arc-length accumulators integrate v and 1/v respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DegenerateFrame, LeftHandedFrame
from .profile import CurveParams
from .rk45 import solve_rk45

__all__ = [
    "FrenetSample",
    "FrenetRates",
    "SampledCurve",
    "initial_sample",
    "ode_rhs",
    "renormalize_frame",
    "integrate",
    "integrate_states",
    "half_period_points",
]

TWO_PI = 2.0 * math.pi

FRAME_ORTHO_TOL = 1e-9
MIN_TOL = 1e-13
MAX_TOL = 1e-3


@dataclass(frozen=True)
class FrenetSample:
    """One point of a curve: position, orthonormal frame and scalar data."""

    t: float
    position: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    v: float
    tau: float
    s: float = 0.0
    s_tilde: float = 0.0

    def frame(self) -> np.ndarray:
        """3x3 matrix with columns T, N, B."""
        return np.column_stack([self.T, self.N, self.B])

    def frame_defect(self) -> float:
        """Max deviation of the frame from orthonormal (Gram matrix vs identity)."""
        F = self.frame()
        return float(np.max(np.abs(F.T @ F - np.eye(3))))


class FrenetRates(NamedTuple):
    """Time derivatives of the state fields at one point."""

    position: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    s: float
    s_tilde: float


def initial_sample(params: CurveParams, t0: float = 0.0) -> FrenetSample:
    """Canonical start: origin with the identity frame.

    Every closure residual downstream is invariant under this choice up to
    a rigid motion.
    """
    v = params.profile.v(t0)
    return FrenetSample(
        t=float(t0),
        position=np.zeros(3),
        T=np.array([1.0, 0.0, 0.0]),
        N=np.array([0.0, 1.0, 0.0]),
        B=np.array([0.0, 0.0, 1.0]),
        v=float(v),
        tau=float(params.kappa / (v * v)),
        s=0.0,
        s_tilde=0.0,
    )


def ode_rhs(params: CurveParams, t: float, state: FrenetSample) -> FrenetRates:
    """Right-hand side of the modified Frenet system at (t, state)."""
    v = params.profile.v(t)
    kv = params.kappa * v
    kov = params.kappa / v
    return FrenetRates(
        position=v * state.T,
        T=kv * state.N,
        N=-kv * state.T + kov * state.B,
        B=-kov * state.N,
        s=float(v),
        s_tilde=float(1.0 / v),
    )


def renormalize_frame(state: FrenetSample) -> FrenetSample:
    """Nearest right-handed orthonormal frame by Gram-Schmidt in T, N, B order.

    B is rebuilt as T x N, which preserves T exactly and enforces
    right-handedness.  A left-handed input raises instead of being flipped.
    """
    T, N, B = _orthonormalize(state.T, state.N, state.B)
    return replace(state, T=T, N=N, B=B)


def _orthonormalize(T, N, B):
    nT = float(np.linalg.norm(T))
    if nT < 1e-6:
        raise DegenerateFrame(f"|T| = {nT:.3e} too small to normalize")
    T = T / nT
    N = N - (N @ T) * T
    nN = float(np.linalg.norm(N))
    if nN < 1e-6:
        raise DegenerateFrame(f"|N - (N.T)T| = {nN:.3e}; N nearly parallel to T")
    N = N / nN
    cross = np.cross(T, N)
    B_res = B - (B @ T) * T - (B @ N) * N
    nB = float(np.linalg.norm(B_res))
    if nB < 1e-6:
        raise DegenerateFrame(f"|B| component = {nB:.3e} after projection")
    if B_res @ cross < 0:
        raise LeftHandedFrame("frame is left-handed; refusing to flip B")
    return T, N, cross


@dataclass
class SampledCurve:
    """Densely sampled curve with frames and both arc-length accumulators.

    Arrays share the leading sample axis; t is strictly increasing.
    """

    params: CurveParams
    t: np.ndarray          # (n,)
    position: np.ndarray   # (n, 3)
    T: np.ndarray          # (n, 3)
    N: np.ndarray          # (n, 3)
    B: np.ndarray          # (n, 3)
    v: np.ndarray          # (n,)
    tau: np.ndarray        # (n,)
    s: np.ndarray          # (n,)
    s_tilde: np.ndarray    # (n,)
    periods: int

    def __len__(self) -> int:
        return self.t.size

    def sample(self, i: int) -> FrenetSample:
        return FrenetSample(
            t=float(self.t[i]), position=self.position[i].copy(),
            T=self.T[i].copy(), N=self.N[i].copy(), B=self.B[i].copy(),
            v=float(self.v[i]), tau=float(self.tau[i]),
            s=float(self.s[i]), s_tilde=float(self.s_tilde[i]),
        )

    def __iter__(self) -> Iterator[FrenetSample]:
        return (self.sample(i) for i in range(len(self)))

    def index_at(self, t: float, tol: float = 1e-9) -> int:
        """Index of the sample at parameter t (must exist within tol)."""
        i = int(np.searchsorted(self.t, t))
        for j in (i - 1, i, i + 1):
            if 0 <= j < len(self) and abs(float(self.t[j]) - t) <= tol:
                return j
        raise KeyError(f"no sample at t={t!r}")

    def diameter(self) -> float:
        """Bounding-box diagonal; the length scale used by relative tolerances."""
        ext = self.position.max(axis=0) - self.position.min(axis=0)
        return float(np.linalg.norm(ext))

    def closure_gap(self) -> float:
        """|endpoint - startpoint| normalized by the diameter."""
        gap = float(np.linalg.norm(self.position[-1] - self.position[0]))
        d = self.diameter()
        return gap / d if d > 0 else gap

    def replace_arrays(self, **arrays) -> "SampledCurve":
        fields = dict(
            params=self.params, t=self.t, position=self.position,
            T=self.T, N=self.N, B=self.B, v=self.v, tau=self.tau,
            s=self.s, s_tilde=self.s_tilde, periods=self.periods,
        )
        fields.update(arrays)
        return SampledCurve(**fields)


def half_period_points(t0: float, t1: float) -> list[float]:
    """All t* = pi/2 + n*pi inside [t0, t1] (symmetry-normal parameters)."""
    n_lo = math.ceil((t0 - math.pi / 2) / math.pi - 1e-12)
    out = []
    n = n_lo
    while True:
        t_star = math.pi / 2 + n * math.pi
        if t_star > t1 + 1e-12:
            break
        if t_star >= t0 - 1e-12:
            out.append(t_star)
        n += 1
    return out


def _pack(sample: FrenetSample) -> np.ndarray:
    y = np.empty(14)
    y[0:3] = sample.position
    y[3:6] = sample.T
    y[6:9] = sample.N
    y[9:12] = sample.B
    y[12] = sample.s
    y[13] = sample.s_tilde
    return y


def _make_rhs(params: CurveParams):
    kappa = params.kappa
    prof = params.profile
    coeffs = prof.coefficients
    amp = prof.amplitude
    sqrt_form = prof.form.value == "sqrt"

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        h = 0.0
        for k, w in coeffs:
            h += w * math.sin(k * t)
        h *= amp
        v = math.sqrt(1.0 + h * h) - h if sqrt_form else math.exp(h)
        kv = kappa * v
        kov = kappa / v
        dy = np.empty(14)
        dy[0:3] = v * y[3:6]
        dy[3:6] = kv * y[6:9]
        dy[6:9] = kov * y[9:12] - kv * y[3:6]
        dy[9:12] = -kov * y[6:9]
        dy[12] = v
        dy[13] = 1.0 / v
        return dy

    return rhs


def _renorm_state(t: float, y: np.ndarray) -> np.ndarray:
    T = y[3:6]
    N = y[6:9]
    T = T / math.sqrt(T @ T)
    N = N - (N @ T) * T
    N = N / math.sqrt(N @ N)
    y[3:6] = T
    y[6:9] = N
    y[9:12] = np.cross(T, N)
    return y


def _renorm_arrays(T: np.ndarray, N: np.ndarray, B: np.ndarray):
    T = T / np.linalg.norm(T, axis=1, keepdims=True)
    N = N - np.sum(N * T, axis=1, keepdims=True) * T
    N = N / np.linalg.norm(N, axis=1, keepdims=True)
    B = np.cross(T, N)
    return T, N, B


def _validate(params, t0, t1, init, tol):
    if not (MIN_TOL <= tol <= MAX_TOL):
        raise ValueError(f"tol={tol!r} outside [{MIN_TOL}, {MAX_TOL}]")
    if t1 < t0:
        raise ValueError(f"t1={t1!r} must be >= t0={t0!r}")
    if init.frame_defect() > FRAME_ORTHO_TOL:
        raise ValueError(
            f"initial frame deviates from orthonormal by {init.frame_defect():.3e}"
        )


def integrate(
    params: CurveParams,
    t0: float = 0.0,
    t1: float = TWO_PI,
    init: FrenetSample | None = None,
    tol: float = 1e-10,
    out_resolution: int = 1024,
) -> SampledCurve:
    """Integrate the modified Frenet system over [t0, t1].

    Emits samples on a uniform grid of `out_resolution` points per 2*pi,
    guaranteeing a sample exactly at every half-period point
    t* = pi/2 + n*pi (the stepper lands on them; they are accepted-step
    states, not interpolated).  Frames of all emitted samples are
    re-orthonormalized.
    """
    if init is None:
        init = initial_sample(params, t0)
    _validate(params, t0, t1, init, tol)
    if out_resolution < 1:
        raise ValueError("out_resolution must be >= 1")

    span = t1 - t0
    periods = max(1, int(math.ceil(span / TWO_PI - 1e-9)))
    if span == 0.0:
        return SampledCurve(
            params=params, t=np.array([t0]),
            position=init.position[None, :].copy(),
            T=init.T[None, :].copy(), N=init.N[None, :].copy(),
            B=init.B[None, :].copy(),
            v=np.array([init.v]), tau=np.array([init.tau]),
            s=np.array([init.s]), s_tilde=np.array([init.s_tilde]),
            periods=periods,
        )

    # endpoints already land exactly; only interior half-period points matter
    stars = [x for x in half_period_points(t0, t1)
             if x - t0 > 1e-9 and t1 - x > 1e-9]
    sol = solve_rk45(_make_rhs(params), t0, _pack(init), t1, tol,
                     checkpoints=stars, post_step=_renorm_state)

    grid = _output_grid(t0, t1, span, out_resolution, stars)
    states = sol(grid)

    # exact mesh states at landings beat interpolated ones
    mesh_idx = np.searchsorted(sol.ts, grid)
    mesh_idx = np.clip(mesh_idx, 0, len(sol.ts) - 1)
    exact = sol.ts[mesh_idx] == grid
    states[exact] = sol.ys[mesh_idx[exact]]

    T, N, B = _renorm_arrays(states[:, 3:6], states[:, 6:9], states[:, 9:12])
    v = np.asarray(params.profile.v(grid), dtype=float)
    tau = params.kappa / np.square(v)
    return SampledCurve(
        params=params, t=grid, position=states[:, 0:3],
        T=T, N=N, B=B, v=v, tau=tau,
        s=states[:, 12], s_tilde=states[:, 13], periods=periods,
    )


def _output_grid(t0, t1, span, out_resolution, stars):
    dt = TWO_PI / out_resolution
    n_cells = int(round(span / dt))
    if abs(n_cells * dt - span) > 1e-9 * max(1.0, span):
        n_cells = int(math.ceil(span / dt - 1e-12))
    n_cells = max(1, n_cells)
    grid = t0 + (span / n_cells) * np.arange(n_cells + 1)
    grid[-1] = t1
    # snap grid points onto the exact half-period floats (the endpoints stay
    # exactly t0 and t1; a t* crowding an endpoint is inserted instead)
    for t_star in stars:
        i = int(np.argmin(np.abs(grid - t_star)))
        if 0 < i < len(grid) - 1 and abs(grid[i] - t_star) < 0.5 * (span / n_cells):
            grid[i] = t_star
        elif not np.any(grid == t_star):
            grid = np.insert(grid, np.searchsorted(grid, t_star), t_star)
    return grid


def integrate_states(
    params: CurveParams,
    t0: float,
    t1: float,
    at: list[float],
    init: FrenetSample | None = None,
    tol: float = 1e-10,
) -> list[FrenetSample]:
    """States at selected parameter values only (no dense emission).

    The requested values become stepper landings, so each returned state is
    an accepted-step state.  This is the fast path used by the closure
    residual evaluations, where only the half-period states matter.
    """
    if init is None:
        init = initial_sample(params, t0)
    _validate(params, t0, t1, init, tol)
    want = sorted(set(float(a) for a in at))
    for a in want:
        if a < t0 - 1e-12 or a > t1 + 1e-12:
            raise ValueError(f"requested state at t={a} outside [{t0}, {t1}]")
    if t1 == t0:
        return [replace(init) for _ in want]
    sol = solve_rk45(_make_rhs(params), t0, _pack(init), t1, tol,
                     checkpoints=want, post_step=_renorm_state)
    out = []
    for a in want:
        if a == t0:
            y = sol.ys[0]
        else:
            i = int(np.searchsorted(sol.ts, a))
            i = min(max(i, 0), len(sol.ts) - 1)
            if sol.ts[i] != a:
                for j in (i - 1, i + 1):
                    if 0 <= j < len(sol.ts) and sol.ts[j] == a:
                        i = j
                        break
                else:
                    raise KeyError(f"stepper did not land on t={a!r}")
            y = sol.ys[i]
        v = float(params.profile.v(a))
        out.append(FrenetSample(
            t=a, position=y[0:3].copy(), T=y[3:6].copy(), N=y[6:9].copy(),
            B=y[9:12].copy(), v=v, tau=params.kappa / (v * v),
            s=float(y[12]), s_tilde=float(y[13]),
        ))
    return out
