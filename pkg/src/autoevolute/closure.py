"""Two-parameter closure: symmetry normals, residuals, Newton, families.

The velocity and torsion profiles are even about every t* = pi/2 + n*pi, so
the principal normals there are symmetry normals: a half-turn about such a
line maps the curve onto itself.  Closing the curve amounts to making two
consecutive symmetry lines (a) coplanar and (b) meet at a rational multiple
of pi.  Both conditions are functions of (kappa, amplitude) once the higher
harmonics are frozen, which is the 2-parameter problem solved here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoAxis, NoConvergence, NotClosed, SingularJacobian, FamilyTruncated
from .frenet import SampledCurve, integrate, integrate_states
from .profile import CurveParams, FourierOddProfile, VelocityForm

__all__ = [
    "RationalAngle",
    "SymmetryLine",
    "ClosureResiduals",
    "SolveResult",
    "ScanCandidate",
    "Classification",
    "symmetry_lines",
    "closure_residuals",
    "newton_solve",
    "grid_scan",
    "continuation",
    "assemble_closed_curve",
    "classify",
]

ROUGH_CLOSING_THRESHOLD = 0.3
MAX_TARGET_DENOMINATOR = 32


@dataclass(frozen=True)
class RationalAngle:
    """Target intersection angle pi * p / q between consecutive symmetry lines.

    Measured angles between unoriented lines live in [0, pi/2], so a target
    above pi/2 is folded to its supplement for the residual; q still sets the
    number of periods needed to close.
    """

    p: int
    q: int

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("q must be positive")
        if not (0 < self.p < self.q):
            raise ValueError(f"need 0 < p < q for an angle in (0, pi), got {self.p}/{self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"{self.p}/{self.q} is not in lowest terms")

    @property
    def value(self) -> float:
        return math.pi * self.p / self.q

    @property
    def line_angle(self) -> float:
        """The target folded into [0, pi/2] (lines are unoriented)."""
        return min(self.value, math.pi - self.value)

    @classmethod
    def parse(cls, text: str) -> "RationalAngle":
        """Parse 'p/q' as the fraction of pi."""
        parts = text.strip().split("/")
        if len(parts) != 2:
            raise ValueError(f"expected 'p/q', got {text!r}")
        return cls(int(parts[0]), int(parts[1]))

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class SymmetryLine:
    """Candidate symmetry normal: the principal normal at t* = pi/2 + n pi."""

    index: int
    t_star: float
    base: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True)
class ClosureResiduals:
    """The two scalars driven to zero by the closure solve."""

    d: float              # signed, normalized coplanarity of lines 0 and 1
    angle_defect: float   # measured line angle minus (folded) target
    angle_measured: float
    target: RationalAngle

    @property
    def norm(self) -> float:
        return math.hypot(self.d, self.angle_defect)


@dataclass
class SolveResult:
    """Outcome of one Newton solve, including the full iteration trace."""

    params: CurveParams
    target: RationalAngle
    residual_norm: float
    iterations: int
    trace: list[tuple[float, float, float, float, float]] = field(default_factory=list)
    converged: bool = False

    @property
    def kappa(self) -> float:
        return self.params.kappa

    @property
    def a(self) -> float:
        return self.params.profile.amplitude

    @property
    def b3(self) -> float:
        return self.params.profile.b3


@dataclass(frozen=True)
class ScanCandidate:
    """One grid-scan cell, ranked by residual norm."""

    kappa: float
    a: float
    b3: float
    form: VelocityForm
    d: float
    angle_defect: float
    norm: float

    def params(self) -> CurveParams:
        return CurveParams(kappa=self.kappa,
                           profile=FourierOddProfile.base(self.a, self.b3, self.form))


@dataclass(frozen=True)
class Classification:
    """Winding data of a closed solution (meridian count is a heuristic)."""

    rotation_order: int
    winding_axis: int
    winding_meridian_hint: int
    axis_point: np.ndarray
    axis_direction: np.ndarray


def symmetry_lines(params: CurveParams, count: int = 2, tol: float = 1e-10,
                   init=None) -> list[SymmetryLine]:
    """Symmetry normals at t* = pi/2 + n pi for n = 0..count-1.

    Bases and directions are read from exact-landing integrator states.
    `init` overrides the canonical initial frame (the residuals built from
    these lines are invariant under that choice up to rounding).
    """
    if count < 2:
        raise ValueError("count must be >= 2")
    stars = [math.pi / 2 + n * math.pi for n in range(count)]
    states = integrate_states(params, 0.0, stars[-1], at=stars, tol=tol, init=init)
    return [
        SymmetryLine(index=n, t_star=stars[n], base=st.position, direction=st.N)
        for n, st in enumerate(states)
    ]


def _line_residuals(p0, n0, p1, n1, target: RationalAngle) -> ClosureResiduals:
    dp = p1 - p0
    dp_norm = float(np.linalg.norm(dp))
    cross = np.cross(n0, n1)
    cross_norm = float(np.linalg.norm(cross))
    if cross_norm > 1e-9:
        d = float(dp @ cross) / (dp_norm * cross_norm)
    else:
        # parallel lines: normalized offset transverse to the common direction
        transverse = dp - (dp @ n0) * n0
        d = float(np.linalg.norm(transverse)) / dp_norm
    cosang = min(abs(float(n0 @ n1)), 1.0)
    angle = math.acos(cosang)
    return ClosureResiduals(
        d=d,
        angle_defect=angle - target.line_angle,
        angle_measured=angle,
        target=target,
    )


def closure_residuals(params: CurveParams, target: RationalAngle,
                      tol: float = 1e-10, init=None) -> ClosureResiduals:
    """Coplanarity and angle defect of the first two symmetry lines."""
    lines = symmetry_lines(params, count=2, tol=tol, init=init)
    return _line_residuals(lines[0].base, lines[0].direction,
                           lines[1].base, lines[1].direction, target)


def _trace_entry(kappa, a, res: ClosureResiduals):
    return (float(kappa), float(a), res.d, res.angle_defect, res.norm)


def newton_solve(
    initial: CurveParams,
    target: RationalAngle,
    tol: float = 1e-10,
    max_iter: int = 30,
    gate: float = ROUGH_CLOSING_THRESHOLD,
    integrator_tol: float = 1e-11,
    fd_rel_step: float = 1e-6,
    max_halvings: int = 8,
    callback=None,
) -> SolveResult:
    """Damped Newton on F(kappa, a) = (d, angle_defect).

    Requires a roughly closed start (residual norm below `gate`); Newton has
    no useful basin before that.  The Jacobian comes from central finite
    differences with relative step `fd_rel_step` per parameter; a step is
    accepted only when the residual norm decreases, with up to
    `max_halvings` halvings.  Raises NoConvergence (with the partial result
    attached) on gate violation, stall, or iteration exhaustion, and
    SingularJacobian when the finite-difference Jacobian degenerates.
    """
    x = np.array([initial.kappa, initial.profile.amplitude], dtype=float)

    def make_params(vec) -> CurveParams:
        return initial.with_values(kappa=float(vec[0]), a=float(vec[1]))

    def residual_vec(vec):
        res = closure_residuals(make_params(vec), target, tol=integrator_tol)
        return np.array([res.d, res.angle_defect]), res

    r, res = residual_vec(x)
    norm = float(np.linalg.norm(r))
    trace = [_trace_entry(x[0], x[1], res)]
    if callback:
        callback(0, make_params(x), res)

    if norm >= gate:
        raise NoConvergence(
            f"initial residual norm {norm:.3g} is above the rough-closing "
            f"threshold {gate}; close the curve roughly first",
            result=SolveResult(make_params(x), target, norm, 0, trace, False),
        )

    for iteration in range(1, max_iter + 1):
        if norm < tol:
            return SolveResult(make_params(x), target, norm, iteration - 1, trace, True)
        J = np.empty((2, 2))
        for j in range(2):
            h = fd_rel_step * max(abs(x[j]), 1e-2)
            xp = x.copy()
            xm = x.copy()
            xp[j] += h
            xm[j] -= h
            if xm[0] <= 0:
                xm[0] = x[0] * 0.5  # keep curvature positive
            rp, _ = residual_vec(xp)
            rm, _ = residual_vec(xm)
            J[:, j] = (rp - rm) / (xp[j] - xm[j])
        cond = float(np.linalg.cond(J))
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularJacobian(
                f"Jacobian condition {cond:.3g} exceeds 1e12 at kappa={x[0]}, a={x[1]}",
                condition=cond,
            )
        delta = np.linalg.solve(J, -r)
        lam = 1.0
        for _ in range(max_halvings + 1):
            x_try = x + lam * delta
            if x_try[0] <= 0:
                lam *= 0.5
                continue
            r_try, res_try = residual_vec(x_try)
            norm_try = float(np.linalg.norm(r_try))
            if norm_try < norm:
                x, r, res, norm = x_try, r_try, res_try, norm_try
                break
            lam *= 0.5
        else:
            raise NoConvergence(
                f"residual norm stalled at {norm:.3e} after {max_halvings} halvings",
                result=SolveResult(make_params(x), target, norm, iteration, trace, False),
            )
        trace.append(_trace_entry(x[0], x[1], res))
        if callback:
            callback(iteration, make_params(x), res)

    if norm < tol:
        return SolveResult(make_params(x), target, norm, max_iter, trace, True)
    raise NoConvergence(
        f"no convergence in {max_iter} iterations (residual {norm:.3e})",
        result=SolveResult(make_params(x), target, norm, max_iter, trace, False),
    )


def grid_scan(
    form: VelocityForm | str,
    b3: float,
    kappa_range: tuple[float, float],
    a_range: tuple[float, float],
    grid: int | tuple[int, int],
    target: RationalAngle,
    tol: float = 1e-7,
    top: int | None = None,
) -> list[ScanCandidate]:
    """Evaluate closure residuals over a (kappa, a) grid and rank the cells.

    The rough-closing step of the workflow: cheap residual evaluations at
    reduced integrator tolerance locate basins for the exact solve.  Failed
    integrations rank last with infinite norm.
    """
    if isinstance(form, str):
        form = VelocityForm.parse(form)
    nk, na = (grid, grid) if isinstance(grid, int) else grid
    if nk < 4 or na < 4:
        raise ValueError("grid must be at least 4 x 4")
    kappas = np.linspace(kappa_range[0], kappa_range[1], nk)
    amps = np.linspace(a_range[0], a_range[1], na)
    out = []
    for kappa in kappas:
        if kappa <= 0:
            continue
        for a in amps:
            params = CurveParams(kappa=float(kappa),
                                 profile=FourierOddProfile.base(float(a), b3, form))
            try:
                res = closure_residuals(params, target, tol=tol)
                cand = ScanCandidate(float(kappa), float(a), float(b3), form,
                                     res.d, res.angle_defect, res.norm)
            except Exception:
                cand = ScanCandidate(float(kappa), float(a), float(b3), form,
                                     math.inf, math.inf, math.inf)
            out.append(cand)
    out.sort(key=lambda c: (c.norm, c.kappa, c.a))
    return out[:top] if top else out


def continuation(
    start: SolveResult,
    b3_range: tuple[float, float],
    step: float,
    target: RationalAngle,
    tol: float = 1e-10,
    on_member=None,
    **newton_kwargs,
) -> list[SolveResult]:
    """Trace the solution family in b3 by warm-started re-solving.

    Walks from the start's b3 to both ends of the range.  The step halves on
    non-convergence (a fresh solve from the last converged member) and grows
    back after success; when it falls below step/64 the family is truncated
    and FamilyTruncated carries the partial results and the frontier b3.
    `on_member` is called with every converged member as it appears.
    """
    if not start.converged:
        raise ValueError("continuation requires a converged start")
    if step <= 0:
        raise ValueError("step must be positive")
    b3_lo, b3_hi = min(b3_range), max(b3_range)
    b3_start = start.b3
    results = {round(b3_start, 15): start}
    min_step = step / 64.0
    if on_member:
        on_member(start)

    for direction in (+1.0, -1.0):
        limit = b3_hi if direction > 0 else b3_lo
        if (limit - b3_start) * direction <= 0:
            continue
        current = start
        b3 = b3_start
        h = step
        while (limit - b3) * direction > 1e-12:
            b3_next = b3 + direction * min(h, abs(limit - b3))
            try:
                nxt = newton_solve(
                    current.params.with_values(b3=b3_next), target,
                    tol=tol, **newton_kwargs,
                )
            except (NoConvergence, SingularJacobian):
                h *= 0.5
                if h < min_step:
                    ordered = [results[k] for k in sorted(results)]
                    raise FamilyTruncated(
                        f"step fell below {min_step:.3g} near b3={b3_next:.6g}",
                        results=ordered, frontier_b3=b3,
                    ) from None
                continue
            current = nxt
            b3 = b3_next
            results[round(b3, 15)] = nxt
            if on_member:
                on_member(nxt)
            h = min(step, 2.0 * h)
    return [results[k] for k in sorted(results)]


def assemble_closed_curve(
    params: CurveParams,
    target: RationalAngle,
    tol: float = 1e-10,
    out_resolution: int = 1024,
    near_tol: float = 1e-6,
) -> tuple[SampledCurve, float, int]:
    """Integrate enough periods for the symmetry rotations to compose to 1.

    Consecutive symmetry flips compose to a rotation by twice the line
    angle, so a target of pi p/q closes after q periods (doubled as a
    fallback if the gap stays large).  Returns the curve, its normalized
    closure gap, and the number of periods used.
    """
    res = closure_residuals(params, target, tol=min(tol, 1e-9))
    if res.norm >= near_tol:
        raise NotClosed(
            f"residual norm {res.norm:.3e} >= {near_tol}; params are not "
            "near-converged, curve would not close"
        )
    q = target.q
    curve = integrate(params, 0.0, q * 2.0 * math.pi, tol=tol,
                      out_resolution=out_resolution)
    gap = curve.closure_gap()
    if gap > 1e-6:
        doubled = integrate(params, 0.0, 2 * q * 2.0 * math.pi, tol=tol,
                            out_resolution=out_resolution)
        gap2 = doubled.closure_gap()
        if gap2 < gap:
            return doubled, gap2, 2 * q
    return curve, gap, q


def _fan_axis(lines: list[SymmetryLine], scale: float):
    """Common intersection point and axis of a coplanar line fan."""
    dirs = np.array([ln.direction for ln in lines])
    bases = np.array([ln.base for ln in lines])
    M = np.zeros((3, 3))
    rhs = np.zeros(3)
    for p, dvec in zip(bases, dirs):
        P = np.eye(3) - np.outer(dvec, dvec)
        M += P
        rhs += P @ p
    point = np.linalg.lstsq(M, rhs, rcond=None)[0]
    dist = [np.linalg.norm((np.eye(3) - np.outer(d, d)) @ (point - p))
            for p, d in zip(bases, dirs)]
    if max(dist) > 1e-5 * scale:
        raise NoAxis(
            f"symmetry lines miss a common point by {max(dist):.3e} "
            f"(scale {scale:.3g})"
        )
    _, sv, Vt = np.linalg.svd(dirs)
    axis = Vt[-1]
    if max(abs(dirs @ axis)) > 1e-5:
        raise NoAxis("symmetry line directions do not lie in a plane")
    return point, axis


def classify(
    curve: SampledCurve,
    lines: list[SymmetryLine] | None = None,
    gap_tol: float = 1e-5,
) -> Classification:
    """Winding counts of a closed curve around its symmetry axis.

    With symmetry lines the axis is the fan's common perpendicular through
    the intersection point; without them (synthetic inputs) it falls back to
    the smallest principal axis of the point cloud.  winding_axis counts
    revolutions of the projection; the meridian hint counts radial
    oscillations over the full traverse (half the sign changes of r - mean).
    """
    if curve.closure_gap() > gap_tol:
        raise NotClosed(f"closure gap {curve.closure_gap():.3e} > {gap_tol}")
    pos = curve.position[:-1] if len(curve) > 1 else curve.position
    if lines:
        point, axis = _fan_axis(lines, curve.diameter())
        phis = []
        u0, w0 = _plane_basis(axis)
        for ln in lines:
            phi = math.atan2(float(ln.direction @ w0), float(ln.direction @ u0)) % math.pi
            phis.append(phi)
        rotation_order = _distinct_mod(phis, math.pi, tol=1e-3)
    else:
        point = pos.mean(axis=0)
        cov = np.cov((pos - point).T)
        eigval, eigvec = np.linalg.eigh(cov)
        axis = eigvec[:, 0]
        rotation_order = 1

    u, w = _plane_basis(axis)
    rel = pos - point
    x = rel @ u
    y = rel @ w
    theta = np.unwrap(np.arctan2(y, x))
    winding = int(round((theta[-1] - theta[0] + _closing_jump(theta)) / (2 * math.pi)))

    r = np.hypot(x, y)
    dev = r - r.mean()
    if np.max(np.abs(dev)) < 1e-6 * max(r.mean(), 1e-30):
        hint = 0
    else:
        signs = np.sign(dev[np.abs(dev) > 1e-9 * max(r.mean(), 1e-30)])
        changes = int(np.sum(signs[1:] != signs[:-1]))
        # wrap-around change between last and first retained sample
        if signs.size > 1 and signs[0] != signs[-1]:
            changes += 1
        hint = changes // 2
    return Classification(
        rotation_order=rotation_order,
        winding_axis=abs(winding),
        winding_meridian_hint=hint,
        axis_point=point,
        axis_direction=axis,
    )


def _closing_jump(theta: np.ndarray) -> float:
    """Angle from the last retained sample back to the first (mod 2 pi)."""
    jump = (theta[0] - theta[-1]) % (2 * math.pi)
    if jump > math.pi:
        jump -= 2 * math.pi
    return jump


def _plane_basis(axis: np.ndarray):
    u = np.cross(axis, [1.0, 0.0, 0.0])
    if np.linalg.norm(u) < 1e-6:
        u = np.cross(axis, [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    return u, np.cross(axis, u)


def _distinct_mod(values: list[float], modulus: float, tol: float) -> int:
    reps: list[float] = []
    for v in values:
        v = v % modulus
        matched = False
        for rep in reps:
            diff = abs(v - rep)
            if min(diff, modulus - diff) < tol:
                matched = True
                break
        if not matched:
            reps.append(v)
    return len(reps)
