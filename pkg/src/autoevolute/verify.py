"""Certification suites for solved curves.

Each check returns a CheckReport rather than raising (except where a
precondition like closedness genuinely blocks the computation), so that the
full suite can run to completion on near-misses during continuation and
point at the worst offenders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .errors import NotClosed, TooFewSamples
from .frenet import SampledCurve
from .closure import SymmetryLine
from .geometry import numeric_invariants, resample_by_arclength, rigid_registration
from .profile import CurveParams

__all__ = [
    "CheckReport",
    "verify_constant_curvature",
    "verify_torsion_reciprocity",
    "verify_congruence",
    "verify_symmetry",
    "verify_arclength_balance",
    "verify_canal_incidence",
]

CLOSED_GAP_TOL = 1e-5


@dataclass
class CheckReport:
    """Outcome of one verification check."""

    name: str
    metric: float
    threshold: float
    passed: bool
    worst_index: int | None = None
    worst_t: float | None = None
    note: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "metric": self.metric,
            "threshold": self.threshold,
            "passed": self.passed,
            "worst_index": self.worst_index,
            "worst_t": self.worst_t,
            "note": self.note,
            "details": dict(self.details),
        }

    def __str__(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        loc = f" worst at t={self.worst_t:.6f}" if self.worst_t is not None else ""
        note = f" ({self.note})" if self.note else ""
        return f"[{flag}] {self.name}: {self.metric:.3e} <= {self.threshold:.3e}{loc}{note}"


def _insufficient(name: str, threshold: float, why: str) -> CheckReport:
    return CheckReport(name=name, metric=math.inf, threshold=threshold,
                       passed=False, note=f"insufficient data: {why}")


def verify_constant_curvature(curve: SampledCurve, tol: float = 1e-4) -> CheckReport:
    """Numeric curvature from positions must stay within tol of kappa."""
    name = "constant_curvature"
    if len(curve) < 64:
        return _insufficient(name, tol, f"{len(curve)} samples < 64")
    try:
        inv = numeric_invariants(curve)
    except TooFewSamples as exc:
        return _insufficient(name, tol, str(exc))
    kappa = curve.params.kappa
    rel = np.abs(inv.kappa - kappa) / kappa
    w = int(np.argmax(rel))
    metric = float(rel[w])
    return CheckReport(
        name=name, metric=metric, threshold=tol, passed=metric <= tol,
        worst_index=int(inv.index[w]), worst_t=float(curve.t[inv.index[w]]),
    )


def verify_torsion_reciprocity(curve: SampledCurve, evolute_curve: SampledCurve,
                               tol: float = 1e-3) -> CheckReport:
    """Numeric check of the evolute relations: equal curvature and
    torsion product kappa^2, both from position data alone."""
    name = "torsion_reciprocity"
    if len(curve) != len(evolute_curve) or not np.allclose(
            curve.t, evolute_curve.t, rtol=0, atol=1e-12):
        return CheckReport(name=name, metric=math.inf, threshold=tol,
                           passed=False, note="t grids differ")
    if len(curve) < 64:
        return _insufficient(name, tol, f"{len(curve)} samples < 64")
    kappa = curve.params.kappa
    inv_c = numeric_invariants(curve)
    inv_e = numeric_invariants(evolute_curve)
    rel_kappa = np.abs(inv_e.kappa - kappa) / kappa
    rel_prod = np.abs(inv_e.tau * inv_c.tau - kappa * kappa) / (kappa * kappa)
    metric_k = float(rel_kappa.max())
    metric_p = float(rel_prod.max())
    w = int(np.argmax(rel_prod))
    metric = max(metric_k, metric_p)
    return CheckReport(
        name=name, metric=metric, threshold=tol, passed=metric <= tol,
        worst_index=int(inv_c.index[w]), worst_t=float(curve.t[inv_c.index[w]]),
        details={"kappa_metric": metric_k, "product_metric": metric_p},
    )


def _closed_arc_spline(curve: SampledCurve):
    s = curve.s - curve.s[0]
    return CubicSpline(s, curve.position, axis=0), float(s[-1])


def verify_congruence(c: SampledCurve, c_tilde: SampledCurve, n: int = 512,
                      tol: float = 1e-5) -> CheckReport:
    """Registration-based congruence of two closed curves.

    Both curves are resampled to n points by their own arc length; every
    cyclic shift in both orientations is registered (Kabsch), then the best
    shift is refined to a continuous arc offset.  The verdict is the
    minimal rmsd relative to the diameter.
    """
    name = "congruence"
    for label, crv in (("curve", c), ("evolute", c_tilde)):
        gap = crv.closure_gap()
        if gap > CLOSED_GAP_TOL:
            raise NotClosed(f"{label} has closure gap {gap:.3e} > {CLOSED_GAP_TOL}")
    A = resample_by_arclength(c, n + 1).position[:-1]
    spline, length = _closed_arc_spline(c_tilde)
    grid = np.arange(n) * (length / n)
    base = spline(grid)

    def rmsd_continuous(delta: float, orient: int) -> float:
        pos = (grid * orient + delta) % length
        return rigid_registration(spline(pos), A).rmsd

    best_rmsd, best_k, best_orient = math.inf, 0, 1
    for orient in (1, -1):
        pts = base if orient == 1 else base[::-1]
        for k in range(n):
            r = rigid_registration(np.roll(pts, -k, axis=0), A)
            if r.rmsd < best_rmsd:
                best_rmsd, best_k, best_orient = r.rmsd, k, orient
    # roll index k -> arc offset for the continuous form
    if best_orient == 1:
        delta0 = (best_k * length / n) % length
    else:
        delta0 = ((n - 1 - best_k) * length / n) % length
    step = length / n
    opt = minimize_scalar(lambda d: rmsd_continuous(d, best_orient),
                          bounds=(delta0 - step, delta0 + step),
                          method="bounded", options={"xatol": 1e-12})
    rmsd = min(best_rmsd, float(opt.fun))
    shift = float(opt.x % length) if opt.fun <= best_rmsd else delta0
    diam = c.diameter()
    metric = rmsd / diam if diam > 0 else rmsd
    return CheckReport(
        name=name, metric=metric, threshold=tol, passed=metric <= tol,
        details={"rmsd": rmsd, "best_shift_arclength": shift,
                 "orientation": best_orient, "samples": n},
    )


def verify_symmetry(curve: SampledCurve, line: SymmetryLine,
                    tol: float = 1e-7) -> CheckReport:
    """Half-turn about the symmetry line must map the curve onto itself.

    Compares samples at t* + u with the rotated samples at t* - u for every
    u the grid covers on [t* - pi, t* + pi].
    """
    name = f"symmetry_t{line.index}"
    t_star = line.t_star
    if curve.t[0] > t_star - math.pi + 1e-9 or curve.t[-1] < t_star + math.pi - 1e-9:
        return CheckReport(name=name, metric=math.inf, threshold=tol, passed=False,
                           note="curve does not cover [t*-pi, t*+pi]")
    try:
        i_star = curve.index_at(t_star)
    except KeyError:
        return CheckReport(name=name, metric=math.inf, threshold=tol, passed=False,
                           note="no sample exactly at t*")
    d = line.direction
    R = 2.0 * np.outer(d, d) - np.eye(3)
    n = len(curve)
    k_max = min(i_star, n - 1 - i_star)
    plus = np.arange(i_star, i_star + k_max + 1)
    minus = np.arange(i_star, i_star - k_max - 1, -1)
    # keep only parameter-symmetric pairs inside the half-turn window
    du_plus = curve.t[plus] - t_star
    du_minus = t_star - curve.t[minus]
    ok = (np.abs(du_plus - du_minus) < 1e-9) & (du_plus <= math.pi + 1e-9)
    plus, minus = plus[ok], minus[ok]
    rotated = (curve.position[minus] - line.base) @ R.T + line.base
    dev = np.linalg.norm(rotated - curve.position[plus], axis=1)
    w = int(np.argmax(dev))
    diam = curve.diameter()
    metric = float(dev[w]) / diam if diam > 0 else float(dev[w])
    return CheckReport(
        name=name, metric=metric, threshold=tol, passed=metric <= tol,
        worst_index=int(plus[w]), worst_t=float(curve.t[plus[w]]),
        details={"pairs": int(plus.size)},
    )


def verify_arclength_balance(params: CurveParams, tol: float = 1e-10) -> CheckReport:
    """Lengths of the curve and of its evolute agree over a period.

    Certifies both the consequence (total and half-arc lengths coincide, by
    quadrature) and the premise that forces it, the pointwise reciprocity
    v(t) v(t+pi) = 1.  The premise is the discriminating part: every pure
    sine series obeys the reflected identity v(t+pi) = 1/v(pi-t), so the
    length integrals cancel even for forged even-harmonic profiles, while
    the pointwise product only holds with odd harmonics.
    """
    name = "arclength_balance"
    prof = params.profile

    def iv(f, lo, hi):
        val, _ = quad(f, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    v = prof.v
    total_c = iv(v, 0.0, 2.0 * math.pi)
    total_e = iv(lambda t: 1.0 / v(t), 0.0, 2.0 * math.pi)
    half_c = iv(v, 0.0, math.pi)
    half_e_2 = iv(lambda t: 1.0 / v(t), math.pi, 2.0 * math.pi)
    t = np.linspace(0.0, 2.0 * math.pi, 512, endpoint=False)
    reciprocity = float(np.abs(np.asarray(v(t)) * np.asarray(v(t + math.pi)) - 1.0).max())
    metric = max(abs(total_c - total_e) / total_c,
                 abs(half_c - half_e_2) / total_c,
                 reciprocity)
    return CheckReport(
        name=name, metric=metric, threshold=tol, passed=metric <= tol,
        details={"length_curve": total_c, "length_evolute": total_e,
                 "half_defect": abs(half_c - half_e_2) / total_c,
                 "reciprocity_defect": reciprocity},
    )


def verify_canal_incidence(c: SampledCurve, c_tilde: SampledCurve, kappa: float,
                           tol: float = 1e-12) -> CheckReport:
    """Both curves lie on the canal surface: distance 1/(2 kappa) from the
    midpoint curve, with the principal normal along the radial direction."""
    name = "canal_incidence"
    if len(c) != len(c_tilde):
        return CheckReport(name=name, metric=math.inf, threshold=tol,
                           passed=False, note="t grids differ")
    m = 0.5 * (c.position + c_tilde.position)
    r = 1.0 / (2.0 * kappa)
    dev_c = np.abs(np.linalg.norm(c.position - m, axis=1) - r)
    dev_e = np.abs(np.linalg.norm(c_tilde.position - m, axis=1) - r)
    radial = c.position - m
    rn = np.linalg.norm(radial, axis=1, keepdims=True)
    rn[rn == 0] = 1.0
    u = radial / rn
    sin_angle = np.linalg.norm(np.cross(c.N, u), axis=1)
    ang = np.arcsin(np.clip(sin_angle, 0.0, 1.0))
    metric_arr = np.maximum(np.maximum(dev_c, dev_e), ang)
    w = int(np.argmax(metric_arr))
    metric = float(metric_arr[w])
    return CheckReport(
        name=name, metric=metric, threshold=tol, passed=metric <= tol,
        worst_index=w, worst_t=float(c.t[w]),
        details={"distance_c": float(dev_c.max()),
                 "distance_evolute": float(dev_e.max()),
                 "normal_angle": float(ang.max())},
    )
