"""Derived geometric objects: evolute, midpoint curve, invariants, meshes.

The evolute of a constant-curvature curve sits at c + N/kappa, and its frame
is the original frame with tangent and binormal swapped (torsion is positive
throughout this family, so the sign factor in the swap is always +1) and the
normal negated.  That frame swap makes the evolute of the evolute return to
the original positions exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NonMonotoneArclength, TooFewSamples
from .frenet import FrenetSample, SampledCurve, _renorm_arrays

__all__ = [
    "Circle3D",
    "TubeMesh",
    "RegistrationResult",
    "CurveInvariants",
    "evolute",
    "midpoint_curve",
    "canal_tube",
    "osculating_circle",
    "numeric_invariants",
    "resample_by_arclength",
    "rigid_registration",
    "tube_mesh",
]


@dataclass(frozen=True)
class Circle3D:
    """Circle given by center, radius and the unit normal of its plane."""

    center: np.ndarray
    radius: float
    plane_normal: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.plane_normal, dtype=float)
        norm = float(np.linalg.norm(n))
        if norm < 1e-12:
            raise ValueError("plane normal must be nonzero")
        object.__setattr__(self, "plane_normal", n / norm)
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def points(self, count: int = 128) -> np.ndarray:
        """Sampled polyline of the circle (for export/rendering)."""
        n = self.plane_normal
        u = np.cross(n, [1.0, 0.0, 0.0])
        if np.linalg.norm(u) < 1e-6:
            u = np.cross(n, [0.0, 1.0, 0.0])
        u /= np.linalg.norm(u)
        w = np.cross(n, u)
        ang = np.linspace(0.0, 2.0 * np.pi, count)
        return (self.center[None, :]
                + self.radius * (np.cos(ang)[:, None] * u[None, :]
                                 + np.sin(ang)[:, None] * w[None, :]))


@dataclass
class TubeMesh:
    """Triangle mesh of a constant-radius tube around a center polyline."""

    vertices: np.ndarray   # (rings*ring_size, 3)
    normals: np.ndarray    # (rings*ring_size, 3), unit outward
    faces: np.ndarray      # (m, 3) int vertex indices
    rings: int
    ring_size: int
    radius_warning: bool = False  # tube radius exceeds min curvature radius

    def validate(self):
        if self.vertices.shape[0] != self.rings * self.ring_size:
            raise ValueError("vertex count does not match rings * ring_size")
        if self.faces.size and (self.faces.min() < 0
                                or self.faces.max() >= len(self.vertices)):
            raise ValueError("face index out of range")


@dataclass
class RegistrationResult:
    """Least-squares rigid motion mapping point set A onto point set B."""

    rotation: np.ndarray     # (3, 3), proper orthogonal
    translation: np.ndarray  # (3,)
    rmsd: float
    degenerate: bool = False  # collinear input; minimizer still valid

    def apply(self, points: np.ndarray) -> np.ndarray:
        return points @ self.rotation.T + self.translation


@dataclass
class CurveInvariants:
    """Finite-difference curvature/torsion on the interior sample range."""

    index: np.ndarray   # sample indices the estimates refer to
    kappa: np.ndarray
    tau: np.ndarray


def evolute(curve: SampledCurve) -> SampledCurve:
    """The evolute as a sampled curve on the same parameter grid.

    Per-sample fields describe the evolute itself: v is the evolute's
    parametric speed 1/v, tau is kappa^2 / tau, and the two arc-length
    accumulators swap roles.  `params` still names the generating curve's
    family.
    """
    kappa = curve.params.kappa
    return curve.replace_arrays(
        position=curve.position + curve.N / kappa,
        T=curve.B.copy(),
        N=-curve.N,
        B=curve.T.copy(),
        v=1.0 / curve.v,
        tau=kappa * kappa / curve.tau,
        s=curve.s_tilde.copy(),
        s_tilde=curve.s.copy(),
    )


def midpoint_curve(curve: SampledCurve) -> SampledCurve:
    """Midpoints (c + c~)/2 = c + N/(2 kappa); spheres of the canal surface
    are centered here.  Frames and scalars are carried from c as markers."""
    return curve.replace_arrays(
        position=curve.position + curve.N / (2.0 * curve.params.kappa),
    )


def canal_tube(curve: SampledCurve, ring_size: int = 24) -> TubeMesh:
    """Tube of radius 1/(2 kappa) around the midpoint curve.

    This is the canal surface enveloping the spheres centered on the
    midpoint curve; both the curve and its evolute lie on it.  Tangents of
    the midpoint curve are supplied analytically, (v T + B/v)/2 up to
    normalization, since the midpoint curve's stored frames are markers.
    """
    center = midpoint_curve(curve)
    tang = curve.v[:, None] * curve.T + curve.B / curve.v[:, None]
    return tube_mesh(center, 1.0 / (2.0 * curve.params.kappa), ring_size,
                     tangents=tang)


def osculating_circle(sample: FrenetSample, kappa: float) -> Circle3D:
    """Osculating circle at one sample; its center is the evolute point."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    return Circle3D(
        center=sample.position + sample.N / kappa,
        radius=1.0 / kappa,
        plane_normal=sample.B,
    )


def _uniform_spacing(t: np.ndarray) -> float | None:
    dt = np.diff(t)
    d0 = float(np.median(dt))
    if np.max(np.abs(dt - d0)) <= 1e-9 * max(d0, 1.0):
        return d0
    return None


def _derivatives_uniform(x: np.ndarray, h: float):
    """4th-order centered first/second/third derivatives; 3-sample margins."""
    n = x.shape[0]
    i = np.arange(3, n - 3)
    d1 = (-x[i + 2] + 8 * x[i + 1] - 8 * x[i - 1] + x[i - 2]) / (12 * h)
    d2 = (-x[i + 2] + 16 * x[i + 1] - 30 * x[i] + 16 * x[i - 1] - x[i - 2]) / (12 * h * h)
    d3 = (-x[i + 3] + 8 * x[i + 2] - 13 * x[i + 1]
          + 13 * x[i - 1] - 8 * x[i - 2] + x[i - 3]) / (8 * h ** 3)
    return i, d1, d2, d3


def numeric_invariants(curve: SampledCurve) -> CurveInvariants:
    """Curvature and torsion estimated from positions alone.

    Uses the parametrization-free quotients kappa = |c' x c''| / |c'|^3 and
    tau = det(c', c'', c''') / |c' x c''|^2 with centered differences in t.
    Endpoint margins are excluded.
    """
    n = len(curve)
    if n < 7:
        raise TooFewSamples(f"need at least 7 samples, got {n}")
    h = _uniform_spacing(curve.t)
    if h is not None:
        idx, d1, d2, d3 = _derivatives_uniform(curve.position, h)
    else:
        # non-uniform grid: chained 2nd-order gradients, wider exclusion
        g1 = np.gradient(curve.position, curve.t, axis=0)
        g2 = np.gradient(g1, curve.t, axis=0)
        g3 = np.gradient(g2, curve.t, axis=0)
        idx = np.arange(3, n - 3)
        d1, d2, d3 = g1[idx], g2[idx], g3[idx]
    cross = np.cross(d1, d2)
    cross_sq = np.sum(cross * cross, axis=1)
    speed = np.linalg.norm(d1, axis=1)
    kappa = np.sqrt(cross_sq) / speed**3
    tau = np.sum(cross * d3, axis=1) / cross_sq
    return CurveInvariants(index=idx, kappa=kappa, tau=tau)


def resample_by_arclength(curve: SampledCurve, n: int) -> SampledCurve:
    """Resample to n points equally spaced in the curve's own arc length.

    Interpolation is a cubic spline of the stored samples against s; frames
    are re-orthonormalized after interpolation.  The s range (total length)
    is preserved exactly.
    """
    if n < 2:
        raise ValueError("need n >= 2 output samples")
    s = curve.s
    if np.any(np.diff(s) <= 0):
        raise NonMonotoneArclength("arc length must be strictly increasing")
    s_new = np.linspace(s[0], s[-1], n)
    cols = {}
    for name in ("position", "T", "N", "B"):
        cols[name] = CubicSpline(s, getattr(curve, name), axis=0)(s_new)
    T, N, B = _renorm_arrays(cols["T"], cols["N"], cols["B"])
    t_new = CubicSpline(s, curve.t)(s_new)
    return SampledCurve(
        params=curve.params,
        t=t_new,
        position=cols["position"],
        T=T, N=N, B=B,
        v=np.asarray(curve.params.profile.v(t_new), dtype=float)
        if _fields_follow_params(curve) else CubicSpline(s, curve.v)(s_new),
        tau=CubicSpline(s, curve.tau)(s_new),
        s=s_new,
        s_tilde=CubicSpline(s, curve.s_tilde)(s_new),
        periods=curve.periods,
    )


def _fields_follow_params(curve: SampledCurve) -> bool:
    """True when the stored v field matches the profile evaluator (i.e. the
    curve is a direct integrator output, not a derived evolute)."""
    probe = np.asarray(curve.params.profile.v(curve.t[:4]), dtype=float)
    return bool(np.allclose(probe, curve.v[:4], rtol=1e-12, atol=1e-12))


def rigid_registration(A: np.ndarray, B: np.ndarray) -> RegistrationResult:
    """Kabsch alignment: proper rotation R and translation with B ~ R A + t.

    Never returns a reflection; for collinear input the result is flagged
    degenerate (the in-line component of the rotation is arbitrary).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape or A.ndim != 2 or A.shape[1] != 3:
        raise ValueError("point lists must both have shape (n, 3)")
    if A.shape[0] < 3:
        raise ValueError("need at least 3 points")
    cA = A.mean(axis=0)
    cB = B.mean(axis=0)
    H = (A - cA).T @ (B - cB)
    U, sing, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    D = np.diag([1.0, 1.0, d if d != 0 else 1.0])
    R = Vt.T @ D @ U.T
    t = cB - R @ cA
    diff = A @ R.T + t - B
    rmsd = float(np.sqrt(np.mean(np.sum(diff * diff, axis=1))))
    degenerate = bool(sing[0] <= 0 or sing[1] <= 1e-12 * sing[0])
    return RegistrationResult(rotation=R, translation=t, rmsd=rmsd,
                              degenerate=degenerate)


def _rmf_frames(points: np.ndarray, tangents: np.ndarray, ref0: np.ndarray):
    """Rotation-minimizing normals along a polyline (double-reflection)."""
    n = len(points)
    r = np.empty((n, 3))
    r0 = ref0 - (ref0 @ tangents[0]) * tangents[0]
    nrm = np.linalg.norm(r0)
    if nrm < 1e-9:
        # reference collapsed onto the tangent; pick any perpendicular
        r0 = np.cross(tangents[0], [1.0, 0.0, 0.0])
        if np.linalg.norm(r0) < 1e-6:
            r0 = np.cross(tangents[0], [0.0, 1.0, 0.0])
        nrm = np.linalg.norm(r0)
    r[0] = r0 / nrm
    for i in range(n - 1):
        v1 = points[i + 1] - points[i]
        c1 = v1 @ v1
        if c1 < 1e-30:
            r[i + 1] = r[i]
            continue
        rL = r[i] - (2.0 / c1) * (v1 @ r[i]) * v1
        tL = tangents[i] - (2.0 / c1) * (v1 @ tangents[i]) * v1
        v2 = tangents[i + 1] - tL
        c2 = v2 @ v2
        if c2 < 1e-30:
            r[i + 1] = rL
        else:
            r[i + 1] = rL - (2.0 / c2) * (v2 @ rL) * v2
        # keep exactly perpendicular to the tangent
        r[i + 1] -= (r[i + 1] @ tangents[i + 1]) * tangents[i + 1]
        r[i + 1] /= np.linalg.norm(r[i + 1])
    return r


def _min_circumradius(points: np.ndarray) -> float:
    a = points[:-2]
    b = points[1:-1]
    c = points[2:]
    ab = np.linalg.norm(b - a, axis=1)
    bc = np.linalg.norm(c - b, axis=1)
    ca = np.linalg.norm(a - c, axis=1)
    area2 = np.linalg.norm(np.cross(b - a, c - a), axis=1)  # 2 * area
    with np.errstate(divide="ignore", invalid="ignore"):
        R = ab * bc * ca / (2.0 * area2)
    R = R[np.isfinite(R)]
    return float(R.min()) if R.size else np.inf


def tube_mesh(center: SampledCurve, radius: float, ring_size: int = 24,
              tangents: np.ndarray | None = None) -> TubeMesh:
    """Constant-radius tube using rotation-minimizing (untwisted) frames.

    For a closed center curve the frame holonomy is spread evenly over the
    rings so the seam ring coincides with the first ring.  `tangents`
    overrides the finite-difference tangent estimate; pass exact tangents
    when the center's stored frames are only markers (midpoint curves).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if ring_size < 3:
        raise ValueError("ring_size must be >= 3")
    pts = center.position
    n = len(center)
    if n < 4:
        raise TooFewSamples("need at least 4 center samples")

    if tangents is None:
        tangents = np.gradient(pts, center.t, axis=0)
    else:
        tangents = np.asarray(tangents, dtype=float)
        if tangents.shape != pts.shape:
            raise ValueError("tangents must match the center samples")
    tn = np.linalg.norm(tangents, axis=1, keepdims=True)
    tn[tn == 0] = 1.0
    tangents = tangents / tn

    u = _rmf_frames(pts, tangents, center.N[0])
    closed = bool(np.linalg.norm(pts[-1] - pts[0]) <= 1e-6 * max(center.diameter(), 1e-30))
    if closed:
        # holonomy: angle from transported end frame back to the start frame
        cos_a = float(np.clip(u[-1] @ u[0], -1.0, 1.0))
        sin_a = float(np.cross(u[-1], u[0]) @ tangents[0])
        holo = np.arctan2(sin_a, cos_a)
        spread = holo * (np.arange(n) / (n - 1))
    else:
        spread = np.zeros(n)
    w = np.cross(tangents, u)

    ang = 2.0 * np.pi * np.arange(ring_size) / ring_size
    ca = np.cos(ang)
    sa = np.sin(ang)
    verts = np.empty((n * ring_size, 3))
    norms = np.empty_like(verts)
    for i in range(n):
        ui = np.cos(spread[i]) * u[i] + np.sin(spread[i]) * w[i]
        wi = np.cross(tangents[i], ui)
        ring_dir = ca[:, None] * ui[None, :] + sa[:, None] * wi[None, :]
        norms[i * ring_size:(i + 1) * ring_size] = ring_dir
        verts[i * ring_size:(i + 1) * ring_size] = pts[i] + radius * ring_dir
    if closed:
        # seal the seam bitwise
        verts[-ring_size:] = verts[:ring_size]
        norms[-ring_size:] = norms[:ring_size]

    faces = []
    for i in range(n - 1):
        base0 = i * ring_size
        base1 = (i + 1) * ring_size
        for j in range(ring_size):
            jn = (j + 1) % ring_size
            faces.append((base0 + j, base1 + j, base1 + jn))
            faces.append((base0 + j, base1 + jn, base0 + jn))
    mesh = TubeMesh(
        vertices=verts,
        normals=norms,
        faces=np.asarray(faces, dtype=np.int64),
        rings=n,
        ring_size=ring_size,
        radius_warning=bool(radius > _min_circumradius(pts)),
    )
    mesh.validate()
    return mesh
