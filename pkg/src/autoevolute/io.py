"""File formats: curve CSV/JSON documents, OBJ meshes, job configuration.

All exports are deterministic: identical inputs produce byte-identical
files (17-significant-digit decimals in CSV, shortest round-trip reprs in
JSON, line-feed newlines everywhere).  Every format except OBJ has a reader
that reproduces the numbers bitwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .closure import ClosureResiduals, RationalAngle, SolveResult
from .frenet import SampledCurve
from .geometry import TubeMesh
from .profile import CurveParams, FourierOddProfile, VelocityForm

__all__ = [
    "CSV_HEADER",
    "JobConfig",
    "CurveDocument",
    "export_curve_csv",
    "read_curve_csv",
    "export_curve_json",
    "read_curve_json",
    "export_mesh_obj",
    "curve_document",
]

CSV_HEADER = "t,x,y,z,Tx,Ty,Tz,Nx,Ny,Nz,Bx,By,Bz,v,tau,s,s_tilde"

_SAMPLE_COLUMNS = CSV_HEADER.split(",")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _sample_matrix(curve: SampledCurve) -> np.ndarray:
    return np.column_stack([
        curve.t, curve.position, curve.T, curve.N, curve.B,
        curve.v, curve.tau, curve.s, curve.s_tilde,
    ])


def _curve_from_matrix(params: CurveParams, rows: np.ndarray, periods: int) -> SampledCurve:
    return SampledCurve(
        params=params, t=rows[:, 0], position=rows[:, 1:4],
        T=rows[:, 4:7], N=rows[:, 7:10], B=rows[:, 10:13],
        v=rows[:, 13], tau=rows[:, 14], s=rows[:, 15], s_tilde=rows[:, 16],
        periods=periods,
    )


def export_curve_csv(curve: SampledCurve, path) -> None:
    """One row per sample, header exactly CSV_HEADER, 17 significant digits."""
    rows = _sample_matrix(curve)
    lines = [CSV_HEADER]
    lines.extend(",".join(_g17(x) for x in row) for row in rows)
    _write_text(path, "\n".join(lines) + "\n")


def read_curve_csv(path) -> dict[str, np.ndarray]:
    """Columns of a curve CSV keyed by header name (bitwise round-trip)."""
    text = Path(path).read_text()
    lines = [ln for ln in text.split("\n") if ln]
    if lines[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header in {path}")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return {name: data[:, i] for i, name in enumerate(_SAMPLE_COLUMNS)}


def _params_dict(params: CurveParams) -> dict:
    prof = params.profile
    return {
        "kappa": params.kappa,
        "a": prof.amplitude,
        "b3": prof.b3,
        "harmonics": [[int(k), float(w)] for k, w in prof.coefficients],
        "form": prof.form.value,
    }


def _params_from_dict(d: dict) -> CurveParams:
    harmonics = d.get("harmonics")
    if harmonics:
        prof = FourierOddProfile(
            amplitude=d["a"],
            coefficients=tuple((int(k), float(w)) for k, w in harmonics),
            form=VelocityForm.parse(d.get("form", "sqrt")),
        )
    else:
        prof = FourierOddProfile.base(d["a"], d.get("b3", 0.0), d.get("form", "sqrt"))
    return CurveParams(kappa=d["kappa"], profile=prof)


@dataclass
class CurveDocument:
    """Self-describing curve file: parameters travel with the samples."""

    params: CurveParams
    curve: SampledCurve
    target: RationalAngle | None = None
    residuals: dict | None = None
    verification: dict | None = None
    solve: dict | None = None
    closure: dict | None = None


def curve_document(
    curve: SampledCurve,
    target: RationalAngle | None = None,
    residuals: ClosureResiduals | None = None,
    verification: dict | None = None,
    solve: SolveResult | None = None,
    closure: dict | None = None,
) -> dict:
    """Assemble the JSON document for a curve."""
    doc = {
        "params": _params_dict(curve.params),
        "target": {"p": target.p, "q": target.q} if target else None,
        "residuals": (
            {"d": residuals.d, "angle_defect": residuals.angle_defect,
             "angle_measured": residuals.angle_measured}
            if residuals else None
        ),
        "periods": curve.periods,
        "samples": _sample_matrix(curve).tolist(),
        "verification": verification,
    }
    if solve is not None:
        doc["solve"] = {
            "residual_norm": solve.residual_norm,
            "iterations": solve.iterations,
            "converged": solve.converged,
            "trace": [list(entry) for entry in solve.trace],
        }
    if closure is not None:
        doc["closure"] = closure
    return doc


def export_curve_json(doc: dict, path) -> None:
    """Write a curve document (see curve_document) deterministically."""
    _write_text(path, json.dumps(doc, indent=1, sort_keys=True) + "\n")


def read_curve_json(path) -> CurveDocument:
    raw = json.loads(Path(path).read_text())
    params = _params_from_dict(raw["params"])
    rows = np.asarray(raw["samples"], dtype=float)
    curve = _curve_from_matrix(params, rows, int(raw.get("periods", 1)))
    target = None
    if raw.get("target"):
        target = RationalAngle(int(raw["target"]["p"]), int(raw["target"]["q"]))
    return CurveDocument(
        params=params, curve=curve, target=target,
        residuals=raw.get("residuals"), verification=raw.get("verification"),
        solve=raw.get("solve"), closure=raw.get("closure"),
    )


def export_mesh_obj(mesh: TubeMesh, path) -> None:
    """Wavefront OBJ: positions, normals, triangles as f i//i j//j k//k."""
    lines = []
    for vx, vy, vz in mesh.vertices:
        lines.append(f"v {_g17(vx)} {_g17(vy)} {_g17(vz)}")
    for nx, ny, nz in mesh.normals:
        lines.append(f"vn {_g17(nx)} {_g17(ny)} {_g17(nz)}")
    for a, b, c in mesh.faces + 1:  # OBJ is 1-indexed
        lines.append(f"f {a}//{a} {b}//{b} {c}//{c}")
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path, text: str) -> None:
    p = Path(path)
    try:
        p.write_text(text, newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {p}: {exc}") from exc


@dataclass
class JobConfig:
    """Job description: profile, target, tolerances, scan and family ranges.

    Loadable from a YAML file; CLI flags override file values.
    """

    form: str = "sqrt"
    a: float = 0.5
    b3: float = 0.0
    harmonics: list = field(default_factory=list)  # extra [k, w] pairs
    kappa: float = 1.0
    target_p: int = 1
    target_q: int = 3
    tol: float = 1e-10
    preview_tol: float = 1e-7
    out_resolution: int = 1024
    kappa_range: tuple = (0.5, 3.0)
    a_range: tuple = (0.1, 1.5)
    grid: int = 16
    b3_values: list = field(default_factory=lambda: [0.0])
    b3_min: float = 0.0
    b3_max: float = 0.0
    b3_step: float = 0.02
    ring_size: int = 24
    outdir: str = "."

    def __post_init__(self):
        if math.gcd(self.target_p, self.target_q) != 1:
            raise ValueError(f"target {self.target_p}/{self.target_q} must be coprime")
        if self.target_q > 32:
            raise ValueError("target denominator limited to 32")
        if not (1e-13 <= self.tol <= 1e-3):
            raise ValueError("tol outside [1e-13, 1e-3]")
        if self.out_resolution < 4:
            raise ValueError("out_resolution must be >= 4")
        if self.grid < 4:
            raise ValueError("grid must be >= 4")

    @property
    def target(self) -> RationalAngle:
        return RationalAngle(self.target_p, self.target_q)

    def params(self) -> CurveParams:
        coeffs = [(1, 1.0), (3, float(self.b3))]
        coeffs += [(int(k), float(w)) for k, w in self.harmonics]
        prof = FourierOddProfile(amplitude=self.a, coefficients=tuple(coeffs),
                                 form=VelocityForm.parse(self.form))
        return CurveParams(kappa=self.kappa, profile=prof)

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "JobConfig":
        raw = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(raw, dict):
            raise ValueError(f"config {path} must be a mapping")
        if "target" in raw and isinstance(raw["target"], str):
            t = RationalAngle.parse(raw.pop("target"))
            raw["target_p"], raw["target_q"] = t.p, t.q
        merged = {**raw, **(overrides or {})}
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(merged) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**merged)
