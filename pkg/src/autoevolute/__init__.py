"""Workbench for closed constant-curvature space curves that are congruent
to their own evolutes: a modified Frenet integrator, a two-parameter
symmetry-closure solver, verification suites, and an exploration service.
"""

from .profile import CurveParams, FourierOddProfile, VelocityForm, eval_h, eval_tau, eval_v
from .frenet import FrenetSample, SampledCurve, initial_sample, integrate, ode_rhs, renormalize_frame
from .geometry import (Circle3D, TubeMesh, evolute, midpoint_curve, numeric_invariants,
                       osculating_circle, resample_by_arclength, rigid_registration, tube_mesh)
from .closure import (ClosureResiduals, RationalAngle, ScanCandidate, SolveResult, SymmetryLine,
                      assemble_closed_curve, classify, closure_residuals, continuation,
                      grid_scan, newton_solve, symmetry_lines)
from .verify import (CheckReport, verify_arclength_balance, verify_canal_incidence,
                     verify_congruence, verify_constant_curvature, verify_symmetry,
                     verify_torsion_reciprocity)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "CurveParams", "FourierOddProfile", "VelocityForm",
    "eval_h", "eval_v", "eval_tau",
    "FrenetSample", "SampledCurve", "initial_sample", "integrate",
    "ode_rhs", "renormalize_frame",
    "Circle3D", "TubeMesh", "evolute", "midpoint_curve", "numeric_invariants",
    "osculating_circle", "resample_by_arclength", "rigid_registration", "tube_mesh",
    "ClosureResiduals", "RationalAngle", "ScanCandidate", "SolveResult", "SymmetryLine",
    "assemble_closed_curve", "classify", "closure_residuals", "continuation",
    "grid_scan", "newton_solve", "symmetry_lines",
    "CheckReport", "verify_arclength_balance", "verify_canal_incidence",
    "verify_congruence", "verify_constant_curvature", "verify_symmetry",
    "verify_torsion_reciprocity",
    "errors",
]
