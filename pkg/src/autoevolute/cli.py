"""Command-line surface.

Exit codes: 0 success, 1 non-convergence or verification failure, 2 usage
errors (argparse's own convention).  Long jobs report progress on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import verify as verify_mod
from .closure import (MAX_TARGET_DENOMINATOR, RationalAngle, SolveResult,
                      assemble_closed_curve, classify, closure_residuals,
                      continuation, grid_scan, newton_solve, symmetry_lines)
from .errors import AutoevoluteError, FamilyTruncated, NoConvergence, NotClosed
from .frenet import integrate
from .geometry import canal_tube, evolute, midpoint_curve, tube_mesh
from .io import (JobConfig, curve_document, export_curve_csv, export_curve_json,
                 export_mesh_obj, read_curve_json)
from .profile import CurveParams, FourierOddProfile, VelocityForm

_TWO_PI = 2.0 * math.pi


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _range(text: str) -> tuple[float, float]:
    lo, hi = text.split(":")
    return float(lo), float(hi)


def _target(text: str) -> RationalAngle:
    angle = RationalAngle.parse(text)
    if angle.q > MAX_TARGET_DENOMINATOR:
        raise argparse.ArgumentTypeError(
            f"target denominator limited to {MAX_TARGET_DENOMINATOR}")
    return angle


def _params_from_args(args) -> CurveParams:
    coeffs = [(1, 1.0), (3, args.b3)]
    for item in (args.harmonics or "").split(","):
        if item.strip():
            k, w = item.split(":")
            coeffs.append((int(k), float(w)))
    prof = FourierOddProfile(amplitude=args.a, coefficients=tuple(coeffs),
                             form=VelocityForm.parse(args.form))
    return CurveParams(kappa=args.kappa, profile=prof)


def _add_profile_args(p, config: JobConfig):
    p.add_argument("--kappa", type=float, default=config.kappa)
    p.add_argument("--a", type=float, default=config.a)
    p.add_argument("--b3", type=float, default=config.b3)
    p.add_argument("--form", default=config.form, choices=["sqrt", "exp"])
    p.add_argument("--harmonics", default="",
                   help="extra odd harmonics as 'k:w,k:w'")


def cmd_eval(args, config) -> int:
    params = _params_from_args(args)
    t1 = args.periods * _TWO_PI
    curve = integrate(params, 0.0, t1, tol=args.tol, out_resolution=args.samples)
    out = Path(args.out)
    if out.suffix == ".json":
        res = closure_residuals(params, args.target, tol=args.tol)
        export_curve_json(curve_document(curve, target=args.target, residuals=res), out)
    else:
        export_curve_csv(curve, out)
    _log(f"wrote {len(curve)} samples to {out}")
    return 0


def cmd_scan(args, config) -> int:
    all_cands = []
    for b3 in args.b3_values:
        _log(f"scanning b3={b3:+.4f} ...")
        cands = grid_scan(args.form, b3, args.kappa_range, args.a_range,
                          args.grid, args.target, tol=args.scan_tol)
        all_cands.extend(cands)
    all_cands.sort(key=lambda c: (c.norm, c.kappa, c.a, c.b3))
    top = all_cands[:args.top]
    doc = {
        "target": {"p": args.target.p, "q": args.target.q},
        "form": args.form,
        "candidates": [
            {"kappa": c.kappa, "a": c.a, "b3": c.b3, "d": c.d,
             "angle_defect": c.angle_defect, "norm": c.norm}
            for c in top
        ],
    }
    Path(args.out).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    for c in top[:5]:
        _log(f"  kappa={c.kappa:.4f} a={c.a:.4f} b3={c.b3:+.3f} norm={c.norm:.4f}")
    _log(f"wrote {len(top)} candidates to {args.out}")
    return 0


def _solution_document(sol, target, tol, out_resolution, with_verification=True):
    curve, gap, order = assemble_closed_curve(sol.params, target, tol=tol,
                                              out_resolution=out_resolution)
    res = closure_residuals(sol.params, target, tol=tol)
    verification = None
    if with_verification:
        ev = evolute(curve)
        # line 1 (t* = 3pi/2) always has its full half-turn window inside
        # the assembled span; line 0 would need t < 0
        lines = symmetry_lines(sol.params, count=2, tol=tol)
        checks = [
            verify_mod.verify_constant_curvature(curve),
            verify_mod.verify_torsion_reciprocity(curve, ev),
            verify_mod.verify_congruence(curve, ev),
            verify_mod.verify_symmetry(curve, lines[1]),
            verify_mod.verify_arclength_balance(sol.params),
            verify_mod.verify_canal_incidence(curve, ev, sol.params.kappa),
        ]
        verification = {c.name: c.to_dict() for c in checks}
    closure_info = {"gap": gap, "rotation_order": order}
    try:
        cls = classify(curve, lines=symmetry_lines(sol.params, count=2 * order, tol=tol))
        closure_info.update({
            "winding_axis": cls.winding_axis,
            "winding_meridian_hint": cls.winding_meridian_hint,
        })
    except (NotClosed, AutoevoluteError):
        pass
    doc = curve_document(curve, target=target, residuals=res,
                         verification=verification, solve=sol,
                         closure=closure_info)
    all_passed = verification is None or all(v["passed"] for v in verification.values())
    return doc, all_passed


def cmd_solve(args, config) -> int:
    target = args.target
    if args.from_scan:
        scan = json.loads(Path(args.from_scan).read_text())
        cand = scan["candidates"][args.candidate]
        form = scan.get("form", args.form)
        initial = CurveParams(
            kappa=cand["kappa"],
            profile=FourierOddProfile.base(cand["a"], cand["b3"], form),
        )
    else:
        initial = _params_from_args(args)
    try:
        sol = newton_solve(initial, target, tol=args.tol, max_iter=args.max_iter,
                           callback=lambda i, p, r: _log(
                               f"  iter {i}: kappa={p.kappa:.10f} "
                               f"a={p.profile.amplitude:.10f} norm={r.norm:.3e}"))
    except NoConvergence as exc:
        _log(f"solve failed: {exc}")
        if args.out and exc.result is not None:
            trace_doc = {
                "converged": False,
                "reason": str(exc),
                "trace": [list(e) for e in exc.result.trace],
            }
            Path(args.out).write_text(json.dumps(trace_doc, indent=1) + "\n")
        return 1
    _log(f"converged: kappa={sol.kappa:.12f} a={sol.a:.12f} "
         f"norm={sol.residual_norm:.3e} in {sol.iterations} iterations")
    doc, ok = _solution_document(sol, target, args.tol, args.samples,
                                 with_verification=not args.no_verify)
    export_curve_json(doc, args.out)
    _log(f"wrote solution document to {args.out}")
    return 0 if ok else 1


def cmd_family(args, config) -> int:
    base = read_curve_json(args.start)
    if not base.solve or not base.solve.get("converged"):
        _log("family start document is not a converged solution")
        return 1
    target = base.target or args.target
    start = SolveResult(
        params=base.params, target=target,
        residual_norm=base.solve["residual_norm"],
        iterations=base.solve["iterations"],
        trace=[tuple(e) for e in base.solve["trace"]],
        converged=True,
    )
    truncated = None
    try:
        members = continuation(start, (args.b3_min, args.b3_max), args.step, target,
                               tol=args.tol)
    except FamilyTruncated as exc:
        members = exc.results
        truncated = {"frontier_b3": exc.frontier_b3, "reason": str(exc)}
        _log(f"family truncated: {exc}")
    doc = {
        "target": {"p": target.p, "q": target.q},
        "truncated": truncated,
        "members": [
            {"kappa": m.kappa, "a": m.a, "b3": m.b3,
             "residual_norm": m.residual_norm, "iterations": m.iterations}
            for m in members
        ],
    }
    Path(args.out).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    _log(f"wrote family with {len(members)} members to {args.out}")
    return 0 if truncated is None else 1


def cmd_verify(args, config) -> int:
    doc = read_curve_json(args.curve)
    params = doc.params
    target = doc.target
    curve = doc.curve
    if curve.closure_gap() > 1e-5 and target is not None:
        _log("stored curve is not closed; re-assembling from parameters")
        curve, _, _ = assemble_closed_curve(params, target, tol=args.tol,
                                            out_resolution=args.samples)
    ev = evolute(curve)
    lines = symmetry_lines(params, count=2, tol=args.tol)
    checks = [
        verify_mod.verify_constant_curvature(curve),
        verify_mod.verify_torsion_reciprocity(curve, ev),
        verify_mod.verify_congruence(curve, ev),
        verify_mod.verify_symmetry(curve, lines[1]),
        verify_mod.verify_arclength_balance(params),
        verify_mod.verify_canal_incidence(curve, ev, params.kappa),
    ]
    for c in checks:
        print(str(c))
    if args.out:
        report = {c.name: c.to_dict() for c in checks}
        Path(args.out).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    return 0 if all(c.passed for c in checks) else 1


def cmd_export(args, config) -> int:
    doc = read_curve_json(args.curve)
    curve = doc.curve
    if args.csv:
        export_curve_csv(curve, args.csv)
        _log(f"wrote {args.csv}")
    if args.mesh:
        if args.radius:
            mesh = tube_mesh(midpoint_curve(curve), args.radius, args.ring_size)
        else:
            mesh = canal_tube(curve, args.ring_size)
        if mesh.radius_warning:
            _log("warning: tube radius exceeds the minimum curvature radius "
                 "of the center curve (self-intersecting tube)")
        export_mesh_obj(mesh, args.mesh)
        _log(f"wrote {args.mesh} ({mesh.rings} rings x {mesh.ring_size})")
    if not args.csv and not args.mesh:
        _log("nothing to export (use --csv and/or --mesh)")
    return 0


def cmd_serve(args, config) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(ui_dir=args.ui_dir)
    _log(f"serving on http://{args.host}:{args.port}/")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser(config: JobConfig) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autoevolute",
        description="Construct, close, and verify constant-curvature "
                    "space curves congruent to their own evolutes.",
    )
    parser.add_argument("--config", help="YAML job config (flags override)")
    sub = parser.add_subparsers(dest="command", required=True)

    def target_arg(p):
        p.add_argument("--target", type=_target, default=config.target,
                       help="intersection angle as a fraction p/q of pi")

    p = sub.add_parser("eval", help="integrate one curve and export samples")
    _add_profile_args(p, config)
    target_arg(p)
    p.add_argument("--periods", type=int, default=1)
    p.add_argument("--samples", type=int, default=256,
                   help="output samples per period")
    p.add_argument("--tol", type=float, default=config.tol)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scan", help="grid scan for rough-closing candidates")
    target_arg(p)
    p.add_argument("--form", default=config.form, choices=["sqrt", "exp"])
    p.add_argument("--kappa-range", type=_range, default=config.kappa_range)
    p.add_argument("--a-range", type=_range, default=config.a_range)
    p.add_argument("--grid", type=int, default=config.grid)
    p.add_argument("--b3-values", type=float, nargs="+", default=[0.0],
                   help="b3 values to scan, e.g. --b3-values -0.2 -0.1 0 0.1 0.2")
    p.add_argument("--scan-tol", type=float, default=config.preview_tol)
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("solve", help="Newton-solve the 2-parameter closure problem")
    _add_profile_args(p, config)
    target_arg(p)
    p.add_argument("--from-scan", help="scan output JSON to seed from")
    p.add_argument("--candidate", type=int, default=0,
                   help="candidate index within the scan output")
    p.add_argument("--tol", type=float, default=config.tol)
    p.add_argument("--max-iter", type=int, default=30)
    p.add_argument("--samples", type=int, default=config.out_resolution)
    p.add_argument("--no-verify", action="store_true",
                   help="skip the verification summary in the output document")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("family", help="continuation family in b3")
    target_arg(p)
    p.add_argument("--start", required=True, help="converged solution document")
    p.add_argument("--b3-min", type=float, default=config.b3_min)
    p.add_argument("--b3-max", type=float, default=config.b3_max)
    p.add_argument("--step", type=float, default=config.b3_step)
    p.add_argument("--tol", type=float, default=config.tol)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("verify", help="run the certification suite on a document")
    p.add_argument("--curve", required=True)
    p.add_argument("--tol", type=float, default=config.tol)
    p.add_argument("--samples", type=int, default=config.out_resolution)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="export CSV samples or an OBJ canal tube")
    p.add_argument("--curve", required=True)
    p.add_argument("--csv")
    p.add_argument("--mesh")
    p.add_argument("--radius", type=float, default=0.0,
                   help="tube radius (default 1/(2 kappa))")
    p.add_argument("--ring-size", type=int, default=config.ring_size)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="start the local exploration service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--ui-dir", default=None,
                   help="directory with the built explorer UI to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    config = JobConfig()
    # --config must be applied before defaults are baked into the parser
    if "--config" in argv:
        i = argv.index("--config")
        try:
            config = JobConfig.from_file(argv[i + 1])
        except (IndexError, ValueError, OSError) as exc:
            print(f"bad --config: {exc}", file=sys.stderr)
            return 2
    parser = build_parser(config)
    args = parser.parse_args(argv)
    try:
        return args.func(args, config)
    except AutoevoluteError as exc:
        _log(f"error: {exc}")
        return 1
    except OSError as exc:
        _log(f"i/o error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
