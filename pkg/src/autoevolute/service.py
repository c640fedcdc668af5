"""Local service backing the interactive explorer.

Transport is a single JSON endpoint; the envelope is
{"kind": ..., "session": ..., "payload": {...}} and responses are
{"ok": true, "payload": ...} or {"ok": false, "error": {code, message}}.
Previews run at a reduced integrator tolerance so slider scrubbing stays
interactive; the solve runs in a background thread at full tolerance and
never blocks preview requests (evaluation is pure).
"""

from __future__ import annotations

import math
import secrets
import threading
from dataclasses import dataclass, field

from .closure import (RationalAngle, closure_residuals, continuation, newton_solve,
                      symmetry_lines, ROUGH_CLOSING_THRESHOLD)
from .errors import AutoevoluteError, FamilyTruncated, NoConvergence
from .frenet import integrate
from .geometry import canal_tube, evolute, midpoint_curve
from .profile import CurveParams, FourierOddProfile, VelocityForm

__all__ = ["SessionStore", "handle", "create_app",
           "PREVIEW_TOL", "SOLVE_TOL", "PARAM_RANGES"]

PREVIEW_TOL = 1e-7
SOLVE_TOL = 1e-10

# advertised slider ranges; the UI clamps to these
PARAM_RANGES = {
    "kappa": [0.05, 5.0],
    "a": [0.0, 2.5],
    "b3": [-1.0, 1.0],
}


class ServiceError(AutoevoluteError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class Session:
    id: str
    params: CurveParams
    target: RationalAngle
    state: str = "idle"  # idle | running | done | failed
    running_kind: str | None = None
    trace: list = field(default_factory=list)
    result: dict | None = None
    family: list = field(default_factory=list)
    reason: str | None = None
    cache: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _default_params() -> CurveParams:
    return CurveParams(kappa=1.0, profile=FourierOddProfile.base(0.5, 0.0))

class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self) -> Session:
        sid = secrets.token_hex(8)
        session = Session(id=sid, params=_default_params(),
                          target=RationalAngle(1, 3))
        with self._lock:
            self._sessions[sid] = session
        return session

    def get(self, sid) -> Session:
        with self._lock:
            session = self._sessions.get(sid)
        if session is None:
            raise ServiceError("UnknownSession", f"no session {sid!r}")
        return session


def _params_key(params: CurveParams) -> tuple:
    prof = params.profile
    return (params.kappa, prof.amplitude, prof.coefficients, prof.form.value)


def _require(payload: dict, key: str):
    if key not in payload:
        raise ServiceError("MalformedRequest", f"payload missing {key!r}")
    return payload[key]


def _parse_params(payload: dict) -> CurveParams:
    try:
        kappa = float(_require(payload, "kappa"))
        coeffs = [(1, 1.0), (3, float(payload.get("b3", 0.0)))]
        for k, w in payload.get("harmonics", []):
            coeffs.append((int(k), float(w)))
        prof = FourierOddProfile(
            amplitude=float(payload.get("a", 0.5)),
            coefficients=tuple(coeffs),
            form=VelocityForm.parse(payload.get("form", "sqrt")),
        )
        return CurveParams(kappa=kappa, profile=prof)
    except (TypeError, ValueError) as exc:
        raise ServiceError("MalformedRequest", f"bad parameters: {exc}") from exc


def _parse_target(payload: dict, fallback: RationalAngle) -> RationalAngle:
    raw = payload.get("target")
    if raw is None:
        return fallback
    try:
        return RationalAngle(int(raw["p"]), int(raw["q"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ServiceError("MalformedRequest", f"bad target: {exc}") from exc


def _residual_payload(params: CurveParams, target: RationalAngle) -> dict:
    res = closure_residuals(params, target, tol=PREVIEW_TOL)
    return {
        "residuals": {
            "d": res.d,
            "angle_defect": res.angle_defect,
            "angle_measured": res.angle_measured,
            "norm": res.norm,
        },
        "solver_ready": res.norm < ROUGH_CLOSING_THRESHOLD,
        "rough_closing_threshold": ROUGH_CLOSING_THRESHOLD,
        "ranges": PARAM_RANGES,
    }


def _handle_set_params(session: Session, payload: dict) -> dict:
    params = _parse_params(payload)
    target = _parse_target(payload, session.target)
    with session.lock:
        session.params = params
        session.target = target
    return _residual_payload(params, target)


def _handle_get_curve(session: Session, payload: dict) -> dict:
    samples = int(payload.get("samples", 1024))
    if not (8 <= samples <= 65536) or samples % 4:
        raise ServiceError("MalformedRequest",
                           "samples must be a multiple of 4 in [8, 65536]")
    periods = int(payload.get("periods", 1))
    if not (1 <= periods <= 64):
        raise ServiceError("MalformedRequest", "periods must be in [1, 64]")
    with session.lock:
        params = session.params
        target = session.target
    key = ("curve", _params_key(params), samples, periods)
    cached = session.cache.get(key)
    if cached is not None:
        return cached
    full = integrate(params, 0.0, periods * 2.0 * math.pi, tol=PREVIEW_TOL,
                     out_resolution=samples)
    diameter = full.diameter()
    closure_gap = full.closure_gap()
    # exactly `samples` points per period: drop the endpoint (multiple-of-4
    # counts put every t* on the uniform grid, so no insertions occur and
    # the emitted count is deterministic)
    curve = full.replace_arrays(**{
        name: getattr(full, name)[:-1]
        for name in ("t", "position", "T", "N", "B", "v", "tau", "s", "s_tilde")
    })
    ev = evolute(curve)
    mid = midpoint_curve(curve)
    lines = symmetry_lines(params, count=max(2, 2 * periods), tol=PREVIEW_TOL)
    payload_out = {
        "kappa": params.kappa,
        "t": curve.t.tolist(),
        "positions": curve.position.tolist(),
        "T": curve.T.tolist(),
        "N": curve.N.tolist(),
        "B": curve.B.tolist(),
        "v": curve.v.tolist(),
        "tau": curve.tau.tolist(),
        "evolute_positions": ev.position.tolist(),
        "midpoint_positions": mid.position.tolist(),
        "symmetry_lines": [
            {"t_star": ln.t_star, "base": ln.base.tolist(),
             "direction": ln.direction.tolist()}
            for ln in lines
        ],
        "diameter": diameter,
        "closure_gap": closure_gap,
        "target": {"p": target.p, "q": target.q},
    }
    session.cache[key] = payload_out
    return payload_out


def _handle_get_mesh(session: Session, payload: dict) -> dict:
    ring_size = int(payload.get("ring_size", 24))
    if not (3 <= ring_size <= 256):
        raise ServiceError("MalformedRequest", "ring_size must be in [3, 256]")
    samples = int(payload.get("samples", 512))
    periods = int(payload.get("periods", 1))
    with session.lock:
        params = session.params
    key = ("mesh", _params_key(params), ring_size, samples, periods)
    cached = session.cache.get(key)
    if cached is not None:
        return cached
    curve = integrate(params, 0.0, periods * 2.0 * math.pi, tol=PREVIEW_TOL,
                      out_resolution=samples)
    mesh = canal_tube(curve, ring_size)
    payload_out = {
        "vertices": mesh.vertices.tolist(),
        "normals": mesh.normals.tolist(),
        "faces": mesh.faces.tolist(),
        "rings": mesh.rings,
        "ring_size": mesh.ring_size,
        "radius_warning": mesh.radius_warning,
        "radius": 1.0 / (2.0 * params.kappa),
    }
    session.cache[key] = payload_out
    return payload_out


def _solve_worker(session: Session, params: CurveParams, target: RationalAngle):
    def on_iter(iteration, p, res):
        with session.lock:
            session.trace.append([p.kappa, p.profile.amplitude,
                                  res.d, res.angle_defect, res.norm])
    try:
        sol = newton_solve(params, target, tol=SOLVE_TOL, callback=on_iter)
        with session.lock:
            session.params = sol.params
            session.result = {
                "kappa": sol.kappa,
                "a": sol.a,
                "b3": sol.b3,
                "residual_norm": sol.residual_norm,
                "iterations": sol.iterations,
                "converged": True,
            }
            session.state = "done"
            session.running_kind = None
    except (NoConvergence, AutoevoluteError) as exc:
        with session.lock:
            session.state = "failed"
            session.reason = str(exc)
            session.running_kind = None
            result = getattr(exc, "result", None)
            if result is not None:
                session.result = {
                    "kappa": result.kappa,
                    "a": result.a,
                    "b3": result.b3,
                    "residual_norm": result.residual_norm,
                    "iterations": result.iterations,
                    "converged": False,
                }


def _family_worker(session: Session, start, b3_range, step, target):
    def on_member(sol):
        with session.lock:
            session.family.append({
                "kappa": sol.kappa, "a": sol.a, "b3": sol.b3,
                "residual_norm": sol.residual_norm,
            })
    try:
        continuation(start, b3_range, step, target, tol=SOLVE_TOL,
                     on_member=on_member)
        with session.lock:
            session.state = "done"
            session.running_kind = None
    except FamilyTruncated as exc:
        with session.lock:
            session.state = "done"
            session.reason = str(exc)
            session.running_kind = None
    except (NoConvergence, AutoevoluteError) as exc:
        with session.lock:
            session.state = "failed"
            session.reason = str(exc)
            session.running_kind = None


def _start_background(session: Session, kind: str, worker, *args) -> dict:
    with session.lock:
        if session.state == "running":
            raise ServiceError("AlreadyRunning",
                               f"a {session.running_kind} is already running")
        session.state = "running"
        session.running_kind = kind
        session.trace = []
        session.reason = None
        if kind == "solve":
            session.result = None
        else:
            session.family = []
    thread = threading.Thread(target=worker, args=args, daemon=True)
    thread.start()
    return {"accepted": True, "kind": kind}


def _handle_solve(session: Session, payload: dict) -> dict:
    with session.lock:
        params = session.params
        target = session.target
    return _start_background(session, "solve", _solve_worker, session, params, target)


def _handle_get_family(session: Session, payload: dict) -> dict:
    b3_min = float(_require(payload, "b3_min"))
    b3_max = float(_require(payload, "b3_max"))
    step = float(payload.get("step", 0.02))
    with session.lock:
        result = session.result
        target = session.target
        params = session.params
    if not result or not result.get("converged"):
        raise ServiceError("MalformedRequest",
                           "get_family needs a converged solve in this session")
    from .closure import SolveResult
    # warm-start from the solved values, not the (possibly scrubbed) sliders
    start_params = params.with_values(kappa=result["kappa"], a=result["a"],
                                      b3=result["b3"])
    start = SolveResult(params=start_params, target=target,
                        residual_norm=result["residual_norm"],
                        iterations=result["iterations"], trace=[], converged=True)
    return _start_background(session, "family", _family_worker,
                             session, start, (b3_min, b3_max), step, target)


def _handle_status(session: Session, payload: dict) -> dict:
    with session.lock:
        return {
            "state": session.state,
            "running_kind": session.running_kind,
            "trace": [list(e) for e in session.trace],
            "result": dict(session.result) if session.result else None,
            "family": [dict(m) for m in session.family],
            "reason": session.reason,
        }


_HANDLERS = {
    "set_params": _handle_set_params,
    "get_curve": _handle_get_curve,
    "get_mesh": _handle_get_mesh,
    "solve": _handle_solve,
    "status": _handle_status,
    "get_family": _handle_get_family,
}


def handle(store: SessionStore, request) -> dict:
    """Dispatch one request envelope; never raises."""
    try:
        if not isinstance(request, dict):
            raise ServiceError("MalformedRequest", "request must be an object")
        kind = request.get("kind")
        if kind == "create_session":
            session = store.create()
            return {"ok": True, "payload": {"session": session.id,
                                            "ranges": PARAM_RANGES}}
        if kind not in _HANDLERS:
            raise ServiceError("MalformedRequest", f"unknown kind {kind!r}")
        session = store.get(request.get("session"))
        payload = request.get("payload") or {}
        if not isinstance(payload, dict):
            raise ServiceError("MalformedRequest", "payload must be an object")
        return {"ok": True, "payload": _HANDLERS[kind](session, payload)}
    except ServiceError as exc:
        return {"ok": False, "error": {"code": exc.code, "message": str(exc)}}
    except AutoevoluteError as exc:
        return {"ok": False, "error": {"code": type(exc).__name__, "message": str(exc)}}
    except (TypeError, ValueError, KeyError) as exc:
        return {"ok": False, "error": {"code": "MalformedRequest", "message": str(exc)}}


def create_app(store: SessionStore | None = None, ui_dir: str | None = None):
    """FastAPI app exposing handle() at POST /api (plus optional static UI)."""
    from fastapi import FastAPI
    from fastapi.responses import JSONResponse

    app = FastAPI(title="autoevolute explorer service")
    app.state.store = store or SessionStore()

    @app.post("/api")
    def api(request: dict):
        return JSONResponse(handle(app.state.store, request))

    @app.get("/health")
    def health():
        return {"ok": True}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
