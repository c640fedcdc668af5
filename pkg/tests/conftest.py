import math

import numpy as np
import pytest

from autoevolute.closure import RationalAngle, assemble_closed_curve, newton_solve
from autoevolute.geometry import evolute
from autoevolute.profile import CurveParams, FourierOddProfile

_ACCEPTANCE_LINES = []


def record_criterion(num: int, desc: str, metric: float, threshold: float,
                     passed: bool) -> bool:
    """Collect one acceptance line; echoed live and in the final summary."""
    flag = "PASS" if passed else "FAIL"
    line = f"[{flag}] criterion {num:2d}: {desc} — {metric:.3e} vs {threshold:.1e}"
    _ACCEPTANCE_LINES.append((num, line))
    print(line, flush=True)
    return passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def helix_positions(kappa: float, tau: float, s):
    """Closed-form constant-curvature helix from the origin with the
    identity frame (T=x, N=y, B=z); independent oracle for the integrator."""
    w = math.hypot(kappa, tau)
    s = np.asarray(s, dtype=float)
    x = (tau**2 / w**2) * s + (kappa**2 / w**3) * np.sin(w * s)
    y = (kappa / w**2) * (1.0 - np.cos(w * s))
    z = (kappa * tau / w**2) * s - (kappa * tau / w**3) * np.sin(w * s)
    return np.column_stack([x, y, z])


def helix_frame(kappa: float, tau: float, s):
    """Closed-form Frenet frame of the helix above at scalar s."""
    w = math.hypot(kappa, tau)
    sw, cw = math.sin(w * s), math.cos(w * s)
    T = np.array([(tau**2 + kappa**2 * cw) / w**2, kappa * sw / w,
                  kappa * tau * (1 - cw) / w**2])
    N = np.array([-kappa * sw / w, cw, tau * sw / w])
    B = np.cross(T, N)
    return T, N, B


@pytest.fixture(scope="session")
def helix_params():
    return CurveParams(kappa=1.0, profile=FourierOddProfile.base(a=0.0))


@pytest.fixture(scope="session")
def wavy_params():
    return CurveParams(kappa=1.0, profile=FourierOddProfile.base(a=0.6, b3=0.1))


@pytest.fixture(scope="session")
def target_third():
    return RationalAngle(1, 3)


@pytest.fixture(scope="session")
def solved(target_third):
    """A converged closure solve (warm seed found by grid scanning)."""
    seed = CurveParams(kappa=0.667, profile=FourierOddProfile.base(1.313, 0.0))
    sol = newton_solve(seed, target_third, tol=1e-10)
    assert sol.converged
    return sol


@pytest.fixture(scope="session")
def closed_pair(solved, target_third):
    curve, gap, order = assemble_closed_curve(solved.params, target_third,
                                              tol=1e-10, out_resolution=2048)
    return curve, evolute(curve), gap, order
