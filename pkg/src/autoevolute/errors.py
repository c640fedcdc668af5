"""Exception types shared across the package."""


class AutoevoluteError(Exception):
    """Base class for all package-specific errors."""


class StepSizeUnderflow(AutoevoluteError):
    """The adaptive step controller drove the step below its floor.

    Signals pathological parameters rather than a recoverable condition.
    """

    def __init__(self, t, h):
        super().__init__(f"step size underflow at t={t!r} (h={h!r})")
        self.t = t
        self.h = h


class FrameError(AutoevoluteError):
    """A Frenet frame failed a structural requirement."""


class DegenerateFrame(FrameError):
    """A frame vector is too short to normalize."""


class LeftHandedFrame(FrameError):
    """The frame is left-handed; it must not be silently flipped."""


class TooFewSamples(AutoevoluteError):
    """An operation needs more samples than the curve provides."""


class NonMonotoneArclength(AutoevoluteError):
    """Arc-length values are not strictly increasing."""


class NoConvergence(AutoevoluteError):
    """Newton iteration failed; carries the partial result for diagnosis."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class SingularJacobian(AutoevoluteError):
    """Finite-difference Jacobian is numerically singular."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class FamilyTruncated(AutoevoluteError):
    """Continuation stalled; carries the partial family and the frontier."""

    def __init__(self, message, results=None, frontier_b3=None):
        super().__init__(message)
        self.results = results or []
        self.frontier_b3 = frontier_b3


class NotClosed(AutoevoluteError):
    """A closed curve was required but the closure gap is too large."""


class NoAxis(AutoevoluteError):
    """Symmetry lines do not meet in a common point."""
