"""Generating profile h(t), velocity v(t) and torsion of the curve family.

The whole construction rests on one structural fact: if h is a sine series
with only odd harmonics, then h(t + pi) = -h(t), and both velocity forms
below turn that into the reciprocity v(t + pi) = 1/v(t).  Everything the
closure machinery assumes about symmetry follows from these evaluators.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "VelocityForm",
    "FourierOddProfile",
    "CurveParams",
    "eval_h",
    "eval_v",
    "eval_tau",
]


class VelocityForm(enum.Enum):
    """Choice of positive velocity built from h."""

    SQRT = "sqrt"  # v = sqrt(1 + h^2) - h
    EXP = "exp"    # v = exp(h)

    @classmethod
    def parse(cls, name: str) -> "VelocityForm":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown velocity form {name!r}; use 'sqrt' or 'exp'") from None


@dataclass(frozen=True)
class FourierOddProfile:
    """Odd-harmonic sine profile h(t) = amplitude * sum w_k sin(k t).

    Harmonic indices must be odd positive integers; an even index would break
    h(t + pi) = -h(t) and with it every symmetry downstream, so construction
    rejects it outright.
    """

    amplitude: float
    coefficients: tuple[tuple[int, float], ...] = ((1, 1.0),)
    form: VelocityForm = VelocityForm.SQRT

    def __post_init__(self):
        coeffs = tuple((int(k), float(w)) for k, w in self.coefficients)
        for k, _ in coeffs:
            if k <= 0:
                raise ValueError(f"harmonic index {k} must be a positive integer")
            if k % 2 == 0:
                raise ValueError(
                    f"harmonic index {k} is even; only odd harmonics keep v(t+pi)=1/v(t)"
                )
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "amplitude", float(self.amplitude))
        if not isinstance(self.form, VelocityForm):
            object.__setattr__(self, "form", VelocityForm.parse(self.form))

    @classmethod
    def base(cls, a: float, b3: float = 0.0, form: VelocityForm | str = VelocityForm.SQRT):
        """The two-term family h(t) = a (sin t + b3 sin 3t)."""
        if isinstance(form, str):
            form = VelocityForm.parse(form)
        return cls(amplitude=a, coefficients=((1, 1.0), (3, float(b3))), form=form)

    @property
    def b3(self) -> float:
        """Weight of the third harmonic (0 if absent)."""
        for k, w in self.coefficients:
            if k == 3:
                return w
        return 0.0

    def h(self, t):
        """Evaluate h at scalar or array t."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for k, w in self.coefficients:
            out = out + w * np.sin(k * t)
        return self.amplitude * out if out.ndim else float(self.amplitude * out)

    def v(self, t):
        """Evaluate the velocity; positive for every t in both forms."""
        h = self.h(t)
        if self.form is VelocityForm.SQRT:
            out = np.sqrt(1.0 + np.square(h)) - h
        else:
            out = np.exp(h)
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class CurveParams:
    """Constant curvature plus profile: the full parameterization of a candidate curve."""

    kappa: float
    profile: FourierOddProfile

    def __post_init__(self):
        object.__setattr__(self, "kappa", float(self.kappa))
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")

    def tau(self, t):
        """Torsion kappa / v(t)^2; strictly positive."""
        v = self.profile.v(t)
        return self.kappa / np.square(v) if np.ndim(v) else self.kappa / (v * v)

    def with_values(self, kappa: float | None = None, a: float | None = None,
                    b3: float | None = None) -> "CurveParams":
        """Copy with selected scalars replaced (used by the closure solver)."""
        prof = self.profile
        if a is not None or b3 is not None:
            amp = prof.amplitude if a is None else float(a)
            coeffs = prof.coefficients
            if b3 is not None:
                coeffs = tuple((k, float(b3) if k == 3 else w) for k, w in coeffs)
                if all(k != 3 for k, _ in coeffs):
                    coeffs = coeffs + ((3, float(b3)),)
            prof = replace(prof, amplitude=amp, coefficients=coeffs)
        return CurveParams(kappa=self.kappa if kappa is None else float(kappa), profile=prof)


def eval_h(profile: FourierOddProfile, t):
    """h(t); odd about t=0 and anti-periodic over pi by construction."""
    return profile.h(t)


def eval_v(profile: FourierOddProfile, t):
    """v(t) > 0 with v(t) * v(t + pi) = 1 up to rounding."""
    return profile.v(t)


def eval_tau(params: CurveParams, t):
    """tau(t) = kappa / v(t)^2."""
    return params.tau(t)
