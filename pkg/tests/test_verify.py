import math

import numpy as np
import pytest

from autoevolute.closure import symmetry_lines, SymmetryLine
from autoevolute.errors import NotClosed
from autoevolute.frenet import integrate
from autoevolute.geometry import evolute
from autoevolute.profile import CurveParams, FourierOddProfile, VelocityForm
from autoevolute.verify import (verify_arclength_balance, verify_canal_incidence,
                                verify_congruence, verify_constant_curvature,
                                verify_symmetry, verify_torsion_reciprocity)

TWO_PI = 2 * math.pi


def bypass_profile(amplitude, coefficients, form=VelocityForm.EXP):
    """Construct a profile without the odd-harmonic validation (test-only)."""
    prof = object.__new__(FourierOddProfile)
    object.__setattr__(prof, "amplitude", float(amplitude))
    object.__setattr__(prof, "coefficients",
                       tuple((int(k), float(w)) for k, w in coefficients))
    object.__setattr__(prof, "form", form)
    return prof


class TestConstantCurvature:
    def test_helix_passes(self, helix_params):
        curve = integrate(helix_params, 0.0, TWO_PI, tol=1e-10, out_resolution=1024)
        rep = verify_constant_curvature(curve, tol=1e-4)
        assert rep.passed
        assert rep.worst_t is not None

    def test_noise_fails(self, helix_params):
        curve = integrate(helix_params, 0.0, TWO_PI, tol=1e-10, out_resolution=1024)
        rng = np.random.default_rng(0)
        noisy = curve.replace_arrays(
            position=curve.position + rng.normal(scale=1e-3, size=curve.position.shape))
        rep = verify_constant_curvature(noisy, tol=1e-4)
        assert not rep.passed

    def test_insufficient_data(self, helix_params):
        curve = integrate(helix_params, 0.0, TWO_PI, tol=1e-9, out_resolution=128)
        small = curve.replace_arrays(
            **{f: getattr(curve, f)[:3] for f in
               ("t", "position", "T", "N", "B", "v", "tau", "s", "s_tilde")})
        rep = verify_constant_curvature(small, tol=1e-4)
        assert not rep.passed
        assert "insufficient" in rep.note


class TestTorsionReciprocity:
    def test_helix_pair(self, helix_params):
        curve = integrate(helix_params, 0.0, TWO_PI, tol=1e-10, out_resolution=1024)
        rep = verify_torsion_reciprocity(curve, evolute(curve), tol=1e-4)
        assert rep.passed

    def test_solved_pair(self, closed_pair):
        curve, ev, _, _ = closed_pair
        rep = verify_torsion_reciprocity(curve, ev, tol=1e-3)
        assert rep.passed

    def test_translated_copy_control(self, wavy_params):
        curve = integrate(wavy_params, 0.0, TWO_PI, tol=1e-10, out_resolution=1024)
        fake = curve.replace_arrays(position=curve.position + np.array([0.3, 0.0, 0.0]))
        rep = verify_torsion_reciprocity(curve, fake, tol=1e-3)
        assert not rep.passed
        # curvature of the translate still matches; only the product breaks
        assert rep.details["kappa_metric"] <= 1e-3
        assert rep.details["product_metric"] > 1e-3

    def test_grid_mismatch(self, wavy_params):
        curve = integrate(wavy_params, 0.0, TWO_PI, tol=1e-9, out_resolution=256)
        other = integrate(wavy_params, 0.0, TWO_PI, tol=1e-9, out_resolution=128)
        rep = verify_torsion_reciprocity(curve, evolute(other))
        assert not rep.passed
        assert "grids" in rep.note


class TestCongruence:
    def test_self_congruent(self, closed_pair):
        curve = closed_pair[0]
        rep = verify_congruence(curve, curve, n=256, tol=1e-6)
        assert rep.passed
        assert rep.details["rmsd"] < 1e-10

    def test_solved_vs_evolute(self, closed_pair):
        curve, ev, _, _ = closed_pair
        rep = verify_congruence(curve, ev, n=512, tol=1e-5)
        assert rep.passed, str(rep)

    def test_scaled_copy_fails(self, closed_pair):
        curve = closed_pair[0]
        scaled = curve.replace_arrays(position=1.01 * curve.position,
                                      s=1.01 * curve.s)
        rep = verify_congruence(curve, scaled, n=256, tol=1e-5)
        assert not rep.passed

    def test_open_curve_rejected(self, wavy_params):
        open_curve = integrate(wavy_params, 0.0, TWO_PI, tol=1e-9,
                               out_resolution=256)
        with pytest.raises(NotClosed):
            verify_congruence(open_curve, open_curve)


class TestSymmetry:
    def test_any_curve_any_line(self, wavy_params):
        curve = integrate(wavy_params, 0.0, 2 * TWO_PI, tol=1e-10,
                          out_resolution=1024)
        for ln in symmetry_lines(wavy_params, count=3, tol=1e-10):
            if ln.t_star - math.pi < -1e-9:
                continue
            rep = verify_symmetry(curve, ln, tol=1e-7)
            assert rep.passed, str(rep)

    def test_helix_quarter(self, helix_params):
        curve = integrate(helix_params, 0.0, 2 * TWO_PI, tol=1e-10,
                          out_resolution=512)
        line = symmetry_lines(helix_params, count=2, tol=1e-10)[1]
        rep = verify_symmetry(curve, line, tol=1e-7)
        assert rep.passed

    def test_wrong_axis_fails(self, wavy_params):
        curve = integrate(wavy_params, 0.0, 2 * TWO_PI, tol=1e-10,
                          out_resolution=512)
        line = symmetry_lines(wavy_params, count=2, tol=1e-10)[1]
        tilted = SymmetryLine(index=line.index, t_star=line.t_star,
                              base=line.base,
                              direction=_unit(line.direction + np.array([1e-2, 0, 0])))
        rep = verify_symmetry(curve, tilted, tol=1e-7)
        assert not rep.passed

    def test_window_coverage_required(self, wavy_params):
        curve = integrate(wavy_params, 0.0, TWO_PI, tol=1e-9, out_resolution=256)
        line = symmetry_lines(wavy_params, count=2, tol=1e-9)[0]  # t* = pi/2
        rep = verify_symmetry(curve, line, tol=1e-7)
        assert not rep.passed
        assert "cover" in rep.note


def _unit(v):
    return v / np.linalg.norm(v)


class TestArclengthBalance:
    def test_trivial_profile(self, helix_params):
        rep = verify_arclength_balance(helix_params, tol=1e-10)
        assert rep.passed
        assert rep.details["length_curve"] == pytest.approx(TWO_PI, abs=1e-10)

    def test_random_valid_profiles(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            form = VelocityForm.SQRT if rng.random() < 0.5 else VelocityForm.EXP
            params = CurveParams(
                rng.uniform(0.3, 3.0),
                FourierOddProfile.base(rng.uniform(0, 1.2), rng.uniform(-0.5, 0.5), form))
            rep = verify_arclength_balance(params, tol=1e-10)
            assert rep.passed, str(rep)

    def test_even_harmonic_fails(self):
        # validation bypassed: a profile with an even harmonic breaks the
        # pointwise reciprocity v(t) v(t+pi) = 1 behind the balance (the
        # length integrals themselves cancel for any pure sine series)
        for form in (VelocityForm.EXP, VelocityForm.SQRT):
            prof = bypass_profile(0.8, ((1, 1.0), (2, 0.5)), form)
            params = CurveParams(1.0, prof)
            rep = verify_arclength_balance(params, tol=1e-10)
            assert not rep.passed
            assert rep.details["reciprocity_defect"] > 1e-2


class TestCanalIncidence:
    def test_passes_exactly(self, wavy_params):
        curve = integrate(wavy_params, 0.0, TWO_PI, tol=1e-10, out_resolution=512)
        rep = verify_canal_incidence(curve, evolute(curve), wavy_params.kappa,
                                     tol=1e-12)
        assert rep.passed, str(rep)

    def test_kappa_two_distances(self):
        params = CurveParams(2.0, FourierOddProfile.base(0.4))
        curve = integrate(params, 0.0, TWO_PI, tol=1e-10, out_resolution=256)
        ev = evolute(curve)
        m = 0.5 * (curve.position + ev.position)
        assert np.abs(np.linalg.norm(curve.position - m, axis=1) - 0.25).max() < 1e-13
        rep = verify_canal_incidence(curve, ev, 2.0, tol=1e-12)
        assert rep.passed

    def test_corrupted_evolute_fails(self, wavy_params):
        curve = integrate(wavy_params, 0.0, TWO_PI, tol=1e-10, out_resolution=256)
        ev = evolute(curve)
        bad = ev.replace_arrays(position=ev.position + np.array([0.0, 0.0, 1e-6]))
        rep = verify_canal_incidence(curve, bad, wavy_params.kappa, tol=1e-12)
        assert not rep.passed


class TestReportShape:
    def test_to_dict_roundtrip_fields(self, helix_params):
        rep = verify_arclength_balance(helix_params)
        d = rep.to_dict()
        assert set(d) == {"name", "metric", "threshold", "passed",
                          "worst_index", "worst_t", "note", "details"}
        assert isinstance(str(rep), str)

    def test_deterministic(self, wavy_params):
        curve = integrate(wavy_params, 0.0, TWO_PI, tol=1e-9, out_resolution=256)
        a = verify_constant_curvature(curve)
        b = verify_constant_curvature(curve)
        assert a.metric == b.metric
        assert a.worst_index == b.worst_index
