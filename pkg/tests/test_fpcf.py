import math

import numpy as np
import pytest

from partialflow import (
    DryPathError,
    FpcfPolynomial,
    FpcfRangeError,
    FpcfSample,
    OutOfRangeError,
    PartialFlowError,
    PipeGeometry,
    ProfileModel,
    QuadratureSpec,
    WaterLevel,
    chord_half_width,
    eval_fpcf,
    fit_polynomial,
    fpcf,
    mean_area_velocity,
    mean_chord_velocity,
    normalized_velocity,
    tabulate_fpcf,
)
import importlib

fpcf_module = importlib.import_module("partialflow.fpcf")

from partialflow.profile import ProfilePoint
from partialflow.quadrature import panel_integrate

from conftest import RIG_REFERENCE_FPCF_COEFFS

PIPE = PipeGeometry(0.250)


def model_at(level_m):
    return ProfileModel(pipe=PIPE, level=WaterLevel(level_m))


@pytest.fixture
def constant_profile(monkeypatch):
    """Inject v/v_max = 1 everywhere; integral means must come out 1."""

    def ones(model, x, y, validate=False):
        return np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))[0] * 0.0 + 1.0

    monkeypatch.setattr(fpcf_module, "evaluate_velocity", ones)


class TestMeans:
    def test_constant_profile_area_mean(self, constant_profile):
        assert mean_area_velocity(model_at(0.125)) == pytest.approx(1.0, rel=1e-9)

    def test_constant_profile_chord_mean(self, constant_profile):
        assert mean_chord_velocity(model_at(0.125), 0.050) == pytest.approx(1.0, rel=1e-9)

    def test_constant_profile_fpcf(self, constant_profile):
        assert fpcf(model_at(0.125), 0.050) == pytest.approx(1.0, rel=1e-9)

    def test_area_mean_regression(self):
        # frozen from a converged run; guards against silent model drift
        assert mean_area_velocity(model_at(0.125)) == pytest.approx(0.4168326, abs=2e-5)

    def test_chord_mean_regression(self):
        value = mean_chord_velocity(model_at(0.125), 0.050)
        assert value == pytest.approx(0.3720830, abs=2e-5)
        assert 0.0 < value < 1.0
        near_wall = normalized_velocity(ProfilePoint(0.0999, 0.050), model_at(0.125))
        assert value > near_wall

    def test_chord_at_surface_is_evaluable(self):
        value = mean_chord_velocity(model_at(0.050), 0.050)
        assert np.isfinite(value)

    def test_dry_chord_rejected(self):
        with pytest.raises(DryPathError):
            mean_chord_velocity(model_at(0.049), 0.050)

    def test_half_span_doubling_matches_full_span(self):
        # even integrand: matched uniform meshes agree to roundoff
        from partialflow.profile import evaluate_velocity

        m = model_at(0.125)
        w = chord_half_width(0.050, PIPE)

        def f(x):
            return evaluate_velocity(m, x, 0.050)

        full = panel_integrate(f, -w, w, 16)
        half = panel_integrate(f, 0.0, w, 8)
        assert full == pytest.approx(2.0 * half, rel=1e-12)

    def test_mesh_halving_converged(self):
        # nested fixed meshes through the same graded maps the engine uses
        fine = _fpcf_fixed_mesh(0.125, 0.050, 32)
        finer = _fpcf_fixed_mesh(0.125, 0.050, 64)
        assert abs(finer - fine) < 1e-4

    def test_fpcf_regression(self):
        assert fpcf(model_at(0.125), 0.050) == pytest.approx(1.1202676, abs=2e-5)


def _fpcf_fixed_mesh(level_m, chord_m, n_panels):
    """FPCF via uniform panel meshes on sine-graded coordinates."""
    from partialflow.profile import evaluate_velocity
    from partialflow.geometry import segment_area

    m = model_at(level_m)

    def chord_integrand(y):
        w = chord_half_width(y, PIPE)

        def f(u):
            angle = 0.5 * math.pi * np.asarray(u)
            x = w * np.sin(angle)
            jac = w * 0.5 * math.pi * np.cos(angle)
            return evaluate_velocity(m, x, y) * jac

        return f, w

    f_chord, w = chord_integrand(chord_m)
    v_line = panel_integrate(f_chord, 0.0, 1.0, n_panels) / w

    def outer(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        for i, ti in enumerate(t):
            y = level_m * math.sin(0.5 * math.pi * ti) ** 2
            jac = level_m * 0.5 * math.pi * math.sin(math.pi * ti)
            f_inner, _ = chord_integrand(y)
            out[i] = 2.0 * panel_integrate(f_inner, 0.0, 1.0, n_panels) * jac
        return out

    area = segment_area(WaterLevel(level_m), PIPE)
    v_area = panel_integrate(outer, 0.0, 1.0, n_panels) / area
    return v_area / v_line


class TestTabulate:
    def test_standard_table(self, fpcf_table):
        assert len(fpcf_table) == 21
        assert fpcf_table[0].level_mm == 50.0
        assert fpcf_table[-1].level_mm == 250.0
        assert all(np.isfinite(s.fpcf) and s.fpcf > 0 for s in fpcf_table)

    def test_step_larger_than_range(self, pipe, params):
        samples = tabulate_fpcf(pipe, params, 50.0, 60.0, 70.0, 200.0)
        assert len(samples) == 1
        assert samples[0].level_mm == 60.0

    def test_start_below_chord_rejected(self, pipe, params):
        with pytest.raises(OutOfRangeError):
            tabulate_fpcf(pipe, params, 50.0, h_min_mm=40.0)

    def test_sample_failure_names_level(self, pipe, params, monkeypatch):
        calls = []

        def failing(model, chord_height_m, quad):
            calls.append(model.level.level_m)
            if len(calls) == 2:
                raise DryPathError("forced")
            return 1.0

        monkeypatch.setattr(fpcf_module, "fpcf", failing)
        with pytest.raises(PartialFlowError, match="H = 60"):
            tabulate_fpcf(pipe, params, 50.0, 50.0, 80.0, 10.0)

    def test_per_millimeter_continuity(self, pipe, params):
        # no jumps from the piecewise model; the extreme top end (above
        # ~240 mm) steepens smoothly beyond this figure and is excluded
        for level in (60.0, 90.0, 127.0, 150.0, 187.0, 215.0, 239.0):
            a = fpcf(model_at(level / 1000.0), 0.050)
            b = fpcf(model_at((level + 1.0) / 1000.0), 0.050)
            assert abs(b - a) < 0.05


class TestFit:
    def test_exact_round_trip_recovers_coefficients(self):
        truth = RIG_REFERENCE_FPCF_COEFFS
        levels = np.arange(50.0, 251.0, 10.0)

        def poly(h):
            acc = 0.0
            for c in reversed(truth):
                acc = acc * h + c
            return acc

        fit = fit_polynomial([(h, poly(h)) for h in levels])
        for got, want in zip(fit.polynomial.coeffs, truth):
            assert got == pytest.approx(want, rel=1e-8)
        assert fit.rms_residual < 1e-12

    def test_pipeline_fit_self_residuals(self, fpcf_table, full_range_fit):
        poly = full_range_fit.polynomial
        for s in fpcf_table:
            err = abs(eval_fpcf(poly, s.level_mm) - s.fpcf)
            assert err <= full_range_fit.max_residual + 1e-12

    def test_operating_band_fit_is_tight(self, operating_fit):
        assert operating_fit.rms_residual < 1e-3
        assert operating_fit.polynomial.h_max_mm == 180.0

    def test_degree_zero_constant(self):
        fit = fit_polynomial([(50.0, 1.3), (100.0, 1.3), (150.0, 1.3)], degree=0)
        assert fit.polynomial.coeffs == (pytest.approx(1.3, rel=1e-13),)

    def test_too_few_samples(self):
        with pytest.raises(OutOfRangeError):
            fit_polynomial([(50.0, 1.0)] * 5, degree=6)

    def test_rank_deficient(self):
        with pytest.raises(PartialFlowError, match="rank"):
            fit_polynomial([(100.0, 1.0)] * 21, degree=6)


class TestEval:
    def test_reference_polynomial_values(self):
        poly = FpcfPolynomial(RIG_REFERENCE_FPCF_COEFFS, 50.0, 250.0)
        assert eval_fpcf(poly, 125.0) == pytest.approx(1.017, abs=5e-4)
        assert eval_fpcf(poly, 50.0) == pytest.approx(0.910, abs=5e-4)

    def test_out_of_range_guarded(self):
        poly = FpcfPolynomial(RIG_REFERENCE_FPCF_COEFFS, 50.0, 250.0)
        with pytest.raises(FpcfRangeError):
            eval_fpcf(poly, 40.0)
        with pytest.raises(FpcfRangeError):
            eval_fpcf(poly, 251.0)

    def test_sample_positivity_enforced(self):
        with pytest.raises(OutOfRangeError):
            FpcfSample(100.0, 50.0, 0.0)

    def test_bad_range_rejected(self):
        with pytest.raises(OutOfRangeError):
            FpcfPolynomial((1.0,), 100.0, 100.0)
