"""Calibration, extraction and error-budget checks on synthetic data.

Synthetic curves obey the measurement equations exactly, so ground truth is
known; paper-style truth values give the round-trip targets.
"""

import math

import numpy as np
import pytest
from scipy import stats
from scipy.interpolate import BSpline, make_lsq_spline

from casimirkit.electrostatics import (
    CalibrationParams,
    electrostatic_force,
    fit_polynomial_x,
    reconstruct_separation,
)
from casimirkit.exceptions import DataError
from casimirkit.measurement import (
    ForceDistanceCurve,
    _default_lna_knots,
    error_budget,
    extract_casimir,
    fit_calibration,
    gaussian_stats,
    load_curves,
    synthesize_curves,
)

TRUTH = CalibrationParams(v0_mv=-196.8, m_nm_per_v=104.4, z0_nm=29.6, k_tilde_nn_per_v=1.51)
TRUTH_UV = CalibrationParams(v0_mv=64.8, m_nm_per_v=104.2, z0_nm=29.0, k_tilde_nn_per_v=1.51)
CAL_OFFSETS = np.array([-250.0, -180.0, -120.0, -70.0, -30.0, 30.0, 70.0, 120.0, 180.0, 250.0])
Z_GRID = np.arange(0.0, 1500.0, 2.0)


@pytest.fixture(scope="module")
def poly_x():
    return fit_polynomial_x(101.2, (40.0, 2600.0))


def force_law(a):
    a = np.asarray(a, dtype=float)
    out = -2.7e7 / a**2.8
    return out if out.ndim else float(out)


def make_curves(truth, poly_x, noise_v=0.0, seed=None, **kwargs):
    rng = np.random.default_rng(seed)
    return synthesize_curves(
        truth, force_law, poly_x, truth.v0_mv + CAL_OFFSETS, Z_GRID,
        noise_v=noise_v, rng=rng, **kwargs
    )


class TestReconstructSeparation:
    def test_contact_offset(self):
        assert reconstruct_separation(0.0, 0.0, TRUTH) == pytest.approx(29.6)

    def test_linearity_in_signal(self):
        s = np.array([-0.2, 0.0, 0.3])
        a = reconstruct_separation(100.0, s, TRUTH)
        assert np.allclose(np.diff(a), TRUTH.m_nm_per_v * np.diff(s))

    def test_round_trip_through_synthesis(self, poly_x):
        curves = make_curves(TRUTH, poly_x)
        c = curves[0]
        a = reconstruct_separation(c.z_piezo_nm, c.s_def_v, TRUTH)
        # the synthesized deflection satisfies k~ S = F_cas(a) + F_el(a, V)
        lhs = TRUTH.k_tilde_nn_per_v * c.s_def_v * 1e3
        rhs = force_law(a) + electrostatic_force(a, c.voltage_mv, TRUTH, poly_x)
        assert np.allclose(lhs, rhs, rtol=1e-9)


class TestFitCalibration:
    def test_noiseless_recovery_to_six_digits(self, poly_x):
        # background drawn from the fit's own spline family makes the
        # noiseless model residual exactly zero at the truth
        knots = _default_lna_knots(np.array([50.0, 1700.0]), 40)
        xs = np.linspace(knots[3], knots[-4], 250)
        phi = make_lsq_spline(xs, force_law(np.exp(xs)) / (TRUTH.k_tilde_nn_per_v * 1e3), knots, 3)

        def spline_law(a):
            a = np.asarray(a, dtype=float)
            u = np.log(np.clip(a, math.exp(knots[0]), math.exp(knots[-1])))
            out = phi(u) * TRUTH.k_tilde_nn_per_v * 1e3
            return out if out.ndim else float(out)

        curves = synthesize_curves(
            TRUTH, spline_law, poly_x, TRUTH.v0_mv + CAL_OFFSETS, Z_GRID
        )
        calib = fit_calibration(curves, poly_x, lna_knots=knots)
        assert calib.v0_mv == pytest.approx(TRUTH.v0_mv, rel=1e-7)
        assert calib.m_nm_per_v == pytest.approx(TRUTH.m_nm_per_v, rel=1e-7)
        assert calib.z0_nm == pytest.approx(TRUTH.z0_nm, rel=1e-7)
        assert calib.k_tilde_nn_per_v == pytest.approx(TRUTH.k_tilde_nn_per_v, rel=1e-7)

    def test_noisy_recovery_within_stated_widths(self, poly_x):
        curves = make_curves(TRUTH, poly_x, noise_v=1e-3, seed=11)
        calib = fit_calibration(curves, poly_x)
        assert abs(calib.v0_mv - TRUTH.v0_mv) < 1.5
        assert abs(calib.m_nm_per_v - TRUTH.m_nm_per_v) < 0.5
        assert abs(calib.z0_nm - TRUTH.z0_nm) < 0.5
        assert abs(calib.k_tilde_nn_per_v - TRUTH.k_tilde_nn_per_v) < 0.02

    def test_uv_treated_truth_round_trip(self, poly_x):
        curves = make_curves(TRUTH_UV, poly_x, noise_v=1e-3, seed=12)
        calib = fit_calibration(curves, poly_x)
        assert abs(calib.v0_mv - TRUTH_UV.v0_mv) < 2.0
        assert abs(calib.m_nm_per_v - TRUTH_UV.m_nm_per_v) < 0.6
        assert abs(calib.z0_nm - TRUTH_UV.z0_nm) < 0.6
        assert abs(calib.k_tilde_nn_per_v - TRUTH_UV.k_tilde_nn_per_v) < 0.02

    def test_residual_potential_trend_aborts(self, poly_x):
        curves = make_curves(TRUTH, poly_x, noise_v=1e-3, seed=13, v0_gradient_mv_per_um=6.0)
        with pytest.raises(DataError, match="separation trend"):
            fit_calibration(curves, poly_x)

    def test_drift_correction_flag(self, poly_x):
        curves = make_curves(TRUTH, poly_x, noise_v=1e-3, seed=14, z0_drift_nm_per_curve=0.4)
        calib = fit_calibration(curves, poly_x, drift_correction=True)
        assert abs(calib.m_nm_per_v - TRUTH.m_nm_per_v) < 0.5
        assert abs(calib.z0_nm - TRUTH.z0_nm) < 0.5

    def test_needs_three_distinct_voltages(self, poly_x):
        curves = make_curves(TRUTH, poly_x)
        with pytest.raises(DataError):
            fit_calibration(curves[:2], poly_x)
        same_v = [
            ForceDistanceCurve(curves[0].voltage_mv, c.z_piezo_nm, c.s_def_v)
            for c in curves[:4]
        ]
        with pytest.raises(DataError):
            fit_calibration(same_v, poly_x)


class TestExtractCasimir:
    # measurement-style voltages: small offsets around the residual potential
    MEAS_OFFSETS = np.array([-68.0, -55.0, -40.0, -28.0, -16.0, -3.0, 9.0, 22.0, 38.0, 52.0])

    def make_measurement(self, poly_x, noise_v=0.0, seed=None, reps=1):
        rng = np.random.default_rng(seed)
        return synthesize_curves(
            TRUTH, force_law, poly_x, TRUTH.v0_mv + self.MEAS_OFFSETS,
            np.arange(0.0, 1200.0, 1.0), repetitions=reps, noise_v=noise_v, rng=rng,
        )

    def test_recovers_known_force_law(self, poly_x):
        curves = self.make_measurement(poly_x)
        result = extract_casimir(curves, TRUTH, poly_x)
        want = force_law(result.a_nm)
        assert np.allclose(result.mean_pn, want, rtol=2e-3, atol=5e-3)

    def test_voltage_independence(self, poly_x):
        # every curve carries the same underlying force once the electric
        # part is removed, whatever the applied voltage
        curves = self.make_measurement(poly_x)
        result = extract_casimir(curves, TRUTH, poly_x)
        spread = np.nanmax(result.samples_pn, axis=0) - np.nanmin(result.samples_pn, axis=0)
        assert np.all(spread < 0.02 + 5e-3 * np.abs(result.mean_pn))

    def test_noisy_mean_within_envelope(self, poly_x):
        curves = self.make_measurement(poly_x, noise_v=1e-3, seed=21, reps=3)
        result = extract_casimir(curves, TRUTH, poly_x)
        budget = error_budget(result, TRUTH, poly_x)
        resid = np.abs(result.mean_pn - force_law(result.a_nm))
        # random error is a 95% band; allow a few percent of outliers
        frac_inside = np.mean(resid < np.maximum(budget.random_pn, 0.5))
        assert frac_inside > 0.9

    def test_disjoint_curves_raise(self, poly_x):
        c1 = ForceDistanceCurve(0.0, np.arange(50.0, 150.0), np.zeros(100))
        c2 = ForceDistanceCurve(10.0, np.arange(500.0, 600.0), np.zeros(100))
        with pytest.raises(DataError):
            extract_casimir([c1, c2], TRUTH, poly_x)


class TestErrorBudget:
    def _result(self, poly_x, samples):
        from casimirkit.measurement import ExtractionResult

        n, g = samples.shape
        return ExtractionResult(
            a_nm=np.linspace(100.0, 100.0 + g - 1, g),
            samples_pn=samples,
            mean_pn=samples.mean(axis=0),
            counts=np.full(g, n),
            voltages_mv=np.full(n, -200.0),
            total_force_mean_pn=np.abs(samples).mean(axis=0),
        )

    def test_identical_samples_zero_random(self, poly_x):
        calib = CalibrationParams(-196.8, 104.4, 29.6, 1.51, 1.5, 0.5, 0.5, 0.02)
        samples = np.tile(np.linspace(-150.0, -140.0, 8), (10, 1))
        budget = error_budget(self._result(poly_x, samples), calib, poly_x)
        assert np.allclose(budget.random_pn, 0.0, atol=1e-12)

    def test_quadrature_identity(self, poly_x):
        calib = CalibrationParams(-196.8, 104.4, 29.6, 1.51, 1.5, 0.5, 0.5, 0.02)
        rng = np.random.default_rng(3)
        samples = -140.0 + rng.normal(0.0, 2.0, (20, 8))
        budget = error_budget(self._result(poly_x, samples), calib, poly_x)
        assert np.allclose(
            budget.total_pn**2 - budget.random_pn**2 - budget.systematic_pn**2,
            0.0,
            atol=1e-9,
        )
        assert budget.separation_err_nm == calib.z0_err_nm

    def test_student_t_scaling_with_sample_count(self, poly_x):
        # doubling the sample count at identical spread scales the random
        # part by exactly t(9)/sqrt(10) / (t(19)/sqrt(20))
        calib = CalibrationParams(-196.8, 104.4, 29.6, 1.51)
        base = np.linspace(-1.0, 1.0, 10)[:, None] * np.ones((1, 5)) - 140.0
        doubled = np.vstack([base, base])
        b1 = error_budget(self._result(poly_x, base), calib, poly_x)
        b2 = error_budget(self._result(poly_x, doubled), calib, poly_x)
        sd10 = np.std(base[:, 0], ddof=1)
        sd20 = np.std(doubled[:, 0], ddof=1)
        want = (stats.t.ppf(0.975, 9) * sd10 / math.sqrt(10)) / (
            stats.t.ppf(0.975, 19) * sd20 / math.sqrt(20)
        )
        got = b1.random_pn[0] / b2.random_pn[0]
        assert got == pytest.approx(want, rel=1e-12)
        assert got == pytest.approx(math.sqrt(2.0), rel=0.15)

    def test_random_component_flat_for_stationary_noise(self, poly_x):
        calib = CalibrationParams(-196.8, 104.4, 29.6, 1.51)
        rng = np.random.default_rng(9)
        samples = -100.0 + rng.normal(0.0, 1.5, (100, 60))
        budget = error_budget(self._result(poly_x, samples), calib, poly_x)
        assert budget.random_pn.std() / budget.random_pn.mean() < 0.25


class TestGaussianStats:
    def test_recovers_moments(self):
        rng = np.random.default_rng(5)
        draws = rng.normal(-143.7, 4.0, 400)
        g = gaussian_stats(draws, 1.0)
        assert g.mean == pytest.approx(-143.7, abs=4.0 / math.sqrt(400) * 4)
        assert g.sigma == pytest.approx(4.0, rel=0.2)
        assert g.fractions.sum() == pytest.approx(1.0, abs=1e-12)

    def test_paper_scale_distributions_do_not_overlap(self):
        rng = np.random.default_rng(6)
        untreated = rng.normal(-143.7, 4.0, 100)
        treated = rng.normal(-105.5, 5.0, 100)
        g = gaussian_stats(untreated, 2.0, other=treated)
        assert g.non_overlap_95 is True

    def test_identical_sets_overlap(self):
        rng = np.random.default_rng(7)
        draws = rng.normal(-120.0, 5.0, 60)
        g = gaussian_stats(draws, 2.0, other=draws.copy())
        assert g.non_overlap_95 is False

    def test_needs_thirty_samples(self):
        with pytest.raises(ValueError):
            gaussian_stats(np.zeros(10), 1.0)


class TestCurveIO:
    def test_csv_round_trip(self, tmp_path, poly_x):
        curves = make_curves(TRUTH, poly_x, noise_v=1e-3, seed=31)
        path = tmp_path / "curve_00.csv"
        curves[0].to_csv(path)
        back = ForceDistanceCurve.from_csv(path)
        assert back.voltage_mv == curves[0].voltage_mv
        assert back.repetition == curves[0].repetition
        assert np.allclose(back.s_def_v, curves[0].s_def_v, rtol=1e-9)

    def test_load_curves_directory(self, tmp_path, poly_x):
        curves = make_curves(TRUTH, poly_x, seed=32)
        for i, c in enumerate(curves):
            c.to_csv(tmp_path / f"curve_{i:02d}.csv")
        back = load_curves(tmp_path)
        assert len(back) == len(curves)

    def test_empty_directory_raises(self, tmp_path):
        with pytest.raises(DataError):
            load_curves(tmp_path)

    def test_broken_file_reported_by_name(self, tmp_path):
        (tmp_path / "bad.csv").write_text("z_piezo_nm,s_def_v\n1,2\n")
        with pytest.raises(DataError, match="bad.csv"):
            load_curves(tmp_path)

    def test_resampled_to_one_nm(self, tmp_path):
        z = np.arange(0.0, 10.0, 0.2)
        c = ForceDistanceCurve(-200.0, z, np.sin(z))
        r = c.resampled(1.0)
        assert np.allclose(np.diff(r.z_piezo_nm), 1.0)
        assert r.s_def_v[3] == pytest.approx(np.interp(r.z_piezo_nm[3], z, np.sin(z)))
