"""Bundled reference inputs: consistency of packaged data with builders."""

import numpy as np
import pytest

from casimirkit import presets
from casimirkit.lifshitz import MatsubaraSpec, tabulated_force
from casimirkit.roughness import roughness_correction


class TestPackagedData:
    def test_tables_match_builders(self):
        for sample in ("untreated", "uv_treated"):
            shipped = presets.ito_table(sample)
            rebuilt = presets.build_ito_table(sample)
            assert np.allclose(shipped.omega_ev, rebuilt.omega_ev, rtol=1e-9)
            assert np.allclose(shipped.im_eps, rebuilt.im_eps, rtol=1e-9)

    def test_profiles_match_builders(self):
        for surface in ("ito", "au"):
            shipped = presets.roughness_profile(surface)
            rebuilt = presets.build_roughness_profile(surface)
            assert np.allclose(shipped.fractions, rebuilt.fractions, rtol=1e-8)
            assert np.allclose(shipped.heights_nm, rebuilt.heights_nm, rtol=1e-9)

    def test_zero_roughness_levels(self):
        assert presets.roughness_profile("ito").zero_level_nm == pytest.approx(9.54, abs=5e-3)
        assert presets.roughness_profile("au").zero_level_nm == pytest.approx(11.51, abs=5e-3)

    def test_profile_bin_counts(self):
        assert presets.roughness_profile("ito").fractions.size == 18
        assert presets.roughness_profile("au").fractions.size == 25

    def test_table_covers_ellipsometry_range(self):
        t = presets.ito_table("untreated")
        assert t.omega_min == pytest.approx(0.04)
        assert t.omega_max == pytest.approx(8.27)

    def test_band_oscillators_meet_table_endpoint(self):
        # both extrapolations continue the measured curve smoothly at 8.27 eV
        for sample in ("untreated", "uv_treated"):
            p = presets.SAMPLES[sample]
            lo = p.osc_lower.im_eps(p.omega_max_ev)
            hi = p.osc_upper.im_eps(p.omega_max_ev)
            assert lo == pytest.approx(hi, rel=0.02)


class TestMaterials:
    def test_gold_carrier_prescriptions(self):
        drude = presets.au_material("drude")
        plasma = presets.au_material("plasma")
        assert drude.zero_response().kind == "drude"
        assert plasma.zero_response().kind == "plasma"
        # the oscillator core is shared, so high-xi values agree closely
        assert drude.eps_imag_axis(50.0) == pytest.approx(plasma.eps_imag_axis(50.0), rel=1e-3)

    def test_variants_share_core_cache(self):
        variants = presets.ito_material_variants("untreated", "lower")
        on, off = variants["on"], variants["off"]
        xi = 0.149
        e_off = off.eps_imag_axis(xi)
        drude = presets.SAMPLES["untreated"].drude
        want = e_off + drude.omega_p**2 / (xi * (xi + drude.gamma))
        assert on.eps_imag_axis(xi) == pytest.approx(want, rel=1e-12)
        assert on._cache is off._cache

    def test_stack_layout(self):
        mat = presets.ito_material_variants("untreated", "lower")["on"]
        stack = presets.build_stack(mat, gap_nm=80.0)
        assert stack.gap_nm == 80.0
        assert stack.lower[0].thickness_nm == pytest.approx(74.6)
        assert stack.lower[1].thickness_nm is None

    def test_unknown_sample_rejected(self):
        with pytest.raises(ValueError):
            presets.ito_table("annealed")


@pytest.mark.slow
class TestRoughnessMarks:
    def test_correction_marks(self):
        # reconstructed profiles against the carriers-on lower-band curve:
        # ~2.2% at 60 nm, below 1% from 90 nm, below 0.5% from 116 nm
        mat = presets.ito_material_variants("untreated", "lower")["on"]
        stack = presets.build_stack(mat, gap_nm=80.0)
        force = tabulated_force(
            stack, presets.SPHERE_RADIUS_UM, 20.0, 260.0,
            MatsubaraSpec(presets.LAB_TEMPERATURE_K),
        )
        p_ito = presets.roughness_profile("ito")
        p_au = presets.roughness_profile("au")
        corr = {a: abs(roughness_correction(force, p_ito, p_au, a)) for a in (60.0, 90.0, 116.0)}
        assert 0.015 <= corr[60.0] <= 0.030
        assert corr[90.0] < 0.010
        assert corr[116.0] < 0.005
