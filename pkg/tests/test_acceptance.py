"""Acceptance gate: one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Tolerances are fixed here, not tuned at runtime.
"""

import math
import time

import numpy as np
import pytest

from casimirkit import presets
from casimirkit.constants import HBARC_J_M
from casimirkit.electrostatics import exact_shape_function, fit_polynomial_x
from casimirkit.exceptions import DataError
from casimirkit.kramers_kronig import (
    ExtrapolationSpec,
    OpticalDataTable,
    build_curve,
    first_matsubara_ratio,
    kk_transform,
)
from casimirkit.lifshitz import (
    Layer,
    LayerStack,
    MatsubaraSpec,
    QuadratureSpec,
    force_curve,
    matsubara_frequency,
    pfa_sphere_plate_force,
    tabulated_force,
)
from casimirkit.materials import (
    DrudeParams,
    IdealMetal,
    OscillatorParams,
    drude_eps_imag_axis,
    oscillator_eps_imag_axis,
)
from casimirkit.measurement import fit_calibration, synthesize_curves
from casimirkit.roughness import rough_force, roughness_correction

LAB = MatsubaraSpec(temperature_k=presets.LAB_TEMPERATURE_K)
R_UM = presets.SPHERE_RADIUS_UM


def verdict(number: int, ok: bool, detail: str) -> None:
    print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def untreated_materials():
    out = {}
    for band in ("lower", "upper"):
        out[band] = presets.ito_material_variants("untreated", band)
    return out


@pytest.fixture(scope="module")
def band_tables(untreated_materials):
    """91-point force tables for both carrier settings, with timings."""
    seps = np.arange(60.0, 151.0, 1.0)
    tables, timings = {}, {}
    for carriers in ("on", "off"):
        lower = presets.build_stack(untreated_materials["lower"][carriers], 60.0)
        upper = presets.build_stack(untreated_materials["upper"][carriers], 60.0)
        start = time.perf_counter()
        tables[carriers] = force_curve(lower, upper, seps, R_UM, LAB)
        timings[carriers] = time.perf_counter() - start
    return tables, timings


def test_criterion_1_ideal_metal_oracle():
    stack = LayerStack(Layer(IdealMetal()), 100.0, (Layer(IdealMetal()),))
    start = time.perf_counter()
    force = pfa_sphere_plate_force(stack, R_UM, MatsubaraSpec(temperature_k=1.0))
    elapsed = time.perf_counter() - start
    target = -math.pi**3 * HBARC_J_M * R_UM * 1e-6 / (360.0 * (100e-9) ** 3) * 1e12
    rel = abs(force / target - 1.0)
    verdict(
        1,
        rel < 1e-3 and elapsed < 1.0,
        f"ideal-metal PFA {force:.2f} pN vs {target:.2f} pN "
        f"(rel {rel:.2e} < 1e-3), {elapsed:.2f} s < 1 s",
    )


def test_criterion_2_kramers_kronig_pair_oracle():
    omega = np.logspace(np.log10(0.04), np.log10(8.27), 400)
    xi_grid = np.logspace(np.log10(0.05), np.log10(20.0), 25)
    cases = {
        "oscillator": OscillatorParams(111.52, 4.0, 8.0),
        "drude": DrudeParams(1.5, 0.128),
    }
    start = time.perf_counter()
    worst = 0.0
    for name, model in cases.items():
        table = OpticalDataTable.from_model(model, omega)
        ext = ExtrapolationSpec(low=model, high=model)
        closed = (
            oscillator_eps_imag_axis(model, xi_grid)
            if name == "oscillator"
            else drude_eps_imag_axis(model, xi_grid)
        )
        got = np.array([kk_transform(table, ext, xi) for xi in xi_grid])
        worst = max(worst, float(np.max(np.abs(got / closed - 1.0))))
    elapsed = time.perf_counter() - start
    verdict(
        2,
        worst < 5e-3 and elapsed < 5.0,
        f"table->eps(i xi) worst deviation {worst:.2e} < 5e-3 over [0.05, 20] eV, "
        f"{elapsed:.2f} s < 5 s",
    )


def test_criterion_3_electrostatic_certification():
    start = time.perf_counter()
    x = fit_polynomial_x(R_UM, (60.0, 2000.0))
    grid = np.logspace(np.log10(60.0), np.log10(2000.0), 300)
    exact = np.array([exact_shape_function(a, R_UM) for a in grid])
    rel = float(np.max(np.abs(x(grid) / exact - 1.0)))
    elapsed = time.perf_counter() - start
    verdict(
        3,
        rel < 1e-4 and x.max_rel_error < 1e-4 and elapsed < 10.0,
        f"polynomial X(a) matches the image-charge series to {rel:.2e} < 1e-4 "
        f"on [60, 2000] nm (certified {x.max_rel_error:.2e}), {elapsed:.2f} s < 10 s",
    )


def test_criterion_4_reduction_band(untreated_materials, band_tables):
    tables, timings = band_tables
    on, off = tables["on"], tables["off"]
    reduction = (np.abs(on[:, 1:]) - np.abs(off[:, 1:])) / np.abs(on[:, 1:])
    in_window = 0.10 <= reduction.min() and reduction.max() <= 0.45
    ordered = bool(np.all(np.abs(off[:, 1:]) < np.abs(on[:, 1:])))

    xi1 = matsubara_frequency(1, presets.LAB_TEMPERATURE_K)
    grid = np.geomspace(0.8 * xi1, 1.25 * xi1, 7)
    ratios = []
    table = presets.ito_table("untreated")
    curves_on = build_curve(
        table,
        presets.ito_extrapolation("untreated", "lower"),
        presets.ito_extrapolation("untreated", "upper"),
        grid,
        carriers="on",
    )
    curves_off = build_curve(
        table,
        presets.ito_extrapolation("untreated", "lower"),
        presets.ito_extrapolation("untreated", "upper"),
        grid,
        carriers="off",
    )
    for c_on, c_off in zip(curves_on, curves_off):
        ratios.append(first_matsubara_ratio(c_on, c_off, presets.LAB_TEMPERATURE_K))
    ratio_ok = all(17.0 * 0.7 <= r <= 17.0 * 1.3 for r in ratios)
    runtime_ok = max(timings.values()) < 120.0
    verdict(
        4,
        in_window and ordered and ratio_ok and runtime_ok,
        f"reduction {reduction.min() * 100:.1f}%..{reduction.max() * 100:.1f}% in [10%, 45%], "
        f"off weaker than on everywhere: {ordered}, first-Matsubara ratios "
        f"{min(ratios):.1f}/{max(ratios):.1f} within 17 +- 30%, "
        f"91-point curve {max(timings.values()):.1f} s < 120 s",
    )


@pytest.fixture(scope="module")
def rough_force_tools():
    p_ito = presets.roughness_profile("ito")
    p_au = presets.roughness_profile("au")
    return p_ito, p_au


def test_criterion_5_point_anchors(untreated_materials, rough_force_tools):
    p_ito, p_au = rough_force_tools

    def rough_band(sample, carriers):
        values = []
        for band in ("lower", "upper"):
            if sample == "untreated":
                material = untreated_materials[band][carriers]
            else:
                material = presets.ito_material_variants(sample, band)[carriers]
            stack = presets.build_stack(material, 80.0)
            smooth = tabulated_force(stack, R_UM, 30.0, 130.0, LAB)
            values.append(rough_force(smooth, p_ito, p_au, 80.0))
        return min(values), max(values)

    lo_on, hi_on = rough_band("untreated", "on")
    lo_off, hi_off = rough_band("uv_treated", "off")
    on_ok = lo_on - 0.05 * abs(lo_on) <= -143.7 <= hi_on + 0.05 * abs(hi_on)
    off_ok = lo_off - 0.05 * abs(lo_off) <= -105.5 <= hi_off + 0.05 * abs(hi_off)
    verdict(
        5,
        on_ok and off_ok,
        f"carriers-on band [{lo_on:.1f}, {hi_on:.1f}] pN brackets -143.7 "
        f"and carriers-off (treated) band [{lo_off:.1f}, {hi_off:.1f}] pN "
        f"brackets -105.5 within 5% slack at a = 80 nm",
    )


def test_criterion_6_roughness(untreated_materials, rough_force_tools):
    p_ito, p_au = rough_force_tools
    stack = presets.build_stack(untreated_materials["lower"]["on"], 80.0)
    smooth = tabulated_force(stack, R_UM, 20.0, 260.0, LAB)
    corr = {a: abs(roughness_correction(smooth, p_ito, p_au, a)) for a in (60.0, 90.0, 116.0)}

    # independent brute-force double sum at 60 nm
    offset = 60.0 + p_ito.zero_level_nm + p_au.zero_level_nm
    brute = 0.0
    for i in range(p_ito.fractions.size):
        for k in range(p_au.fractions.size):
            brute += (
                p_ito.fractions[i]
                * p_au.fractions[k]
                * smooth(offset - p_ito.heights_nm[i] - p_au.heights_nm[k])
            )
    sums_match = abs(rough_force(smooth, p_ito, p_au, 60.0) / brute - 1.0) < 1e-12

    ok = (
        0.015 <= corr[60.0] <= 0.030
        and corr[90.0] < 0.010
        and corr[116.0] < 0.005
        and sums_match
    )
    verdict(
        6,
        ok,
        f"roughness correction {corr[60.0] * 100:.2f}% at 60 nm in [1.5%, 3%], "
        f"{corr[90.0] * 100:.2f}% < 1% at 90 nm, {corr[116.0] * 100:.2f}% < 0.5% at 116 nm; "
        f"double sum matches brute force: {sums_match}",
    )


def test_criterion_7_calibration_monte_carlo():
    truth = presets.CALIBRATION_TRUTH["untreated"]
    x = fit_polynomial_x(R_UM, (40.0, 2600.0))

    def law(a):
        a = np.asarray(a, dtype=float)
        out = -2.7e7 / a**2.8
        return out if out.ndim else float(out)

    offsets = np.array([-250.0, -180.0, -120.0, -70.0, -30.0, 30.0, 70.0, 120.0, 180.0, 250.0])
    z_grid = np.arange(0.0, 1200.0, 2.5)
    start = time.perf_counter()
    passes = 0
    trials = 100
    for trial in range(trials):
        rng = np.random.default_rng(7000 + trial)
        curves = synthesize_curves(
            truth, law, x, truth.v0_mv + offsets, z_grid, noise_v=1e-3, rng=rng
        )
        try:
            calib = fit_calibration(curves, x)
        except DataError:
            continue
        if (
            abs(calib.v0_mv - truth.v0_mv) < 1.5
            and abs(calib.m_nm_per_v - truth.m_nm_per_v) < 0.5
            and abs(calib.z0_nm - truth.z0_nm) < 0.5
            and abs(calib.k_tilde_nn_per_v - truth.k_tilde_nn_per_v) < 0.02
        ):
            passes += 1
    elapsed = time.perf_counter() - start
    verdict(
        7,
        passes >= 95 and elapsed < 60.0,
        f"{passes}/100 trials recover (V0, m, z0, k~) within the stated 95% "
        f"half-widths (need >= 95), {elapsed:.1f} s < 60 s",
    )


def test_criterion_8_convergence_and_prescription(untreated_materials):
    material = untreated_materials["lower"]["on"]
    stack = presets.build_stack(material, 100.0)
    base = pfa_sphere_plate_force(stack, R_UM, LAB, QuadratureSpec(1e-6))
    tight_spec = MatsubaraSpec(presets.LAB_TEMPERATURE_K, tail_rel_tol=5e-8)
    tight = pfa_sphere_plate_force(stack, R_UM, tight_spec, QuadratureSpec(5e-7))
    drift = abs(tight / base - 1.0)
    tolerance_ok = drift < 1.1e-6

    seps = np.array([60.0, 75.0, 95.0, 120.0, 150.0])
    plasma_variants = {
        band: presets.ito_material_variants("untreated", band, prescription="plasma")
        for band in ("lower", "upper")
    }
    worst = 0.0
    for band in ("lower", "upper"):
        for a in seps:
            f_d = pfa_sphere_plate_force(
                presets.build_stack(untreated_materials[band]["on"], a, "drude"), R_UM, LAB
            )
            f_p = pfa_sphere_plate_force(
                presets.build_stack(plasma_variants[band]["on"], a, "plasma"), R_UM, LAB
            )
            worst = max(worst, abs(f_p / f_d - 1.0))
    prescription_ok = worst < 0.02
    verdict(
        8,
        tolerance_ok and prescription_ok,
        f"halving tolerances moves F by {drift:.2e} < 1.1e-6; Drude vs plasma "
        f"prescriptions differ by at most {worst * 100:.2f}% < 2% over [60, 150] nm",
    )
