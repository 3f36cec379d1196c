"""Run orchestration: theory curves, extraction, and comparison reports.

Each run writes into its output directory a copy of the resolved
configuration, the delimited tables, a plain-text summary and (unless
disabled) rendered figures. Outputs are deterministic for a fixed
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import presets, reports
from .config import RunConfig, serialize_config
from .exceptions import DataError
from .kramers_kronig import OpticalDataTable, PermittivityCurve
from .lifshitz import (
    LayerStack,
    MatsubaraSpec,
    QuadratureSpec,
    matsubara_frequency,
    tabulated_force,
)
from .measurement import error_budget, extract_casimir, fit_calibration, load_curves
from .roughness import RoughnessProfile, rough_force

__all__ = [
    "ComparisonReport",
    "theory_materials",
    "run_theory",
    "run_permittivity",
    "run_calibrate",
    "run_extract",
    "run_compare",
]


def _bands(config: RunConfig):
    return ("lower", "upper") if config.band == "both" else (config.band,)


def _carrier_settings(config: RunConfig):
    return ("on", "off") if config.carriers == "both" else (config.carriers,)


def theory_materials(config: RunConfig):
    """Film permittivity variants keyed by (carriers, band), sharing the
    carrier-independent dispersion cache per band."""
    if config.ito_table_csv == "builtin":
        table = presets.ito_table(config.sample)
    else:
        table = OpticalDataTable.from_csv(config.ito_table_csv)
    out = {}
    for band in _bands(config):
        variants = presets.ito_material_variants(
            config.sample,
            band,
            table=table,
            rel_tol=config.kk_rel_tol,
            prescription=config.carrier_prescription,
        )
        for carriers in _carrier_settings(config):
            out[(carriers, band)] = variants[carriers]
    return out


def _profiles(config: RunConfig):
    if not config.roughness:
        return None
    ito = (
        presets.roughness_profile("ito")
        if config.roughness_ito_csv == "builtin"
        else RoughnessProfile.from_csv(config.roughness_ito_csv)
    )
    au = (
        presets.roughness_profile("au")
        if config.roughness_au_csv == "builtin"
        else RoughnessProfile.from_csv(config.roughness_au_csv)
    )
    return ito, au


def _stack(config: RunConfig, material, gap_nm=100.0) -> LayerStack:
    from .lifshitz import Layer

    return LayerStack(
        upper=Layer(presets.au_material(config.carrier_prescription)),
        gap_nm=gap_nm,
        lower=(Layer(material, config.film_thickness_nm), Layer(presets.QUARTZ)),
    )


def _write_config_copy(config: RunConfig, out_dir: Path) -> None:
    (out_dir / "resolved_config.cfg").write_text(serialize_config(config), encoding="utf-8")


def run_theory(config: RunConfig, out_dir) -> dict:
    """Force curves (both bands, requested carrier settings) plus the
    permittivity curves used, with roughness averaging when enabled."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_config_copy(config, out_dir)

    spec = MatsubaraSpec(config.temperature_k, tail_rel_tol=config.matsubara_tail_rel_tol)
    quad = QuadratureSpec(config.quad_rel_tol)
    seps = np.linspace(config.separation_min_nm, config.separation_max_nm, config.separation_points)
    materials = theory_materials(config)
    profiles = _profiles(config)
    if profiles is not None:
        p_ito, p_au = profiles
        reach = p_ito.max_height_nm + p_au.max_height_nm - p_ito.zero_level_nm - p_au.zero_level_nm
        a_lo = seps[0] - reach - 2.0
        if a_lo <= 0.0:
            raise DataError("roughness reach exceeds the smallest separation")
        a_hi = (seps[-1] + reach + 2.0) * 1.02
    else:
        a_lo, a_hi = seps[0] * 0.98, seps[-1] * 1.02

    tables = {}
    for carriers in _carrier_settings(config):
        columns = {}
        for band in _bands(config):
            stack = _stack(config, materials[(carriers, band)])
            smooth = tabulated_force(stack, config.radius_um, a_lo, a_hi, spec, quad)
            if profiles is not None:
                column = np.array([rough_force(smooth, p_ito, p_au, a) for a in seps])
            else:
                column = smooth(seps)
            columns[band] = column
        lower = columns.get("lower", columns.get("upper"))
        upper = columns.get("upper", columns.get("lower"))
        table = np.column_stack([seps, lower, upper])
        tables[carriers] = table
        reports.write_force_curve(out_dir / f"force_curve_carriers_{carriers}.csv", table)

    curves = _permittivity_curves(config, materials)
    for curve, name in curves:
        curve.to_csv(out_dir / f"permittivity_{name}.csv")

    summary = [f"forces on {seps.size} separations in [{seps[0]:g}, {seps[-1]:g}] nm"]
    summary.append(f"roughness averaging: {'on' if profiles is not None else 'off'}")
    if len(tables) == 2:
        red = (np.abs(tables["on"][:, 1:]) - np.abs(tables["off"][:, 1:])) / np.abs(
            tables["on"][:, 1:]
        )
        summary.append(
            f"carrier-induced force reduction: {red.min() * 100:.1f}% to {red.max() * 100:.1f}%"
        )
        ratio = _ratio_summary(config, materials)
        if ratio is not None:
            summary.append(ratio)
    (out_dir / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")

    if config.figures:
        reports.plot_force_curves(
            out_dir / "force_curve.png",
            {f"carriers {c}": t for c, t in tables.items()},
        )
        reports.plot_permittivity(out_dir / "permittivity.png", [c for c, _ in curves])
    return {"force": tables, "out_dir": out_dir}


def _permittivity_curves(config: RunConfig, materials) -> list:
    grid = np.geomspace(config.xi_min_ev, config.xi_max_ev, config.xi_points)
    out = []
    for (carriers, band), material in materials.items():
        eps = material.eps_imag_axis(grid)
        curve = PermittivityCurve(grid, eps, label=f"carriers-{carriers} {band} band")
        out.append((curve, f"{carriers}_{band}"))
    return out


def _ratio_summary(config: RunConfig, materials):
    xi1 = matsubara_frequency(1, config.temperature_k)
    pairs = []
    for band in _bands(config):
        on = materials.get(("on", band))
        off = materials.get(("off", band))
        if on is None or off is None:
            return None
        pairs.append(on.eps_imag_axis(xi1) / off.eps_imag_axis(xi1))
    lo, hi = min(pairs), max(pairs)
    return (
        f"permittivity ratio at the first Matsubara frequency ({xi1:.4f} eV): "
        f"{lo:.1f} to {hi:.1f}"
    )


def run_permittivity(config: RunConfig, out_dir) -> dict:
    """Permittivity curves and the first-Matsubara carrier ratio."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_config_copy(config, out_dir)
    materials = theory_materials(config)
    curves = _permittivity_curves(config, materials)
    for curve, name in curves:
        curve.to_csv(out_dir / f"permittivity_{name}.csv")
    lines = []
    ratio = _ratio_summary(config, materials)
    if ratio:
        lines.append(ratio)
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if config.figures:
        reports.plot_permittivity(out_dir / "permittivity.png", [c for c, _ in curves])
    return {"curves": curves, "out_dir": out_dir}


def _calibrate(config: RunConfig, data_dir):
    from .electrostatics import fit_polynomial_x

    curves = [c.resampled(1.0) for c in load_curves(data_dir)]
    x = fit_polynomial_x(config.radius_um, (40.0, 2600.0))
    calib = fit_calibration(curves, x, drift_correction=config.drift_correction)
    return curves, x, calib


def run_calibrate(config: RunConfig, data_dir, out_dir) -> dict:
    """Electrostatic calibration report from raw force-distance curves."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_config_copy(config, out_dir)
    _, _, calib = _calibrate(config, data_dir)
    reports.write_calibration_report(
        out_dir / "calibration.csv", out_dir / "calibration.txt", calib
    )
    return {"calibration": calib, "out_dir": out_dir}


def run_extract(config: RunConfig, data_dir, out_dir) -> dict:
    """Calibrate, extract the Casimir force and attach the error budget."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_config_copy(config, out_dir)
    curves, x, calib = _calibrate(config, data_dir)
    reports.write_calibration_report(
        out_dir / "calibration.csv", out_dir / "calibration.txt", calib
    )
    result = extract_casimir(curves, calib, x)
    budget = error_budget(result, calib, x, noise_floor_pn=config.noise_floor_pn)
    table = np.column_stack(
        [result.a_nm, result.mean_pn, budget.random_pn, budget.systematic_pn, budget.total_pn]
    )
    reports.write_experiment_curve(out_dir / "casimir_experiment.csv", table)
    (out_dir / "summary.txt").write_text(
        f"extracted {result.n_samples} repetitions on [{result.a_nm[0]:g}, "
        f"{result.a_nm[-1]:g}] nm\nseparation error: {budget.separation_err_nm:.2f} nm\n",
        encoding="utf-8",
    )
    if config.figures:
        reports.plot_experiment(out_dir / "experiment.png", table)
    return {"calibration": calib, "experiment": table, "out_dir": out_dir}


@dataclass(frozen=True)
class ComparisonReport:
    """Per-separation agreement of an experiment curve with a theory band."""

    a_nm: np.ndarray
    f_exp_pn: np.ndarray
    f_err_pn: np.ndarray
    theory_lower_pn: np.ndarray
    theory_upper_pn: np.ndarray
    agree: np.ndarray
    fraction_agreeing: float
    reduction_lower: np.ndarray | None = None
    reduction_upper: np.ndarray | None = None

    @property
    def reduction_range(self):
        if self.reduction_lower is None:
            return None
        lo = min(self.reduction_lower.min(), self.reduction_upper.min())
        hi = max(self.reduction_lower.max(), self.reduction_upper.max())
        return lo, hi


def compare_tables(theory, experiment, theory_off=None) -> ComparisonReport:
    """Match grids and flag points whose error bar misses the theory band.

    theory_off, when given, is a second force table computed without free
    carriers; the report then carries the per-band force-reduction profile.
    """
    theory = np.asarray(theory, dtype=float)
    experiment = np.asarray(experiment, dtype=float)
    common, ti, ei = np.intersect1d(
        np.round(theory[:, 0], 6), np.round(experiment[:, 0], 6), return_indices=True
    )
    if common.size < 2:
        raise DataError("theory and experiment grids are disjoint")
    th = theory[ti]
    ex = experiment[ei]
    band_lo = np.minimum(th[:, 1], th[:, 2])
    band_hi = np.maximum(th[:, 1], th[:, 2])
    f_exp, f_err = ex[:, 1], ex[:, 4]
    agree = (f_exp + f_err >= band_lo) & (f_exp - f_err <= band_hi)

    reduction_lower = reduction_upper = None
    if theory_off is not None:
        theory_off = np.asarray(theory_off, dtype=float)
        _, ti_on, ti_off = np.intersect1d(
            np.round(th[:, 0], 6), np.round(theory_off[:, 0], 6), return_indices=True
        )
        if ti_on.size != th.shape[0]:
            raise DataError("carriers-off table does not cover the comparison grid")
        off = theory_off[ti_off]
        reduction_lower = (np.abs(th[ti_on, 1]) - np.abs(off[:, 1])) / np.abs(th[ti_on, 1])
        reduction_upper = (np.abs(th[ti_on, 2]) - np.abs(off[:, 2])) / np.abs(th[ti_on, 2])

    return ComparisonReport(
        a_nm=th[:, 0],
        f_exp_pn=f_exp,
        f_err_pn=f_err,
        theory_lower_pn=th[:, 1],
        theory_upper_pn=th[:, 2],
        agree=agree,
        fraction_agreeing=float(agree.mean()),
        reduction_lower=reduction_lower,
        reduction_upper=reduction_upper,
    )


def run_compare(theory_csv, experiment_csv, out_dir, theory_off_csv=None, figures=True) -> ComparisonReport:
    """Compare a theory band CSV against an experiment CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    theory = reports.read_force_curve(theory_csv)
    experiment = reports.read_experiment_curve(experiment_csv)
    theory_off = reports.read_force_curve(theory_off_csv) if theory_off_csv else None
    report = compare_tables(theory, experiment, theory_off)
    reports.write_comparison(out_dir / "comparison.csv", report)
    lines = [
        f"points compared: {report.a_nm.size}",
        f"fraction agreeing with the theory band: {report.fraction_agreeing * 100:.1f}%",
    ]
    if report.reduction_range is not None:
        lo, hi = report.reduction_range
        lines.append(f"carrier-induced reduction profile: {lo * 100:.1f}% to {hi * 100:.1f}%")
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if figures:
        reports.plot_comparison(out_dir / "comparison.png", report)
    return report
